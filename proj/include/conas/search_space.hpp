#pragma once

// DAG cell search space. Every (kind, intermediate node, predecessor,
// operation) edge owns one encoder bit; +1 activates the edge.
//
// Node numbering within a cell: inputs are 0..inputs-1, intermediates follow,
// and the output node is last. Bit layout is kind-major, then target node
// ascending, then predecessor ascending, then operation ascending.

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "conas/boolean_fourier.hpp"

namespace conas {

using BigInt = boost::multiprecision::cpp_int;

struct CellSpec {
  std::size_t nodes = 7;
  std::size_t inputs = 2;
  std::vector<std::string> operations;
  std::vector<std::string> kinds;
  /// RNN-style wiring: an intermediate node may draw from one predecessor.
  /// Only checked by wiring_violations, never enforced during sampling.
  bool single_predecessor = false;

  /// Normal/reduce CNN cell with the five standard operations.
  static CellSpec cnn(std::size_t nodes = 7);
  static std::vector<std::string> default_operations();

  std::size_t intermediates() const noexcept { return nodes - inputs - 1; }
  std::size_t first_intermediate() const noexcept { return inputs; }
  void validate() const;

  friend bool operator==(const CellSpec&, const CellSpec&) = default;
};

struct EdgeRef {
  std::size_t kind = 0;
  std::size_t target = 0;       // node id of the intermediate
  std::size_t predecessor = 0;  // node id, always < target
  std::size_t op = 0;

  friend bool operator==(const EdgeRef&, const EdgeRef&) = default;
  friend auto operator<=>(const EdgeRef&, const EdgeRef&) = default;
};

struct NodeRef {
  std::size_t kind = 0;
  std::size_t node = 0;

  friend bool operator==(const NodeRef&, const NodeRef&) = default;
};

struct Cell {
  CellSpec spec;
  std::vector<EdgeRef> active;  // in bit order
};

std::size_t edge_count(const CellSpec& spec);
EdgeRef index_to_edge(const CellSpec& spec, std::size_t index);
std::size_t edge_to_index(const CellSpec& spec, const EdgeRef& edge);

Cell decode_cell(const CellSpec& spec, const Encoding& alpha);
Encoding encode_cell(const Cell& cell);

/// Intermediate nodes with no active incoming edge, in (kind, node) order.
std::vector<NodeRef> validate_connectivity(const Cell& cell);
/// Intermediate nodes fed by more than one distinct predecessor; empty unless
/// the cell spec asks for single-predecessor wiring.
std::vector<NodeRef> wiring_violations(const Cell& cell);

/// Activates one uniformly chosen incoming edge for each disconnected node.
Encoding repair_connectivity(const Encoding& alpha, const CellSpec& spec, std::uint64_t seed);
/// As above, but coordinates fixed by `locked` are never changed. A node whose
/// incoming edges are all locked is left as is.
Encoding repair_connectivity(const Encoding& alpha, const CellSpec& spec, std::uint64_t seed,
                             const Restriction& locked);

BigInt count_configurations(std::size_t edges, std::size_t active);
/// ((K+1)^14)^2: 14 edges per DARTS cell, normal and reduce.
BigInt darts_configuration_count(std::size_t operations);
/// Scientific rendering with `digits` significant figures, e.g. "1.2e33".
std::string scientific(const BigInt& value, int digits = 2);

void to_json(nlohmann::json& j, const CellSpec& spec);
void from_json(const nlohmann::json& j, CellSpec& spec);
/// Cell export with a flat edge list for external renderers.
void to_json(nlohmann::json& j, const Cell& cell);

}  // namespace conas
