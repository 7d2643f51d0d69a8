#include "conas/search_space.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "conas/errors.hpp"
#include "conas/seeding.hpp"

namespace conas {

namespace {

// Bits owned by one intermediate of a single kind, and the offset of
// intermediate j within its kind block.
std::size_t node_block(const CellSpec& spec, std::size_t j) {
  return (spec.inputs + j) * spec.operations.size();
}

std::size_t node_offset(const CellSpec& spec, std::size_t j) {
  return spec.operations.size() * (spec.inputs * j + j * (j - 1) / 2);
}

std::size_t kind_block(const CellSpec& spec) {
  return node_offset(spec, spec.intermediates());
}

void check_length(const CellSpec& spec, const Encoding& alpha) {
  if (alpha.size() != edge_count(spec)) {
    throw std::invalid_argument("encoding length " + std::to_string(alpha.size()) +
                                " does not match edge count " + std::to_string(edge_count(spec)));
  }
}

Encoding repair_impl(const Encoding& alpha, const CellSpec& spec, std::uint64_t seed,
                     const Restriction* locked) {
  check_length(spec, alpha);
  std::vector<std::int8_t> bits(alpha.bits().begin(), alpha.bits().end());
  Rng rng(seed);
  const std::size_t block = kind_block(spec);
  for (std::size_t kind = 0; kind < spec.kinds.size(); ++kind) {
    for (std::size_t j = 0; j < spec.intermediates(); ++j) {
      const std::size_t begin = kind * block + node_offset(spec, j);
      const std::size_t end = begin + node_block(spec, j);
      if (std::find(bits.begin() + begin, bits.begin() + end, 1) != bits.begin() + end) continue;
      std::vector<std::size_t> candidates;
      for (std::size_t i = begin; i < end; ++i) {
        if (!locked || !locked->is_fixed(static_cast<Coord>(i))) candidates.push_back(i);
      }
      if (candidates.empty()) continue;
      std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
      bits[candidates[pick(rng)]] = 1;
    }
  }
  return Encoding(std::move(bits));
}

}  // namespace

std::vector<std::string> CellSpec::default_operations() {
  return {"sep_conv_3x3", "sep_conv_5x5", "skip_connect", "max_pool_3x3", "avg_pool_3x3"};
}

CellSpec CellSpec::cnn(std::size_t nodes) {
  CellSpec spec;
  spec.nodes = nodes;
  spec.inputs = 2;
  spec.operations = default_operations();
  spec.kinds = {"normal", "reduce"};
  spec.validate();
  return spec;
}

void CellSpec::validate() const {
  if (inputs < 1 || inputs > 2) throw std::invalid_argument("cell inputs must be 1 or 2");
  if (nodes < inputs + 2) {
    throw std::invalid_argument("cell needs at least " + std::to_string(inputs + 2) +
                                " nodes (inputs, one intermediate, output); got " +
                                std::to_string(nodes));
  }
  if (operations.empty()) throw std::invalid_argument("cell needs at least one operation");
  if (kinds.empty()) throw std::invalid_argument("cell needs at least one kind");
}

std::size_t edge_count(const CellSpec& spec) {
  spec.validate();
  return spec.kinds.size() * kind_block(spec);
}

EdgeRef index_to_edge(const CellSpec& spec, std::size_t index) {
  const std::size_t total = edge_count(spec);
  if (index >= total) {
    throw std::out_of_range("edge index " + std::to_string(index) + " outside [0, " +
                            std::to_string(total) + ")");
  }
  const std::size_t k_ops = spec.operations.size();
  EdgeRef e;
  e.kind = index / kind_block(spec);
  std::size_t rest = index % kind_block(spec);
  std::size_t j = 0;
  while (rest >= node_block(spec, j)) {
    rest -= node_block(spec, j);
    ++j;
  }
  e.target = spec.first_intermediate() + j;
  e.predecessor = rest / k_ops;
  e.op = rest % k_ops;
  return e;
}

std::size_t edge_to_index(const CellSpec& spec, const EdgeRef& e) {
  spec.validate();
  const std::size_t first = spec.first_intermediate();
  if (e.kind >= spec.kinds.size() || e.target < first ||
      e.target >= first + spec.intermediates() || e.predecessor >= e.target ||
      e.op >= spec.operations.size()) {
    throw std::out_of_range("edge does not belong to this cell spec");
  }
  const std::size_t j = e.target - first;
  return e.kind * kind_block(spec) + node_offset(spec, j) +
         e.predecessor * spec.operations.size() + e.op;
}

Cell decode_cell(const CellSpec& spec, const Encoding& alpha) {
  check_length(spec, alpha);
  Cell cell{spec, {}};
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] == 1) cell.active.push_back(index_to_edge(spec, i));
  }
  return cell;
}

Encoding encode_cell(const Cell& cell) {
  std::vector<std::int8_t> bits(edge_count(cell.spec), -1);
  for (const auto& e : cell.active) {
    auto& bit = bits[edge_to_index(cell.spec, e)];
    if (bit == 1) throw std::invalid_argument("cell lists the same edge twice");
    bit = 1;
  }
  return Encoding(std::move(bits));
}

std::vector<NodeRef> validate_connectivity(const Cell& cell) {
  std::set<std::pair<std::size_t, std::size_t>> fed;
  for (const auto& e : cell.active) fed.emplace(e.kind, e.target);
  std::vector<NodeRef> missing;
  for (std::size_t kind = 0; kind < cell.spec.kinds.size(); ++kind) {
    for (std::size_t j = 0; j < cell.spec.intermediates(); ++j) {
      const std::size_t node = cell.spec.first_intermediate() + j;
      if (!fed.contains({kind, node})) missing.push_back({kind, node});
    }
  }
  return missing;
}

std::vector<NodeRef> wiring_violations(const Cell& cell) {
  std::vector<NodeRef> out;
  if (!cell.spec.single_predecessor) return out;
  std::map<std::pair<std::size_t, std::size_t>, std::set<std::size_t>> preds;
  for (const auto& e : cell.active) preds[{e.kind, e.target}].insert(e.predecessor);
  for (const auto& [node, sources] : preds) {
    if (sources.size() > 1) out.push_back({node.first, node.second});
  }
  return out;
}

Encoding repair_connectivity(const Encoding& alpha, const CellSpec& spec, std::uint64_t seed) {
  return repair_impl(alpha, spec, seed, nullptr);
}

Encoding repair_connectivity(const Encoding& alpha, const CellSpec& spec, std::uint64_t seed,
                             const Restriction& locked) {
  if (locked.dimension() != alpha.size()) {
    throw std::invalid_argument("locked restriction dimension does not match encoding");
  }
  return repair_impl(alpha, spec, seed, &locked);
}

BigInt count_configurations(std::size_t edges, std::size_t active) {
  if (active > edges) throw std::invalid_argument("cannot choose more edges than exist");
  const std::size_t k = std::min(active, edges - active);
  BigInt result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    result *= edges - k + i;
    result /= i;
  }
  return result;
}

BigInt darts_configuration_count(std::size_t operations) {
  if (operations < 1) throw std::invalid_argument("DARTS count needs at least one operation");
  return boost::multiprecision::pow(BigInt(operations + 1), 28);
}

std::string scientific(const BigInt& value, int digits) {
  if (digits < 1) throw std::invalid_argument("need at least one significant digit");
  if (value < 0) return "-" + scientific(-value, digits);
  std::string text = value.str();
  if (text == "0") return "0";
  auto exponent = static_cast<long>(text.size()) - 1;
  const auto keep = static_cast<std::size_t>(digits);
  std::string mantissa = text.substr(0, std::min(keep, text.size()));
  mantissa.resize(keep, '0');
  if (text.size() > keep && text[keep] >= '5') {
    // half-up rounding with carry
    std::size_t i = keep;
    while (i > 0) {
      if (mantissa[i - 1] == '9') {
        mantissa[i - 1] = '0';
        --i;
      } else {
        ++mantissa[i - 1];
        break;
      }
    }
    if (i == 0) {
      mantissa.insert(mantissa.begin(), '1');
      mantissa.pop_back();
      ++exponent;
    }
  }
  std::string out(1, mantissa[0]);
  if (keep > 1) out += "." + mantissa.substr(1);
  return out + "e" + std::to_string(exponent);
}

void to_json(nlohmann::json& j, const CellSpec& spec) {
  j = {{"nodes", spec.nodes},
       {"inputs", spec.inputs},
       {"operations", spec.operations},
       {"kinds", spec.kinds},
       {"single_predecessor", spec.single_predecessor}};
}

void from_json(const nlohmann::json& j, CellSpec& spec) {
  if (!j.is_object()) throw ConfigError("cell_spec must be an object");
  static const std::set<std::string> known{"nodes", "inputs", "operations", "kinds",
                                           "single_predecessor"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown cell_spec key '" + key + "'");
  }
  CellSpec out = CellSpec::cnn();
  out.nodes = j.value("nodes", out.nodes);
  out.inputs = j.value("inputs", out.inputs);
  out.operations = j.value("operations", out.operations);
  out.kinds = j.value("kinds", out.kinds);
  out.single_predecessor = j.value("single_predecessor", false);
  try {
    out.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid cell_spec: ") + e.what());
  }
  spec = std::move(out);
}

void to_json(nlohmann::json& j, const Cell& cell) {
  auto edges = nlohmann::json::array();
  for (const auto& e : cell.active) {
    edges.push_back({{"kind", cell.spec.kinds[e.kind]},
                     {"target", e.target},
                     {"predecessor", e.predecessor},
                     {"op", cell.spec.operations[e.op]}});
  }
  // output node concatenates every intermediate; structural, not encoded
  auto outputs = nlohmann::json::array();
  for (const auto& kind : cell.spec.kinds) {
    std::vector<std::size_t> concat;
    for (std::size_t j2 = 0; j2 < cell.spec.intermediates(); ++j2) {
      concat.push_back(cell.spec.first_intermediate() + j2);
    }
    outputs.push_back({{"kind", kind}, {"node", cell.spec.nodes - 1}, {"concat", concat}});
  }
  auto missing = nlohmann::json::array();
  for (const auto& m : validate_connectivity(cell)) {
    missing.push_back({{"kind", cell.spec.kinds[m.kind]}, {"node", m.node}});
  }
  j = {{"spec", cell.spec},
       {"encoding", encode_cell(cell).to_binary()},
       {"edges", std::move(edges)},
       {"outputs", std::move(outputs)},
       {"disconnected", std::move(missing)}};
}

}  // namespace conas
