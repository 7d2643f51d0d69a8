#pragma once

// Real-valued functions on the Boolean hypercube {-1,+1}^n, written in the
// parity (Walsh) basis. Coordinates are zero-based everywhere.

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace conas {

class Evaluator;

using Coord = std::uint32_t;

/// A point of {-1,+1}^n. Every element is exactly -1 or +1.
class Encoding {
 public:
  Encoding() = default;
  explicit Encoding(std::vector<std::int8_t> bits);

  static Encoding filled(std::size_t n, std::int8_t value);
  /// Parses a string over {0,1}; '0' maps to -1 and '1' to +1.
  static Encoding from_binary(std::string_view text);

  std::size_t size() const noexcept { return bits_.size(); }
  std::int8_t operator[](std::size_t i) const { return bits_[i]; }
  std::span<const std::int8_t> bits() const noexcept { return bits_; }
  std::size_t count_active() const noexcept;

  /// Returns a copy with coordinate i set to value.
  Encoding with(std::size_t i, std::int8_t value) const;
  std::string to_binary() const;

  friend bool operator==(const Encoding&, const Encoding&) = default;
  friend auto operator<=>(const Encoding&, const Encoding&) = default;

 private:
  std::vector<std::int8_t> bits_;
};

/// The subset S identifying the parity chi_S. Indices are strictly increasing.
/// Ordering is canonical: by size, then lexicographic.
class ParityIndex {
 public:
  ParityIndex() = default;
  explicit ParityIndex(std::vector<Coord> indices);

  std::span<const Coord> indices() const noexcept { return indices_; }
  std::size_t degree() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  bool fits(std::size_t n) const noexcept { return indices_.empty() || indices_.back() < n; }
  std::string to_string() const;

  friend bool operator==(const ParityIndex&, const ParityIndex&) = default;
  friend std::strong_ordering operator<=>(const ParityIndex& a, const ParityIndex& b);

 private:
  std::vector<Coord> indices_;
};

/// Sparse Fourier expansion over n coordinates. Terms with coefficient
/// exactly zero are never stored.
class FourierExpansion {
 public:
  using Terms = std::map<ParityIndex, double>;

  FourierExpansion() = default;
  FourierExpansion(std::size_t n, Terms terms);

  std::size_t dimension() const noexcept { return n_; }
  const Terms& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  double coefficient(const ParityIndex& s) const;
  std::size_t max_degree() const noexcept;
  /// Ascending list of coordinates that appear in some term.
  std::vector<Coord> variables() const;

  friend bool operator==(const FourierExpansion&, const FourierExpansion&) = default;

 private:
  std::size_t n_ = 0;
  Terms terms_;
};

/// Partial assignment: coordinates in `fixed` are pinned, the rest are free.
class Restriction {
 public:
  using Fixed = std::map<Coord, std::int8_t>;

  Restriction() = default;
  explicit Restriction(std::size_t n, Fixed fixed = {});

  std::size_t dimension() const noexcept { return n_; }
  const Fixed& fixed() const noexcept { return fixed_; }
  std::size_t free_count() const noexcept { return n_ - fixed_.size(); }
  bool is_fixed(Coord c) const { return fixed_.contains(c); }
  /// Free coordinates in ascending order; position k is reduced coordinate k.
  std::vector<Coord> free_coordinates() const;

  /// Union with another restriction on the same dimension. Overlap is an error.
  Restriction combine(const Restriction& other) const;
  /// `inner` is a restriction over this restriction's free coordinates;
  /// returns the equivalent single restriction over the original coordinates.
  Restriction compose(const Restriction& inner) const;

  friend bool operator==(const Restriction&, const Restriction&) = default;

 private:
  std::size_t n_ = 0;
  Fixed fixed_;
};

double parity_eval(const ParityIndex& s, const Encoding& alpha);
double expansion_eval(const FourierExpansion& g, const Encoding& alpha);

/// All parities of degree <= max_degree, sorted by size then lexicographically.
/// This order fixes sampling-matrix columns.
std::vector<ParityIndex> enumerate_parities(std::size_t n, std::size_t max_degree);
/// sum_{l=0}^{d} C(n,l)
std::size_t parity_count(std::size_t n, std::size_t max_degree);

struct TransformOptions {
  std::size_t max_dimension = 16;
  double drop_tolerance = 1e-12;
  unsigned threads = 1;
};

/// Full Walsh-Hadamard transform of f over all 2^n points.
FourierExpansion exact_transform(const Evaluator& f, const TransformOptions& opts = {});

FourierExpansion restrict_expansion(const FourierExpansion& g, const Restriction& rho);

/// Fills free coordinates from `partial` (ascending original order) and
/// fixed coordinates from `rho`.
Encoding merge_point(const Encoding& partial, const Restriction& rho);

void to_json(nlohmann::json& j, const ParityIndex& s);
void to_json(nlohmann::json& j, const FourierExpansion& g);
void from_json(const nlohmann::json& j, FourierExpansion& g);
void to_json(nlohmann::json& j, const Restriction& r);

}  // namespace conas
