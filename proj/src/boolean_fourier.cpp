#include "conas/boolean_fourier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "conas/evaluator.hpp"

namespace conas {

Encoding::Encoding(std::vector<std::int8_t> bits) : bits_(std::move(bits)) {
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] != 1 && bits_[i] != -1) {
      throw std::invalid_argument("encoding bit " + std::to_string(i) + " is " +
                                  std::to_string(bits_[i]) + ", expected -1 or +1");
    }
  }
}

Encoding Encoding::filled(std::size_t n, std::int8_t value) {
  return Encoding(std::vector<std::int8_t>(n, value));
}

Encoding Encoding::from_binary(std::string_view text) {
  std::vector<std::int8_t> bits;
  bits.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '0') {
      bits.push_back(-1);
    } else if (text[i] == '1') {
      bits.push_back(1);
    } else {
      throw std::invalid_argument("binary encoding has invalid character at position " +
                                  std::to_string(i));
    }
  }
  return Encoding(std::move(bits));
}

std::size_t Encoding::count_active() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::int8_t{1}));
}

Encoding Encoding::with(std::size_t i, std::int8_t value) const {
  auto bits = bits_;
  bits.at(i) = value;
  return Encoding(std::move(bits));
}

std::string Encoding::to_binary() const {
  std::string out(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] == 1) out[i] = '1';
  }
  return out;
}

ParityIndex::ParityIndex(std::vector<Coord> indices) : indices_(std::move(indices)) {
  for (std::size_t i = 1; i < indices_.size(); ++i) {
    if (indices_[i] <= indices_[i - 1]) {
      throw std::invalid_argument("parity indices must be strictly increasing");
    }
  }
}

std::string ParityIndex::to_string() const {
  std::string out = "{";
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(indices_[i]);
  }
  return out + "}";
}

std::strong_ordering operator<=>(const ParityIndex& a, const ParityIndex& b) {
  if (auto c = a.indices_.size() <=> b.indices_.size(); c != 0) return c;
  return std::lexicographical_compare_three_way(a.indices_.begin(), a.indices_.end(),
                                                b.indices_.begin(), b.indices_.end());
}

FourierExpansion::FourierExpansion(std::size_t n, Terms terms) : n_(n) {
  for (auto& [s, c] : terms) {
    if (!s.fits(n)) {
      throw std::invalid_argument("parity " + s.to_string() + " exceeds dimension " +
                                  std::to_string(n));
    }
    if (!std::isfinite(c)) throw std::invalid_argument("non-finite Fourier coefficient");
    if (c != 0.0) terms_.emplace(s, c);
  }
}

double FourierExpansion::coefficient(const ParityIndex& s) const {
  auto it = terms_.find(s);
  return it == terms_.end() ? 0.0 : it->second;
}

std::size_t FourierExpansion::max_degree() const noexcept {
  std::size_t d = 0;
  for (const auto& [s, c] : terms_) d = std::max(d, s.degree());
  return d;
}

std::vector<Coord> FourierExpansion::variables() const {
  std::vector<Coord> vars;
  for (const auto& [s, c] : terms_) vars.insert(vars.end(), s.indices().begin(), s.indices().end());
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

Restriction::Restriction(std::size_t n, Fixed fixed) : n_(n), fixed_(std::move(fixed)) {
  for (const auto& [c, v] : fixed_) {
    if (c >= n_) {
      throw std::invalid_argument("restriction fixes coordinate " + std::to_string(c) +
                                  " outside dimension " + std::to_string(n_));
    }
    if (v != 1 && v != -1) throw std::invalid_argument("restriction value must be -1 or +1");
  }
}

std::vector<Coord> Restriction::free_coordinates() const {
  std::vector<Coord> out;
  out.reserve(free_count());
  for (Coord c = 0; c < n_; ++c) {
    if (!fixed_.contains(c)) out.push_back(c);
  }
  return out;
}

Restriction Restriction::combine(const Restriction& other) const {
  if (other.n_ != n_) throw std::invalid_argument("restriction dimensions differ");
  Fixed merged = fixed_;
  for (const auto& [c, v] : other.fixed_) {
    if (!merged.emplace(c, v).second) {
      throw std::invalid_argument("coordinate " + std::to_string(c) + " is fixed twice");
    }
  }
  return Restriction(n_, std::move(merged));
}

Restriction Restriction::compose(const Restriction& inner) const {
  if (inner.n_ != free_count()) {
    throw std::invalid_argument("inner restriction dimension " + std::to_string(inner.n_) +
                                " does not match free count " + std::to_string(free_count()));
  }
  const auto free = free_coordinates();
  Fixed lifted;
  for (const auto& [c, v] : inner.fixed_) lifted.emplace(free[c], v);
  return combine(Restriction(n_, std::move(lifted)));
}

double parity_eval(const ParityIndex& s, const Encoding& alpha) {
  int sign = 1;
  for (Coord i : s.indices()) {
    if (i >= alpha.size()) {
      throw std::invalid_argument("parity index " + std::to_string(i) +
                                  " out of range for encoding of length " +
                                  std::to_string(alpha.size()));
    }
    sign *= alpha[i];
  }
  return static_cast<double>(sign);
}

double expansion_eval(const FourierExpansion& g, const Encoding& alpha) {
  if (alpha.size() != g.dimension()) {
    throw std::invalid_argument("expansion dimension " + std::to_string(g.dimension()) +
                                " does not match encoding length " + std::to_string(alpha.size()));
  }
  double total = 0.0;
  for (const auto& [s, c] : g.terms()) total += c * parity_eval(s, alpha);
  return total;
}

std::size_t parity_count(std::size_t n, std::size_t max_degree) {
  std::size_t total = 0;
  std::size_t binom = 1;
  for (std::size_t l = 0; l <= max_degree && l <= n; ++l) {
    total += binom;
    binom = binom * (n - l) / (l + 1);
  }
  return total;
}

std::vector<ParityIndex> enumerate_parities(std::size_t n, std::size_t max_degree) {
  if (max_degree > n) {
    throw std::invalid_argument("degree " + std::to_string(max_degree) + " exceeds dimension " +
                                std::to_string(n));
  }
  std::vector<ParityIndex> out;
  out.reserve(parity_count(n, max_degree));
  out.emplace_back();
  std::vector<Coord> combo;
  for (std::size_t k = 1; k <= max_degree; ++k) {
    combo.resize(k);
    for (std::size_t i = 0; i < k; ++i) combo[i] = static_cast<Coord>(i);
    while (true) {
      out.emplace_back(combo);
      // advance to the next k-combination in lexicographic order
      std::size_t i = k;
      while (i > 0 && combo[i - 1] == n - k + i - 1) --i;
      if (i == 0) break;
      ++combo[i - 1];
      for (std::size_t j = i; j < k; ++j) combo[j] = combo[j - 1] + 1;
    }
  }
  return out;
}

FourierExpansion exact_transform(const Evaluator& f, const TransformOptions& opts) {
  const std::size_t n = f.dimension();
  if (n > opts.max_dimension) {
    throw std::invalid_argument("exact transform needs 2^" + std::to_string(n) +
                                " evaluations; dimension cap is " +
                                std::to_string(opts.max_dimension) +
                                " (raise max_dimension to override)");
  }
  const std::size_t size = std::size_t{1} << n;

  // Point x has alpha_i = -1 exactly when bit i of x is set, so
  // chi_S(x) = (-1)^popcount(x & S).
  std::vector<Encoding> points;
  points.reserve(size);
  for (std::size_t x = 0; x < size; ++x) {
    std::vector<std::int8_t> bits(n);
    for (std::size_t i = 0; i < n; ++i) bits[i] = (x >> i) & 1U ? -1 : 1;
    points.emplace_back(std::move(bits));
  }
  std::vector<double> values = evaluate_batch(f, points, opts.threads);

  for (std::size_t half = 1; half < size; half <<= 1) {
    for (std::size_t block = 0; block < size; block += half << 1) {
      for (std::size_t i = block; i < block + half; ++i) {
        const double a = values[i];
        const double b = values[i + half];
        values[i] = a + b;
        values[i + half] = a - b;
      }
    }
  }

  FourierExpansion::Terms terms;
  const double scale = 1.0 / static_cast<double>(size);
  for (std::size_t mask = 0; mask < size; ++mask) {
    const double c = values[mask] * scale;
    if (std::abs(c) <= opts.drop_tolerance) continue;
    std::vector<Coord> idx;
    idx.reserve(static_cast<std::size_t>(std::popcount(mask)));
    for (std::size_t i = 0; i < n; ++i) {
      if ((mask >> i) & 1U) idx.push_back(static_cast<Coord>(i));
    }
    terms.emplace(ParityIndex(std::move(idx)), c);
  }
  return FourierExpansion(n, std::move(terms));
}

FourierExpansion restrict_expansion(const FourierExpansion& g, const Restriction& rho) {
  if (g.dimension() != rho.dimension()) {
    throw std::invalid_argument("restriction dimension " + std::to_string(rho.dimension()) +
                                " does not match expansion dimension " +
                                std::to_string(g.dimension()));
  }
  // original coordinate -> reduced coordinate
  std::vector<std::int64_t> reduced(g.dimension(), -1);
  const auto free = rho.free_coordinates();
  for (std::size_t k = 0; k < free.size(); ++k) reduced[free[k]] = static_cast<std::int64_t>(k);

  std::map<ParityIndex, double> acc;
  for (const auto& [s, c] : g.terms()) {
    double coeff = c;
    std::vector<Coord> rest;
    for (Coord i : s.indices()) {
      if (reduced[i] < 0) {
        coeff *= rho.fixed().at(i);
      } else {
        rest.push_back(static_cast<Coord>(reduced[i]));
      }
    }
    acc[ParityIndex(std::move(rest))] += coeff;
  }
  return FourierExpansion(free.size(), std::move(acc));
}

Encoding merge_point(const Encoding& partial, const Restriction& rho) {
  if (partial.size() != rho.free_count()) {
    throw std::invalid_argument("partial encoding has length " + std::to_string(partial.size()) +
                                " but restriction leaves " + std::to_string(rho.free_count()) +
                                " coordinates free");
  }
  std::vector<std::int8_t> bits(rho.dimension());
  std::size_t k = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    auto it = rho.fixed().find(static_cast<Coord>(i));
    bits[i] = it == rho.fixed().end() ? partial[k++] : it->second;
  }
  return Encoding(std::move(bits));
}

void to_json(nlohmann::json& j, const ParityIndex& s) {
  j = std::vector<Coord>(s.indices().begin(), s.indices().end());
}

void to_json(nlohmann::json& j, const FourierExpansion& g) {
  auto terms = nlohmann::json::array();
  for (const auto& [s, c] : g.terms()) terms.push_back({{"s", s}, {"c", c}});
  j = {{"n", g.dimension()}, {"terms", std::move(terms)}};
}

void from_json(const nlohmann::json& j, FourierExpansion& g) {
  FourierExpansion::Terms terms;
  for (const auto& t : j.at("terms")) {
    ParityIndex s(t.at("s").get<std::vector<Coord>>());
    if (!terms.emplace(std::move(s), t.at("c").get<double>()).second) {
      throw std::invalid_argument("duplicate parity in serialized expansion");
    }
  }
  g = FourierExpansion(j.at("n").get<std::size_t>(), std::move(terms));
}

void to_json(nlohmann::json& j, const Restriction& r) {
  auto fixed = nlohmann::json::array();
  for (const auto& [c, v] : r.fixed()) fixed.push_back({c, static_cast<int>(v)});
  j = {{"n", r.dimension()}, {"fixed", std::move(fixed)}};
}

}  // namespace conas
