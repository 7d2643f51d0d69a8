#include "conas/oracles.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "conas/seeding.hpp"
#include "conas/sparse_recovery.hpp"

namespace conas {

PlantedOracle::PlantedOracle(FourierExpansion hidden) : hidden_(std::move(hidden)) {}

std::shared_ptr<const PlantedOracle> make_planted(const PlantOptions& opts, std::uint64_t seed) {
  if (opts.degree > opts.n) throw std::invalid_argument("plant degree exceeds dimension");
  if (!(opts.magnitude_lo > 0.0 && opts.magnitude_lo <= opts.magnitude_hi)) {
    throw std::invalid_argument("plant magnitudes need 0 < lo <= hi");
  }
  const std::size_t available = parity_count(opts.n, opts.degree) - 1;
  if (opts.sparsity > available) {
    throw std::invalid_argument("cannot plant " + std::to_string(opts.sparsity) +
                                " terms; only " + std::to_string(available) +
                                " non-constant parities of degree <= " +
                                std::to_string(opts.degree) + " exist");
  }

  auto pool = enumerate_parities(opts.n, opts.degree);
  pool.erase(pool.begin());  // drop the constant parity
  Rng rng(seed);
  // partial Fisher-Yates: the first `sparsity` slots become the sample
  for (std::size_t i = 0; i < opts.sparsity; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  std::uniform_real_distribution<double> magnitude(opts.magnitude_lo, opts.magnitude_hi);
  std::bernoulli_distribution negative(0.5);
  FourierExpansion::Terms terms;
  for (std::size_t i = 0; i < opts.sparsity; ++i) {
    const double mag = magnitude(rng);
    terms.emplace(pool[i], negative(rng) ? -mag : mag);
  }
  return std::make_shared<PlantedOracle>(FourierExpansion(opts.n, std::move(terms)));
}

DecisionTreeOracle::DecisionTreeOracle(std::size_t n, std::size_t depth, std::vector<Node> nodes)
    : n_(n), depth_(depth), nodes_(std::move(nodes)) {
  if (depth_ > n_) throw std::invalid_argument("tree depth exceeds dimension");
  if (nodes_.size() != (std::size_t{2} << depth_) - 1) {
    throw std::invalid_argument("tree node count does not match a complete tree of this depth");
  }
  const std::size_t internal = (std::size_t{1} << depth_) - 1;
  for (std::size_t i = 0; i < internal; ++i) {
    if (nodes_[i].coordinate >= n_) throw std::invalid_argument("tree tests a coordinate out of range");
    for (std::size_t a = i; a > 0;) {
      a = (a - 1) / 2;
      if (nodes_[a].coordinate == nodes_[i].coordinate) {
        throw std::invalid_argument("tree path tests the same coordinate twice");
      }
    }
  }
}

double DecisionTreeOracle::evaluate(const Encoding& alpha) const {
  if (alpha.size() != n_) throw std::invalid_argument("tree oracle dimension mismatch");
  const std::size_t internal = (std::size_t{1} << depth_) - 1;
  std::size_t i = 0;
  while (i < internal) i = 2 * i + (alpha[nodes_[i].coordinate] == 1 ? 2 : 1);
  return nodes_[i].value;
}

std::shared_ptr<const DecisionTreeOracle> make_decision_tree(std::size_t n, std::size_t depth,
                                                             std::uint64_t seed) {
  if (depth > n) {
    throw std::invalid_argument("tree depth " + std::to_string(depth) + " exceeds dimension " +
                                std::to_string(n));
  }
  Rng rng(seed);
  const std::size_t internal = (std::size_t{1} << depth) - 1;
  std::vector<DecisionTreeOracle::Node> nodes((std::size_t{2} << depth) - 1);
  for (std::size_t i = 0; i < internal; ++i) {
    std::vector<Coord> used;
    for (std::size_t a = i; a > 0;) {
      a = (a - 1) / 2;
      used.push_back(nodes[a].coordinate);
    }
    std::vector<Coord> allowed;
    for (Coord c = 0; c < n; ++c) {
      if (std::find(used.begin(), used.end(), c) == used.end()) allowed.push_back(c);
    }
    std::uniform_int_distribution<std::size_t> pick(0, allowed.size() - 1);
    nodes[i].coordinate = allowed[pick(rng)];
  }
  std::normal_distribution<double> leaf(0.0, 1.0);
  for (std::size_t i = internal; i < nodes.size(); ++i) nodes[i].value = leaf(rng);
  return std::make_shared<DecisionTreeOracle>(n, depth, std::move(nodes));
}

NoisyOracle::NoisyOracle(EvaluatorPtr base, double sigma, std::uint64_t seed)
    : base_(std::move(base)), sigma_(sigma), seed_(seed) {
  if (!base_) throw std::invalid_argument("noise wrapper needs a base evaluator");
  if (!(sigma_ >= 0.0)) throw std::invalid_argument("noise sigma must be nonnegative");
}

double NoisyOracle::evaluate(const Encoding& alpha) const {
  const double clean = base_->evaluate(alpha);
  const std::uint64_t k = calls_++;
  if (sigma_ == 0.0) return clean;
  // Box-Muller on two 53-bit uniforms keyed by (seed, call index)
  const std::uint64_t key = derive_seed(seed_, streams::kNoise, k);
  const double u1 = (static_cast<double>(splitmix64(key) >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(splitmix64(key ^ 0xD1B54A32D192ED03ULL) >> 11) * 0x1.0p-53;
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return clean + sigma_ * z;
}

EvaluatorPtr wrap_noise(EvaluatorPtr f, double sigma, std::uint64_t seed) {
  return std::make_shared<NoisyOracle>(std::move(f), sigma, seed);
}

TabularOracle::TabularOracle(std::size_t n, std::map<Encoding, double> table,
                             std::optional<double> missing_penalty)
    : n_(n), table_(std::move(table)), missing_penalty_(missing_penalty) {
  for (const auto& [key, value] : table_) {
    if (key.size() != n_) throw std::invalid_argument("tabular keys differ in width");
  }
}

double TabularOracle::evaluate(const Encoding& alpha) const {
  if (alpha.size() != n_) throw std::invalid_argument("tabular oracle dimension mismatch");
  auto it = table_.find(alpha);
  if (it != table_.end()) return it->second;
  if (missing_penalty_) return *missing_penalty_;
  throw std::out_of_range("encoding " + alpha.to_binary() + " not present in table");
}

std::shared_ptr<const TabularOracle> load_tabular(const std::filesystem::path& path,
                                                  std::optional<double> missing_penalty) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open tabular file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  auto fail = [&](std::size_t line, const std::string& why) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + why);
  };

  std::vector<std::string_view> lines;
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    if (nl == std::string_view::npos) {
      lines.push_back(rest);
      break;
    }
    lines.push_back(rest.substr(0, nl));
    rest.remove_prefix(nl + 1);
  }
  if (lines.empty() || lines[0] != "encoding,value") fail(1, "expected header 'encoding,value'");

  std::map<Encoding, double> table;
  std::optional<std::size_t> width;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto line = lines[i];
    const auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
      fail(line_no, "expected exactly two fields");
    }
    const auto key = line.substr(0, comma);
    const auto val = line.substr(comma + 1);
    if (key.empty() || key.find_first_not_of("01") != std::string_view::npos) {
      fail(line_no, "encoding must be a nonempty string over {0,1}");
    }
    if (width && *width != key.size()) fail(line_no, "inconsistent encoding width");
    width = key.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), value);
    if (ec != std::errc() || ptr != val.data() + val.size() || val.empty() || !std::isfinite(value)) {
      fail(line_no, "value is not a finite number");
    }
    if (!table.emplace(Encoding::from_binary(key), value).second) fail(line_no, "duplicate encoding");
  }
  if (!width) fail(2, "table has no rows");
  return std::make_shared<TabularOracle>(*width, std::move(table), missing_penalty);
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("failed to format double");
  return std::string(buf, ptr);
}

void dump_tabular(const Evaluator& f, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write tabular file " + path.string());
  out << "encoding,value\n";
  for (const auto& point : hypercube_points(f.dimension())) {
    out << point.to_binary() << ',' << format_double(f.evaluate(point)) << '\n';
  }
}

}  // namespace conas
