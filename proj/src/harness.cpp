#include "conas/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "conas/errors.hpp"
#include "conas/seeding.hpp"

namespace conas {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

template <typename T>
void read(const json& j, const char* key, std::optional<T>& target) {
  if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<T>();
}

std::pair<double, double> read_range(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("magnitude must be [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

OracleConfig parse_oracle(const json& j, const std::filesystem::path& base_dir) {
  check_keys(j,
             {"kind", "n", "sparsity", "degree", "magnitude", "depth", "value", "indices",
              "coefficient", "path", "missing_penalty", "expansion", "seed", "noise_sigma"},
             "oracle");
  OracleConfig o;
  read(j, "kind", o.kind);
  read(j, "n", o.n);
  read(j, "sparsity", o.sparsity);
  read(j, "degree", o.degree);
  if (j.contains("magnitude")) std::tie(o.magnitude_lo, o.magnitude_hi) = read_range(j.at("magnitude"));
  read(j, "depth", o.depth);
  read(j, "value", o.value);
  read(j, "indices", o.indices);
  read(j, "coefficient", o.coefficient);
  if (j.contains("path")) {
    o.path = j.at("path").get<std::string>();
    if (o.path.is_relative() && !base_dir.empty()) o.path = base_dir / o.path;
  }
  read(j, "missing_penalty", o.missing_penalty);
  if (j.contains("expansion")) o.expansion = j.at("expansion").get<FourierExpansion>();
  read(j, "seed", o.seed);
  read(j, "noise_sigma", o.noise_sigma);

  static const std::set<std::string> kinds{"planted", "tree",   "tabular",
                                           "constant", "parity", "expansion"};
  if (!kinds.contains(o.kind)) throw ConfigError("unknown oracle kind '" + o.kind + "'");
  if (!(o.noise_sigma >= 0.0)) throw ConfigError("oracle noise_sigma must be nonnegative");
  if (o.kind == "tabular" && o.path.empty()) throw ConfigError("tabular oracle needs a path");
  if (o.kind == "expansion" && !o.expansion) throw ConfigError("expansion oracle needs 'expansion'");
  if (o.kind == "planted" && !(o.magnitude_lo > 0.0 && o.magnitude_lo <= o.magnitude_hi)) {
    throw ConfigError("planted magnitude needs 0 < lo <= hi");
  }
  return o;
}

PhaseConfig parse_phase(const json& j) {
  check_keys(j, {"m_grid", "trials", "n", "sparsity", "degree", "magnitude"}, "phase");
  PhaseConfig p;
  read(j, "m_grid", p.m_grid);
  read(j, "trials", p.trials);
  read(j, "n", p.plant.n);
  read(j, "sparsity", p.plant.sparsity);
  read(j, "degree", p.plant.degree);
  if (j.contains("magnitude")) std::tie(p.plant.magnitude_lo, p.plant.magnitude_hi) = read_range(j.at("magnitude"));
  if (p.m_grid.empty()) throw ConfigError("phase.m_grid must list at least one m");
  if (std::find(p.m_grid.begin(), p.m_grid.end(), 0U) != p.m_grid.end()) {
    throw ConfigError("phase.m_grid entries must be positive");
  }
  if (p.trials < 1) throw ConfigError("phase.trials must be at least 1");
  if (p.plant.sparsity < 1) throw ConfigError("phase.sparsity must be at least 1");
  if (p.plant.degree > p.plant.n) throw ConfigError("phase.degree exceeds phase.n");
  return p;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  try {
    check_keys(j,
               {"seed", "stages", "lambda", "sparsity", "sparsity_schedule", "degree", "p", "m",
                "tol", "max_iter", "exhaustive", "subcube_cap", "repair_connectivity",
                "measurements_csv", "oracle", "cell_spec", "phase"},
               "config");
    RunConfig cfg;
    auto& rc = cfg.recovery;
    read(j, "seed", cfg.seed);
    if (j.contains("stages")) {
      const auto t = j.at("stages").get<long long>();
      if (t < 1) throw ConfigError("stages t must be at least 1");
      cfg.stages = static_cast<std::size_t>(t);
    }
    read(j, "lambda", rc.lambda);
    read(j, "sparsity", rc.sparsity);
    read(j, "sparsity_schedule", cfg.sparsity_schedule);
    read(j, "degree", rc.degree);
    read(j, "p", rc.p);
    read(j, "m", rc.m);
    read(j, "tol", rc.tol);
    read(j, "max_iter", rc.max_iter);
    read(j, "exhaustive", rc.exhaustive);
    read(j, "subcube_cap", rc.subcube_cap);
    read(j, "repair_connectivity", cfg.repair_connectivity);
    read(j, "measurements_csv", cfg.measurements_csv);
    if (j.contains("oracle")) cfg.oracle = parse_oracle(j.at("oracle"), base_dir);
    if (j.contains("cell_spec")) cfg.cell = j.at("cell_spec").get<CellSpec>();
    if (j.contains("phase")) cfg.phase = parse_phase(j.at("phase"));

    try {
      rc.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (rc.subcube_cap < 1 || rc.subcube_cap > 30) throw ConfigError("subcube_cap must be in [1, 30]");
    for (auto s : cfg.sparsity_schedule) {
      if (s < 1) throw ConfigError("sparsity_schedule entries must be at least 1");
    }
    if (cfg.repair_connectivity && !cfg.cell) {
      throw ConfigError("repair_connectivity needs a cell_spec");
    }
    if (cfg.cell && cfg.oracle.n && *cfg.oracle.n != edge_count(*cfg.cell)) {
      throw ConfigError("oracle.n = " + std::to_string(*cfg.oracle.n) +
                        " does not match the cell edge count " +
                        std::to_string(edge_count(*cfg.cell)));
    }
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_run_config(j, path.parent_path());
}

std::size_t oracle_dimension(const RunConfig& cfg) {
  const auto& o = cfg.oracle;
  if (o.kind == "expansion") return o.expansion->dimension();
  if (o.n) return *o.n;
  if (cfg.cell) return edge_count(*cfg.cell);
  if (o.kind == "tabular") return 0;  // taken from the file
  throw ConfigError("oracle.n is required without a cell_spec");
}

EvaluatorPtr build_oracle(const RunConfig& cfg) {
  const auto& o = cfg.oracle;
  const std::uint64_t oracle_seed = o.seed.value_or(derive_seed(cfg.seed, streams::kOracle));
  EvaluatorPtr base;
  try {
    if (o.kind == "planted") {
      base = make_planted({oracle_dimension(cfg), o.sparsity, o.degree, o.magnitude_lo, o.magnitude_hi},
                          oracle_seed);
    } else if (o.kind == "tree") {
      base = make_decision_tree(oracle_dimension(cfg), o.depth, oracle_seed);
    } else if (o.kind == "tabular") {
      base = load_tabular(o.path, o.missing_penalty);
    } else if (o.kind == "constant") {
      base = std::make_shared<PlantedOracle>(
          FourierExpansion(oracle_dimension(cfg), {{ParityIndex{}, o.value}}));
    } else if (o.kind == "parity") {
      base = std::make_shared<PlantedOracle>(
          FourierExpansion(oracle_dimension(cfg), {{ParityIndex(o.indices), o.coefficient}}));
    } else {
      base = std::make_shared<PlantedOracle>(*o.expansion);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid oracle: ") + e.what());
  }
  if (cfg.cell && base->dimension() != edge_count(*cfg.cell)) {
    throw ConfigError("oracle dimension " + std::to_string(base->dimension()) +
                      " does not match the cell edge count " + std::to_string(edge_count(*cfg.cell)));
  }
  if (o.noise_sigma > 0.0) base = wrap_noise(base, o.noise_sigma, derive_seed(cfg.seed, streams::kNoise));
  return base;
}

SearchOptions search_options(const RunConfig& cfg) {
  SearchOptions opts;
  opts.recovery = cfg.recovery;
  opts.sparsity_schedule = cfg.sparsity_schedule;
  opts.repair_connectivity = cfg.repair_connectivity;
  opts.cell = cfg.cell;
  opts.threads = evaluation_threads();
  opts.keep_measurements = cfg.measurements_csv;
  return opts;
}

SearchResult cmd_search(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  const auto oracle = build_oracle(cfg);
  auto result = conas_search(oracle, search_options(cfg), cfg.stages, cfg.seed);

  write_text(out_dir / "search_result.json", dump_json(result));
  if (result.final_cell) {
    json cell = *result.final_cell;
    write_text(out_dir / "cell.json", dump_json(cell));
  }
  if (cfg.measurements_csv) {
    std::ostringstream csv;
    csv << "stage,sample_index,value\n";
    for (const auto& st : result.stages) {
      for (std::size_t i = 0; i < st.values.size(); ++i) {
        csv << st.stage << ',' << i << ',' << format_double(st.values[i]) << '\n';
      }
    }
    write_text(out_dir / "measurements.csv", csv.str());
  }
  return result;
}

std::vector<PhaseRow> run_phase(const RunConfig& cfg) {
  if (!cfg.phase) throw ConfigError("phase command needs a 'phase' section");
  const auto& ph = *cfg.phase;
  const auto& rc = cfg.recovery;
  if (rc.degree > ph.plant.n) throw ConfigError("degree exceeds phase.n");

  auto grid = ph.m_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const std::size_t max_m = grid.back();
  const auto parities = enumerate_parities(ph.plant.n, rc.degree);

  LassoOptions lasso;
  lasso.lambda = rc.lambda;
  lasso.tol = rc.tol;
  lasso.max_iter = rc.max_iter;

  std::vector<PhaseRow> rows;
  for (std::size_t trial = 0; trial < ph.trials; ++trial) {
    std::shared_ptr<const PlantedOracle> plant;
    try {
      plant = make_planted(ph.plant, derive_seed(cfg.seed, streams::kPhasePlant, trial));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("invalid phase plant: ") + e.what());
    }
    const auto samples = sample_encodings(ph.plant.n, rc.p, max_m,
                                          derive_seed(cfg.seed, streams::kPhaseSampling, trial));
    const auto values = evaluate_batch(*plant, samples, 1);
    const auto full = build_sampling_matrix(samples, parities);

    for (std::size_t m : grid) {
      const Eigen::MatrixXd a = full.values.topRows(static_cast<Eigen::Index>(m));
      const auto sol = lasso_solve(a, std::span<const double>(values.data(), m), lasso);
      const auto g = truncate_top_s(sol.coefficients, parities, ph.plant.n, ph.plant.sparsity);

      PhaseRow row{m, trial, false, 0.0, sol.kkt_residual, sol.converged};
      std::set<ParityIndex> got, want;
      for (const auto& [s, c] : g.terms()) got.insert(s);
      for (const auto& [s, c] : plant->hidden().terms()) want.insert(s);
      row.support_recovered = got == want;
      std::set<ParityIndex> both = got;
      both.insert(want.begin(), want.end());
      for (const auto& s : both) {
        row.coefficient_error =
            std::max(row.coefficient_error, std::abs(g.coefficient(s) - plant->hidden().coefficient(s)));
      }
      rows.push_back(row);
    }
  }
  std::sort(rows.begin(), rows.end(), [](const PhaseRow& a, const PhaseRow& b) {
    return std::tie(a.m, a.trial) < std::tie(b.m, b.trial);
  });
  return rows;
}

std::vector<PhaseRow> cmd_phase(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  auto rows = run_phase(cfg);
  std::ostringstream csv;
  csv << "m,trial,support_recovered,coefficient_error,kkt_residual,converged\n";
  for (const auto& r : rows) {
    csv << r.m << ',' << r.trial << ',' << (r.support_recovered ? 1 : 0) << ','
        << format_double(r.coefficient_error) << ',' << format_double(r.kkt_residual) << ','
        << (r.converged ? 1 : 0) << '\n';
  }
  write_text(out_dir / "phase.csv", csv.str());
  return rows;
}

SearchResult cmd_stages(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  if (cfg.stages < 2) throw ConfigError("stages command needs t >= 2");
  const auto oracle = build_oracle(cfg);
  auto result = conas_search(oracle, search_options(cfg), cfg.stages, cfg.seed);

  std::ostringstream csv;
  csv << "seed,stage,free_dimension,measurements,mean,std,min,kkt_residual,converged,stopped_early\n";
  for (const auto& st : result.stages) {
    csv << cfg.seed << ',' << st.stage << ',' << st.free_dimension << ',' << st.measurements << ','
        << format_double(st.stats.mean) << ',' << format_double(st.stats.std) << ','
        << format_double(st.stats.min) << ',' << format_double(st.lasso_kkt_residual) << ','
        << (st.lasso_converged ? 1 : 0) << ',' << (result.stopped_early ? 1 : 0) << '\n';
  }
  write_text(out_dir / "stages.csv", csv.str());
  return result;
}

CountReport count_report(const CellSpec& spec) {
  CountReport r;
  r.edges = edge_count(spec);
  r.active = r.edges / 4;
  r.configurations = count_configurations(r.edges, r.active);
  r.darts = darts_configuration_count(spec.operations.size());
  return r;
}

nlohmann::json count_json(const CountReport& r) {
  return {{"edges", r.edges},
          {"active", r.active},
          {"configurations", r.configurations.str()},
          {"configurations_approx", scientific(r.configurations)},
          {"darts_configurations", r.darts.str()},
          {"darts_configurations_approx", scientific(r.darts)}};
}

std::string count_text(const CountReport& r) {
  std::ostringstream out;
  out << "edges E = " << r.edges << "\n"
      << "C(" << r.edges << ", " << r.active << ") = " << r.configurations.str() << " ~ "
      << scientific(r.configurations) << "\n"
      << "DARTS ((K+1)^14)^2 = " << r.darts.str() << " ~ " << scientific(r.darts) << "\n";
  return out.str();
}

FourierExpansion cmd_dft(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  const auto oracle = build_oracle(cfg);
  TransformOptions opts;
  opts.threads = evaluation_threads();
  FourierExpansion g;
  try {
    g = exact_transform(*oracle, opts);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  write_text(out_dir / "expansion.json", dump_json(g));
  return g;
}

}  // namespace conas
