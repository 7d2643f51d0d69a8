// Python bindings. Structured results cross the boundary as JSON text; the
// package __init__ turns them into dicts.

#include <optional>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "conas/errors.hpp"
#include "conas/harness.hpp"

namespace py = pybind11;
using namespace conas;

namespace {

using TermList = std::vector<std::pair<std::vector<Coord>, double>>;

FourierExpansion to_expansion(std::size_t n, const TermList& terms) {
  FourierExpansion::Terms out;
  for (const auto& [s, c] : terms) out.emplace(ParityIndex(s), c);
  return FourierExpansion(n, std::move(out));
}

TermList from_expansion(const FourierExpansion& g) {
  TermList out;
  for (const auto& [s, c] : g.terms()) {
    out.emplace_back(std::vector<Coord>(s.indices().begin(), s.indices().end()), c);
  }
  return out;
}

Encoding to_encoding(const std::vector<int>& bits) {
  return Encoding(std::vector<std::int8_t>(bits.begin(), bits.end()));
}

RunConfig config_from(const std::string& text, const std::string& base_dir,
                      std::optional<std::uint64_t> seed) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(e.what());
  }
  auto cfg = parse_run_config(j, base_dir);
  if (seed) cfg.seed = *seed;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_conas, m) {
  m.doc() = "Sparse Boolean Fourier recovery and multi-stage cell search";
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("parity_count", &parity_count, py::arg("n"), py::arg("degree"));
  m.def(
      "enumerate_parities",
      [](std::size_t n, std::size_t degree) {
        std::vector<std::vector<Coord>> out;
        for (const auto& s : enumerate_parities(n, degree)) out.emplace_back(s.indices().begin(), s.indices().end());
        return out;
      },
      py::arg("n"), py::arg("degree"));

  m.def(
      "exact_transform",
      [](std::size_t n, const std::function<double(std::vector<int>)>& fn) {
        FunctionEvaluator f(n, [&](const Encoding& a) {
          return fn(std::vector<int>(a.bits().begin(), a.bits().end()));
        }, /*thread_safe=*/false);
        return from_expansion(exact_transform(f));
      },
      py::arg("n"), py::arg("f"), "Fourier coefficients of f over {-1,+1}^n, canonical order.");

  m.def(
      "expansion_eval",
      [](std::size_t n, const TermList& terms, const std::vector<int>& alpha) {
        return expansion_eval(to_expansion(n, terms), to_encoding(alpha));
      },
      py::arg("n"), py::arg("terms"), py::arg("alpha"));

  m.def(
      "restrict_expansion",
      [](std::size_t n, const TermList& terms, const std::map<Coord, int>& fixed) {
        Restriction::Fixed f;
        for (const auto& [c, v] : fixed) f.emplace(c, static_cast<std::int8_t>(v));
        return from_expansion(restrict_expansion(to_expansion(n, terms), Restriction(n, f)));
      },
      py::arg("n"), py::arg("terms"), py::arg("fixed"));

  m.def(
      "sample_encodings",
      [](std::size_t n, double p, std::size_t count, std::uint64_t seed) {
        Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(count, n);
        const auto enc = sample_encodings(n, p, count, seed);
        for (std::size_t l = 0; l < count; ++l) {
          for (std::size_t i = 0; i < n; ++i) out(l, i) = enc[l][i];
        }
        return out;
      },
      py::arg("n"), py::arg("p"), py::arg("m"), py::arg("seed"));

  m.def(
      "sampling_matrix",
      [](const std::vector<std::vector<int>>& encodings, std::size_t degree) {
        if (encodings.empty()) throw std::invalid_argument("need at least one encoding");
        std::vector<Encoding> enc;
        for (const auto& e : encodings) enc.push_back(to_encoding(e));
        auto a = build_sampling_matrix(enc, enumerate_parities(enc.front().size(), degree));
        return a.values;
      },
      py::arg("encodings"), py::arg("degree"));

  m.def(
      "lasso_solve",
      [](const Eigen::MatrixXd& a, const std::vector<double>& y, double lambda, double tol,
         int max_iter, int path_steps) {
        LassoOptions opts;
        opts.lambda = lambda;
        opts.tol = tol;
        opts.max_iter = max_iter;
        opts.path_steps = path_steps;
        const auto s = lasso_solve(a, y, opts);
        py::dict out;
        out["coefficients"] = s.coefficients;
        out["iterations"] = s.iterations;
        out["objective"] = s.objective;
        out["kkt_residual"] = s.kkt_residual;
        out["converged"] = s.converged;
        return out;
      },
      py::arg("a"), py::arg("y"), py::arg("lam") = 1.0, py::arg("tol") = 1e-8,
      py::arg("max_iter") = 10000, py::arg("path_steps") = 10);

  m.def(
      "minimize_over_support",
      [](std::size_t n, const TermList& terms) {
        const auto r = minimize_over_support(to_expansion(n, terms));
        std::map<Coord, int> fixed;
        for (const auto& [c, v] : r.assignment.fixed()) fixed.emplace(c, v);
        return std::make_pair(fixed, r.value);
      },
      py::arg("n"), py::arg("terms"));

  m.def(
      "make_planted",
      [](std::size_t n, std::size_t sparsity, std::size_t degree, std::uint64_t seed, double lo, double hi) {
        return from_expansion(make_planted({n, sparsity, degree, lo, hi}, seed)->hidden());
      },
      py::arg("n"), py::arg("sparsity"), py::arg("degree") = 2, py::arg("seed") = 0, py::arg("lo") = 1.0,
      py::arg("hi") = 2.0);

  m.def(
      "edge_count",
      [](std::size_t nodes, std::size_t operations, std::size_t kinds) {
        CellSpec spec = CellSpec::cnn(nodes);
        spec.operations.resize(operations, "op");
        spec.kinds.resize(kinds, "kind");
        spec.validate();
        return edge_count(spec);
      },
      py::arg("nodes") = 7, py::arg("operations") = 5, py::arg("kinds") = 2);

  m.def(
      "count_json",
      [](const std::string& cell_spec) {
        const auto spec = nlohmann::json::parse(cell_spec).get<CellSpec>();
        return dump_json(count_json(count_report(spec)));
      },
      py::arg("cell_spec"));

  m.def(
      "decode_cell_json",
      [](const std::string& cell_spec, const std::string& encoding) {
        const auto spec = nlohmann::json::parse(cell_spec).get<CellSpec>();
        return dump_json(decode_cell(spec, Encoding::from_binary(encoding)));
      },
      py::arg("cell_spec"), py::arg("encoding"));

  m.def(
      "run_command",
      [](const std::string& command, const std::string& config, const std::string& out_dir,
         const std::string& base_dir, std::optional<std::uint64_t> seed) {
        const auto cfg = config_from(config, base_dir, seed);
        py::gil_scoped_release release;
        if (command == "search") return dump_json(cmd_search(cfg, out_dir));
        if (command == "stages") return dump_json(cmd_stages(cfg, out_dir));
        if (command == "dft") return dump_json(cmd_dft(cfg, out_dir));
        if (command == "phase") {
          nlohmann::json rows = nlohmann::json::array();
          for (const auto& r : cmd_phase(cfg, out_dir)) {
            rows.push_back({{"m", r.m},
                            {"trial", r.trial},
                            {"support_recovered", r.support_recovered},
                            {"coefficient_error", r.coefficient_error},
                            {"kkt_residual", r.kkt_residual},
                            {"converged", r.converged}});
          }
          return dump_json(rows);
        }
        throw std::invalid_argument("unknown command '" + command + "'");
      },
      py::arg("command"), py::arg("config"), py::arg("out_dir"), py::arg("base_dir") = "",
      py::arg("seed") = py::none());
}
