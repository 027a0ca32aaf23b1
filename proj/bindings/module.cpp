#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"

#include "dmof/core.hpp"
#include "dmof/generators.hpp"
#include "dmof/instance_io.hpp"
#include "dmof/lemmalab.hpp"
#include "dmof/sequential.hpp"
#include "dmof/supervised.hpp"

namespace py = pybind11;
using namespace dmof;
using nlohmann::json;

namespace {

json to_json(const py::handle& obj) {
  if (obj.is_none()) return nullptr;
  if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
  if (py::isinstance<py::int_>(obj)) return obj.cast<long long>();
  if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
  if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
  if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
    json arr = json::array();
    for (const auto& item : obj) arr.push_back(to_json(item));
    return arr;
  }
  if (py::isinstance<py::dict>(obj)) {
    json map = json::object();
    for (const auto& item : obj.cast<py::dict>()) {
      map[item.first.cast<std::string>()] = to_json(item.second);
    }
    return map;
  }
  throw py::type_error("unsupported value in instance document");
}

py::object to_python(const json& doc) {
  switch (doc.type()) {
    case json::value_t::null: return py::none();
    case json::value_t::boolean: return py::bool_(doc.get<bool>());
    case json::value_t::number_integer: return py::int_(doc.get<long long>());
    case json::value_t::number_unsigned:
      return py::int_(doc.get<unsigned long long>());
    case json::value_t::number_float: return py::float_(doc.get<double>());
    case json::value_t::string: return py::str(doc.get<std::string>());
    case json::value_t::array: {
      py::list out;
      for (const auto& item : doc) out.append(to_python(item));
      return out;
    }
    default: {
      py::dict out;
      for (const auto& [key, value] : doc.items()) {
        out[py::str(key)] = to_python(value);
      }
      return out;
    }
  }
}

FiniteDist dist_from_list(const std::vector<double>& weights) {
  return make_dist(weights);
}

DivergenceKind kind_from_name(const std::string& name) {
  if (name == "tv") return DivergenceKind::TV;
  if (name == "h2") return DivergenceKind::H2;
  if (name == "kl") return DivergenceKind::KL;
  throw py::value_error("divergence must be one of 'tv', 'h2', 'kl'");
}

py::dict game_solution_dict(const GameSolution& sol) {
  py::dict out;
  out["value"] = sol.value;
  out["gap"] = sol.gap;
  out["col_mixture"] = sol.col_mixture.weights();
  out["row_mixture"] = sol.row_mixture.weights();
  return out;
}

}  // namespace

PYBIND11_MODULE(_dmof, m) {
  m.doc() = "offline decision making laboratory (C++ core)";

  py::register_exception<Error>(m, "DmofError");

  // distributions and divergences
  m.def("make_dist",
        [](const std::vector<double>& w) { return make_dist(w).weights(); });
  m.def("hellinger_sq", [](const std::vector<double>& p, const std::vector<double>& q) {
    return hellinger_sq(dist_from_list(p), dist_from_list(q));
  });
  m.def("kl", [](const std::vector<double>& p, const std::vector<double>& q) {
    return kl(dist_from_list(p), dist_from_list(q));
  });
  m.def("tv", [](const std::vector<double>& p, const std::vector<double>& q) {
    return tv(dist_from_list(p), dist_from_list(q));
  });
  m.def("product_dist", [](const std::vector<double>& p, std::size_t n) {
    return product_dist(dist_from_list(p), n).weights();
  });

  // games
  m.def(
      "solve_zero_sum",
      [](const std::vector<std::vector<double>>& rows, double eps) {
        return game_solution_dict(solve_zero_sum(PayoffMatrix::from_rows(rows), eps));
      },
      py::arg("rows"), py::arg("eps") = 1e-9);

  // core operations over instance documents (the on-disk JSON schema)
  m.def(
      "edd",
      [](const py::dict& instance, double lambda, double eps) {
        const ScoredDmof problem = scored_from_json(to_json(instance));
        const EddResult result = edd(problem, lambda, eps);
        py::dict out;
        out["value"] = result.value;
        out["gap"] = result.certificate.gap;
        out["policy_mixture"] = result.policy.dist.weights();
        out["active_models"] = result.active_models;
        return out;
      },
      py::arg("instance"), py::arg("lam"), py::arg("eps") = 1e-9);
  m.def(
      "eoec",
      [](const py::dict& instance, double lambda, double eps) {
        return eoec(scored_from_json(to_json(instance)), lambda, eps).value;
      },
      py::arg("instance"), py::arg("lam"), py::arg("eps") = 1e-9);
  m.def(
      "oec",
      [](const py::dict& instance, const std::string& divergence, double lambda,
         double eps) {
        const ExplicitDmof problem = explicit_from_json(to_json(instance));
        RefDistSet laws;
        for (const auto& model : problem.models) laws.push_back(model.obs_dist);
        const OecResult result =
            oec(problem, laws, divergence_spec(kind_from_name(divergence)), lambda, eps);
        py::dict out;
        out["value"] = result.value;
        out["per_ref_values"] = result.per_ref_values;
        out["any_empty_game"] = result.any_empty_game;
        return out;
      },
      py::arg("instance"), py::arg("divergence"), py::arg("lam"),
      py::arg("eps") = 1e-9);
  m.def(
      "minimax_algorithm_value",
      [](const py::dict& instance, double eps) {
        const MinimaxResult result =
            minimax_algorithm_value(explicit_from_json(to_json(instance)), eps);
        py::dict out;
        out["value"] = result.value;
        out["gap"] = result.gap;
        py::list kernel;
        for (const auto& dist : result.kernel) kernel.append(dist.weights());
        out["kernel"] = kernel;
        out["adversary"] = result.adversary.weights();
        return out;
      },
      py::arg("instance"), py::arg("eps") = 1e-9);
  m.def(
      "check_lower_bound",
      [](const py::dict& instance, const std::string& divergence, double eps) {
        const ExplicitDmof problem = explicit_from_json(to_json(instance));
        RefDistSet laws;
        for (const auto& model : problem.models) laws.push_back(model.obs_dist);
        return to_python(report_to_json(check_minimax_lower_bound(
            problem, laws, divergence_spec(kind_from_name(divergence)), eps)));
      },
      py::arg("instance"), py::arg("divergence"), py::arg("eps") = 1e-7);

  // generators (documents in the file schema)
  m.def(
      "gen_explicit",
      [](std::size_t n_obs, std::size_t n_models, std::size_t n_policies,
         double loss_bound, std::uint64_t seed) {
        return to_python(instance_to_json(
            gen_explicit_dmof({n_obs, n_models, n_policies, loss_bound}, seed)));
      },
      py::arg("n_obs") = 4, py::arg("n_models") = 3, py::arg("n_policies") = 3,
      py::arg("loss_bound") = 1.0, py::arg("seed") = 1);
  m.def(
      "gen_scored",
      [](std::size_t n_models, std::size_t n_policies, double loss_bound,
         std::uint64_t seed) {
        ScoredShape shape;
        shape.n_models = n_models;
        shape.n_policies = n_policies;
        shape.loss_bound = loss_bound;
        return to_python(instance_to_json(gen_scored_dmof(shape, seed)));
      },
      py::arg("n_models") = 4, py::arg("n_policies") = 3, py::arg("loss_bound") = 1.0,
      py::arg("seed") = 1);
  m.def(
      "gen_sequential_testbed",
      [](std::uint64_t seed) {
        const SequentialTestbed testbed = gen_sequential_testbed({}, seed);
        py::dict out;
        out["instance"] = to_python(instance_to_json(testbed.msp));
        out["optimal_policy_index"] = testbed.optimal_policy_index;
        return out;
      },
      py::arg("seed") = 1);
  m.def(
      "gen_sl_testbed",
      [](std::uint64_t seed) {
        return to_python(instance_to_json(gen_sl_testbed({}, seed)));
      },
      py::arg("seed") = 1);

  // sequential experiment
  m.def(
      "rate_sweep",
      [](const py::dict& instance, std::size_t pi_bar,
         const std::vector<std::size_t>& n_grid, double delta, std::uint64_t trials,
         std::uint64_t seed, double eps, unsigned threads) {
        const TabularMsp msp = msp_from_json(to_json(instance));
        const RateSweepResult sweep =
            rate_sweep(msp, BehaviorSpec::trajectory(pi_bar), pi_bar, n_grid, delta,
                       trials, seed, eps, threads);
        py::dict out;
        out["coverage"] = sweep.coverage;
        out["violations"] = sweep.violations;
        out["slope_full"] = sweep.slope_full;
        out["slope_upper_half"] = sweep.slope_upper_half;
        py::list summary;
        for (const auto& row : sweep.summary) {
          py::dict entry;
          entry["N"] = row.n;
          entry["mean"] = row.mean;
          entry["q50"] = row.q50;
          entry["violations"] = row.violations;
          summary.append(entry);
        }
        out["summary"] = summary;
        return out;
      },
      py::arg("instance"), py::arg("pi_bar"), py::arg("n_grid"),
      py::arg("delta") = 0.1, py::arg("trials") = 50, py::arg("seed") = 1,
      py::arg("eps") = 1e-9, py::arg("threads") = 1);

  // supervised experiment
  m.def(
      "check_fast_sl",
      [](const py::dict& instance, double delta, std::uint64_t trials,
         std::uint64_t seed, bool centered) {
        return to_python(report_to_json(
            check_fast_sl(sl_from_json(to_json(instance)), delta, trials, seed,
                          centered)));
      },
      py::arg("instance"), py::arg("delta") = 0.1, py::arg("trials") = 500,
      py::arg("seed") = 1, py::arg("centered") = true);

  // lemma corpora
  m.def("run_lemma_corpus", [](const std::string& name, std::uint64_t cases,
                               std::uint64_t seed) {
    CorpusReport report;
    if (name == "tv_com") {
      report = run_tv_com_corpus(cases, seed);
    } else if (name == "h2_com") {
      report = run_h2_com_corpus(cases, seed);
    } else if (name == "refined_com_tv") {
      report = run_refined_com_corpus(DivergenceKind::TV, cases, seed);
    } else if (name == "refined_com_h2") {
      report = run_refined_com_corpus(DivergenceKind::H2, cases, seed);
    } else if (name == "refined_com_kl") {
      report = run_refined_com_corpus(DivergenceKind::KL, cases, seed);
    } else if (name == "subadditivity") {
      report = run_subadditivity_corpus(cases, seed);
    } else if (name == "donsker_varadhan") {
      report = run_donsker_varadhan_corpus(cases, seed);
    } else if (name == "refined_simulation") {
      report = run_refined_simulation_corpus(cases, seed);
    } else {
      throw py::value_error("unknown corpus: " + name);
    }
    return to_python(report_to_json(report));
  });

  // instance files
  m.def("load_instance",
        [](const std::string& path) { return to_python(load_json(path)); });
  m.def("save_instance", [](const std::string& path, const py::dict& doc) {
    save_json(path, to_json(doc));
  });
}
