// Batch experiment harness. Subcommands:
//   gen          emit an instance file from a seed and shape
//   edd          solve one scored instance
//   eoec         coefficient sweep over lambda values
//   oec          offline estimation coefficient of an explicit instance
//   lower-bound  minimax value vs gamma1 * OEC check
//   rate-sweep   sequential fast-rate experiment (CSV + JSON, optional SVG)
//   sl-sweep     supervised regret sweep (CSV + JSON, optional SVG)
//   lemmas       full lemma corpus, nonzero exit on any violation
//
// A JSON config file can preset any long option (keys match option names
// with dashes turned to underscores); explicit flags win. Outputs are
// deterministic for a fixed config and seed.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dmof/core.hpp"
#include "dmof/generators.hpp"
#include "dmof/instance_io.hpp"
#include "dmof/lemmalab.hpp"
#include "dmof/rng.hpp"
#include "dmof/sequential.hpp"
#include "dmof/supervised.hpp"

using namespace dmof;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double eps = 1e-9;
  double delta = 0.1;
};

json g_config;  // loaded from --config before full parsing

// Applies config defaults: a key overrides an option's default unless the
// flag appears on the command line (flags win).
void apply_config(CLI::App* app) {
  for (CLI::Option* option : app->get_options()) {
    const auto& lnames = option->get_lnames();
    if (lnames.empty()) continue;
    std::string name = lnames.front();
    if (name == "config" || name == "help") continue;
    std::replace(name.begin(), name.end(), '-', '_');
    if (!g_config.contains(name)) continue;
    const json& value = g_config.at(name);
    std::vector<std::string> raw;
    if (value.is_array()) {
      for (const auto& item : value) {
        raw.push_back(item.is_string() ? item.get<std::string>() : item.dump());
      }
    } else {
      raw.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
    option->default_val(raw.size() == 1 ? raw[0] : CLI::detail::join(raw));
    if (raw.size() > 1) {
      option->default_function([raw] { return CLI::detail::join(raw); });
    }
  }
  for (CLI::App* sub : app->get_subcommands({})) apply_config(sub);
}

std::string out_path(const CommonOpts& common, const std::string& name) {
  fs::create_directories(common.out_dir);
  return (fs::path(common.out_dir) / name).string();
}

void write_report(const CommonOpts& common, const std::string& name, const json& doc) {
  save_json(out_path(common, name), doc);
}

int fail_with_report(const json& error) {
  std::fprintf(stderr, "%s\n", error.dump().c_str());
  return 1;
}

std::vector<std::size_t> parse_grid(const std::vector<std::size_t>& grid) {
  require(!grid.empty(), ErrorCode::EmptyGrid, "N grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    require(grid[i] > grid[i - 1], ErrorCode::InvalidArgument,
            "N grid must be strictly increasing");
  }
  return grid;
}

// Minimal static SVG: mean loss vs N on log-log axes.
std::string svg_loglog(const std::vector<std::size_t>& ns,
                       const std::vector<double>& means, const std::string& title) {
  const double width = 480, height = 320, margin = 48;
  double y_lo = kInf, y_hi = -kInf;
  std::vector<double> ys;
  for (double mean : means) {
    ys.push_back(std::log10(std::max(mean, 1e-12)));
    y_lo = std::min(y_lo, ys.back());
    y_hi = std::max(y_hi, ys.back());
  }
  if (y_hi - y_lo < 1e-9) y_hi = y_lo + 1.0;
  const double x_lo = std::log2(static_cast<double>(ns.front()));
  const double x_hi = std::log2(static_cast<double>(ns.back()));

  auto px = [&](double x) {
    return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin);
  };
  auto py = [&](double y) {
    return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin);
  };

  std::string path;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    path += (i == 0 ? "M" : " L");
    path += format_double(px(std::log2(static_cast<double>(ns[i])))) + " " +
            format_double(py(ys[i]));
  }

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    format_double(width) + "\" height=\"" + format_double(height) +
                    "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + format_double(width / 2) +
         "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" + title +
         "</text>\n";
  svg += "<line x1=\"" + format_double(margin) + "\" y1=\"" +
         format_double(height - margin) + "\" x2=\"" + format_double(width - margin) +
         "\" y2=\"" + format_double(height - margin) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + format_double(margin) + "\" y1=\"" + format_double(margin) +
         "\" x2=\"" + format_double(margin) + "\" y2=\"" +
         format_double(height - margin) + "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + format_double(width / 2) + "\" y=\"" +
         format_double(height - 12) +
         "\" text-anchor=\"middle\" font-size=\"12\">log2 N</text>\n";
  svg += "<text x=\"14\" y=\"" + format_double(height / 2) +
         "\" font-size=\"12\" transform=\"rotate(-90 14 " +
         format_double(height / 2) + ")\">log10 mean loss</text>\n";
  svg += "<path d=\"" + path + "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
  for (std::size_t i = 0; i < ns.size(); ++i) {
    svg += "<circle cx=\"" + format_double(px(std::log2(static_cast<double>(ns[i])))) +
           "\" cy=\"" + format_double(py(ys[i])) + "\" r=\"3\" fill=\"#1f77b4\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string rate_csv(const std::vector<RateRow>& rows) {
  std::string csv = "N,trial,lambda,edd_loss,bound,violated\n";
  for (const auto& row : rows) {
    csv += std::to_string(row.n) + "," + std::to_string(row.trial) + "," +
           format_double(row.lambda) + "," + format_double(row.edd_loss) + "," +
           format_double(row.bound) + "," + (row.violated ? "1" : "0") + "\n";
  }
  return csv;
}

std::string sl_csv(const std::vector<SlSweepRow>& rows) {
  std::string csv = "N,trial,lambda,edd_loss,bound,violated\n";
  for (const auto& row : rows) {
    csv += std::to_string(row.n) + "," + std::to_string(row.trial) + "," +
           format_double(row.lambda) + "," + format_double(row.edd_loss) + "," +
           format_double(row.bound) + "," + (row.violated ? "1" : "0") + "\n";
  }
  return csv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for offline decision making"};
  app.require_subcommand(1);

  CommonOpts common;
  app.add_option("--config", common.config_path, "JSON config file (flags win)");
  app.add_option("--out-dir", common.out_dir, "output directory");
  app.add_option("--seed", common.seed, "master seed");
  app.add_option("--threads", common.threads, "worker thread cap");
  app.add_option("--eps", common.eps, "solver certification tolerance");
  app.add_option("--delta", common.delta, "failure probability for bounds");

  // gen
  auto* gen = app.add_subcommand("gen", "emit an instance file");
  std::string gen_type = "explicit", gen_out = "instance.json";
  std::size_t gen_n_obs = 4, gen_n_models = 3, gen_n_policies = 3;
  std::size_t gen_horizon = 3, gen_n_states = 3, gen_n_actions = 2;
  std::size_t gen_n_x = 6, gen_n_hypotheses = 4, gen_sample_count = 200;
  double gen_bound = 1.0;
  std::string gen_style = "dirichlet";
  gen->add_option("--type", gen_type, "explicit|scored|sequential|sl");
  gen->add_option("--out", gen_out, "output file name");
  gen->add_option("--n-obs", gen_n_obs);
  gen->add_option("--n-models", gen_n_models);
  gen->add_option("--n-policies", gen_n_policies);
  gen->add_option("--horizon", gen_horizon);
  gen->add_option("--n-states", gen_n_states);
  gen->add_option("--n-actions", gen_n_actions);
  gen->add_option("--n-x", gen_n_x);
  gen->add_option("--n-hypotheses", gen_n_hypotheses);
  gen->add_option("--samples", gen_sample_count, "N for sl instances");
  gen->add_option("--loss-bound", gen_bound);
  gen->add_option("--obs-style", gen_style, "dirichlet|point|shared");

  // edd
  auto* edd_cmd = app.add_subcommand("edd", "solve a scored instance");
  std::string edd_instance;
  double edd_lambda = 0.0;
  edd_cmd->add_option("--instance", edd_instance)->required();
  edd_cmd->add_option("--lambda", edd_lambda);

  // eoec
  auto* eoec_cmd = app.add_subcommand("eoec", "coefficient over a lambda sweep");
  std::string eoec_instance;
  std::vector<double> eoec_lambdas{0.0, 0.1, 1.0};
  eoec_cmd->add_option("--instance", eoec_instance)->required();
  eoec_cmd->add_option("--lambda", eoec_lambdas, "lambda values");

  // oec
  auto* oec_cmd = app.add_subcommand("oec", "offline estimation coefficient");
  std::string oec_instance, oec_divergence = "h2";
  double oec_lambda = 4.0;
  oec_cmd->add_option("--instance", oec_instance)->required();
  oec_cmd->add_option("--divergence", oec_divergence, "tv|h2|kl");
  oec_cmd->add_option("--lambda", oec_lambda);

  // lower-bound
  auto* lb_cmd = app.add_subcommand("lower-bound", "minimax value vs OEC check");
  std::string lb_instance, lb_divergence = "h2";
  lb_cmd->add_option("--instance", lb_instance)->required();
  lb_cmd->add_option("--divergence", lb_divergence, "tv|h2|kl");

  // rate-sweep
  auto* rate_cmd = app.add_subcommand("rate-sweep", "sequential fast-rate experiment");
  std::string rate_instance;  // optional; default = built-in testbed
  std::vector<std::size_t> rate_grid{64, 128, 256, 512, 1024, 2048, 4096, 8192};
  std::uint64_t rate_trials = 50;
  bool rate_svg = false;
  rate_cmd->add_option("--instance", rate_instance, "sequential instance file");
  rate_cmd->add_option("--n-grid", rate_grid, "sample sizes");
  rate_cmd->add_option("--trials", rate_trials);
  rate_cmd->add_flag("--svg", rate_svg, "also emit a log-log SVG plot");

  // sl-sweep
  auto* sl_cmd = app.add_subcommand("sl-sweep", "supervised regret sweep");
  std::string sl_instance;
  std::vector<std::size_t> sl_grid{32, 64, 128, 256, 512, 1024, 2048, 4096};
  std::uint64_t sl_trials = 200;
  bool sl_centered = true, sl_svg = false;
  sl_cmd->add_option("--instance", sl_instance, "sl instance file");
  sl_cmd->add_option("--n-grid", sl_grid, "sample sizes");
  sl_cmd->add_option("--trials", sl_trials);
  sl_cmd->add_flag("--centered,!--no-centered", sl_centered, "centered loss rows");
  sl_cmd->add_flag("--svg", sl_svg);

  // lemmas
  auto* lemmas_cmd = app.add_subcommand("lemmas", "full lemma corpus");
  std::uint64_t lemma_cases = 10'000, lemma_chains = 500, lemma_triples = 500;
  std::uint64_t lemma_dv = 1000, lemma_trials = 5000;
  lemmas_cmd->add_option("--cases", lemma_cases, "change-of-measure cases");
  lemmas_cmd->add_option("--chains", lemma_chains);
  lemmas_cmd->add_option("--triples", lemma_triples);
  lemmas_cmd->add_option("--dv-cases", lemma_dv);
  lemmas_cmd->add_option("--trials", lemma_trials, "per statistical check");

  // pre-scan for --config so its values become defaults, flags still win
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") g_config = load_json(argv[i + 1]);
  }
  if (!g_config.is_null()) apply_config(&app);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      json doc;
      if (gen_type == "explicit") {
        ExplicitShape shape{gen_n_obs, gen_n_models, gen_n_policies, gen_bound};
        if (gen_style == "point") shape.style = ObsStyle::PointMass;
        if (gen_style == "shared") shape.style = ObsStyle::Shared;
        doc = instance_to_json(gen_explicit_dmof(shape, common.seed));
      } else if (gen_type == "scored") {
        ScoredShape shape;
        shape.n_models = gen_n_models;
        shape.n_policies = gen_n_policies;
        shape.loss_bound = gen_bound;
        doc = instance_to_json(gen_scored_dmof(shape, common.seed));
      } else if (gen_type == "sequential") {
        SequentialTestbedConfig config;
        config.horizon = gen_horizon;
        config.n_states = gen_n_states;
        config.n_actions = gen_n_actions;
        config.n_models = gen_n_models;
        config.loss_bound = gen_bound;
        doc = instance_to_json(gen_sequential_testbed(config, common.seed).msp);
      } else if (gen_type == "sl") {
        SlTestbedConfig config;
        config.n_x = gen_n_x;
        config.n_hypotheses = gen_n_hypotheses;
        config.n_models = gen_n_models;
        config.sample_count = gen_sample_count;
        config.loss_bound = gen_bound;
        doc = instance_to_json(gen_sl_testbed(config, common.seed));
      } else {
        fail(ErrorCode::InvalidArgument, "gen: unknown --type " + gen_type);
      }
      save_json(out_path(common, gen_out), doc);
      return 0;
    }

    auto divergence_from_name = [](const std::string& name) {
      if (name == "tv") return DivergenceKind::TV;
      if (name == "h2") return DivergenceKind::H2;
      if (name == "kl") return DivergenceKind::KL;
      fail(ErrorCode::InvalidArgument, "unknown divergence: " + name);
    };

    if (*edd_cmd) {
      const ScoredDmof problem = scored_from_json(load_json(edd_instance));
      const EddResult result = edd(problem, edd_lambda, common.eps);
      json doc;
      doc["lambda"] = edd_lambda;
      doc["value"] = result.value;
      doc["gap"] = result.certificate.gap;
      doc["policy_mixture"] = result.policy.dist.weights();
      doc["active_models"] = result.active_models;
      write_report(common, "edd.json", doc);
      return 0;
    }

    if (*eoec_cmd) {
      const ScoredDmof problem = scored_from_json(load_json(eoec_instance));
      std::vector<double> lambdas = eoec_lambdas;
      std::sort(lambdas.begin(), lambdas.end());
      const auto sweep = eoec_lambda_sweep(problem, lambdas, common.eps);
      json doc;
      double best = kInf;
      for (const auto& [lambda, value] : sweep) {
        json row;
        row["lambda"] = lambda;
        row["value"] = value;
        doc["sweep"].push_back(row);
        best = std::min(best, value);
      }
      doc["min_value"] = best;
      write_report(common, "eoec.json", doc);
      return 0;
    }

    if (*oec_cmd) {
      const ExplicitDmof problem = explicit_from_json(load_json(oec_instance));
      RefDistSet laws;
      for (const auto& model : problem.models) laws.push_back(model.obs_dist);
      const DivergenceKind kind = divergence_from_name(oec_divergence);
      const OecResult result =
          oec(problem, laws, divergence_spec(kind), oec_lambda, common.eps);
      json doc;
      doc["divergence"] = oec_divergence;
      doc["lambda"] = oec_lambda;
      doc["value"] = result.value;
      doc["argmax_ref"] = result.argmax_ref;
      doc["any_empty_game"] = result.any_empty_game;
      for (double value : result.per_ref_values) {
        doc["per_ref_values"].push_back(std::isfinite(value) ? json(value)
                                                             : json("-inf"));
      }
      write_report(common, "oec.json", doc);
      return 0;
    }

    if (*lb_cmd) {
      const ExplicitDmof problem = explicit_from_json(load_json(lb_instance));
      RefDistSet laws;
      for (const auto& model : problem.models) laws.push_back(model.obs_dist);
      const DivergenceKind kind = divergence_from_name(lb_divergence);
      const CheckReport report =
          check_minimax_lower_bound(problem, laws, divergence_spec(kind), common.eps);
      write_report(common, "lower_bound.json", report_to_json(report));
      if (!report.pass) return fail_with_report(report_to_json(report));
      return 0;
    }

    if (*rate_cmd) {
      SequentialTestbed testbed;
      if (rate_instance.empty()) {
        testbed = gen_sequential_testbed({}, common.seed);
      } else {
        testbed.msp = msp_from_json(load_json(rate_instance));
        testbed.optimal_policy_index = 0;
        const MarkovPolicy optimal = optimal_value(testbed.msp, testbed.msp.star).second;
        bool found = false;
        for (std::size_t p = 0; p < testbed.msp.n_policies() && !found; ++p) {
          found = true;
          for (std::size_t h = 0; found && h < testbed.msp.horizon; ++h) {
            for (std::size_t s = 0; s < testbed.msp.state_sizes[h]; ++s) {
              for (std::size_t a = 0; a < testbed.msp.action_sizes[h]; ++a) {
                if (testbed.msp.policies[p].action_dists[h][s][a] !=
                    optimal.action_dists[h][s][a]) {
                  found = false;
                  break;
                }
              }
              if (!found) break;
            }
          }
          if (found) testbed.optimal_policy_index = p;
        }
        require(found, ErrorCode::InvalidArgument,
                "rate-sweep: instance policy list lacks the optimal policy");
      }
      const BehaviorSpec behavior =
          BehaviorSpec::trajectory(testbed.optimal_policy_index);
      const RateSweepResult sweep =
          rate_sweep(testbed.msp, behavior, testbed.optimal_policy_index,
                     parse_grid(rate_grid), common.delta, rate_trials, common.seed,
                     common.eps, common.threads);

      write_text_file(out_path(common, "rate_sweep.csv"), rate_csv(sweep.rows));
      json doc;
      doc["coverage"] = sweep.coverage;
      doc["violations"] = sweep.violations;
      doc["slope_full"] = sweep.slope_full;
      doc["slope_upper_half"] = sweep.slope_upper_half;
      std::vector<std::size_t> ns;
      std::vector<double> means;
      for (const auto& row : sweep.summary) {
        json entry;
        entry["N"] = row.n;
        entry["mean"] = row.mean;
        entry["q10"] = row.q10;
        entry["q50"] = row.q50;
        entry["q90"] = row.q90;
        entry["violations"] = row.violations;
        doc["summary"].push_back(entry);
        ns.push_back(row.n);
        means.push_back(row.mean);
      }
      write_report(common, "rate_sweep.json", doc);
      if (rate_svg) {
        write_text_file(out_path(common, "rate_sweep.svg"),
                        svg_loglog(ns, means, "mean loss vs N"));
      }
      return 0;
    }

    if (*sl_cmd) {
      SlInstance inst;
      if (sl_instance.empty()) {
        inst = gen_sl_testbed({}, common.seed);
      } else {
        inst = sl_from_json(load_json(sl_instance));
      }
      const SlSweepResult sweep =
          sl_sweep(inst, parse_grid(sl_grid), common.delta, sl_trials, common.seed,
                   sl_centered, common.eps, common.threads);
      write_text_file(out_path(common, "sl_sweep.csv"), sl_csv(sweep.rows));
      json doc;
      doc["centered"] = sl_centered;
      doc["violations"] = sweep.violations;
      doc["slope_full"] = sweep.slope_full;
      doc["slope_upper_half"] = sweep.slope_upper_half;
      for (std::size_t i = 0; i < sweep.n_grid.size(); ++i) {
        json entry;
        entry["N"] = sweep.n_grid[i];
        entry["mean"] = sweep.means[i];
        doc["summary"].push_back(entry);
      }
      write_report(common, "sl_sweep.json", doc);
      if (sl_svg) {
        write_text_file(out_path(common, "sl_sweep.svg"),
                        svg_loglog(sweep.n_grid, sweep.means,
                                   sl_centered ? "mean regret vs N" : "mean loss vs N"));
      }
      return 0;
    }

    if (*lemmas_cmd) {
      json doc;
      std::uint64_t violations = 0;
      auto add_corpus = [&](const CorpusReport& report) {
        doc["deterministic"].push_back(report_to_json(report));
        violations += report.violations;
      };
      add_corpus(run_tv_com_corpus(lemma_cases, common.seed));
      add_corpus(run_h2_com_corpus(lemma_cases, common.seed + 1));
      add_corpus(run_refined_com_corpus(DivergenceKind::TV, lemma_cases, common.seed + 2));
      add_corpus(run_refined_com_corpus(DivergenceKind::H2, lemma_cases, common.seed + 3));
      add_corpus(run_refined_com_corpus(DivergenceKind::KL, lemma_cases, common.seed + 4));
      add_corpus(run_subadditivity_corpus(lemma_chains, common.seed + 5));
      add_corpus(run_refined_simulation_corpus(lemma_triples, common.seed + 6));
      add_corpus(run_donsker_varadhan_corpus(lemma_dv, common.seed + 7));

      Rng rng = Rng::stream(common.seed, 0x1e3a5u);
      std::vector<FiniteDist> family;
      for (int i = 0; i < 5; ++i) family.push_back(make_dist(rng.dirichlet(4)));
      std::vector<FiniteDist> joints;
      for (int i = 0; i < 4; ++i) joints.push_back(make_dist(rng.dirichlet(9)));
      bool statistical_pass = true;
      auto add_mc = [&](const MonteCarloReport& report) {
        doc["statistical"].push_back(report_to_json(report));
        statistical_pass = statistical_pass && report.pass;
      };
      add_mc(check_loglik_bound(family, 0, 0.05, lemma_trials, common.seed + 8));
      add_mc(check_loglik_iid(family, 1, 10, 0.05, lemma_trials, common.seed + 9));
      add_mc(check_loglik_iid_cond(joints, 3, 3, 0, 10, 0.05, lemma_trials,
                                   common.seed + 10));

      doc["deterministic_violations"] = violations;
      doc["pass"] = violations == 0 && statistical_pass;
      write_report(common, "lemmas.json", doc);
      if (violations != 0 || !statistical_pass) return fail_with_report(doc);
      return 0;
    }
  } catch (const Error& err) {
    json error;
    error["error"] = error_code_name(err.code());
    error["message"] = err.what();
    return fail_with_report(error);
  } catch (const std::exception& err) {
    json error;
    error["error"] = "Unexpected";
    error["message"] = err.what();
    return fail_with_report(error);
  }
  return 0;
}
