#include "dmof/instance_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace dmof {

using nlohmann::json;

namespace {

constexpr const char* kFormatTag = "dmof-instance";
constexpr int kFormatVersion = 1;

json dist_to_json(const FiniteDist& dist) { return json(dist.weights()); }

FiniteDist dist_from_json(const json& doc) {
  require(doc.is_array() && !doc.empty(), ErrorCode::ParseError,
          "instance: expected a non-empty weight array");
  return make_dist(doc.get<std::vector<double>>());
}

json loglik_to_json(double value) {
  if (value == -kInf) return json("-inf");
  return json(value);
}

double loglik_from_json(const json& doc) {
  if (doc.is_string()) {
    require(doc.get<std::string>() == "-inf", ErrorCode::ParseError,
            "instance: unknown log-likelihood marker");
    return -kInf;
  }
  require(doc.is_number(), ErrorCode::ParseError,
          "instance: log-likelihood must be a number or \"-inf\"");
  return doc.get<double>();
}

json header(const char* type) {
  json doc;
  doc["format"] = kFormatTag;
  doc["version"] = kFormatVersion;
  doc["type"] = type;
  return doc;
}

void check_header(const json& doc, const char* type) {
  require(doc.is_object(), ErrorCode::ParseError, "instance: not a JSON object");
  require(doc.value("format", "") == kFormatTag, ErrorCode::ParseError,
          "instance: missing dmof-instance format tag");
  require(doc.value("version", 0) == kFormatVersion, ErrorCode::ParseError,
          "instance: unsupported version");
  require(doc.value("type", "") == type, ErrorCode::ParseError,
          std::string("instance: expected type '") + type + "'");
}

json policy_to_json(const MarkovPolicy& policy) {
  json steps = json::array();
  for (const auto& step : policy.action_dists) {
    json states = json::array();
    for (const auto& dist : step) states.push_back(dist_to_json(dist));
    steps.push_back(std::move(states));
  }
  return steps;
}

MarkovPolicy policy_from_json(const json& doc) {
  MarkovPolicy policy;
  for (const auto& step : doc) {
    std::vector<FiniteDist> dists;
    for (const auto& dist : step) dists.push_back(dist_from_json(dist));
    policy.action_dists.push_back(std::move(dists));
  }
  return policy;
}

}  // namespace

std::string instance_type(const json& doc) {
  require(doc.is_object() && doc.contains("type"), ErrorCode::ParseError,
          "instance: missing type field");
  return doc.at("type").get<std::string>();
}

json instance_to_json(const ExplicitDmof& problem) {
  validate(problem);
  json doc = header("explicit");
  doc["B"] = problem.loss_bound;
  doc["n_obs"] = problem.n_obs;
  doc["policy_labels"] = problem.policy_labels;
  json models = json::array();
  for (const auto& model : problem.models) {
    json entry;
    entry["obs_dist"] = dist_to_json(model.obs_dist);
    entry["loss_row"] = model.loss_row;
    models.push_back(std::move(entry));
  }
  doc["models"] = std::move(models);
  return doc;
}

ExplicitDmof explicit_from_json(const json& doc) {
  check_header(doc, "explicit");
  ExplicitDmof problem;
  problem.loss_bound = doc.at("B").get<double>();
  problem.n_obs = doc.at("n_obs").get<std::size_t>();
  problem.policy_labels = doc.at("policy_labels").get<std::vector<std::string>>();
  for (const auto& entry : doc.at("models")) {
    ExplicitModel model{dist_from_json(entry.at("obs_dist")),
                        entry.at("loss_row").get<std::vector<double>>()};
    problem.models.push_back(std::move(model));
  }
  validate(problem);
  return problem;
}

json instance_to_json(const ScoredDmof& problem) {
  validate(problem);
  json doc = header("scored");
  doc["B"] = problem.loss_bound;
  doc["policy_labels"] = problem.policy_labels;
  if (problem.star_index) doc["star_index"] = *problem.star_index;
  json models = json::array();
  for (const auto& model : problem.models) {
    json entry;
    entry["loss_row"] = model.loss_row;
    entry["rel_log_lik"] = loglik_to_json(model.rel_log_lik);
    models.push_back(std::move(entry));
  }
  doc["models"] = std::move(models);
  return doc;
}

ScoredDmof scored_from_json(const json& doc) {
  check_header(doc, "scored");
  ScoredDmof problem;
  problem.loss_bound = doc.at("B").get<double>();
  problem.policy_labels = doc.at("policy_labels").get<std::vector<std::string>>();
  if (doc.contains("star_index")) {
    problem.star_index = doc.at("star_index").get<std::size_t>();
  }
  for (const auto& entry : doc.at("models")) {
    ScoredModel model;
    model.loss_row = entry.at("loss_row").get<std::vector<double>>();
    model.rel_log_lik = loglik_from_json(entry.at("rel_log_lik"));
    problem.models.push_back(std::move(model));
  }
  validate(problem);
  return problem;
}

json instance_to_json(const TabularMsp& msp) {
  require(!msp.episodic_loss, ErrorCode::InvalidArgument,
          "instance: custom episodic losses are not serializable");
  json doc = header("sequential");
  doc["B"] = msp.loss_bound;
  doc["horizon"] = msp.horizon;
  doc["state_sizes"] = msp.state_sizes;
  doc["action_sizes"] = msp.action_sizes;
  doc["init_dist"] = dist_to_json(msp.init_dist);
  doc["rewards"] = msp.rewards;
  doc["star_index"] = msp.star;
  json models = json::array();
  for (const auto& model : msp.kernels) {
    json steps = json::array();
    for (const auto& table : model) {
      json rows = json::array();
      for (const auto& row : table) rows.push_back(dist_to_json(row));
      steps.push_back(std::move(rows));
    }
    json entry;
    entry["kernels"] = std::move(steps);
    models.push_back(std::move(entry));
  }
  doc["models"] = std::move(models);
  json policies = json::array();
  for (const auto& policy : msp.policies) policies.push_back(policy_to_json(policy));
  doc["policies"] = std::move(policies);
  return doc;
}

TabularMsp msp_from_json(const json& doc) {
  check_header(doc, "sequential");
  TabularMsp msp;
  msp.loss_bound = doc.at("B").get<double>();
  msp.horizon = doc.at("horizon").get<std::size_t>();
  msp.state_sizes = doc.at("state_sizes").get<std::vector<std::size_t>>();
  msp.action_sizes = doc.at("action_sizes").get<std::vector<std::size_t>>();
  msp.init_dist = dist_from_json(doc.at("init_dist"));
  msp.rewards =
      doc.at("rewards").get<std::vector<std::vector<std::vector<double>>>>();
  msp.star = doc.at("star_index").get<std::size_t>();
  for (const auto& entry : doc.at("models")) {
    std::vector<std::vector<FiniteDist>> steps;
    for (const auto& table : entry.at("kernels")) {
      std::vector<FiniteDist> rows;
      for (const auto& row : table) rows.push_back(dist_from_json(row));
      steps.push_back(std::move(rows));
    }
    msp.kernels.push_back(std::move(steps));
  }
  for (const auto& policy : doc.at("policies")) {
    msp.policies.push_back(policy_from_json(policy));
  }
  validate(msp);
  return msp;
}

json instance_to_json(const SlInstance& inst) {
  validate(inst);
  json doc = header("sl");
  doc["B"] = inst.loss_bound;
  doc["n_x"] = inst.n_x;
  doc["N"] = inst.sample_count;
  doc["hypothesis_labels"] = inst.hypothesis_labels;
  doc["pointwise_loss"] = inst.pointwise_loss;
  doc["star_index"] = inst.star;
  json dists = json::array();
  for (const auto& dist : inst.model_dists) dists.push_back(dist_to_json(dist));
  doc["model_dists"] = std::move(dists);
  return doc;
}

SlInstance sl_from_json(const json& doc) {
  check_header(doc, "sl");
  SlInstance inst;
  inst.loss_bound = doc.at("B").get<double>();
  inst.n_x = doc.at("n_x").get<std::size_t>();
  inst.sample_count = doc.at("N").get<std::size_t>();
  inst.hypothesis_labels =
      doc.at("hypothesis_labels").get<std::vector<std::string>>();
  inst.pointwise_loss =
      doc.at("pointwise_loss").get<std::vector<std::vector<double>>>();
  inst.star = doc.at("star_index").get<std::size_t>();
  for (const auto& dist : doc.at("model_dists")) {
    inst.model_dists.push_back(dist_from_json(dist));
  }
  validate(inst);
  return inst;
}

void save_json(const std::string& path, const json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::ParseError, "cannot open file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& err) {
    fail(ErrorCode::ParseError, std::string("JSON parse error: ") + err.what());
  }
  return doc;
}

namespace {

// JSON has no inf literal; reports encode non-finite values as strings.
json finite_or_tag(double value) {
  if (std::isfinite(value)) return json(value);
  if (std::isnan(value)) return json("nan");
  return json(value > 0 ? "inf" : "-inf");
}

}  // namespace

json report_to_json(const CheckReport& report) {
  json doc;
  doc["name"] = report.name;
  doc["lhs"] = finite_or_tag(report.lhs);
  doc["rhs"] = finite_or_tag(report.rhs);
  doc["tolerance"] = report.tolerance;
  doc["pass"] = report.pass;
  doc["slack"] = finite_or_tag(report.slack());
  if (!report.detail.empty()) doc["detail"] = json::parse(report.detail);
  return doc;
}

json report_to_json(const CorpusReport& report) {
  json doc;
  doc["name"] = report.name;
  doc["cases"] = report.cases;
  doc["violations"] = report.violations;
  doc["worst_slack"] = finite_or_tag(report.worst_slack);
  doc["worst_ratio"] = finite_or_tag(report.worst_ratio);
  doc["digest"] = report.digest;
  doc["pass"] = report.pass();
  return doc;
}

json report_to_json(const MonteCarloReport& report) {
  json doc;
  doc["name"] = report.name;
  doc["trials"] = report.trials;
  doc["violations"] = report.violations;
  doc["frequency"] = report.frequency();
  doc["delta"] = report.delta;
  doc["threshold"] = report.threshold;
  doc["worst_slack"] = finite_or_tag(report.worst_slack);
  doc["digest"] = report.digest;
  doc["pass"] = report.pass;
  return doc;
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::ParseError, "cannot open file for writing: " + path);
  out << content;
  require(out.good(), ErrorCode::ParseError, "write failed: " + path);
}

}  // namespace dmof
