#pragma once

#include <string>

#include "json.hpp"

#include "dmof/core.hpp"
#include "dmof/sequential.hpp"
#include "dmof/supervised.hpp"

namespace dmof {

// Instance files are JSON: human-readable key-value documents with nested
// lists. Doubles are emitted in shortest round-trip form, so load(save(x))
// reproduces every numeric field bit-for-bit; -infinity log-likelihoods are
// encoded as the string "-inf".

nlohmann::json instance_to_json(const ExplicitDmof& problem);
nlohmann::json instance_to_json(const ScoredDmof& problem);
nlohmann::json instance_to_json(const TabularMsp& msp);  // decomposable loss only
nlohmann::json instance_to_json(const SlInstance& inst);

ExplicitDmof explicit_from_json(const nlohmann::json& doc);
ScoredDmof scored_from_json(const nlohmann::json& doc);
TabularMsp msp_from_json(const nlohmann::json& doc);
SlInstance sl_from_json(const nlohmann::json& doc);

// "explicit", "scored", "sequential" or "sl".
std::string instance_type(const nlohmann::json& doc);

void save_json(const std::string& path, const nlohmann::json& doc);
nlohmann::json load_json(const std::string& path);

nlohmann::json report_to_json(const CheckReport& report);
nlohmann::json report_to_json(const CorpusReport& report);
nlohmann::json report_to_json(const MonteCarloReport& report);

// 17 significant digits, '.' separator; the CSV float convention.
std::string format_double(double value);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace dmof
