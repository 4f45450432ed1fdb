#pragma once

#include <memory>
#include <string>

#include "json.hpp"
#include "labs/ngram.hpp"
#include "labs/scoring.hpp"

namespace labsearch {

inline constexpr const char* kModelFormat = "labs-model";
inline constexpr int kModelVersion = 1;

nlohmann::json vocabulary_to_json(const Vocabulary& vocab);
Vocabulary vocabulary_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const NGramModel& model);
nlohmann::json model_to_json(const TableModel& model);

// Dispatches on the envelope's "kind" ("ngram" or "table").
std::unique_ptr<ScoringModel> model_from_json(const nlohmann::json& j);
std::unique_ptr<ScoringModel> load_model(const std::string& path);

}  // namespace labsearch
