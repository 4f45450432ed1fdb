#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "labs/bench.hpp"
#include "labs/core.hpp"
#include "labs/corpus.hpp"
#include "labs/duration.hpp"
#include "labs/lengthtag.hpp"
#include "labs/metrics.hpp"

namespace labsearch {

std::string read_file(const std::string& path);
// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

// Non-empty lines, each parsed as one JSON value.
std::vector<nlohmann::json> read_jsonl(const std::string& path);
std::string to_jsonl(const std::vector<nlohmann::json>& records);

// source<TAB>target per line; blank lines and '#' comments skipped.
std::vector<TextPair> read_pairs_tsv(const std::string& path);

nlohmann::json to_json(const TaggedExample& ex);
TaggedExample tagged_example_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AnnotationReport& report);

// {"id", "phonemes": [...], "ref_duration": seconds, "reference": text?}
nlohmann::json to_json(const SourceUtterance& src);
SourceUtterance source_from_json(const nlohmann::json& j);

// {"id", "allowance_ms", "phonemes": {symbol: ms}}
nlohmann::json to_json(const DurationProfile& profile);
DurationProfile profile_from_json(const nlohmann::json& j);

// One decode output line. `wall_time` is the only non-deterministic field.
nlohmann::json decode_record(const std::string& id, const DecodeResult& result,
                             const Vocabulary& vocab);
nlohmann::json decode_error_record(const std::string& id, const std::string& error);
DecodeResult decode_result_from_json(const nlohmann::json& j, const Vocabulary& vocab);

nlohmann::json selection_record(const SourceUtterance& src, const Selection& selection,
                                const SelectionPolicy& policy);
EvalInput eval_input_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const BenchReport& report);

}  // namespace labsearch
