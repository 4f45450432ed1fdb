#include "labs/records.hpp"

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace labsearch {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp + "'");
    out << content;
    out.flush();
    if (!out) throw DataError("write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw DataError("cannot move output into place at '" + path + "'");
  }
}

std::vector<json> read_jsonl(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string to_jsonl(const std::vector<json>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

std::vector<TextPair> read_pairs_tsv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<TextPair> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      out.push_back({line, ""});  // fails annotation with a recorded reason
    } else {
      out.push_back({line.substr(0, tab), line.substr(tab + 1)});
    }
  }
  return out;
}

json to_json(const TaggedExample& ex) {
  return {{"source", ex.source},
          {"target", ex.target},
          {"src_units", ex.source_units},
          {"tgt_units", ex.target_units},
          {"ratio", ex.ratio},
          {"tag", tag_name(ex.tag)},
          {"unit", unit_name(ex.unit)}};
}

TaggedExample tagged_example_from_json(const json& j) {
  TaggedExample ex;
  try {
    ex.source = j.at("source").get<std::string>();
    ex.target = j.at("target").get<std::string>();
    ex.source_units = j.at("src_units").get<std::size_t>();
    ex.target_units = j.at("tgt_units").get<std::size_t>();
    ex.ratio = j.at("ratio").get<double>();
    auto tag = parse_tag(j.at("tag").get<std::string>());
    auto unit = parse_unit(j.at("unit").get<std::string>());
    if (!tag || !unit) throw DataError("unknown tag or unit");
    ex.tag = *tag;
    ex.unit = *unit;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed tagged example: ") + e.what());
  }
  return ex;
}

json to_json(const AnnotationReport& report) {
  json counts;
  for (LengthTag t : kAllTags) counts[std::string(tag_name(t))] = report.tag_counts[tag_index(t)];
  json failures = json::array();
  for (const auto& f : report.failures) failures.push_back({{"index", f.index}, {"reason", f.reason}});
  return {{"total", report.total},
          {"annotated", report.total - report.failures.size()},
          {"tag_counts", counts},
          {"ratio_histogram", {{"bin_width", kRatioBinWidth}, {"counts", report.histogram}}},
          {"failures", failures},
          {"alpha", report.alpha},
          {"unit", unit_name(report.unit)}};
}

json to_json(const SourceUtterance& src) {
  json j = {{"id", src.id}, {"phonemes", src.phonemes}, {"ref_duration", src.reference_duration}};
  if (src.reference_text) j["reference"] = *src.reference_text;
  return j;
}

SourceUtterance source_from_json(const json& j) {
  SourceUtterance src;
  try {
    src.id = j.at("id").get<std::string>();
    src.phonemes = j.at("phonemes").get<std::vector<std::string>>();
    src.reference_duration = j.value("ref_duration", 0.0);
    if (j.contains("reference")) src.reference_text = j.at("reference").get<std::string>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed source utterance: ") + e.what());
  }
  validate(src);
  return src;
}

json to_json(const DurationProfile& profile) {
  return {{"id", profile.id}, {"allowance_ms", profile.allowance_ms}, {"phonemes", profile.phoneme_ms}};
}

DurationProfile profile_from_json(const json& j) {
  DurationProfile p;
  try {
    p.id = j.value("id", std::string("profile"));
    p.allowance_ms = j.value("allowance_ms", 0.0);
    p.phoneme_ms = j.at("phonemes").get<std::map<std::string, double>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed duration profile: ") + e.what());
  }
  validate(p);
  return p;
}

namespace {

json hypothesis_json(const Hypothesis& h, const Vocabulary& vocab) {
  std::vector<std::string> tokens;
  for (TokenId id : h.tokens) tokens.push_back(vocab.token(id));
  return {{"tokens", tokens}, {"ids", h.tokens}, {"text", vocab.detokenize(h.tokens)},
          {"score", h.score}};
}

}  // namespace

json decode_record(const std::string& id, const DecodeResult& result, const Vocabulary& vocab) {
  json tags = json::object();
  for (LengthTag t : kAllTags) {
    const auto i = tag_index(t);
    if (result.status[i] == TagStatus::NotRequested) continue;
    json hyps = json::array();
    for (const auto& h : result.hypotheses[i]) hyps.push_back(hypothesis_json(h, vocab));
    tags[std::string(tag_name(t))] = {{"status", status_name(result.status[i])},
                                      {"hypotheses", hyps}};
  }
  return {{"id", id},
          {"tags", tags},
          {"expanded", result.expanded},
          {"steps", result.steps},
          {"wall_time", result.wall_seconds}};
}

json decode_error_record(const std::string& id, const std::string& error) {
  return {{"id", id}, {"error", error}};
}

DecodeResult decode_result_from_json(const json& j, const Vocabulary& vocab) {
  DecodeResult r;
  try {
    for (const auto& [name, entry] : j.at("tags").items()) {
      auto tag = parse_tag(name);
      if (!tag) throw DataError("unknown tag '" + name + "' in decode record");
      const auto i = tag_index(*tag);
      const auto status = entry.at("status").get<std::string>();
      r.status[i] = status == "ok" ? TagStatus::Ok : TagStatus::LengthExhausted;
      for (const auto& hj : entry.at("hypotheses")) {
        Hypothesis h;
        h.tag = *tag;
        h.tokens = hj.at("ids").get<std::vector<TokenId>>();
        h.score = hj.at("score").get<double>();
        h.completed = true;
        if (h.tokens.empty() || h.tokens.front() != vocab.tag_token(*tag) ||
            h.tokens.back() != vocab.eos()) {
          throw DataError("decode record hypothesis does not match the vocabulary");
        }
        for (TokenId id : h.tokens) {
          if (id < 0 || static_cast<std::size_t>(id) >= vocab.size()) {
            throw DataError("decode record token id out of range");
          }
        }
        r.hypotheses[i].push_back(std::move(h));
      }
    }
    r.expanded = j.value("expanded", std::size_t{0});
    r.steps = j.value("steps", std::size_t{0});
    r.wall_seconds = j.value("wall_time", 0.0);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed decode record: ") + e.what());
  }
  return r;
}

json selection_record(const SourceUtterance& src, const Selection& selection,
                      const SelectionPolicy& policy) {
  json candidates = json::array();
  for (const auto& c : selection.candidates) {
    candidates.push_back({{"tag", tag_name(c.hypothesis.tag)},
                          {"text", c.text},
                          {"score", c.hypothesis.score},
                          {"estimated_duration", c.estimated_duration},
                          {"ratio", c.ratio},
                          {"eligible", c.eligible},
                          {"compliant", c.compliant}});
  }
  const auto& choice = selection.choice();
  json j = {{"id", src.id},
            {"chosen",
             {{"text", choice.text},
              {"tag", tag_name(choice.hypothesis.tag)},
              {"ids", choice.hypothesis.tokens},
              {"score", choice.hypothesis.score}}},
            {"estimated_duration", choice.estimated_duration},
            {"reference_duration", selection.reference_duration},
            {"ratio", choice.ratio},
            {"compliant", choice.compliant},
            {"fallback", selection.used_fallback},
            {"epsilon", policy.epsilon},
            {"candidates", candidates}};
  if (src.reference_text) j["reference"] = *src.reference_text;
  return j;
}

EvalInput eval_input_from_json(const json& j) {
  EvalInput in;
  try {
    in.id = j.at("id").get<std::string>();
    const auto& chosen = j.at("chosen");
    auto tag = parse_tag(chosen.at("tag").get<std::string>());
    if (!tag) throw DataError("unknown tag in selection record");
    in.tag = *tag;
    in.hypothesis = chosen.at("text").get<std::string>();
    in.reference_duration = j.at("reference_duration").get<double>();
    in.estimated_duration = j.at("estimated_duration").get<double>();
    if (j.contains("reference")) in.reference = j.at("reference").get<std::string>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed selection record: ") + e.what());
  }
  return in;
}

json to_json(const EvalReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    json row = {{"id", r.id},
                {"tag", tag_name(r.tag)},
                {"reference_duration", r.reference_duration},
                {"estimated_duration", r.estimated_duration},
                {"ratio", r.ratio},
                {"compliant", r.compliant}};
    if (r.bleu) {
      row["bleu_stats"] = {{"matches", r.bleu->matches},
                           {"totals", r.bleu->totals},
                           {"hyp_length", r.bleu->hyp_length},
                           {"ref_length", r.bleu->ref_length}};
    }
    rows.push_back(std::move(row));
  }
  json j = {{"src", report.src},
            {"epsilon", report.epsilon},
            {"unit", report.unit},
            {"utterances", report.rows.size()},
            {"rows", rows}};
  j["length_ratio"] = report.length_ratio ? json(*report.length_ratio) : json(nullptr);
  j["bleu"] = report.bleu ? json(*report.bleu) : json(nullptr);
  return j;
}

json to_json(const BenchReport& report) {
  auto series = [](const BenchSeries& s) {
    json tag_rows;
    for (LengthTag t : kAllTags) tag_rows[std::string(tag_name(t))] = s.tag_rows[tag_index(t)];
    return json{{"samples", s.samples},      {"median", s.median}, {"mean", s.mean},
                {"invocations", s.invocations}, {"rows", s.rows},     {"tag_rows", tag_rows}};
  };
  return {{"utterances", report.utterances},
          {"repeats", report.repeats},
          {"beam_size", report.beam_size},
          {"per_tag", report.per_tag},
          {"pass_width", report.pass_width},
          {"labs", series(report.labs)},
          {"separate_passes", series(report.separate)},
          {"single_pass", series(report.single)}};
}

}  // namespace labsearch
