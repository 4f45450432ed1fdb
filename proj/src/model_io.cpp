#include "labs/model_io.hpp"

#include "labs/records.hpp"

namespace labsearch {

using nlohmann::json;

namespace {

json counts_to_json(const NGramCounts& c) {
  json next = json::array();
  for (const auto& [tok, n] : c.next) next.push_back({tok, n});
  return next;
}

NGramCounts counts_from_json(const json& j) {
  NGramCounts c;
  for (const auto& pair : j) {
    c.next.emplace_back(pair.at(0).get<TokenId>(), pair.at(1).get<std::uint64_t>());
    c.total += c.next.back().second;
  }
  return c;
}

void check_envelope(const json& j) {
  if (!j.is_object() || j.value("format", "") != kModelFormat) {
    throw DataError("not a labs model file");
  }
  if (j.value("version", 0) != kModelVersion) {
    throw DataError("unsupported model version " + j.value("version", json()).dump());
  }
}

}  // namespace

json vocabulary_to_json(const Vocabulary& vocab) {
  json j;
  j["tokens"] = vocab.tokens();
  j["eos"] = vocab.eos();
  for (LengthTag t : kAllTags) j[std::string(tag_name(t))] = vocab.tag_token(t);
  return j;
}

Vocabulary vocabulary_from_json(const json& j) {
  return Vocabulary(j.at("tokens").get<std::vector<std::string>>(), j.at("eos").get<TokenId>(),
                    {j.at("short").get<TokenId>(), j.at("normal").get<TokenId>(),
                     j.at("long").get<TokenId>()});
}

json model_to_json(const NGramModel& model) {
  const auto& o = model.options();
  json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["kind"] = "ngram";
  j["vocabulary"] = vocabulary_to_json(model.vocabulary());
  j["order"] = o.order;
  j["weights"] = o.weights;
  j["floor"] = o.floor;
  j["bucket_width"] = o.bucket_width;
  j["unigram"] = counts_to_json(model.unigram());
  json tables = json::array();
  for (const auto& table : model.tables()) {
    json entries = json::array();
    for (const auto& [key, counts] : table) {
      entries.push_back({{"bucket", key[0]},
                         {"context", std::vector<std::int32_t>(key.begin() + 1, key.end())},
                         {"next", counts_to_json(counts)}});
    }
    tables.push_back(std::move(entries));
  }
  j["tables"] = std::move(tables);
  return j;
}

json model_to_json(const TableModel& model) {
  json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["kind"] = "table";
  j["vocabulary"] = vocabulary_to_json(model.vocabulary());
  j["order"] = model.order();
  j["default"] = model.default_probs();
  json contexts = json::array();
  for (const auto& [key, probs] : model.contexts()) {
    contexts.push_back({{"context", key}, {"probs", probs}});
  }
  j["contexts"] = std::move(contexts);
  return j;
}

std::unique_ptr<ScoringModel> model_from_json(const json& j) {
  check_envelope(j);
  try {
    auto vocab = vocabulary_from_json(j.at("vocabulary"));
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "ngram") {
      NGramOptions o;
      o.order = j.at("order").get<std::size_t>();
      o.weights = j.at("weights").get<std::vector<double>>();
      o.floor = j.at("floor").get<double>();
      o.bucket_width = j.at("bucket_width").get<std::size_t>();
      std::vector<NGramTable> tables;
      for (const auto& entries : j.at("tables")) {
        NGramTable table;
        for (const auto& e : entries) {
          NGramKey key = {e.at("bucket").get<std::int32_t>()};
          for (const auto& id : e.at("context")) key.push_back(id.get<std::int32_t>());
          table.emplace(std::move(key), counts_from_json(e.at("next")));
        }
        tables.push_back(std::move(table));
      }
      return std::make_unique<NGramModel>(std::move(vocab), std::move(o), std::move(tables),
                                          counts_from_json(j.at("unigram")));
    }
    if (kind == "table") {
      std::map<TableModel::Key, std::vector<double>> contexts;
      for (const auto& e : j.at("contexts")) {
        contexts.emplace(e.at("context").get<TableModel::Key>(),
                         e.at("probs").get<std::vector<double>>());
      }
      return std::make_unique<TableModel>(std::move(vocab), j.at("order").get<std::size_t>(),
                                          j.at("default").get<std::vector<double>>(),
                                          std::move(contexts));
    }
    throw DataError("unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

std::unique_ptr<ScoringModel> load_model(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError("model '" + path + "' is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

}  // namespace labsearch
