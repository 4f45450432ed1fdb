#include "labs/core.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>

namespace labsearch {

namespace {

constexpr std::string_view kVocabMagic = "labs-vocab";
constexpr int kVocabVersion = 1;

bool has_space(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

std::string_view tag_name(LengthTag tag) {
  switch (tag) {
    case LengthTag::Short:
      return "short";
    case LengthTag::Normal:
      return "normal";
    case LengthTag::Long:
      return "long";
  }
  return "?";
}

std::optional<LengthTag> parse_tag(std::string_view name) {
  for (LengthTag t : kAllTags) {
    if (tag_name(t) == name) return t;
  }
  return std::nullopt;
}

std::string_view status_name(TagStatus status) {
  switch (status) {
    case TagStatus::NotRequested:
      return "not-requested";
    case TagStatus::Ok:
      return "ok";
    case TagStatus::LengthExhausted:
      return "length-exhausted";
  }
  return "?";
}

Vocabulary Vocabulary::build(const std::vector<std::string>& words) { return build(words, Specials{}); }

Vocabulary Vocabulary::build(const std::vector<std::string>& words, const Specials& specials) {
  std::vector<std::string> tokens = {specials.eos, specials.short_tag, specials.normal_tag,
                                     specials.long_tag};
  tokens.insert(tokens.end(), words.begin(), words.end());
  return Vocabulary(std::move(tokens), 0, {1, 2, 3});
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, TokenId eos, PerTag<TokenId> tags)
    : tokens_(std::move(tokens)), eos_(eos), tags_(tags) {
  const auto n = static_cast<TokenId>(tokens_.size());
  for (TokenId i = 0; i < n; ++i) {
    const auto& tok = tokens_[static_cast<std::size_t>(i)];
    if (tok.empty() || has_space(tok)) {
      throw DataError("vocabulary token " + std::to_string(i) + " is empty or contains whitespace");
    }
    if (!index_.emplace(tok, i).second) throw DataError("duplicate vocabulary token '" + tok + "'");
  }
  auto in_range = [n](TokenId id) { return id >= 0 && id < n; };
  if (!in_range(eos_)) throw DataError("EOS id out of range");
  for (TokenId t : tags_) {
    if (!in_range(t)) throw DataError("tag token id out of range");
    if (t == eos_) throw DataError("tag token collides with EOS");
  }
  if (tags_[0] == tags_[1] || tags_[0] == tags_[2] || tags_[1] == tags_[2]) {
    throw DataError("tag tokens must be distinct");
  }
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<LengthTag> Vocabulary::tag_of(TokenId id) const {
  for (LengthTag t : kAllTags) {
    if (tags_[tag_index(t)] == id) return t;
  }
  return std::nullopt;
}

std::string Vocabulary::detokenize(const std::vector<TokenId>& ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (id == eos_ || is_tag(id)) continue;
    if (!out.empty()) out += ' ';
    out += token(id);
  }
  return out;
}

// Header: "labs-vocab\t1\teos=<id>\tshort=<id>\tnormal=<id>\tlong=<id>",
// then one token per line in id order.
void Vocabulary::save(std::ostream& out) const {
  out << kVocabMagic << '\t' << kVocabVersion << "\teos=" << eos_;
  for (LengthTag t : kAllTags) out << '\t' << tag_name(t) << '=' << tags_[tag_index(t)];
  out << '\n';
  for (const auto& tok : tokens_) out << tok << '\n';
}

Vocabulary Vocabulary::load(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw DataError("vocabulary file is empty");
  std::istringstream fields(header);
  std::string magic, version;
  std::getline(fields, magic, '\t');
  std::getline(fields, version, '\t');
  if (magic != kVocabMagic) throw DataError("not a vocabulary file (bad header)");
  if (version != std::to_string(kVocabVersion)) {
    throw DataError("unsupported vocabulary version '" + version + "'");
  }
  std::optional<TokenId> eos;
  PerTag<std::optional<TokenId>> tags;
  std::string field;
  while (std::getline(fields, field, '\t')) {
    auto eq = field.find('=');
    if (eq == std::string::npos) throw DataError("bad vocabulary header field '" + field + "'");
    const std::string key = field.substr(0, eq);
    TokenId id = 0;
    try {
      id = static_cast<TokenId>(std::stol(field.substr(eq + 1)));
    } catch (const std::exception&) {
      throw DataError("bad id in vocabulary header field '" + field + "'");
    }
    if (key == "eos") {
      eos = id;
    } else if (auto t = parse_tag(key)) {
      tags[tag_index(*t)] = id;
    } else {
      throw DataError("unknown vocabulary header key '" + key + "'");
    }
  }
  if (!eos || !tags[0] || !tags[1] || !tags[2]) {
    throw DataError("vocabulary header must declare eos, short, normal and long");
  }
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) tokens.push_back(line);
  return Vocabulary(std::move(tokens), *eos, {*tags[0], *tags[1], *tags[2]});
}

TokenId tag_token_id(const Vocabulary& vocab, LengthTag tag) { return vocab.tag_token(tag); }

std::size_t DecodeResult::total() const {
  std::size_t n = 0;
  for (const auto& list : hypotheses) n += list.size();
  return n;
}

std::vector<Hypothesis> DecodeResult::ranked() const {
  std::vector<Hypothesis> all;
  for (const auto& list : hypotheses) all.insert(all.end(), list.begin(), list.end());
  std::sort(all.begin(), all.end(), ranks_before);
  return all;
}

void validate(const SourceUtterance& src) {
  if (src.phonemes.empty()) throw DataError("utterance '" + src.id + "' has no phonemes");
  if (!(src.reference_duration >= 0.0)) {
    throw DataError("utterance '" + src.id + "' has a negative reference duration");
  }
}

}  // namespace labsearch
