#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace labsearch {

using TokenId = std::int32_t;

// Violated caller precondition (bad prefix, inconsistent config).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed or inconsistent input data (files, corpora, profiles).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LengthTag : std::uint8_t { Short = 0, Normal = 1, Long = 2 };

inline constexpr std::size_t kNumTags = 3;
inline constexpr std::array<LengthTag, kNumTags> kAllTags = {LengthTag::Short, LengthTag::Normal,
                                                           LengthTag::Long};

constexpr std::size_t tag_index(LengthTag tag) { return static_cast<std::size_t>(tag); }

std::string_view tag_name(LengthTag tag);
std::optional<LengthTag> parse_tag(std::string_view name);

// Per-tag storage indexed by tag_index().
template <class T>
using PerTag = std::array<T, kNumTags>;

class Vocabulary {
 public:
  struct Specials {
    std::string eos = "</s>";
    std::string short_tag = "<short>";
    std::string normal_tag = "<normal>";
    std::string long_tag = "<long>";
  };

  // Specials take ids 0..3 (EOS, short, normal, long); `words` follow in the
  // given order. Duplicates, empty tokens and tokens containing whitespace are
  // rejected.
  static Vocabulary build(const std::vector<std::string>& words);
  static Vocabulary build(const std::vector<std::string>& words, const Specials& specials);

  // Tokens in id order with explicit special assignments.
  Vocabulary(std::vector<std::string> tokens, TokenId eos, PerTag<TokenId> tags);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::optional<TokenId> find(std::string_view token) const;

  TokenId eos() const { return eos_; }
  TokenId tag_token(LengthTag tag) const { return tags_[tag_index(tag)]; }
  std::optional<LengthTag> tag_of(TokenId id) const;
  bool is_tag(TokenId id) const { return tag_of(id).has_value(); }

  // Joins the non-special tokens of a hypothesis with single spaces.
  std::string detokenize(const std::vector<TokenId>& ids) const;

  void save(std::ostream& out) const;
  static Vocabulary load(std::istream& in);

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_ && eos_ == other.eos_ && tags_ == other.tags_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId eos_;
  PerTag<TokenId> tags_;
};

TokenId tag_token_id(const Vocabulary& vocab, LengthTag tag);

struct Hypothesis {
  LengthTag tag = LengthTag::Normal;
  std::vector<TokenId> tokens;  // tokens[0] is the tag token
  double score = 0.0;           // cumulative natural-log probability
  bool completed = false;

  std::size_t length() const { return tokens.empty() ? 0 : tokens.size() - 1; }
};

// Score descending, then token ids ascending. Used for every ranking in the
// decoder so that results never depend on input order.
inline bool ranks_before(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.tokens < b.tokens;
}

enum class TagStatus : std::uint8_t { NotRequested, Ok, LengthExhausted };

std::string_view status_name(TagStatus status);

struct DecodeResult {
  PerTag<std::vector<Hypothesis>> hypotheses;  // completed, ranked per tag
  PerTag<TagStatus> status = {TagStatus::NotRequested, TagStatus::NotRequested,
                              TagStatus::NotRequested};
  std::size_t expanded = 0;  // hypotheses scored by the model
  std::size_t steps = 0;
  double wall_seconds = 0.0;

  const std::vector<Hypothesis>& of(LengthTag tag) const { return hypotheses[tag_index(tag)]; }
  std::size_t total() const;
  // All hypotheses across tags under ranks_before.
  std::vector<Hypothesis> ranked() const;
};

struct SourceUtterance {
  std::string id;
  std::vector<std::string> phonemes;
  double reference_duration = 0.0;  // seconds, silence-trimmed
  std::optional<std::string> reference_text;
};

void validate(const SourceUtterance& src);

}  // namespace labsearch
