#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "labs/core.hpp"

namespace labsearch {

// Lowercases ASCII letters, drops ASCII punctuation and splits on whitespace.
// Non-ASCII bytes pass through unchanged.
std::vector<std::string> normalize_words(std::string_view text);

// Splits a UTF-8 string into code points (one string each).
std::vector<std::string> utf8_code_points(std::string_view text);

class G2PLexicon {
 public:
  using Phonemes = std::vector<std::string>;

  G2PLexicon() = default;
  // Keys are normalized words / single code points. Every entry must map to
  // a non-empty phoneme sequence.
  G2PLexicon(std::map<std::string, Phonemes> words, std::map<std::string, Phonemes> letter_rules);

  // Lexicon TSV: word<TAB>space-separated phonemes. Rules TSV: letter<TAB>phonemes.
  // load_files accepts an empty path for either file, not both.
  static G2PLexicon load(std::istream& lexicon_tsv, std::istream* rules_tsv);
  static G2PLexicon load_files(const std::string& lexicon_path, const std::string& rules_path);

  // Phonemes of one normalized word: lexicon entry, else letter rules.
  Phonemes word(std::string_view normalized) const;

  const std::map<std::string, Phonemes>& words() const { return words_; }
  const std::map<std::string, Phonemes>& letter_rules() const { return rules_; }

 private:
  std::map<std::string, Phonemes> words_;
  std::map<std::string, Phonemes> rules_;
};

// Concatenated phonemes of every word in `text`. Throws DataError on text that
// is empty after normalization or on a letter with no rule.
std::vector<std::string> g2p(const G2PLexicon& lexicon, std::string_view text);

enum class LengthUnit { Phoneme, Character };

std::string_view unit_name(LengthUnit unit);
std::optional<LengthUnit> parse_unit(std::string_view name);

// Phoneme mode: |g2p(text)|. Character mode: code points that are neither
// whitespace nor ASCII punctuation.
std::size_t count_units(std::string_view text, LengthUnit unit, const G2PLexicon& lexicon);

inline constexpr double kDefaultAlpha = 0.1;

struct TagAssignment {
  double ratio = 0.0;
  LengthTag tag = LengthTag::Normal;
};

// r = tgt / src. short if r < 1 - alpha, long if r > 1 + alpha, else normal
// (both boundaries belong to normal).
TagAssignment assign_tag(std::size_t src_units, std::size_t tgt_units, double alpha = kDefaultAlpha);

struct TaggedExample {
  std::string source;
  std::string target;
  std::size_t source_units = 0;
  std::size_t target_units = 0;
  double ratio = 0.0;
  LengthTag tag = LengthTag::Normal;
  LengthUnit unit = LengthUnit::Phoneme;
};

struct AnnotationFailure {
  std::size_t index = 0;  // position in the input
  std::string reason;
};

// Ratio histogram: bins of width 0.1 over [0, 3), plus one overflow bin.
inline constexpr std::size_t kRatioBins = 31;
inline constexpr double kRatioBinWidth = 0.1;

std::size_t ratio_bin(double ratio);

struct AnnotationReport {
  std::size_t total = 0;
  PerTag<std::size_t> tag_counts = {0, 0, 0};
  std::vector<std::size_t> histogram = std::vector<std::size_t>(kRatioBins, 0);
  std::vector<AnnotationFailure> failures;
  double alpha = kDefaultAlpha;
  LengthUnit unit = LengthUnit::Phoneme;
};

struct Annotation {
  std::vector<TaggedExample> examples;  // successful pairs, input order
  AnnotationReport report;
};

struct TextPair {
  std::string source;
  std::string target;
};

// Per-pair failures are recorded and skipped. jobs <= 1 runs the serial loop;
// larger values annotate pairs in parallel with identical output.
Annotation annotate_corpus(const std::vector<TextPair>& pairs, LengthUnit unit, double alpha,
                           const G2PLexicon& source_lexicon, const G2PLexicon& target_lexicon,
                           int jobs = 1);

std::string format_report(const AnnotationReport& report);

}  // namespace labsearch
