#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "labs/core.hpp"

namespace labsearch {

struct DurationRow {
  double reference = 0.0;   // seconds
  double hypothesis = 0.0;  // seconds
};

// Speech rate compliance: 100 * share of rows with |hyp/ref - 1| <= epsilon.
double src_metric(std::span<const DurationRow> rows, double epsilon);

// Corpus-level sum of hypothesis tokens over sum of reference tokens.
double length_ratio(const std::vector<std::vector<std::string>>& hyps,
                    const std::vector<std::vector<std::string>>& refs);

// BLEU tokenizer: every ASCII punctuation character becomes its own token,
// then the text is split on whitespace. Case is preserved.
std::vector<std::string> bleu_tokenize(std::string_view text);

inline constexpr std::size_t kBleuOrder = 4;

struct BleuStats {
  std::array<std::size_t, kBleuOrder> matches{};  // clipped n-gram matches
  std::array<std::size_t, kBleuOrder> totals{};   // hypothesis n-grams
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;

  BleuStats& operator+=(const BleuStats& other);
};

BleuStats sentence_stats(const std::vector<std::string>& hyp, const std::vector<std::string>& ref);

// BLEU-4 in [0, 100]: p1 is the plain clipped precision, p2..p4 use add-one
// smoothing (m + 1) / (t + 1); brevity penalty exp(1 - r/c) when c < r.
// Zero when p1 is zero.
double bleu_from_stats(const BleuStats& stats);

double corpus_bleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs);

struct EvalRow {
  std::string id;
  LengthTag tag = LengthTag::Normal;
  double reference_duration = 0.0;
  double estimated_duration = 0.0;
  double ratio = 0.0;
  bool compliant = false;
  std::string hypothesis;
  std::optional<std::string> reference;
  std::optional<BleuStats> bleu;  // present with a reference
};

struct EvalReport {
  double src = 0.0;
  std::optional<double> length_ratio;  // needs references on every row
  std::optional<double> bleu;
  double epsilon = 0.2;
  std::string unit = "phoneme";
  std::vector<EvalRow> rows;
};

struct EvalInput {
  std::string id;
  LengthTag tag = LengthTag::Normal;
  double reference_duration = 0.0;
  double estimated_duration = 0.0;
  std::string hypothesis;
  std::optional<std::string> reference;
};

EvalReport evaluate(const std::vector<EvalInput>& inputs, double epsilon,
                    const std::string& unit = "phoneme");

// Recomputes every aggregate from the rows.
bool self_consistent(const EvalReport& report);

std::string format_table(const EvalReport& report);

}  // namespace labsearch
