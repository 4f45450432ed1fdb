#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "labs/core.hpp"
#include "labs/lengthtag.hpp"

namespace labsearch {

// Per-phoneme expected durations standing in for a TTS duration model.
struct DurationProfile {
  std::string id;
  std::map<std::string, double> phoneme_ms;  // each > 0
  double allowance_ms = 0.0;                 // added once per utterance
};

void validate(const DurationProfile& profile);

// Seconds; throws DataError naming the first phoneme missing from the profile.
double estimate_duration(const DurationProfile& profile, std::span<const std::string> phonemes);
double estimate_duration(const DurationProfile& profile, std::string_view text,
                         const G2PLexicon& lexicon);

// |ratio - 1| <= epsilon, with 1e-12 slack so that boundary ratios such as
// 2.4 / 2.0 stay compliant despite rounding.
bool is_compliant(double ratio, double epsilon);

enum class FallbackOrder { ClosestRatio, BestScore };

struct SelectionPolicy {
  double epsilon = 0.2;
  // When > 0, a non-normal candidate is eligible only if its score is at
  // least best score - margin.
  double margin = 0.0;
  FallbackOrder fallback = FallbackOrder::ClosestRatio;
};

void validate(const SelectionPolicy& policy);

struct CandidateDiagnostic {
  Hypothesis hypothesis;
  std::string text;
  double estimated_duration = 0.0;
  double ratio = 0.0;
  bool eligible = false;
  bool compliant = false;
};

struct Selection {
  std::size_t chosen = 0;  // index into candidates
  std::vector<CandidateDiagnostic> candidates;  // every hypothesis of the result, ranked
  double reference_duration = 0.0;
  bool used_fallback = false;

  const CandidateDiagnostic& choice() const { return candidates.at(chosen); }
};

// Picks the eligible candidate whose estimated duration is closest to the
// reference (smallest |ratio - 1|), then higher score, then smaller tokens.
Selection select_hypothesis(const DecodeResult& result, const Vocabulary& vocab,
                            const SourceUtterance& src, const DurationProfile& profile,
                            const SelectionPolicy& policy, const G2PLexicon& lexicon);

}  // namespace labsearch
