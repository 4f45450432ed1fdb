#include "labs/duration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace labsearch {

void validate(const DurationProfile& profile) {
  for (const auto& [ph, ms] : profile.phoneme_ms) {
    if (!(ms > 0.0) || !std::isfinite(ms)) {
      throw DataError("profile '" + profile.id + "': duration of '" + ph + "' must be positive");
    }
  }
  if (!(profile.allowance_ms >= 0.0)) {
    throw DataError("profile '" + profile.id + "': allowance must be non-negative");
  }
}

double estimate_duration(const DurationProfile& profile, std::span<const std::string> phonemes) {
  double ms = profile.allowance_ms;
  for (const auto& ph : phonemes) {
    auto it = profile.phoneme_ms.find(ph);
    if (it == profile.phoneme_ms.end()) {
      throw DataError("phoneme '" + ph + "' missing from duration profile '" + profile.id + "'");
    }
    ms += it->second;
  }
  return ms / 1000.0;
}

double estimate_duration(const DurationProfile& profile, std::string_view text,
                         const G2PLexicon& lexicon) {
  if (normalize_words(text).empty()) throw DataError("cannot estimate the duration of empty text");
  auto phonemes = g2p(lexicon, text);
  return estimate_duration(profile, phonemes);
}

bool is_compliant(double ratio, double epsilon) { return std::abs(ratio - 1.0) <= epsilon + 1e-12; }

void validate(const SelectionPolicy& policy) {
  if (!(policy.epsilon > 0.0)) throw ContractError("compliance threshold must be positive");
  if (!(policy.margin >= 0.0)) throw ContractError("score margin must be non-negative");
}

Selection select_hypothesis(const DecodeResult& result, const Vocabulary& vocab,
                            const SourceUtterance& src, const DurationProfile& profile,
                            const SelectionPolicy& policy, const G2PLexicon& lexicon) {
  validate(policy);
  if (!(src.reference_duration > 0.0)) {
    throw ContractError("utterance '" + src.id + "' needs a positive reference duration");
  }
  auto ranked = result.ranked();
  if (ranked.empty()) throw DataError("utterance '" + src.id + "' has no completed hypotheses");

  Selection out;
  out.reference_duration = src.reference_duration;
  const double best_score = ranked.front().score;
  for (auto& h : ranked) {
    CandidateDiagnostic d;
    d.text = vocab.detokenize(h.tokens);
    // A bare "[tag] EOS" hypothesis has no words; it costs only the allowance.
    if (normalize_words(d.text).empty()) {
      d.estimated_duration = profile.allowance_ms / 1000.0;
    } else {
      d.estimated_duration = estimate_duration(profile, d.text, lexicon);
    }
    d.ratio = d.estimated_duration / src.reference_duration;
    d.compliant = is_compliant(d.ratio, policy.epsilon);
    d.eligible = policy.margin <= 0.0 || h.tag == LengthTag::Normal ||
                 h.score >= best_score - policy.margin;
    d.hypothesis = std::move(h);
    out.candidates.push_back(std::move(d));
  }

  auto closer = [](const CandidateDiagnostic& a, const CandidateDiagnostic& b) {
    const double da = std::abs(a.ratio - 1.0), db = std::abs(b.ratio - 1.0);
    if (da != db) return da < db;
    return ranks_before(a.hypothesis, b.hypothesis);
  };

  std::optional<std::size_t> pick;
  for (std::size_t i = 0; i < out.candidates.size(); ++i) {
    if (!out.candidates[i].eligible) continue;
    if (!pick || closer(out.candidates[i], out.candidates[*pick])) pick = i;
  }
  if (!pick) {
    out.used_fallback = true;
    pick = 0;  // candidates are ranked, so index 0 is the best score
    if (policy.fallback == FallbackOrder::ClosestRatio) {
      for (std::size_t i = 1; i < out.candidates.size(); ++i) {
        if (closer(out.candidates[i], out.candidates[*pick])) pick = i;
      }
    }
  }
  out.chosen = *pick;
  return out;
}

}  // namespace labsearch
