#pragma once

#include <optional>
#include <vector>

#include "labs/core.hpp"
#include "labs/scoring.hpp"

namespace labsearch {

struct BeamConfig {
  std::size_t beam_size = 9;  // N
  std::size_t per_tag = 3;    // g, guaranteed slots per tag
  std::size_t max_length = 200;  // T, tokens after the tag token, EOS included
  std::vector<LengthTag> tags = {kAllTags.begin(), kAllTags.end()};
  // Stop once every tag has a finished hypothesis that beats all of its
  // active ones.
  bool early_stop = true;
  // Final ranking uses score / length^length_penalty when > 0. Search itself
  // always ranks by the raw cumulative score.
  double length_penalty = 0.0;
};

// Throws ContractError unless N >= 1, T >= 1, tags are non-empty and
// distinct, and per_tag * |tags| <= N.
void validate(const BeamConfig& cfg);

struct PerTagResolution {
  std::size_t per_tag = 0;
  bool degraded = false;
};

// Default guarantee: min(requested, floor(N / |tags|)). `degraded` reports
// that the request did not fit in the beam.
PerTagResolution resolve_per_tag(std::size_t beam_size, std::size_t num_tags,
                                 std::size_t requested = 3);

struct BeamState {
  PerTag<std::vector<Hypothesis>> active;    // incomplete, ranked per tag
  PerTag<std::vector<Hypothesis>> finished;  // completed
  std::size_t step = 0;

  std::size_t active_count() const;
};

// Expansion output before pruning, partitioned by tag.
struct CandidateSet {
  PerTag<std::vector<Hypothesis>> by_tag;
  std::size_t expanded = 0;  // parents scored
  std::size_t step = 0;

  std::size_t size() const;
};

// Extends every active hypothesis with every possible token, one batched
// model invocation for the whole beam. Extensions ending in EOS are completed.
CandidateSet expand(const BeamState& state, const ScoringModel& model, const SourceUtterance& src);

// Completed candidates go to `finished`. Of the incomplete ones, the best g
// per tag are reserved, then the remaining slots up to N are filled by score
// across tags. Ties rank the smaller token sequence first.
BeamState prune(CandidateSet candidates, const BeamConfig& cfg);

// Up to N hypotheses: the best of each non-empty pool first (best-scoring
// first while the budget lasts), then the rest by score.
DecodeResult select_nbest(const PerTag<std::vector<Hypothesis>>& finished, const BeamConfig& cfg);

// Single pass seeded with every tag in cfg.tags.
DecodeResult labs_decode(const ScoringModel& model, const SourceUtterance& src,
                         const BeamConfig& cfg);

// Classic beam search seeded with one tag token; the separate-pass baseline.
DecodeResult standard_beam_decode(const ScoringModel& model, const SourceUtterance& src,
                                  LengthTag tag, std::size_t width, std::size_t max_length,
                                  bool early_stop = true);

}  // namespace labsearch
