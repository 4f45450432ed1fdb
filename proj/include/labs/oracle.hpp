#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "labs/core.hpp"
#include "labs/scoring.hpp"

namespace labsearch {

class OracleCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultOracleCap = 10'000'000;

struct OracleResult {
  std::optional<Hypothesis> best;
  std::vector<Hypothesis> ranked;  // every complete sequence, ranks_before order
  std::size_t prefixes_scored = 0;
};

// Exhaustive enumeration of every completed sequence of at most `max_length`
// tokens after the tag token. Refuses up front when the number of prefixes
// to score could exceed `cap`.
OracleResult enumerate_oracle(const ScoringModel& model, const SourceUtterance& src, LengthTag tag,
                              std::size_t max_length, std::size_t cap = kDefaultOracleCap);

}  // namespace labsearch
