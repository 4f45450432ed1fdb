#pragma once

#include <string>
#include <vector>

#include "labs/decode.hpp"

namespace labsearch {

struct BenchSeries {
  std::string name;
  std::vector<double> samples;  // seconds per utterance, one per timed repeat
  double median = 0.0;
  double mean = 0.0;
  std::size_t invocations = 0;  // batched model calls over the corpus
  std::size_t rows = 0;         // prefixes scored over the corpus
  PerTag<std::size_t> tag_rows = {0, 0, 0};
};

struct BenchReport {
  std::size_t utterances = 0;
  std::size_t repeats = 0;
  std::size_t beam_size = 0;
  std::size_t per_tag = 0;
  std::size_t pass_width = 0;  // ceil(N / |tags|)
  BenchSeries labs;            // one single-pass decode over all tags
  BenchSeries separate;        // one standard pass per tag, run back to back
  BenchSeries single;          // one standard pass (first tag of the set)
};

// Runs an untimed warm-up over the corpus (which also collects the query
// counts through a counting wrapper), then `repeats` timed rounds. Each round
// times the three configurations one after another on this thread.
BenchReport latency_bench(const ScoringModel& model, const std::vector<SourceUtterance>& inputs,
                          const BeamConfig& cfg, std::size_t repeats);

double median_of(std::vector<double> values);

std::string format_bench(const BenchReport& report);

}  // namespace labsearch
