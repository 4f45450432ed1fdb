#pragma once

#include <string>
#include <vector>

#include "labs/decode.hpp"

namespace labsearch {

enum class DecodeMode { Labs, Standard };

struct DecodeJob {
  DecodeMode mode = DecodeMode::Labs;
  BeamConfig beam;
  LengthTag standard_tag = LengthTag::Normal;  // Standard mode only; width = beam.beam_size
};

struct CorpusItem {
  DecodeResult result;
  std::string error;  // non-empty when this utterance failed

  bool ok() const { return error.empty(); }
};

DecodeResult decode_one(const ScoringModel& model, const SourceUtterance& src, const DecodeJob& job);

// Serial reference loop.
std::vector<CorpusItem> decode_corpus_serial(const ScoringModel& model,
                                             const std::vector<SourceUtterance>& sources,
                                             const DecodeJob& job);

// Utterances decoded concurrently against the shared model; output order
// matches input order and equals the serial loop except for wall times.
std::vector<CorpusItem> decode_corpus(const ScoringModel& model,
                                      const std::vector<SourceUtterance>& sources,
                                      const DecodeJob& job, int jobs);

}  // namespace labsearch
