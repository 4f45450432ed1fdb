#pragma once

#include <cstdint>
#include <vector>

#include "labs/duration.hpp"
#include "labs/lengthtag.hpp"

namespace labsearch {

// A seeded toy language pair for desk-scale experiments. Source words are
// three-letter CVC strings read letter by letter; target words are
// position-coded CVC words, so a target of L words is "p1 p2 ... pL".
// Training targets are drawn at roughly short_factor, 1 or long_factor times
// the source phoneme count. Test utterances get a per-speaker rate factor
// that stretches the source duration.
struct SynthOptions {
  std::uint64_t seed = 20261017;
  std::size_t train_pairs = 3000;
  std::size_t test_utterances = 200;
  std::size_t min_words = 3;
  std::size_t max_words = 10;
  double short_factor = 0.8;
  double long_factor = 1.2;
  double jitter = 0.03;
  double rate_min = 0.65;
  double rate_max = 1.5;
};

struct SynthCorpus {
  std::vector<TextPair> train;
  G2PLexicon source_lexicon;
  G2PLexicon target_lexicon;
  DurationProfile source_profile;
  DurationProfile target_profile;
  std::vector<std::string> test_text;
  std::vector<SourceUtterance> test;  // reference_text holds the normal-length target
};

inline constexpr std::size_t kSynthPhonemesPerWord = 3;

SynthCorpus make_synthetic_corpus(const SynthOptions& options = {});

}  // namespace labsearch
