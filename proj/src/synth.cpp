#include "labs/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <set>

namespace labsearch {

namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

std::string phoneme_of(char letter) {
  return std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(letter))));
}

G2PLexicon::Phonemes spell(const std::string& word) {
  G2PLexicon::Phonemes out;
  for (char c : word) out.push_back(phoneme_of(c));
  return out;
}

}  // namespace

SynthCorpus make_synthetic_corpus(const SynthOptions& o) {
  if (o.min_words < 1 || o.max_words < o.min_words) throw ContractError("bad word range");
  if (!(o.rate_min > 0.0 && o.rate_max >= o.rate_min)) throw ContractError("bad rate range");

  std::mt19937_64 rng(o.seed);
  auto pick = [&](std::string_view letters) {
    std::uniform_int_distribution<std::size_t> d(0, letters.size() - 1);
    return letters[d(rng)];
  };
  auto cvc = [&] { return std::string{pick(kConsonants), pick(kVowels), pick(kConsonants)}; };

  SynthCorpus out;

  std::map<std::string, G2PLexicon::Phonemes> rules;
  for (char c : kConsonants) rules[std::string(1, c)] = {phoneme_of(c)};
  for (char c : kVowels) rules[std::string(1, c)] = {phoneme_of(c)};
  out.source_lexicon = G2PLexicon({}, rules);

  const auto longest = static_cast<std::size_t>(
      std::ceil(static_cast<double>(o.max_words) * o.long_factor * (1.0 + o.jitter))) + 1;
  std::vector<std::string> positions;
  std::set<std::string> used;
  while (positions.size() < longest) {
    auto w = cvc();
    if (used.insert(w).second) positions.push_back(w);
  }
  std::map<std::string, G2PLexicon::Phonemes> target_words;
  for (const auto& w : positions) target_words[w] = spell(w);
  out.target_lexicon = G2PLexicon(std::move(target_words), rules);

  // Consonants 60-90 ms, vowels 90-130 ms; both sides share the inventory.
  DurationProfile profile;
  std::uniform_real_distribution<double> cons_ms(60.0, 90.0), vowel_ms(90.0, 130.0);
  for (char c : kConsonants) profile.phoneme_ms[phoneme_of(c)] = std::round(cons_ms(rng));
  for (char c : kVowels) profile.phoneme_ms[phoneme_of(c)] = std::round(vowel_ms(rng));
  out.source_profile = profile;
  out.source_profile.id = "synthetic-source";
  out.target_profile = profile;
  out.target_profile.id = "synthetic-target";

  std::uniform_int_distribution<std::size_t> word_count(o.min_words, o.max_words);
  auto source_sentence = [&](std::size_t words) {
    std::string s;
    for (std::size_t i = 0; i < words; ++i) {
      if (i) s += ' ';
      s += cvc();
    }
    return s;
  };
  auto target_sentence = [&](std::size_t length) {
    std::string s;
    for (std::size_t i = 0; i < length; ++i) {
      if (i) s += ' ';
      s += positions[i];
    }
    return s;
  };

  std::uniform_int_distribution<int> klass(0, 2);
  std::uniform_real_distribution<double> jitter(-o.jitter, o.jitter);
  const double factors[] = {o.short_factor, 1.0, o.long_factor};
  for (std::size_t i = 0; i < o.train_pairs; ++i) {
    const std::size_t words = word_count(rng);
    const double f = factors[klass(rng)] * (1.0 + jitter(rng));
    const auto length = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(f * static_cast<double>(words))));
    out.train.push_back({source_sentence(words), target_sentence(length)});
  }

  std::uniform_real_distribution<double> rate(o.rate_min, o.rate_max);
  for (std::size_t i = 0; i < o.test_utterances; ++i) {
    const std::size_t words = word_count(rng);
    SourceUtterance u;
    u.id = "utt" + std::to_string(i);
    const auto text = source_sentence(words);
    u.phonemes = g2p(out.source_lexicon, text);
    u.reference_duration = estimate_duration(out.source_profile, u.phonemes) * rate(rng);
    u.reference_text = target_sentence(words);
    out.test_text.push_back(text);
    out.test.push_back(std::move(u));
  }
  return out;
}

}  // namespace labsearch
