#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "labs/scoring.hpp"

namespace labsearch::testing {

inline SourceUtterance dummy_source(std::size_t phonemes = 6) {
  SourceUtterance s;
  s.id = "u";
  s.phonemes.assign(phonemes, "A");
  s.reference_duration = 1.0;
  return s;
}

inline Vocabulary word_vocab(std::size_t words) {
  std::vector<std::string> w;
  for (std::size_t i = 0; i < words; ++i) w.push_back("w" + std::to_string(i));
  return Vocabulary::build(w);
}

// Distribution with zero mass on tags; `zero_share` of the word tokens are
// made impossible at random, EOS keeps mass at least `eos_min`.
inline std::vector<double> random_distribution(const Vocabulary& vocab, std::mt19937_64& rng,
                                               double zero_share, double eos_min) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(vocab.size(), 0.0);
  double sum = 0.0;
  for (std::size_t v = 0; v < p.size(); ++v) {
    const auto id = static_cast<TokenId>(v);
    if (vocab.is_tag(id)) continue;
    if (id != vocab.eos() && u(rng) < zero_share) continue;
    // Quantized weights make exact score ties (and so the tie-break) common.
    p[v] = std::floor(u(rng) * 8.0) + 1.0;
    sum += p[v];
  }
  if (sum == 0.0) {
    p[static_cast<std::size_t>(vocab.eos())] = 1.0;
    sum = 1.0;
  }
  for (auto& x : p) x /= sum;
  auto& eos = p[static_cast<std::size_t>(vocab.eos())];
  if (eos < eos_min) {
    const double scale = (1.0 - eos_min) / (1.0 - eos);
    for (std::size_t v = 0; v < p.size(); ++v) p[v] *= scale;
    eos = eos_min;
  }
  // Renormalize so the sum is 1 to rounding.
  sum = 0.0;
  for (double x : p) sum += x;
  for (auto& x : p) x /= sum;
  return p;
}

// Random TableModel over `words` non-tag tokens whose contexts are the tag
// plus up to `order` previous tokens, every such context listed.
inline TableModel random_table_model(std::size_t words, std::size_t order, std::mt19937_64& rng,
                                     double zero_share = 0.3, double eos_min = 0.0) {
  auto vocab = word_vocab(words);
  std::map<TableModel::Key, std::vector<double>> contexts;
  std::vector<TokenId> word_ids;
  for (std::size_t v = 0; v < vocab.size(); ++v) {
    const auto id = static_cast<TokenId>(v);
    if (!vocab.is_tag(id) && id != vocab.eos()) word_ids.push_back(id);
  }
  for (LengthTag t : kAllTags) {
    std::vector<TableModel::Key> layer = {{vocab.tag_token(t)}};
    for (std::size_t d = 0; d <= order; ++d) {
      std::vector<TableModel::Key> next;
      for (const auto& key : layer) {
        contexts[key] = random_distribution(vocab, rng, zero_share, eos_min);
        if (d == order) continue;
        for (TokenId w : word_ids) {
          auto k = key;
          k.push_back(w);
          next.push_back(std::move(k));
        }
      }
      layer = std::move(next);
    }
  }
  auto fallback = random_distribution(vocab, rng, zero_share, eos_min);
  return TableModel(vocab, order, fallback, contexts);
}

// Point distribution on one token.
inline std::vector<double> point_mass(const Vocabulary& vocab, TokenId id) {
  std::vector<double> p(vocab.size(), 0.0);
  p[static_cast<std::size_t>(id)] = 1.0;
  return p;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("labs-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace labsearch::testing
