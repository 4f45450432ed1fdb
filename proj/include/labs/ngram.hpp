#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "labs/lengthtag.hpp"
#include "labs/scoring.hpp"

namespace labsearch {

struct NGramOptions {
  std::size_t order = 3;
  // Highest order first; non-negative, summing to 1.
  std::vector<double> weights = {0.7, 0.2, 0.1};
  // Mass mixed in uniformly over non-tag tokens, in [0, 1).
  double floor = 1e-3;
  // Source phonemes per length bucket; 0 disables source conditioning.
  std::size_t bucket_width = 0;
};

void validate(const NGramOptions& options);

struct NGramCounts {
  std::vector<std::pair<TokenId, std::uint64_t>> next;  // sorted by token id
  std::uint64_t total = 0;
};

// Context key: {bucket, tag token, last (m-1) prefix tokens}. The prefix
// includes its tag token, so the tag also acts as the sentence start.
using NGramKey = std::vector<std::int32_t>;
using NGramTable = std::map<NGramKey, NGramCounts>;

// Tag-conditioned interpolated n-gram over target tokens. Every order's
// context carries the tag (and the source bucket when enabled); orders differ
// only in how much token history they see. Weight of an unseen context flows
// down to the next lower order, and finally to a tag-free unigram.
class NGramModel final : public ScoringModel {
 public:
  // tables[m - 1] holds order-m contexts.
  NGramModel(Vocabulary vocab, NGramOptions options, std::vector<NGramTable> tables,
             NGramCounts unigram);

  const Vocabulary& vocabulary() const override { return vocab_; }
  const NGramOptions& options() const { return options_; }
  const std::vector<NGramTable>& tables() const { return tables_; }
  const NGramCounts& unigram() const { return unigram_; }

  std::int32_t bucket_of(const SourceUtterance& src) const;
  // Bucket actually used for `tag`: the nearest bucket seen in training.
  std::optional<std::int32_t> resolve_bucket(LengthTag tag, std::int32_t bucket) const;

 protected:
  void do_next_log_probs(const SourceUtterance& src, Prefix prefix,
                         std::span<double> out) const override;
  // Rows are scored in parallel; each row matches do_next_log_probs bit for bit.
  void do_score_batch(const SourceUtterance& src, std::span<const Prefix> prefixes,
                      std::span<double> out) const override;

 private:
  void score_row(std::optional<std::int32_t> bucket, Prefix prefix, std::span<double> out) const;

  Vocabulary vocab_;
  NGramOptions options_;
  std::vector<NGramTable> tables_;
  NGramCounts unigram_;
  PerTag<std::vector<std::int32_t>> seen_buckets_;
  std::vector<double> unigram_probs_;
  std::size_t non_tag_tokens_ = 0;
};

// Maximum-likelihood counts from tagged examples; the target vocabulary is the
// sorted set of whitespace-separated target tokens. Bucketing requires
// phoneme-unit source counts.
NGramModel train_ngram(const std::vector<TaggedExample>& corpus, const NGramOptions& options);

}  // namespace labsearch
