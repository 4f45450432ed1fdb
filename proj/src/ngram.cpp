#include "labs/ngram.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

namespace labsearch {

namespace {

constexpr std::int32_t kNoBucket = 0;

NGramKey make_key(std::int32_t bucket, Prefix prefix, std::size_t order) {
  NGramKey key;
  key.reserve(order + 1);
  key.push_back(bucket);
  key.push_back(prefix.front());
  const std::size_t take = std::min(order - 1, prefix.size());
  key.insert(key.end(), prefix.end() - static_cast<std::ptrdiff_t>(take), prefix.end());
  return key;
}

NGramCounts freeze(const std::map<TokenId, std::uint64_t>& counts) {
  NGramCounts out;
  for (const auto& [tok, c] : counts) {
    out.next.emplace_back(tok, c);
    out.total += c;
  }
  return out;
}

}  // namespace

void validate(const NGramOptions& options) {
  if (options.order < 2) throw ContractError("n-gram order must be at least 2");
  if (options.weights.size() != options.order) {
    throw ContractError("need one interpolation weight per order");
  }
  double sum = 0.0;
  for (double w : options.weights) {
    if (!(w >= 0.0)) throw ContractError("interpolation weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ContractError("interpolation weights must sum to 1");
  if (!(options.floor >= 0.0 && options.floor < 1.0)) {
    throw ContractError("uniform floor must lie in [0, 1)");
  }
}

NGramModel::NGramModel(Vocabulary vocab, NGramOptions options, std::vector<NGramTable> tables,
                       NGramCounts unigram)
    : vocab_(std::move(vocab)),
      options_(std::move(options)),
      tables_(std::move(tables)),
      unigram_(std::move(unigram)) {
  validate(options_);
  if (tables_.size() != options_.order) throw DataError("n-gram model needs one table per order");
  if (unigram_.total == 0) throw DataError("n-gram model has an empty unigram table");
  auto check_counts = [this](const NGramCounts& c) {
    std::uint64_t total = 0;
    for (const auto& [tok, n] : c.next) {
      if (tok < 0 || static_cast<std::size_t>(tok) >= vocab_.size() || vocab_.is_tag(tok)) {
        throw DataError("n-gram counts reference an invalid token");
      }
      total += n;
    }
    if (total != c.total) throw DataError("n-gram count total mismatch");
  };
  check_counts(unigram_);
  for (const auto& table : tables_) {
    for (const auto& [key, counts] : table) {
      if (key.size() < 2 || !vocab_.is_tag(key[1])) throw DataError("bad n-gram context key");
      check_counts(counts);
    }
  }
  for (const auto& [key, counts] : tables_.front()) {
    if (auto tag = vocab_.tag_of(key[1])) seen_buckets_[tag_index(*tag)].push_back(key[0]);
  }
  for (auto& buckets : seen_buckets_) {
    std::sort(buckets.begin(), buckets.end());
    buckets.erase(std::unique(buckets.begin(), buckets.end()), buckets.end());
  }
  unigram_probs_.assign(vocab_.size(), 0.0);
  for (const auto& [tok, n] : unigram_.next) {
    unigram_probs_[static_cast<std::size_t>(tok)] =
        static_cast<double>(n) / static_cast<double>(unigram_.total);
  }
  non_tag_tokens_ = vocab_.size() - kNumTags;
}

std::int32_t NGramModel::bucket_of(const SourceUtterance& src) const {
  if (options_.bucket_width == 0) return kNoBucket;
  return static_cast<std::int32_t>(src.phonemes.size() / options_.bucket_width);
}

std::optional<std::int32_t> NGramModel::resolve_bucket(LengthTag tag, std::int32_t bucket) const {
  const auto& seen = seen_buckets_[tag_index(tag)];
  if (seen.empty()) return std::nullopt;
  auto it = std::lower_bound(seen.begin(), seen.end(), bucket);
  if (it != seen.end() && *it == bucket) return bucket;
  if (it == seen.end()) return seen.back();
  if (it == seen.begin()) return *it;
  auto below = *(it - 1);
  // Ties go to the smaller bucket.
  return (bucket - below) <= (*it - bucket) ? below : *it;
}

void NGramModel::score_row(std::optional<std::int32_t> bucket, Prefix prefix,
                           std::span<double> out) const {
  const std::size_t v = vocab_.size();
  std::vector<double> acc(v, 0.0);
  double carry = 0.0;
  if (bucket) {
    for (std::size_t m = options_.order; m >= 1; --m) {
      const double w = options_.weights[options_.order - m] + carry;
      const auto& table = tables_[m - 1];
      auto it = table.find(make_key(*bucket, prefix, m));
      if (it == table.end()) {
        carry = w;
        continue;
      }
      carry = 0.0;
      const double scale = w / static_cast<double>(it->second.total);
      for (const auto& [tok, n] : it->second.next) {
        acc[static_cast<std::size_t>(tok)] += scale * static_cast<double>(n);
      }
    }
  } else {
    carry = 1.0;
  }
  if (carry > 0.0) {
    for (std::size_t i = 0; i < v; ++i) acc[i] += carry * unigram_probs_[i];
  }
  const double uniform = options_.floor / static_cast<double>(non_tag_tokens_);
  const double keep = 1.0 - options_.floor;
  for (std::size_t i = 0; i < v; ++i) {
    if (vocab_.is_tag(static_cast<TokenId>(i))) {
      out[i] = kLogZero;
      continue;
    }
    out[i] = safe_log(keep * acc[i] + uniform);
  }
}

void NGramModel::do_next_log_probs(const SourceUtterance& src, Prefix prefix,
                                   std::span<double> out) const {
  auto tag = vocab_.tag_of(prefix.front());
  score_row(resolve_bucket(*tag, bucket_of(src)), prefix, out);
}

void NGramModel::do_score_batch(const SourceUtterance& src, std::span<const Prefix> prefixes,
                                std::span<double> out) const {
  const std::size_t v = vocab_.size();
  const std::int32_t bucket = bucket_of(src);
  PerTag<std::optional<std::int32_t>> resolved;
  for (LengthTag t : kAllTags) resolved[tag_index(t)] = resolve_bucket(t, bucket);
  const auto rows = static_cast<std::ptrdiff_t>(prefixes.size());
#pragma omp parallel for schedule(static) if (prefixes.size() * v >= 8192)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    const auto row = static_cast<std::size_t>(r);
    auto tag = vocab_.tag_of(prefixes[row].front());
    score_row(resolved[tag_index(*tag)], prefixes[row], out.subspan(row * v, v));
  }
}

NGramModel train_ngram(const std::vector<TaggedExample>& corpus, const NGramOptions& options) {
  validate(options);
  if (corpus.empty()) throw ContractError("cannot train on an empty corpus");
  if (options.bucket_width > 0) {
    for (const auto& ex : corpus) {
      if (ex.unit != LengthUnit::Phoneme) {
        throw ContractError("source bucketing requires phoneme-unit annotations");
      }
    }
  }

  std::vector<std::vector<std::string>> targets;
  targets.reserve(corpus.size());
  std::set<std::string> words;
  for (const auto& ex : corpus) {
    targets.push_back(normalize_words(ex.target));
    words.insert(targets.back().begin(), targets.back().end());
  }
  auto vocab = Vocabulary::build({words.begin(), words.end()});

  std::vector<std::map<NGramKey, std::map<TokenId, std::uint64_t>>> raw(options.order);
  std::map<TokenId, std::uint64_t> raw_unigram;
  std::vector<TokenId> seq;
  for (std::size_t e = 0; e < corpus.size(); ++e) {
    const auto& ex = corpus[e];
    const std::int32_t bucket =
        options.bucket_width == 0
            ? kNoBucket
            : static_cast<std::int32_t>(ex.source_units / options.bucket_width);
    seq.clear();
    seq.push_back(vocab.tag_token(ex.tag));
    for (const auto& w : targets[e]) {
      auto id = vocab.find(w);
      if (!id || vocab.is_tag(*id) || *id == vocab.eos()) {
        throw DataError("target token '" + w + "' collides with a special token");
      }
      seq.push_back(*id);
    }
    seq.push_back(vocab.eos());
    for (std::size_t i = 1; i < seq.size(); ++i) {
      Prefix prefix(seq.data(), i);
      for (std::size_t m = 1; m <= options.order; ++m) {
        ++raw[m - 1][make_key(bucket, prefix, m)][seq[i]];
      }
      ++raw_unigram[seq[i]];
    }
  }

  std::vector<NGramTable> tables(options.order);
  for (std::size_t m = 0; m < options.order; ++m) {
    for (const auto& [key, counts] : raw[m]) tables[m].emplace(key, freeze(counts));
  }
  return NGramModel(std::move(vocab), options, std::move(tables), freeze(raw_unigram));
}

}  // namespace labsearch
