#pragma once

#include <atomic>
#include <map>
#include <span>
#include <vector>

#include "labs/core.hpp"

namespace labsearch {

// Log-probability of an impossible token. A finite sentinel keeps score sums
// free of NaN; compare against it with ==, never with a tolerance.
inline constexpr double kLogZero = -1e30;

inline bool is_possible(double logp) { return logp != kLogZero; }

// log(p) with p == 0 mapped to kLogZero.
double safe_log(double p);

using Prefix = std::span<const TokenId>;

// Conditional next-token distribution P(v | prefix, tag, source). A prefix
// always starts with its tag token and never contains EOS. Implementations
// must be pure and safe to query from many threads.
class ScoringModel {
 public:
  virtual ~ScoringModel() = default;

  virtual const Vocabulary& vocabulary() const = 0;

  // One log-probability per vocabulary token; tag tokens score kLogZero.
  std::vector<double> next_log_probs(const SourceUtterance& src, Prefix prefix) const;

  // Scores every prefix in one invocation. `out` is row-major,
  // prefixes.size() x vocabulary().size().
  void score_batch(const SourceUtterance& src, std::span<const Prefix> prefixes,
                   std::span<double> out) const;

 protected:
  virtual void do_next_log_probs(const SourceUtterance& src, Prefix prefix,
                                 std::span<double> out) const = 0;

  // Serial reference: one do_next_log_probs per row.
  virtual void do_score_batch(const SourceUtterance& src, std::span<const Prefix> prefixes,
                              std::span<double> out) const;

  void check_prefix(Prefix prefix) const;
};

// Explicit distributions keyed on (tag token, last `order` non-tag tokens).
// Prefixes shorter than `order` use their full history as the key, so a model
// with order >= max length conditions on the whole prefix.
class TableModel final : public ScoringModel {
 public:
  // Context key: tag token first, then up to `order` most recent tokens.
  using Key = std::vector<TokenId>;

  // Probabilities (not logs) over the full vocabulary; each must sum to 1
  // within 1e-9 and give zero mass to tag tokens.
  TableModel(Vocabulary vocab, std::size_t order, std::vector<double> default_probs,
             std::map<Key, std::vector<double>> contexts = {});

  const Vocabulary& vocabulary() const override { return vocab_; }
  std::size_t order() const { return order_; }
  const std::vector<double>& default_probs() const { return default_probs_; }
  const std::map<Key, std::vector<double>>& contexts() const { return contexts_; }

  Key key_for(Prefix prefix) const;

 protected:
  void do_next_log_probs(const SourceUtterance& src, Prefix prefix,
                         std::span<double> out) const override;

 private:
  void check_distribution(const std::vector<double>& probs, const char* what) const;

  Vocabulary vocab_;
  std::size_t order_;
  std::vector<double> default_probs_;
  std::map<Key, std::vector<double>> contexts_;
  std::vector<double> default_logs_;
  std::map<Key, std::vector<double>> context_logs_;
};

// Forwards to another model and counts invocations (score_batch or
// next_log_probs calls) and rows (prefixes scored).
class CountingModel final : public ScoringModel {
 public:
  explicit CountingModel(const ScoringModel& inner) : inner_(inner) {}

  const Vocabulary& vocabulary() const override { return inner_.vocabulary(); }

  std::size_t invocations() const { return invocations_.load(); }
  std::size_t rows() const { return rows_.load(); }
  std::size_t rows(LengthTag tag) const { return tag_rows_[tag_index(tag)].load(); }
  void reset() {
    invocations_ = 0;
    rows_ = 0;
    for (auto& r : tag_rows_) r = 0;
  }

 protected:
  void do_next_log_probs(const SourceUtterance& src, Prefix prefix,
                         std::span<double> out) const override;
  void do_score_batch(const SourceUtterance& src, std::span<const Prefix> prefixes,
                      std::span<double> out) const override;

 private:
  const ScoringModel& inner_;
  mutable std::atomic<std::size_t> invocations_{0};
  mutable std::atomic<std::size_t> rows_{0};
  mutable PerTag<std::atomic<std::size_t>> tag_rows_{};

  void count_row(Prefix prefix) const;
};

}  // namespace labsearch
