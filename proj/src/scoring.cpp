#include "labs/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace labsearch {

double safe_log(double p) { return p > 0.0 ? std::log(p) : kLogZero; }

void ScoringModel::check_prefix(Prefix prefix) const {
  const auto& vocab = vocabulary();
  if (prefix.empty() || !vocab.is_tag(prefix.front())) {
    throw ContractError("prefix must start with a length tag token");
  }
  for (std::size_t i = 1; i < prefix.size(); ++i) {
    const TokenId id = prefix[i];
    if (id < 0 || static_cast<std::size_t>(id) >= vocab.size()) {
      throw ContractError("prefix token id " + std::to_string(id) + " out of range");
    }
    if (id == vocab.eos()) throw ContractError("prefix contains EOS");
    if (vocab.is_tag(id)) throw ContractError("tag token after position 0");
  }
}

std::vector<double> ScoringModel::next_log_probs(const SourceUtterance& src, Prefix prefix) const {
  check_prefix(prefix);
  std::vector<double> out(vocabulary().size(), kLogZero);
  do_next_log_probs(src, prefix, out);
  for (LengthTag t : kAllTags) out[static_cast<std::size_t>(vocabulary().tag_token(t))] = kLogZero;
  return out;
}

void ScoringModel::score_batch(const SourceUtterance& src, std::span<const Prefix> prefixes,
                               std::span<double> out) const {
  const std::size_t v = vocabulary().size();
  if (out.size() != prefixes.size() * v) {
    throw ContractError("score_batch output has the wrong size");
  }
  for (Prefix p : prefixes) check_prefix(p);
  std::fill(out.begin(), out.end(), kLogZero);
  do_score_batch(src, prefixes, out);
  for (std::size_t r = 0; r < prefixes.size(); ++r) {
    for (LengthTag t : kAllTags) {
      out[r * v + static_cast<std::size_t>(vocabulary().tag_token(t))] = kLogZero;
    }
  }
}

void ScoringModel::do_score_batch(const SourceUtterance& src, std::span<const Prefix> prefixes,
                                  std::span<double> out) const {
  const std::size_t v = vocabulary().size();
  for (std::size_t r = 0; r < prefixes.size(); ++r) {
    do_next_log_probs(src, prefixes[r], out.subspan(r * v, v));
  }
}

// ---------------------------------------------------------------------------

TableModel::TableModel(Vocabulary vocab, std::size_t order, std::vector<double> default_probs,
                       std::map<Key, std::vector<double>> contexts)
    : vocab_(std::move(vocab)),
      order_(order),
      default_probs_(std::move(default_probs)),
      contexts_(std::move(contexts)) {
  check_distribution(default_probs_, "default distribution");
  default_logs_.resize(default_probs_.size());
  std::transform(default_probs_.begin(), default_probs_.end(), default_logs_.begin(), safe_log);
  for (const auto& [key, probs] : contexts_) {
    if (key.empty() || !vocab_.is_tag(key.front()) || key.size() > order_ + 1) {
      throw DataError("table context key must be a tag token plus at most `order` tokens");
    }
    check_distribution(probs, "context distribution");
    std::vector<double> logs(probs.size());
    std::transform(probs.begin(), probs.end(), logs.begin(), safe_log);
    context_logs_.emplace(key, std::move(logs));
  }
}

void TableModel::check_distribution(const std::vector<double>& probs, const char* what) const {
  if (probs.size() != vocab_.size()) {
    throw DataError(std::string(what) + " does not cover the vocabulary");
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw DataError(std::string(what) + " has a negative probability");
    sum += p;
  }
  for (LengthTag t : kAllTags) {
    if (probs[static_cast<std::size_t>(vocab_.tag_token(t))] != 0.0) {
      throw DataError(std::string(what) + " assigns mass to a tag token");
    }
  }
  if (std::abs(sum - 1.0) > 1e-9) throw DataError(std::string(what) + " does not sum to 1");
}

TableModel::Key TableModel::key_for(Prefix prefix) const {
  Key key;
  key.push_back(prefix.front());
  const std::size_t history = prefix.size() - 1;
  const std::size_t take = std::min(order_, history);
  key.insert(key.end(), prefix.end() - static_cast<std::ptrdiff_t>(take), prefix.end());
  return key;
}

void TableModel::do_next_log_probs(const SourceUtterance&, Prefix prefix,
                                   std::span<double> out) const {
  auto it = context_logs_.find(key_for(prefix));
  const auto& logs = it == context_logs_.end() ? default_logs_ : it->second;
  std::copy(logs.begin(), logs.end(), out.begin());
}

// ---------------------------------------------------------------------------

void CountingModel::do_next_log_probs(const SourceUtterance& src, Prefix prefix,
                                      std::span<double> out) const {
  ++invocations_;
  count_row(prefix);
  auto row = inner_.next_log_probs(src, prefix);
  std::copy(row.begin(), row.end(), out.begin());
}

void CountingModel::do_score_batch(const SourceUtterance& src, std::span<const Prefix> prefixes,
                                   std::span<double> out) const {
  ++invocations_;
  for (Prefix p : prefixes) count_row(p);
  inner_.score_batch(src, prefixes, out);
}

void CountingModel::count_row(Prefix prefix) const {
  ++rows_;
  if (auto tag = vocabulary().tag_of(prefix.front())) ++tag_rows_[tag_index(*tag)];
}

}  // namespace labsearch
