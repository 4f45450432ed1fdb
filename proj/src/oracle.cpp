#include "labs/oracle.hpp"

#include <algorithm>
#include <string>

namespace labsearch {

namespace {

struct Walker {
  const ScoringModel& model;
  const SourceUtterance& src;
  std::size_t max_length;
  OracleResult& out;

  void visit(std::vector<TokenId>& prefix, double score) {
    const auto logp = model.next_log_probs(src, prefix);
    ++out.prefixes_scored;
    const auto& vocab = model.vocabulary();
    const std::size_t emitted = prefix.size();  // tokens after the tag, once v is appended
    for (std::size_t v = 0; v < logp.size(); ++v) {
      if (!is_possible(logp[v])) continue;
      const auto id = static_cast<TokenId>(v);
      if (vocab.is_tag(id)) continue;
      const double next = score + logp[v];
      if (id == vocab.eos()) {
        Hypothesis h;
        h.tag = *vocab.tag_of(prefix.front());
        h.tokens = prefix;
        h.tokens.push_back(id);
        h.score = next;
        h.completed = true;
        out.ranked.push_back(std::move(h));
      } else if (emitted < max_length) {
        prefix.push_back(id);
        visit(prefix, next);
        prefix.pop_back();
      }
    }
  }
};

}  // namespace

OracleResult enumerate_oracle(const ScoringModel& model, const SourceUtterance& src, LengthTag tag,
                              std::size_t max_length, std::size_t cap) {
  if (max_length < 1) throw ContractError("max length must be at least 1");
  const auto& vocab = model.vocabulary();
  // Prefixes that may be scored: sum over depth d < T of W^d, W = word tokens.
  const std::size_t words = vocab.size() - kNumTags - 1;
  std::size_t bound = 0;
  std::size_t layer = 1;
  for (std::size_t d = 0; d < max_length; ++d) {
    bound += layer;
    if (bound > cap) {
      throw OracleCapExceeded("oracle enumeration needs more than " + std::to_string(cap) +
                              " prefixes");
    }
    if (words > 0 && layer > cap / words + 1) {
      layer = cap + 1;
    } else {
      layer *= words;
    }
  }

  OracleResult out;
  std::vector<TokenId> prefix = {vocab.tag_token(tag)};
  Walker{model, src, max_length, out}.visit(prefix, 0.0);
  std::sort(out.ranked.begin(), out.ranked.end(), ranks_before);
  if (!out.ranked.empty()) out.best = out.ranked.front();
  return out;
}

}  // namespace labsearch
