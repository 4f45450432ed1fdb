#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "labs/decode.hpp"
#include "labs/oracle.hpp"
#include "support.hpp"

namespace labsearch {
namespace {

using testing::dummy_source;

Hypothesis hyp(LengthTag tag, std::vector<TokenId> tokens, double score, bool completed = false) {
  return Hypothesis{tag, std::move(tokens), score, completed};
}

// {a, b} plus EOS; <short> prefers to stop at once, <long> after four
// tokens, <normal> after two.
TableModel staged_model() {
  auto vocab = Vocabulary::build({"a", "b"});
  const TokenId a = 4, b = 5;
  std::map<TableModel::Key, std::vector<double>> ctx;
  auto dist = [&](double eos, double pa) {
    std::vector<double> p(vocab.size(), 0.0);
    p[0] = eos;
    p[4] = pa;
    p[5] = 1.0 - eos - pa;
    return p;
  };
  const std::pair<LengthTag, std::size_t> stops[] = {
      {LengthTag::Short, 0}, {LengthTag::Normal, 2}, {LengthTag::Long, 3}};
  for (auto [tag, stop] : stops) {
    std::vector<TableModel::Key> layer = {{vocab.tag_token(tag)}};
    for (std::size_t d = 0; d < 6; ++d) {
      std::vector<TableModel::Key> next;
      for (const auto& key : layer) {
        ctx[key] = d == stop ? dist(0.7, 0.2) : dist(0.05, 0.55);
        for (TokenId w : {a, b}) {
          auto k = key;
          k.push_back(w);
          next.push_back(k);
        }
      }
      layer = std::move(next);
    }
  }
  return TableModel(vocab, 6, dist(0.5, 0.25), ctx);
}

TEST(LabsDecode, ForcedImmediateEos) {
  auto vocab = testing::word_vocab(2);
  TableModel model(vocab, 1, testing::point_mass(vocab, vocab.eos()));
  auto result = labs_decode(model, dummy_source(), BeamConfig{});
  for (LengthTag t : kAllTags) {
    ASSERT_EQ(result.of(t).size(), 1u);
    EXPECT_EQ(result.of(t)[0].tokens, (std::vector<TokenId>{vocab.tag_token(t), vocab.eos()}));
    EXPECT_EQ(result.of(t)[0].score, 0.0);
    EXPECT_EQ(result.status[tag_index(t)], TagStatus::Ok);
  }
  EXPECT_EQ(result.steps, 1u);
}

TEST(LabsDecode, MatchesOracleOnStagedModel) {
  auto model = staged_model();
  BeamConfig cfg;
  cfg.max_length = 6;
  auto result = labs_decode(model, dummy_source(), cfg);
  const std::size_t expected_len[] = {1, 3, 4};
  for (LengthTag t : kAllTags) {
    auto oracle = enumerate_oracle(model, dummy_source(), t, 6);
    ASSERT_TRUE(oracle.best.has_value());
    ASSERT_FALSE(result.of(t).empty());
    EXPECT_EQ(result.of(t)[0].tokens, oracle.best->tokens);
    EXPECT_EQ(result.of(t)[0].score, oracle.best->score);
    EXPECT_EQ(result.of(t)[0].length(), expected_len[tag_index(t)]);
  }
}

TEST(LabsDecode, ReducesToStandardBeam) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 20; ++i) {
    auto model = testing::random_table_model(3, 2, rng);
    BeamConfig cfg;
    cfg.tags = {LengthTag::Normal};
    cfg.per_tag = 0;
    cfg.beam_size = 4;
    cfg.max_length = 5;
    auto labs = labs_decode(model, dummy_source(), cfg);
    auto standard = standard_beam_decode(model, dummy_source(), LengthTag::Normal, 4, 5);
    ASSERT_EQ(labs.of(LengthTag::Normal).size(), standard.of(LengthTag::Normal).size());
    for (std::size_t k = 0; k < labs.of(LengthTag::Normal).size(); ++k) {
      EXPECT_EQ(labs.of(LengthTag::Normal)[k].tokens, standard.of(LengthTag::Normal)[k].tokens);
      EXPECT_EQ(labs.of(LengthTag::Normal)[k].score, standard.of(LengthTag::Normal)[k].score);
    }
    EXPECT_EQ(labs.status, standard.status);
  }
}

TEST(LabsDecode, LengthExhaustedIsReportedNotThrown) {
  auto vocab = testing::word_vocab(1);
  TableModel model(vocab, 1, testing::point_mass(vocab, 4));
  BeamConfig cfg;
  cfg.max_length = 4;
  auto result = labs_decode(model, dummy_source(), cfg);
  for (LengthTag t : kAllTags) {
    EXPECT_TRUE(result.of(t).empty());
    EXPECT_EQ(result.status[tag_index(t)], TagStatus::LengthExhausted);
  }
  EXPECT_EQ(result.steps, 4u);
}

TEST(LabsDecode, UnrequestedTagsStayEmpty) {
  auto model = staged_model();
  BeamConfig cfg;
  cfg.tags = {LengthTag::Long, LengthTag::Short};
  cfg.beam_size = 6;
  cfg.max_length = 6;
  auto result = labs_decode(model, dummy_source(), cfg);
  EXPECT_EQ(result.status[tag_index(LengthTag::Normal)], TagStatus::NotRequested);
  EXPECT_TRUE(result.of(LengthTag::Normal).empty());
  EXPECT_FALSE(result.of(LengthTag::Long).empty());
}

TEST(LabsDecode, InvariantsOnRandomModels) {
  std::mt19937_64 rng(1234);
  for (int i = 0; i < 50; ++i) {
    auto model = testing::random_table_model(4, 3, rng);
    BeamConfig cfg;
    cfg.beam_size = 5;
    cfg.per_tag = 1;
    cfg.max_length = 6;
    auto a = labs_decode(model, dummy_source(), cfg);
    auto b = labs_decode(model, dummy_source(), cfg);
    EXPECT_LE(a.total(), cfg.beam_size);
    for (LengthTag t : kAllTags) {
      ASSERT_EQ(a.of(t).size(), b.of(t).size());
      for (std::size_t k = 0; k < a.of(t).size(); ++k) {
        const auto& h = a.of(t)[k];
        EXPECT_EQ(h.tokens, b.of(t)[k].tokens);
        EXPECT_EQ(h.score, b.of(t)[k].score);
        EXPECT_LE(h.score, 0.0);
        EXPECT_TRUE(h.completed);
        EXPECT_EQ(h.tokens.front(), model.vocabulary().tag_token(t));
        EXPECT_EQ(h.tokens.back(), model.vocabulary().eos());
        EXPECT_LE(h.length(), cfg.max_length);
        for (std::size_t j = 1; j < h.tokens.size(); ++j) EXPECT_FALSE(model.vocabulary().is_tag(h.tokens[j]));
        if (k > 0) {
          EXPECT_TRUE(ranks_before(a.of(t)[k - 1], h));
        }
      }
    }
  }
}

TEST(LabsDecode, BeamBoundAndMonotoneScoresEveryStep) {
  std::mt19937_64 rng(4321);
  auto model = testing::random_table_model(4, 2, rng, 0.2);
  BeamConfig cfg;
  cfg.beam_size = 7;
  cfg.per_tag = 2;
  BeamState state;
  for (LengthTag t : kAllTags) state.active[tag_index(t)].push_back(hyp(t, {model.vocabulary().tag_token(t)}, 0.0));
  for (int step = 0; step < 6 && state.active_count() > 0; ++step) {
    auto candidates = expand(state, model, dummy_source());
    for (const auto& list : candidates.by_tag) {
      for (const auto& c : list) {
        // Parent is the candidate minus its last token.
        bool found = false;
        for (const auto& p : state.active[tag_index(c.tag)]) {
          if (std::equal(p.tokens.begin(), p.tokens.end(), c.tokens.begin()) &&
              p.tokens.size() + 1 == c.tokens.size()) {
            EXPECT_LE(c.score, p.score);
            found = true;
          }
        }
        EXPECT_TRUE(found);
      }
    }
    state = prune(std::move(candidates), cfg);
    EXPECT_LE(state.active_count(), cfg.beam_size);
    for (const auto& list : state.active) {
      for (const auto& h : list) EXPECT_FALSE(h.completed);
    }
    for (const auto& list : state.finished) {
      for (const auto& h : list) EXPECT_TRUE(h.completed);
    }
  }
}

TEST(Expand, CardinalityAndScoreArithmetic) {
  auto vocab = Vocabulary::build({"a", "b", "c"});
  std::vector<double> p(vocab.size(), 0.0);
  p[0] = std::exp(-0.5);
  p[4] = 1.0 - std::exp(-0.5) - 0.1;
  p[5] = 0.1;
  TableModel model(vocab, 1, p);
  BeamState state;
  state.active[tag_index(LengthTag::Normal)].push_back(hyp(LengthTag::Normal, {2, 6}, -1.0));
  auto out = expand(state, model, dummy_source());
  const auto& c = out.by_tag[tag_index(LengthTag::Normal)];
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(out.expanded, 1u);
  for (const auto& h : c) {
    EXPECT_LE(h.score, -1.0);
    EXPECT_EQ(h.completed, h.tokens.back() == vocab.eos());
    if (h.completed) {
      EXPECT_DOUBLE_EQ(h.score, -1.5);
    }
  }
}

TEST(Prune, GuaranteesThenGlobalFill) {
  CandidateSet c;
  c.by_tag[0] = {hyp(LengthTag::Short, {1, 4}, -1), hyp(LengthTag::Short, {1, 5}, -2),
                 hyp(LengthTag::Short, {1, 6}, -3)};
  c.by_tag[1] = {hyp(LengthTag::Normal, {2, 4}, -5)};
  c.by_tag[2] = {hyp(LengthTag::Long, {3, 4}, -6)};
  BeamConfig cfg;
  cfg.beam_size = 4;
  cfg.per_tag = 1;
  auto state = prune(c, cfg);
  ASSERT_EQ(state.active_count(), 4u);
  ASSERT_EQ(state.active[0].size(), 2u);
  EXPECT_EQ(state.active[0][0].score, -1);
  EXPECT_EQ(state.active[0][1].score, -2);
  EXPECT_EQ(state.active[1][0].score, -5);
  EXPECT_EQ(state.active[2][0].score, -6);
}

TEST(Prune, TieBreakIsLexicographicAndOrderFree) {
  CandidateSet c;
  c.by_tag[1] = {hyp(LengthTag::Normal, {2, 7, 4}, -2), hyp(LengthTag::Normal, {2, 5, 9}, -2)};
  BeamConfig cfg;
  cfg.beam_size = 1;
  cfg.per_tag = 0;
  auto first = prune(c, cfg);
  std::swap(c.by_tag[1][0], c.by_tag[1][1]);
  auto second = prune(c, cfg);
  ASSERT_EQ(first.active[1].size(), 1u);
  EXPECT_EQ(first.active[1][0].tokens, (std::vector<TokenId>{2, 5, 9}));
  EXPECT_EQ(second.active[1][0].tokens, first.active[1][0].tokens);
}

TEST(Prune, EmptyTagReleasesItsSlots) {
  CandidateSet c;
  c.by_tag[0] = {hyp(LengthTag::Short, {1, 4}, -1), hyp(LengthTag::Short, {1, 5}, -2),
                 hyp(LengthTag::Short, {1, 6}, -3), hyp(LengthTag::Short, {1, 7}, -4)};
  c.by_tag[2] = {hyp(LengthTag::Long, {3, 4}, -9)};
  BeamConfig cfg;
  cfg.beam_size = 4;
  cfg.per_tag = 1;
  auto state = prune(c, cfg);
  EXPECT_EQ(state.active[0].size(), 3u);
  EXPECT_EQ(state.active[2].size(), 1u);
}

TEST(Prune, CompletedMoveToFinishedPools) {
  CandidateSet c;
  c.by_tag[0] = {hyp(LengthTag::Short, {1, 0}, -0.1, true), hyp(LengthTag::Short, {1, 4}, -5)};
  BeamConfig cfg;
  cfg.beam_size = 1;
  cfg.per_tag = 0;
  auto state = prune(c, cfg);
  EXPECT_EQ(state.finished[0].size(), 1u);
  EXPECT_EQ(state.active[0].size(), 1u);
}

TEST(SelectNBest, RepresentationBeatsGlobalScore) {
  PerTag<std::vector<Hypothesis>> pools;
  pools[0] = {hyp(LengthTag::Short, {1, 0}, -2, true)};
  pools[1] = {hyp(LengthTag::Normal, {2, 0}, -1, true), hyp(LengthTag::Normal, {2, 4, 0}, -1.5, true)};
  pools[2] = {hyp(LengthTag::Long, {3, 0}, -9, true)};
  BeamConfig cfg;
  cfg.beam_size = 3;
  cfg.per_tag = 1;
  auto r = select_nbest(pools, cfg);
  EXPECT_EQ(r.of(LengthTag::Short).size(), 1u);
  EXPECT_EQ(r.of(LengthTag::Normal).size(), 1u);
  ASSERT_EQ(r.of(LengthTag::Long).size(), 1u);
  EXPECT_EQ(r.of(LengthTag::Long)[0].score, -9);
}

TEST(SelectNBest, FillsByScoreAndFlagsEmptyPools) {
  PerTag<std::vector<Hypothesis>> pools;
  pools[0] = {hyp(LengthTag::Short, {1, 4, 0}, -2.5, true), hyp(LengthTag::Short, {1, 0}, -2, true)};
  pools[1] = {hyp(LengthTag::Normal, {2, 0}, -1, true)};
  BeamConfig cfg;
  cfg.beam_size = 3;
  cfg.per_tag = 1;
  auto r = select_nbest(pools, cfg);
  auto ranked = r.ranked();
  ASSERT_EQ(ranked.size(), 3u);
  EXPECT_EQ(ranked[0].score, -1);
  EXPECT_EQ(ranked[1].score, -2);
  EXPECT_EQ(ranked[2].score, -2.5);
  EXPECT_EQ(r.status[tag_index(LengthTag::Long)], TagStatus::LengthExhausted);
  EXPECT_EQ(r.status[tag_index(LengthTag::Short)], TagStatus::Ok);
}

TEST(SelectNBest, BudgetOfOneKeepsGlobalBest) {
  PerTag<std::vector<Hypothesis>> pools;
  pools[0] = {hyp(LengthTag::Short, {1, 0}, -2, true)};
  pools[1] = {hyp(LengthTag::Normal, {2, 0}, -3, true)};
  pools[2] = {hyp(LengthTag::Long, {3, 0}, -0.5, true)};
  BeamConfig cfg;
  cfg.beam_size = 1;
  cfg.per_tag = 0;
  auto r = select_nbest(pools, cfg);
  ASSERT_EQ(r.total(), 1u);
  EXPECT_EQ(r.of(LengthTag::Long).size(), 1u);
}

TEST(SelectNBest, LengthPenaltyReranksFinalList) {
  PerTag<std::vector<Hypothesis>> pools;
  pools[1] = {hyp(LengthTag::Normal, {2, 0}, -1.0, true),
              hyp(LengthTag::Normal, {2, 4, 4, 4, 0}, -1.6, true)};
  BeamConfig cfg;
  cfg.tags = {LengthTag::Normal};
  cfg.beam_size = 2;
  cfg.per_tag = 0;
  EXPECT_EQ(select_nbest(pools, cfg).of(LengthTag::Normal)[0].length(), 1u);
  cfg.length_penalty = 1.0;
  EXPECT_EQ(select_nbest(pools, cfg).of(LengthTag::Normal)[0].length(), 4u);
}

TEST(StandardBeam, WidthOneIsGreedy) {
  std::mt19937_64 rng(8);
  auto model = testing::random_table_model(3, 3, rng, 0.0, 0.05);
  auto result = standard_beam_decode(model, dummy_source(), LengthTag::Short, 1, 6, false);
  // Greedy rollout.
  const auto& vocab = model.vocabulary();
  std::vector<TokenId> prefix = {vocab.tag_token(LengthTag::Short)};
  std::vector<Hypothesis> greedy_finished;
  double score = 0.0;
  for (int step = 0; step < 6; ++step) {
    auto lp = model.next_log_probs(dummy_source(), prefix);
    if (is_possible(lp[0])) {
      auto done = prefix;
      done.push_back(vocab.eos());
      greedy_finished.push_back(hyp(LengthTag::Short, done, score + lp[0], true));
    }
    std::size_t best = 0;
    double best_lp = kLogZero;
    for (std::size_t v = 4; v < lp.size(); ++v) {
      if (lp[v] > best_lp) {
        best_lp = lp[v];
        best = v;
      }
    }
    score += best_lp;
    prefix.push_back(static_cast<TokenId>(best));
  }
  std::sort(greedy_finished.begin(), greedy_finished.end(), ranks_before);
  ASSERT_FALSE(result.of(LengthTag::Short).empty());
  EXPECT_EQ(result.of(LengthTag::Short)[0].tokens, greedy_finished[0].tokens);
}

TEST(StandardBeam, WideBeamEqualsOracle) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 10; ++i) {
    auto model = testing::random_table_model(2, 4, rng);
    auto result = standard_beam_decode(model, dummy_source(), LengthTag::Long, 64, 5);
    auto oracle = enumerate_oracle(model, dummy_source(), LengthTag::Long, 5);
    ASSERT_EQ(result.of(LengthTag::Long).empty(), !oracle.best.has_value());
    if (oracle.best) {
      EXPECT_EQ(result.of(LengthTag::Long)[0].tokens, oracle.best->tokens);
    }
  }
}

TEST(Oracle, PointMassAndSmallEnumeration) {
  auto vocab = testing::word_vocab(2);
  TableModel forced(vocab, 1, testing::point_mass(vocab, vocab.eos()));
  auto one = enumerate_oracle(forced, dummy_source(), LengthTag::Short, 3);
  ASSERT_EQ(one.ranked.size(), 1u);
  EXPECT_EQ(one.best->score, 0.0);

  std::vector<double> uniform(vocab.size(), 1.0 / 3.0);
  for (LengthTag t : kAllTags) uniform[static_cast<std::size_t>(vocab.tag_token(t))] = 0.0;
  TableModel flat(vocab, 1, uniform);
  auto all = enumerate_oracle(flat, dummy_source(), LengthTag::Normal, 2);
  EXPECT_EQ(all.ranked.size(), 3u);
  EXPECT_EQ(all.best->tokens, (std::vector<TokenId>{2, 0}));
}

TEST(Oracle, RefusesAboveCap) {
  auto vocab = testing::word_vocab(4);
  TableModel model(vocab, 1, testing::point_mass(vocab, vocab.eos()));
  EXPECT_THROW(enumerate_oracle(model, dummy_source(), LengthTag::Short, 12, 1000), OracleCapExceeded);
  EXPECT_NO_THROW(enumerate_oracle(model, dummy_source(), LengthTag::Short, 4, 1000));
}

TEST(BeamConfig, ValidationAndDegradedGuarantee) {
  BeamConfig cfg;
  EXPECT_NO_THROW(validate(cfg));
  cfg.beam_size = 6;
  EXPECT_THROW(validate(cfg), ContractError);
  auto r = resolve_per_tag(6, 3);
  EXPECT_EQ(r.per_tag, 2u);
  EXPECT_TRUE(r.degraded);
  r = resolve_per_tag(9, 3);
  EXPECT_EQ(r.per_tag, 3u);
  EXPECT_FALSE(r.degraded);
  cfg = BeamConfig{};
  cfg.tags = {LengthTag::Short, LengthTag::Short};
  cfg.per_tag = 1;
  EXPECT_THROW(validate(cfg), ContractError);
}

}  // namespace
}  // namespace labsearch
