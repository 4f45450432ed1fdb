#include <gtest/gtest.h>

#include <random>

#include "labs/bench.hpp"
#include "labs/corpus.hpp"
#include "labs/model_io.hpp"
#include "labs/records.hpp"
#include "labs/synth.hpp"
#include "support.hpp"

namespace labsearch {
namespace {

struct SynthSetup {
  SynthCorpus corpus;
  std::unique_ptr<NGramModel> model;

  explicit SynthSetup(std::size_t test = 40) {
    SynthOptions o;
    o.train_pairs = 1500;
    o.test_utterances = test;
    corpus = make_synthetic_corpus(o);
    auto ann = annotate_corpus(corpus.train, LengthUnit::Phoneme, kDefaultAlpha,
                               corpus.source_lexicon, corpus.target_lexicon);
    NGramOptions n;
    n.bucket_width = 3;
    model = std::make_unique<NGramModel>(train_ngram(ann.examples, n));
  }
};

void expect_same(const DecodeResult& a, const DecodeResult& b) {
  EXPECT_EQ(a.status, b.status);
  EXPECT_EQ(a.expanded, b.expanded);
  EXPECT_EQ(a.steps, b.steps);
  for (LengthTag t : kAllTags) {
    ASSERT_EQ(a.of(t).size(), b.of(t).size());
    for (std::size_t k = 0; k < a.of(t).size(); ++k) {
      EXPECT_EQ(a.of(t)[k].tokens, b.of(t)[k].tokens);
      EXPECT_EQ(a.of(t)[k].score, b.of(t)[k].score);
    }
  }
}

TEST(Corpus, ParallelDecodeMatchesSerial) {
  SynthSetup s;
  DecodeJob job;
  job.beam.max_length = 40;
  auto serial = decode_corpus_serial(*s.model, s.corpus.test, job);
  auto parallel = decode_corpus(*s.model, s.corpus.test, job, 4);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    ASSERT_TRUE(serial[i].ok());
    expect_same(serial[i].result, parallel[i].result);
  }
}

TEST(Corpus, FailuresStayInPlace) {
  SynthSetup s(3);
  auto sources = s.corpus.test;
  sources[1].phonemes.clear();
  DecodeJob job;
  job.beam.max_length = 30;
  auto items = decode_corpus(*s.model, sources, job, 2);
  EXPECT_TRUE(items[0].ok());
  EXPECT_FALSE(items[1].ok());
  EXPECT_TRUE(items[2].ok());
}

TEST(Cost, LabsNeverScoresMoreRowsThanSeparatePasses) {
  SynthSetup s;
  CountingModel counter(*s.model);
  BeamConfig cfg;
  cfg.max_length = 40;
  for (const auto& src : s.corpus.test) {
    counter.reset();
    labs_decode(counter, src, cfg);
    PerTag<std::size_t> labs_rows;
    for (LengthTag t : kAllTags) labs_rows[tag_index(t)] = counter.rows(t);
    const auto labs_calls = counter.invocations();
    counter.reset();
    for (LengthTag t : kAllTags) standard_beam_decode(counter, src, t, 3, 40);
    for (LengthTag t : kAllTags) EXPECT_LE(labs_rows[tag_index(t)], counter.rows(t));
    EXPECT_LT(labs_calls, counter.invocations());
  }
}

TEST(Bench, PointMassCounts) {
  auto vocab = testing::word_vocab(2);
  TableModel model(vocab, 1, testing::point_mass(vocab, vocab.eos()));
  auto report = latency_bench(model, {testing::dummy_source()}, BeamConfig{}, 3);
  EXPECT_EQ(report.labs.samples.size(), 3u);
  EXPECT_EQ(report.separate.samples.size(), 3u);
  EXPECT_EQ(report.single.samples.size(), 3u);
  EXPECT_EQ(report.labs.rows, 3u);
  EXPECT_EQ(report.separate.rows, 3u);
  EXPECT_EQ(report.single.rows, 1u);
  EXPECT_EQ(report.labs.invocations, 1u);
  EXPECT_EQ(report.separate.invocations, 3u);
  EXPECT_EQ(report.pass_width, 3u);
  EXPECT_THROW(latency_bench(model, {testing::dummy_source()}, BeamConfig{}, 2), ContractError);
  EXPECT_THROW(latency_bench(model, {}, BeamConfig{}, 3), ContractError);
}

TEST(Bench, CountsAreDeterministic) {
  SynthSetup s(10);
  BeamConfig cfg;
  cfg.max_length = 40;
  auto a = latency_bench(*s.model, s.corpus.test, cfg, 3);
  auto b = latency_bench(*s.model, s.corpus.test, cfg, 3);
  EXPECT_EQ(a.labs.rows, b.labs.rows);
  EXPECT_EQ(a.separate.invocations, b.separate.invocations);
  EXPECT_EQ(a.labs.tag_rows, b.labs.tag_rows);
  EXPECT_EQ(median_of({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median_of({4.0, 1.0, 2.0, 3.0}), 2.5);
}

TEST(ModelIo, NGramRoundTripScoresIdentically) {
  SynthSetup s(5);
  auto j = model_to_json(*s.model);
  auto loaded = model_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(loaded->vocabulary(), s.model->vocabulary());
  EXPECT_EQ(model_to_json(dynamic_cast<const NGramModel&>(*loaded)).dump(), j.dump());
  const auto& vocab = s.model->vocabulary();
  for (const auto& src : s.corpus.test) {
    for (LengthTag t : kAllTags) {
      std::vector<TokenId> prefix = {vocab.tag_token(t), 4, 5};
      EXPECT_EQ(loaded->next_log_probs(src, prefix), s.model->next_log_probs(src, prefix));
    }
  }
}

TEST(ModelIo, TableRoundTripAndRejections) {
  std::mt19937_64 rng(4);
  auto model = testing::random_table_model(3, 2, rng);
  auto loaded = model_from_json(nlohmann::json::parse(model_to_json(model).dump()));
  std::vector<TokenId> prefix = {2, 5, 4};
  EXPECT_EQ(loaded->next_log_probs(testing::dummy_source(), prefix),
            model.next_log_probs(testing::dummy_source(), prefix));
  auto bad = model_to_json(model);
  bad["format"] = "other";
  EXPECT_THROW(model_from_json(bad), DataError);
  bad = model_to_json(model);
  bad["kind"] = "neural";
  EXPECT_THROW(model_from_json(bad), DataError);
}

TEST(Records, DecodeRecordRoundTrip) {
  SynthSetup s(4);
  BeamConfig cfg;
  cfg.max_length = 40;
  for (const auto& src : s.corpus.test) {
    auto r = labs_decode(*s.model, src, cfg);
    auto j = decode_record(src.id, r, s.model->vocabulary());
    auto back = decode_result_from_json(nlohmann::json::parse(j.dump()), s.model->vocabulary());
    expect_same(r, back);
  }
}

TEST(Records, SourceAndProfileRoundTrip) {
  SynthSetup s(2);
  auto src = source_from_json(to_json(s.corpus.test[0]));
  EXPECT_EQ(src.phonemes, s.corpus.test[0].phonemes);
  EXPECT_EQ(src.reference_duration, s.corpus.test[0].reference_duration);
  EXPECT_EQ(src.reference_text, s.corpus.test[0].reference_text);
  auto p = profile_from_json(to_json(s.corpus.target_profile));
  EXPECT_EQ(p.phoneme_ms, s.corpus.target_profile.phoneme_ms);
}

TEST(Synth, SeededAndDeterministic) {
  SynthOptions o;
  o.train_pairs = 50;
  o.test_utterances = 5;
  auto a = make_synthetic_corpus(o);
  auto b = make_synthetic_corpus(o);
  ASSERT_EQ(a.train.size(), 50u);
  for (std::size_t i = 0; i < a.train.size(); ++i) EXPECT_EQ(a.train[i].target, b.train[i].target);
  EXPECT_EQ(a.test[3].reference_duration, b.test[3].reference_duration);
  o.seed += 1;
  auto c = make_synthetic_corpus(o);
  EXPECT_NE(a.train[0].source, c.train[0].source);
}

}  // namespace
}  // namespace labsearch
