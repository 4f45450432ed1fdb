#include <gtest/gtest.h>

#include "labs/duration.hpp"

namespace labsearch {
namespace {

DurationProfile ab_profile(double allowance = 0.0) {
  DurationProfile p;
  p.id = "ab";
  p.phoneme_ms = {{"A", 80.0}, {"B", 120.0}, {"W", 100.0}, {"X", 40.0}};
  p.allowance_ms = allowance;
  return p;
}

G2PLexicon w_lexicon() { return G2PLexicon({{"w", {"W"}}, {"x", {"X"}}, {"ab", {"A", "B"}}}, {}); }

TEST(EstimateDuration, SumsPhonemes) {
  const std::vector<std::string> aba = {"A", "B", "A"};
  EXPECT_DOUBLE_EQ(estimate_duration(ab_profile(), aba), 0.280);
  EXPECT_NEAR(estimate_duration(ab_profile(100.0), aba) - estimate_duration(ab_profile(), aba), 0.100,
              1e-15);
  auto lex = w_lexicon();
  EXPECT_DOUBLE_EQ(estimate_duration(ab_profile(), "w w", lex), 2.0 * estimate_duration(ab_profile(), "w", lex));
  const std::vector<std::string> unknown = {"A", "Q"};
  try {
    estimate_duration(ab_profile(), unknown);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("'Q'"), std::string::npos);
  }
}

TEST(Profile, Validation) {
  auto p = ab_profile();
  EXPECT_NO_THROW(validate(p));
  p.phoneme_ms["A"] = 0.0;
  EXPECT_THROW(validate(p), DataError);
  p = ab_profile(-1.0);
  EXPECT_THROW(validate(p), DataError);
}

// "w" costs 100 ms, "x" 40 ms.
struct Fixture {
  Vocabulary vocab = Vocabulary::build({"w", "x"});
  DurationProfile profile = ab_profile();
  G2PLexicon lexicon = w_lexicon();
  SourceUtterance src;

  Fixture() {
    src.id = "s";
    src.phonemes = {"A"};
    src.reference_duration = 2.0;
  }

  Hypothesis make(LengthTag tag, std::size_t words, double score) const {
    Hypothesis h;
    h.tag = tag;
    h.tokens = {vocab.tag_token(tag)};
    for (std::size_t i = 0; i < words; ++i) h.tokens.push_back(4);
    h.tokens.push_back(vocab.eos());
    h.score = score;
    h.completed = true;
    return h;
  }
};

TEST(Select, NearestRatioWins) {
  Fixture f;
  DecodeResult r;
  r.hypotheses[0] = {f.make(LengthTag::Short, 14, -1.0)};
  r.hypotheses[1] = {f.make(LengthTag::Normal, 21, -2.0)};
  r.hypotheses[2] = {f.make(LengthTag::Long, 26, -3.0)};
  auto s = select_hypothesis(r, f.vocab, f.src, f.profile, SelectionPolicy{}, f.lexicon);
  EXPECT_EQ(s.choice().hypothesis.tag, LengthTag::Normal);
  EXPECT_NEAR(s.choice().ratio, 1.05, 1e-12);
  EXPECT_TRUE(s.choice().compliant);
  EXPECT_FALSE(s.used_fallback);
  EXPECT_EQ(s.candidates.size(), 3u);
}

TEST(Select, SingleCandidateIsFlagged) {
  Fixture f;
  DecodeResult r;
  r.hypotheses[1] = {f.make(LengthTag::Normal, 30, -1.0)};
  auto s = select_hypothesis(r, f.vocab, f.src, f.profile, SelectionPolicy{}, f.lexicon);
  EXPECT_EQ(s.chosen, 0u);
  EXPECT_FALSE(s.choice().compliant);
  EXPECT_NEAR(s.choice().ratio, 1.5, 1e-12);
}

TEST(Select, MarginGateExcludesWeakVariants) {
  Fixture f;
  DecodeResult r;
  // Normal: 23 x 100 ms = 2.3 s, ratio 1.15, best score.
  r.hypotheses[1] = {f.make(LengthTag::Normal, 23, -4.0)};
  // Long: 20 x 100 ms + 40 ms = 2.04 s, ratio 1.02, 0.9 below the best.
  auto long_hyp = f.make(LengthTag::Long, 20, -4.9);
  long_hyp.tokens.insert(long_hyp.tokens.end() - 1, 5);
  r.hypotheses[2] = {long_hyp};
  auto ungated = select_hypothesis(r, f.vocab, f.src, f.profile, SelectionPolicy{}, f.lexicon);
  EXPECT_EQ(ungated.choice().hypothesis.tag, LengthTag::Long);
  EXPECT_NEAR(ungated.choice().ratio, 1.02, 1e-12);
  SelectionPolicy gated;
  gated.margin = 0.5;
  auto s = select_hypothesis(r, f.vocab, f.src, f.profile, gated, f.lexicon);
  EXPECT_EQ(s.choice().hypothesis.tag, LengthTag::Normal);
  EXPECT_FALSE(s.candidates[1].eligible);
  EXPECT_NEAR(s.choice().ratio, 1.15, 1e-12);
}

TEST(Select, FallbackAndErrors) {
  Fixture f;
  DecodeResult empty;
  EXPECT_THROW(select_hypothesis(empty, f.vocab, f.src, f.profile, SelectionPolicy{}, f.lexicon), DataError);
  f.src.reference_duration = 0.0;
  DecodeResult r;
  r.hypotheses[1] = {f.make(LengthTag::Normal, 3, -1.0)};
  EXPECT_THROW(select_hypothesis(r, f.vocab, f.src, f.profile, SelectionPolicy{}, f.lexicon), ContractError);
}

TEST(Select, ScaleCovariance) {
  Fixture f;
  DecodeResult r;
  r.hypotheses[0] = {f.make(LengthTag::Short, 12, -1.0)};
  r.hypotheses[1] = {f.make(LengthTag::Normal, 17, -2.0)};
  r.hypotheses[2] = {f.make(LengthTag::Long, 25, -3.0)};
  auto base = select_hypothesis(r, f.vocab, f.src, f.profile, SelectionPolicy{}, f.lexicon);
  auto scaled_profile = f.profile;
  for (auto& [ph, ms] : scaled_profile.phoneme_ms) ms *= 3.0;
  f.src.reference_duration *= 3.0;
  auto scaled = select_hypothesis(r, f.vocab, f.src, scaled_profile, SelectionPolicy{}, f.lexicon);
  EXPECT_EQ(base.chosen, scaled.chosen);
}

TEST(Compliance, InclusiveBoundary) {
  EXPECT_TRUE(is_compliant(2.4 / 2.0, 0.2));
  EXPECT_TRUE(is_compliant(1.6 / 2.0, 0.2));
  EXPECT_FALSE(is_compliant(2.5 / 2.0, 0.2));
}

}  // namespace
}  // namespace labsearch
