// Writes the seeded synthetic corpus used by the examples and acceptance
// checks: train.tsv, source/target letter rules, target lexicon, duration
// profile and test.jsonl.

#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "labs/records.hpp"
#include "labs/synth.hpp"

namespace {

std::string tsv(const std::map<std::string, labsearch::G2PLexicon::Phonemes>& entries) {
  std::ostringstream os;
  for (const auto& [key, phonemes] : entries) {
    os << key << '\t';
    for (std::size_t i = 0; i < phonemes.size(); ++i) os << (i ? " " : "") << phonemes[i];
    os << '\n';
  }
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic length-controlled corpus"};
  labsearch::SynthOptions o;
  std::string dir;
  app.add_option("--out-dir", dir, "Output directory")->required();
  app.add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  app.add_option("--train-pairs", o.train_pairs, "Training pairs")->capture_default_str();
  app.add_option("--test", o.test_utterances, "Test utterances")->capture_default_str();
  app.add_option("--min-words", o.min_words, "Shortest source sentence")->capture_default_str();
  app.add_option("--max-words", o.max_words, "Longest source sentence")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    const auto corpus = labsearch::make_synthetic_corpus(o);
    std::filesystem::create_directories(dir);
    const std::filesystem::path root(dir);
    auto path = [&](const char* name) { return (root / name).string(); };

    std::ostringstream train;
    for (const auto& p : corpus.train) train << p.source << '\t' << p.target << '\n';
    labsearch::write_file_atomic(path("train.tsv"), train.str());
    labsearch::write_file_atomic(path("src_rules.tsv"), tsv(corpus.source_lexicon.letter_rules()));
    labsearch::write_file_atomic(path("tgt_rules.tsv"), tsv(corpus.target_lexicon.letter_rules()));
    labsearch::write_file_atomic(path("tgt_lexicon.tsv"), tsv(corpus.target_lexicon.words()));
    labsearch::write_file_atomic(path("profile.json"),
                            labsearch::to_json(corpus.target_profile).dump(2) + "\n");
    std::vector<nlohmann::json> test;
    for (const auto& u : corpus.test) test.push_back(labsearch::to_json(u));
    labsearch::write_file_atomic(path("test.jsonl"), labsearch::to_jsonl(test));
    std::cout << "wrote " << corpus.train.size() << " training pairs and " << corpus.test.size()
              << " test utterances to " << dir << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
