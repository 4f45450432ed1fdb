#include "labs/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "labs/bench.hpp"
#include "labs/corpus.hpp"
#include "labs/duration.hpp"
#include "labs/lengthtag.hpp"
#include "labs/model_io.hpp"
#include "labs/ngram.hpp"
#include "labs/records.hpp"

namespace labsearch::cli {

namespace {

using nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Outcome {
  std::size_t ok = 0;
  std::size_t failed = 0;

  int code() const {
    if (failed == 0) return kSuccess;
    return ok == 0 ? kTotalFailure : kPartialFailure;
  }
};

void report_error(int code, std::string_view kind, std::string_view message) {
  json record = {{"error", {{"exit_code", code}, {"kind", kind}, {"message", message}}}};
  std::cerr << record.dump() << '\n';
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      require(used == item.size(), "bad number '" + item + "'");
    } catch (const std::logic_error&) {
      throw ConfigError("bad number '" + item + "'");
    }
  }
  return out;
}

std::vector<LengthTag> parse_tags(const std::string& csv) {
  std::vector<LengthTag> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto t = parse_tag(item);
    require(t.has_value(), "unknown length tag '" + item + "'");
    out.push_back(*t);
  }
  require(!out.empty(), "tag set must not be empty");
  return out;
}

void set_jobs(int jobs) {
  require(jobs >= 1, "--jobs must be at least 1");
}

// ---------------------------------------------------------------------------
// annotate

struct AnnotateArgs {
  std::string input, output, report, unit = "phoneme";
  std::string src_lexicon, src_rules, tgt_lexicon, tgt_rules;
  double alpha = kDefaultAlpha;
  int jobs = 1;
};

G2PLexicon lexicon_or_empty(const std::string& lexicon, const std::string& rules) {
  if (lexicon.empty() && rules.empty()) return {};
  return G2PLexicon::load_files(lexicon, rules);
}

int run_annotate(const AnnotateArgs& a) {
  auto unit = parse_unit(a.unit);
  require(unit.has_value(), "--unit must be phoneme or character");
  require(a.alpha > 0.0 && a.alpha < 1.0, "--alpha must lie in (0, 1)");
  set_jobs(a.jobs);
  if (*unit == LengthUnit::Phoneme) {
    require(!(a.src_lexicon.empty() && a.src_rules.empty()),
            "phoneme units need --src-lexicon and/or --src-rules");
    require(!(a.tgt_lexicon.empty() && a.tgt_rules.empty()),
            "phoneme units need --tgt-lexicon and/or --tgt-rules");
  }
  const auto src_lex = lexicon_or_empty(a.src_lexicon, a.src_rules);
  const auto tgt_lex = lexicon_or_empty(a.tgt_lexicon, a.tgt_rules);
  const auto pairs = read_pairs_tsv(a.input);
  require(!pairs.empty(), "input corpus '" + a.input + "' has no pairs");

  auto annotation = annotate_corpus(pairs, *unit, a.alpha, src_lex, tgt_lex, a.jobs);
  const Outcome outcome{annotation.examples.size(), annotation.report.failures.size()};
  if (outcome.ok > 0) {
    std::vector<json> lines;
    for (const auto& ex : annotation.examples) lines.push_back(to_json(ex));
    write_file_atomic(a.output, to_jsonl(lines));
  }
  if (!a.report.empty()) {
    write_file_atomic(a.report, to_json(annotation.report).dump(2) + "\n");
    std::filesystem::path text(a.report);
    text.replace_extension(".txt");
    write_file_atomic(text.string(), format_report(annotation.report));
  }
  std::cout << format_report(annotation.report);
  if (outcome.code() != kSuccess) {
    report_error(outcome.code(), outcome.ok ? "partial-failure" : "total-failure",
                 std::to_string(outcome.failed) + " of " + std::to_string(pairs.size()) +
                     " pairs failed");
  }
  return outcome.code();
}

// ---------------------------------------------------------------------------
// train-ngram

struct TrainArgs {
  std::string input, output, vocab_out, weights;
  std::size_t order = 3;
  double floor = 1e-3;
  std::size_t bucket_width = 0;
};

int run_train(const TrainArgs& a) {
  NGramOptions o;
  o.order = a.order;
  require(a.order >= 2, "--order must be at least 2");
  if (a.weights.empty()) {
    require(a.order == 3, "--weights is required unless --order is 3");
  } else {
    o.weights = parse_doubles(a.weights);
  }
  o.floor = a.floor;
  o.bucket_width = a.bucket_width;
  try {
    validate(o);
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }

  std::vector<TaggedExample> corpus;
  for (const auto& j : read_jsonl(a.input)) corpus.push_back(tagged_example_from_json(j));
  require(!corpus.empty(), "training corpus '" + a.input + "' is empty");

  auto model = train_ngram(corpus, o);
  write_file_atomic(a.output, model_to_json(model).dump() + "\n");
  if (!a.vocab_out.empty()) {
    std::ostringstream os;
    model.vocabulary().save(os);
    write_file_atomic(a.vocab_out, os.str());
  }
  std::cout << "trained order-" << o.order << " model on " << corpus.size() << " examples, "
            << model.vocabulary().size() << " tokens\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------
// decode

struct DecodeArgs {
  std::string model, input, output, mode = "labs", tag = "normal", tags = "short,normal,long";
  std::size_t beam = 9, per_tag = 3, max_len = 200;
  bool per_tag_given = false;
  bool no_early_stop = false;
  double length_penalty = 0.0;
  int jobs = 1;
};

BeamConfig beam_config(std::size_t beam, std::size_t per_tag, bool per_tag_given,
                       std::size_t max_len, const std::vector<LengthTag>& tags) {
  BeamConfig cfg;
  cfg.beam_size = beam;
  cfg.max_length = max_len;
  cfg.tags = tags;
  require(beam >= 1, "--beam must be at least 1");
  require(max_len >= 1, "--max-len must be at least 1");
  if (per_tag_given) {
    require(per_tag * tags.size() <= beam, "--per-tag times the number of tags exceeds --beam");
    cfg.per_tag = per_tag;
  } else {
    auto r = resolve_per_tag(beam, tags.size(), per_tag);
    if (r.degraded) {
      std::cerr << "warning: beam " << beam << " cannot hold " << per_tag << " slots for each of "
                << tags.size() << " tags; using " << r.per_tag << "\n";
    }
    cfg.per_tag = r.per_tag;
  }
  return cfg;
}

std::vector<SourceUtterance> read_sources(const std::string& path) {
  std::vector<SourceUtterance> out;
  for (const auto& j : read_jsonl(path)) out.push_back(source_from_json(j));
  require(!out.empty(), "no utterances in '" + path + "'");
  return out;
}

int run_decode(const DecodeArgs& a) {
  set_jobs(a.jobs);
  DecodeJob job;
  require(a.mode == "labs" || a.mode == "standard", "--mode must be labs or standard");
  job.mode = a.mode == "labs" ? DecodeMode::Labs : DecodeMode::Standard;
  std::vector<LengthTag> tags;
  if (job.mode == DecodeMode::Standard) {
    auto t = parse_tag(a.tag);
    require(t.has_value(), "unknown --tag '" + a.tag + "'");
    job.standard_tag = *t;
    tags = {*t};
  } else {
    tags = parse_tags(a.tags);
  }
  job.beam = beam_config(a.beam, job.mode == DecodeMode::Standard ? 0 : a.per_tag,
                         job.mode == DecodeMode::Standard || a.per_tag_given, a.max_len, tags);
  job.beam.early_stop = !a.no_early_stop;
  require(a.length_penalty >= 0.0, "--length-penalty must be non-negative");
  job.beam.length_penalty = a.length_penalty;
  try {
    validate(job.beam);
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }

  const auto model = load_model(a.model);
  const auto sources = read_sources(a.input);
  const auto items = decode_corpus(*model, sources, job, a.jobs);

  Outcome outcome;
  std::vector<json> lines;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].ok()) {
      ++outcome.ok;
      lines.push_back(decode_record(sources[i].id, items[i].result, model->vocabulary()));
    } else {
      ++outcome.failed;
      lines.push_back(decode_error_record(sources[i].id, items[i].error));
    }
  }
  write_file_atomic(a.output, to_jsonl(lines));
  if (outcome.code() != kSuccess) {
    report_error(outcome.code(), outcome.ok ? "partial-failure" : "total-failure",
                 std::to_string(outcome.failed) + " utterances failed to decode");
  }
  return outcome.code();
}

// ---------------------------------------------------------------------------
// select

struct SelectArgs {
  std::string decode, sources, profile, model, vocab, lexicon, rules, output;
  std::string fallback = "closest";
  double threshold = 0.2, margin = 0.0;
  int jobs = 1;
};

int run_select(const SelectArgs& a) {
  set_jobs(a.jobs);
  SelectionPolicy policy;
  policy.epsilon = a.threshold;
  policy.margin = a.margin;
  require(a.fallback == "closest" || a.fallback == "score", "--fallback must be closest or score");
  policy.fallback = a.fallback == "closest" ? FallbackOrder::ClosestRatio : FallbackOrder::BestScore;
  require(policy.epsilon > 0.0 && policy.epsilon < 1.0, "--src-threshold must lie in (0, 1)");
  require(policy.margin >= 0.0, "--margin must be non-negative");
  require(!a.model.empty() || !a.vocab.empty(), "select needs --model or --vocab");
  require(!(a.lexicon.empty() && a.rules.empty()), "select needs --lexicon and/or --rules");

  std::optional<Vocabulary> vocab;
  if (!a.vocab.empty()) {
    std::istringstream in(read_file(a.vocab));
    vocab = Vocabulary::load(in);
  } else {
    vocab = load_model(a.model)->vocabulary();
  }
  const auto profile = profile_from_json(json::parse(read_file(a.profile)));
  const auto lexicon = lexicon_or_empty(a.lexicon, a.rules);
  const auto sources = read_sources(a.sources);
  std::map<std::string, const SourceUtterance*> by_id;
  for (const auto& s : sources) by_id[s.id] = &s;
  const auto records = read_jsonl(a.decode);
  require(!records.empty(), "no decode records in '" + a.decode + "'");

  std::vector<json> lines(records.size());
  std::vector<char> ok(records.size(), 0);
  auto select_one = [&](std::size_t i) {
    const auto& rec = records[i];
    const std::string id = rec.value("id", std::string("?"));
    try {
      if (rec.contains("error")) throw DataError("decode failed: " + rec.at("error").get<std::string>());
      auto it = by_id.find(id);
      if (it == by_id.end()) throw DataError("no source utterance with id '" + id + "'");
      auto result = decode_result_from_json(rec, *vocab);
      auto selection = select_hypothesis(result, *vocab, *it->second, profile, policy, lexicon);
      lines[i] = selection_record(*it->second, selection, policy);
      ok[i] = 1;
    } catch (const std::exception& e) {
      lines[i] = decode_error_record(id, e.what());
    }
  };
  const auto n = static_cast<std::ptrdiff_t>(records.size());
  if (a.jobs <= 1) {
    for (std::ptrdiff_t i = 0; i < n; ++i) select_one(static_cast<std::size_t>(i));
  } else {
#pragma omp parallel for schedule(dynamic, 4) num_threads(a.jobs)
    for (std::ptrdiff_t i = 0; i < n; ++i) select_one(static_cast<std::size_t>(i));
  }

  Outcome outcome;
  for (char k : ok) (k ? outcome.ok : outcome.failed) += 1;
  write_file_atomic(a.output, to_jsonl(lines));
  if (outcome.code() != kSuccess) {
    report_error(outcome.code(), outcome.ok ? "partial-failure" : "total-failure",
                 std::to_string(outcome.failed) + " utterances could not be selected");
  }
  return outcome.code();
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string input, output, table, unit = "phoneme";
  double threshold = 0.2;
};

int run_evaluate(const EvaluateArgs& a) {
  require(a.threshold > 0.0 && a.threshold < 1.0, "--src-threshold must lie in (0, 1)");
  require(parse_unit(a.unit).has_value(), "--unit must be phoneme or character");
  std::vector<EvalInput> inputs;
  std::size_t skipped = 0;
  for (const auto& j : read_jsonl(a.input)) {
    if (j.contains("error")) {
      ++skipped;
      continue;
    }
    inputs.push_back(eval_input_from_json(j));
  }
  if (inputs.empty()) throw DataError("no selectable utterances in '" + a.input + "'");
  auto report = evaluate(inputs, a.threshold, a.unit);
  auto j = to_json(report);
  j["skipped"] = skipped;
  write_file_atomic(a.output, j.dump(2) + "\n");
  const auto table = format_table(report);
  if (!a.table.empty()) {
    write_file_atomic(a.table, table);
  } else {
    std::cout << table;
  }
  Outcome outcome{inputs.size(), skipped};
  return outcome.code();
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::string model, input, output, table, tags = "short,normal,long";
  std::size_t beam = 9, per_tag = 3, max_len = 200, repeats = 5, sample = 0;
  bool per_tag_given = false;
  std::uint64_t seed = 1;
};

int run_bench(const BenchArgs& a) {
  require(a.repeats >= 3, "--repeats must be at least 3");
  auto cfg = beam_config(a.beam, a.per_tag, a.per_tag_given, a.max_len, parse_tags(a.tags));
  const auto model = load_model(a.model);
  auto sources = read_sources(a.input);
  if (a.sample > 0 && a.sample < sources.size()) {
    std::vector<SourceUtterance> picked;
    std::mt19937_64 rng(a.seed);
    std::sample(sources.begin(), sources.end(), std::back_inserter(picked), a.sample, rng);
    sources = std::move(picked);
  }
  auto report = latency_bench(*model, sources, cfg, a.repeats);
  auto j = to_json(report);
  j["seed"] = a.seed;
  j["sample"] = a.sample;
  write_file_atomic(a.output, j.dump(2) + "\n");
  const auto table = format_bench(report);
  if (!a.table.empty()) {
    write_file_atomic(a.table, table);
  } else {
    std::cout << table;
  }
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Length-aware beam search: annotate, train, decode, select, evaluate, bench"};
  app.require_subcommand(1);

  AnnotateArgs an;
  auto* annotate = app.add_subcommand("annotate", "Tag a parallel corpus by length ratio");
  annotate->add_option("--input", an.input, "Parallel corpus TSV (source<TAB>target)")
      ->required()
      ->check(CLI::ExistingFile);
  annotate->add_option("--output", an.output, "Annotated corpus JSONL")->required();
  annotate->add_option("--report", an.report, "Report JSON (a .txt summary is written beside it)");
  annotate->add_option("--unit", an.unit, "Length unit: phoneme or character")->capture_default_str();
  annotate->add_option("--alpha", an.alpha, "Ratio threshold for short/long tags")->capture_default_str();
  annotate->add_option("--src-lexicon", an.src_lexicon, "Source lexicon TSV")->check(CLI::ExistingFile);
  annotate->add_option("--src-rules", an.src_rules, "Source letter rules TSV")->check(CLI::ExistingFile);
  annotate->add_option("--tgt-lexicon", an.tgt_lexicon, "Target lexicon TSV")->check(CLI::ExistingFile);
  annotate->add_option("--tgt-rules", an.tgt_rules, "Target letter rules TSV")->check(CLI::ExistingFile);
  annotate->add_option("--jobs", an.jobs, "Worker threads")->capture_default_str();

  TrainArgs tr;
  auto* train = app.add_subcommand("train-ngram", "Train the tag-conditioned n-gram model");
  train->add_option("--input", tr.input, "Annotated corpus JSONL")->required()->check(CLI::ExistingFile);
  train->add_option("--output", tr.output, "Model JSON")->required();
  train->add_option("--order", tr.order, "n-gram order (>= 2)")->capture_default_str();
  train->add_option("--weights", tr.weights, "Interpolation weights, highest order first (default 0.7,0.2,0.1)");
  train->add_option("--floor", tr.floor, "Uniform floor mass")->capture_default_str();
  train->add_option("--bucket-width", tr.bucket_width,
                    "Source phonemes per length bucket (0 disables source conditioning)")
      ->capture_default_str();
  train->add_option("--vocab-out", tr.vocab_out, "Also write the vocabulary file");

  DecodeArgs de;
  auto* decode = app.add_subcommand("decode", "Decode source utterances");
  decode->add_option("--model", de.model, "Model JSON")->required()->check(CLI::ExistingFile);
  decode->add_option("--input", de.input, "Source utterances JSONL")->required()->check(CLI::ExistingFile);
  decode->add_option("--output", de.output, "Decode results JSONL")->required();
  decode->add_option("--mode", de.mode, "labs (single pass, all tags) or standard (one tag)")
      ->capture_default_str();
  decode->add_option("--tag", de.tag, "Tag for --mode standard")->capture_default_str();
  decode->add_option("--tags", de.tags, "Tag set for --mode labs")->capture_default_str();
  decode->add_option("--beam", de.beam, "Beam size N (width in standard mode)")->capture_default_str();
  auto* de_per_tag = decode->add_option("--per-tag", de.per_tag, "Guaranteed slots per tag g")
                         ->capture_default_str();
  decode->add_option("--max-len", de.max_len, "Max tokens after the tag, EOS included")
      ->capture_default_str();
  decode->add_flag("--no-early-stop", de.no_early_stop, "Always run to --max-len");
  decode->add_option("--length-penalty", de.length_penalty, "Final ranking length penalty (0 = off)")
      ->capture_default_str();
  decode->add_option("--jobs", de.jobs, "Utterances decoded in parallel")->capture_default_str();

  SelectArgs se;
  auto* select = app.add_subcommand("select", "Pick the duration-matched hypothesis per utterance");
  select->add_option("--decode", se.decode, "Decode results JSONL")->required()->check(CLI::ExistingFile);
  select->add_option("--sources", se.sources, "Source utterances JSONL")->required()->check(CLI::ExistingFile);
  select->add_option("--profile", se.profile, "Duration profile JSON")->required()->check(CLI::ExistingFile);
  select->add_option("--model", se.model, "Model JSON (for its vocabulary)")->check(CLI::ExistingFile);
  select->add_option("--vocab", se.vocab, "Vocabulary file")->check(CLI::ExistingFile);
  select->add_option("--lexicon", se.lexicon, "Target lexicon TSV")->check(CLI::ExistingFile);
  select->add_option("--rules", se.rules, "Target letter rules TSV")->check(CLI::ExistingFile);
  select->add_option("--src-threshold", se.threshold, "Compliance threshold epsilon")->capture_default_str();
  select->add_option("--margin", se.margin, "Score margin for non-normal candidates (0 = off)")
      ->capture_default_str();
  select->add_option("--fallback", se.fallback, "closest or score, used when nothing is eligible")
      ->capture_default_str();
  select->add_option("--output", se.output, "Selection JSONL")->required();
  select->add_option("--jobs", se.jobs, "Worker threads")->capture_default_str();

  EvaluateArgs ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Speech rate compliance, length ratio and BLEU");
  evaluate_cmd->add_option("--input", ev.input, "Selection JSONL")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--output", ev.output, "Report JSON")->required();
  evaluate_cmd->add_option("--table", ev.table, "Write the text table here instead of stdout");
  evaluate_cmd->add_option("--src-threshold", ev.threshold, "Compliance threshold epsilon")
      ->capture_default_str();
  evaluate_cmd->add_option("--unit", ev.unit, "Length unit echoed in the report")->capture_default_str();

  BenchArgs be;
  auto* bench = app.add_subcommand("bench", "Latency of one LABS pass against separate passes");
  bench->add_option("--model", be.model, "Model JSON")->required()->check(CLI::ExistingFile);
  bench->add_option("--input", be.input, "Source utterances JSONL")->required()->check(CLI::ExistingFile);
  bench->add_option("--output", be.output, "Bench report JSON")->required();
  bench->add_option("--table", be.table, "Write the text table here instead of stdout");
  bench->add_option("--tags", be.tags, "Tag set")->capture_default_str();
  bench->add_option("--beam", be.beam, "Beam size N")->capture_default_str();
  auto* be_per_tag = bench->add_option("--per-tag", be.per_tag, "Guaranteed slots per tag g")
                         ->capture_default_str();
  bench->add_option("--max-len", be.max_len, "Max tokens after the tag")->capture_default_str();
  bench->add_option("--repeats", be.repeats, "Timed repeats (>= 3)")->capture_default_str();
  bench->add_option("--sample", be.sample, "Benchmark a seeded sample of this many utterances (0 = all)")
      ->capture_default_str();
  bench->add_option("--seed", be.seed, "Sampling seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error(kConfigError, "config", e.what());
    return kConfigError;
  }

  try {
    if (*annotate) return run_annotate(an);
    if (*train) return run_train(tr);
    if (*decode) {
      de.per_tag_given = de_per_tag->count() > 0;
      return run_decode(de);
    }
    if (*select) return run_select(se);
    if (*evaluate_cmd) return run_evaluate(ev);
    if (*bench) {
      be.per_tag_given = be_per_tag->count() > 0;
      return run_bench(be);
    }
  } catch (const ConfigError& e) {
    report_error(kConfigError, "config", e.what());
    return kConfigError;
  } catch (const ContractError& e) {
    report_error(kConfigError, "config", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    report_error(kTotalFailure, "total-failure", e.what());
    return kTotalFailure;
  }
  return kConfigError;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"labs"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace labsearch::cli
