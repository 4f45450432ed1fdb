#include "labs/bench.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace labsearch {

namespace {

using Clock = std::chrono::steady_clock;

struct Runner {
  const std::vector<SourceUtterance>& inputs;
  const BeamConfig& cfg;
  std::size_t width;

  void labs_pass(const ScoringModel& model) const {
    for (const auto& src : inputs) labs_decode(model, src, cfg);
  }
  void separate_passes(const ScoringModel& model) const {
    for (const auto& src : inputs) {
      for (LengthTag t : cfg.tags) {
        standard_beam_decode(model, src, t, width, cfg.max_length, cfg.early_stop);
      }
    }
  }
  void single_pass(const ScoringModel& model) const {
    for (const auto& src : inputs) {
      standard_beam_decode(model, src, cfg.tags.front(), width, cfg.max_length, cfg.early_stop);
    }
  }
};

template <class F>
double time_per_utterance(F&& f, std::size_t n) {
  const auto start = Clock::now();
  f();
  return std::chrono::duration<double>(Clock::now() - start).count() / static_cast<double>(n);
}

void record_counts(BenchSeries& series, const CountingModel& counter) {
  series.invocations = counter.invocations();
  series.rows = counter.rows();
  for (LengthTag t : kAllTags) series.tag_rows[tag_index(t)] = counter.rows(t);
}

void summarize(BenchSeries& s) {
  s.median = median_of(s.samples);
  s.mean = std::accumulate(s.samples.begin(), s.samples.end(), 0.0) /
           static_cast<double>(s.samples.size());
}

}  // namespace

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

BenchReport latency_bench(const ScoringModel& model, const std::vector<SourceUtterance>& inputs,
                          const BeamConfig& cfg, std::size_t repeats) {
  validate(cfg);
  if (repeats < 3) throw ContractError("latency bench needs at least 3 repeats");
  if (inputs.empty()) throw ContractError("latency bench needs at least one utterance");
  for (const auto& src : inputs) validate(src);

  BenchReport report;
  report.utterances = inputs.size();
  report.repeats = repeats;
  report.beam_size = cfg.beam_size;
  report.per_tag = cfg.per_tag;
  report.pass_width = (cfg.beam_size + cfg.tags.size() - 1) / cfg.tags.size();
  report.labs.name = "labs";
  report.separate.name = "separate-passes";
  report.single.name = "single-pass";

  const Runner run{inputs, cfg, report.pass_width};
  CountingModel counter(model);
  run.labs_pass(counter);
  record_counts(report.labs, counter);
  counter.reset();
  run.separate_passes(counter);
  record_counts(report.separate, counter);
  counter.reset();
  run.single_pass(counter);
  record_counts(report.single, counter);

  const std::size_t n = inputs.size();
  for (std::size_t r = 0; r < repeats; ++r) {
    report.labs.samples.push_back(time_per_utterance([&] { run.labs_pass(model); }, n));
    report.separate.samples.push_back(time_per_utterance([&] { run.separate_passes(model); }, n));
    report.single.samples.push_back(time_per_utterance([&] { run.single_pass(model); }, n));
  }
  summarize(report.labs);
  summarize(report.separate);
  summarize(report.single);
  return report;
}

std::string format_bench(const BenchReport& report) {
  std::ostringstream os;
  os << "utterances " << report.utterances << ", repeats " << report.repeats << ", N "
     << report.beam_size << ", g " << report.per_tag << ", pass width " << report.pass_width
     << "\n\n";
  os << std::left << std::setw(18) << "config" << std::right << std::setw(14) << "median(ms)"
     << std::setw(14) << "mean(ms)" << std::setw(13) << "invocations" << std::setw(12) << "rows"
     << '\n';
  os << std::fixed << std::setprecision(4);
  for (const auto* s : {&report.labs, &report.separate, &report.single}) {
    os << std::left << std::setw(18) << s->name << std::right << std::setw(14) << s->median * 1e3
       << std::setw(14) << s->mean * 1e3 << std::setw(13) << s->invocations << std::setw(12)
       << s->rows << '\n';
  }
  if (report.separate.median > 0.0 && report.separate.invocations > 0) {
    os << "\nlabs / separate: time " << std::setprecision(3)
       << report.labs.median / report.separate.median << ", invocations "
       << static_cast<double>(report.labs.invocations) /
              static_cast<double>(report.separate.invocations)
       << ", rows "
       << static_cast<double>(report.labs.rows) / static_cast<double>(report.separate.rows)
       << '\n';
  }
  if (report.single.median > 0.0) {
    os << "labs / single:   time " << report.labs.median / report.single.median << '\n';
  }
  return os.str();
}

}  // namespace labsearch
