#include "labs/corpus.hpp"

#include <omp.h>

namespace labsearch {

namespace {

CorpusItem run_item(const ScoringModel& model, const SourceUtterance& src, const DecodeJob& job) {
  CorpusItem item;
  try {
    validate(src);
    item.result = decode_one(model, src, job);
  } catch (const std::exception& e) {
    item.error = e.what();
  }
  return item;
}

}  // namespace

DecodeResult decode_one(const ScoringModel& model, const SourceUtterance& src, const DecodeJob& job) {
  if (job.mode == DecodeMode::Labs) return labs_decode(model, src, job.beam);
  return standard_beam_decode(model, src, job.standard_tag, job.beam.beam_size,
                              job.beam.max_length, job.beam.early_stop);
}

std::vector<CorpusItem> decode_corpus_serial(const ScoringModel& model,
                                             const std::vector<SourceUtterance>& sources,
                                             const DecodeJob& job) {
  std::vector<CorpusItem> out;
  out.reserve(sources.size());
  for (const auto& src : sources) out.push_back(run_item(model, src, job));
  return out;
}

std::vector<CorpusItem> decode_corpus(const ScoringModel& model,
                                      const std::vector<SourceUtterance>& sources,
                                      const DecodeJob& job, int jobs) {
  if (jobs <= 1) return decode_corpus_serial(model, sources, job);
  std::vector<CorpusItem> out(sources.size());
  const auto n = static_cast<std::ptrdiff_t>(sources.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = run_item(model, sources[static_cast<std::size_t>(i)], job);
  }
  return out;
}

}  // namespace labsearch
