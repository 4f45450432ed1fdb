#include "labs/decode.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace labsearch {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Hypothesis seed(const Vocabulary& vocab, LengthTag tag) {
  Hypothesis h;
  h.tag = tag;
  h.tokens = {vocab.tag_token(tag)};
  return h;
}

void sort_ranked(std::vector<Hypothesis>& v) { std::sort(v.begin(), v.end(), ranks_before); }

// True when each tag has a finished hypothesis strictly better than every
// active one of that tag. Scores never increase, so nothing can overtake it.
bool settled(const PerTag<std::vector<Hypothesis>>& finished,
             const PerTag<std::vector<Hypothesis>>& active, const std::vector<LengthTag>& tags) {
  for (LengthTag t : tags) {
    const auto& done = finished[tag_index(t)];
    if (done.empty()) return false;
    double best = done.front().score;
    for (const auto& h : done) best = std::max(best, h.score);
    for (const auto& h : active[tag_index(t)]) {
      if (!(h.score < best)) return false;
    }
  }
  return true;
}

std::vector<Hypothesis> extend(const Hypothesis& parent, std::span<const double> logp,
                               const Vocabulary& vocab) {
  std::vector<Hypothesis> out;
  for (std::size_t v = 0; v < logp.size(); ++v) {
    if (!is_possible(logp[v])) continue;
    const auto id = static_cast<TokenId>(v);
    if (vocab.is_tag(id)) continue;
    Hypothesis child;
    child.tag = parent.tag;
    child.tokens.reserve(parent.tokens.size() + 1);
    child.tokens = parent.tokens;
    child.tokens.push_back(id);
    child.score = parent.score + logp[v];
    child.completed = id == vocab.eos();
    out.push_back(std::move(child));
  }
  return out;
}

}  // namespace

void validate(const BeamConfig& cfg) {
  if (cfg.beam_size < 1) throw ContractError("beam size must be at least 1");
  if (cfg.max_length < 1) throw ContractError("max length must be at least 1");
  if (cfg.tags.empty()) throw ContractError("tag set must not be empty");
  for (std::size_t i = 0; i < cfg.tags.size(); ++i) {
    for (std::size_t j = i + 1; j < cfg.tags.size(); ++j) {
      if (cfg.tags[i] == cfg.tags[j]) throw ContractError("tag set has duplicates");
    }
  }
  if (cfg.per_tag * cfg.tags.size() > cfg.beam_size) {
    throw ContractError("per-tag guarantee times tag count exceeds the beam size");
  }
  if (!(cfg.length_penalty >= 0.0)) throw ContractError("length penalty must be non-negative");
}

PerTagResolution resolve_per_tag(std::size_t beam_size, std::size_t num_tags,
                                 std::size_t requested) {
  if (num_tags == 0) throw ContractError("tag set must not be empty");
  const std::size_t fit = beam_size / num_tags;
  if (requested <= fit) return {requested, false};
  return {fit, true};
}

std::size_t BeamState::active_count() const {
  std::size_t n = 0;
  for (const auto& a : active) n += a.size();
  return n;
}

std::size_t CandidateSet::size() const {
  std::size_t n = 0;
  for (const auto& c : by_tag) n += c.size();
  return n;
}

CandidateSet expand(const BeamState& state, const ScoringModel& model, const SourceUtterance& src) {
  const auto& vocab = model.vocabulary();
  CandidateSet out;
  out.step = state.step + 1;

  std::vector<const Hypothesis*> parents;
  std::vector<Prefix> prefixes;
  for (const auto& list : state.active) {
    for (const auto& h : list) {
      parents.push_back(&h);
      prefixes.emplace_back(h.tokens);
    }
  }
  if (parents.empty()) return out;

  const std::size_t v = vocab.size();
  std::vector<double> scores(parents.size() * v);
  model.score_batch(src, prefixes, scores);
  out.expanded = parents.size();

  for (std::size_t r = 0; r < parents.size(); ++r) {
    auto children = extend(*parents[r], std::span<const double>(scores).subspan(r * v, v), vocab);
    auto& bucket = out.by_tag[tag_index(parents[r]->tag)];
    std::move(children.begin(), children.end(), std::back_inserter(bucket));
  }
  return out;
}

BeamState prune(CandidateSet candidates, const BeamConfig& cfg) {
  BeamState out;
  out.step = candidates.step;

  PerTag<std::vector<Hypothesis>> open;
  for (LengthTag t : kAllTags) {
    for (auto& h : candidates.by_tag[tag_index(t)]) {
      auto& dest = h.completed ? out.finished[tag_index(t)] : open[tag_index(t)];
      dest.push_back(std::move(h));
    }
    sort_ranked(open[tag_index(t)]);
    sort_ranked(out.finished[tag_index(t)]);
  }

  // Guaranteed slots first; a tag short of candidates leaves its slots to
  // the shared pool.
  std::size_t kept = 0;
  PerTag<std::size_t> reserved = {0, 0, 0};
  for (LengthTag t : cfg.tags) {
    const auto i = tag_index(t);
    reserved[i] = std::min(cfg.per_tag, open[i].size());
    for (std::size_t k = 0; k < reserved[i]; ++k) out.active[i].push_back(std::move(open[i][k]));
    kept += reserved[i];
  }

  std::vector<Hypothesis> rest;
  for (LengthTag t : kAllTags) {
    const auto i = tag_index(t);
    std::move(open[i].begin() + static_cast<std::ptrdiff_t>(reserved[i]), open[i].end(),
              std::back_inserter(rest));
  }
  const std::size_t room = cfg.beam_size > kept ? cfg.beam_size - kept : 0;
  if (rest.size() > room) {
    std::partial_sort(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(room), rest.end(),
                      ranks_before);
    rest.resize(room);
  }
  for (auto& h : rest) out.active[tag_index(h.tag)].push_back(std::move(h));
  for (auto& a : out.active) sort_ranked(a);

  if (out.active_count() > cfg.beam_size) throw std::logic_error("beam bound violated");
  return out;
}

DecodeResult select_nbest(const PerTag<std::vector<Hypothesis>>& finished, const BeamConfig& cfg) {
  auto key = [&](const Hypothesis& h) {
    if (cfg.length_penalty <= 0.0) return h.score;
    return h.score / std::pow(static_cast<double>(std::max<std::size_t>(h.length(), 1)),
                              cfg.length_penalty);
  };
  auto before = [&](const Hypothesis& a, const Hypothesis& b) {
    const double ka = key(a), kb = key(b);
    if (ka != kb) return ka > kb;
    return a.tokens < b.tokens;
  };

  DecodeResult out;
  PerTag<std::vector<Hypothesis>> pools;
  for (LengthTag t : cfg.tags) {
    const auto i = tag_index(t);
    pools[i] = finished[i];
    std::sort(pools[i].begin(), pools[i].end(), before);
    out.status[i] = pools[i].empty() ? TagStatus::LengthExhausted : TagStatus::Ok;
  }

  std::vector<Hypothesis> heads, rest;
  for (LengthTag t : cfg.tags) {
    const auto& pool = pools[tag_index(t)];
    if (pool.empty()) continue;
    heads.push_back(pool.front());
    rest.insert(rest.end(), pool.begin() + 1, pool.end());
  }
  std::sort(heads.begin(), heads.end(), before);
  if (heads.size() > cfg.beam_size) {
    rest.insert(rest.end(), heads.begin() + static_cast<std::ptrdiff_t>(cfg.beam_size),
                heads.end());
    heads.resize(cfg.beam_size);
  }
  const std::size_t room = cfg.beam_size - heads.size();
  std::sort(rest.begin(), rest.end(), before);
  if (rest.size() > room) rest.resize(room);

  for (auto* part : {&heads, &rest}) {
    for (auto& h : *part) out.hypotheses[tag_index(h.tag)].push_back(std::move(h));
  }
  for (auto& list : out.hypotheses) std::sort(list.begin(), list.end(), before);
  return out;
}

DecodeResult labs_decode(const ScoringModel& model, const SourceUtterance& src,
                         const BeamConfig& cfg) {
  validate(cfg);
  const auto start = Clock::now();
  const auto& vocab = model.vocabulary();
  const bool early_stop = cfg.early_stop && cfg.length_penalty <= 0.0;

  BeamState state;
  for (LengthTag t : cfg.tags) state.active[tag_index(t)].push_back(seed(vocab, t));

  // With early stop, a tag whose best finished hypothesis beats all of its
  // active ones is retired: its hypotheses stop expanding and its share of
  // the beam (N / |tags|) is released, so a retired tag costs no more than a
  // separate pass that stopped at the same step.
  BeamConfig live = cfg;
  const std::size_t share = cfg.beam_size / cfg.tags.size();
  PerTag<std::vector<Hypothesis>> finished;
  std::size_t expanded = 0;
  for (std::size_t step = 1; step <= cfg.max_length && state.active_count() > 0; ++step) {
    auto candidates = expand(state, model, src);
    expanded += candidates.expanded;
    auto next = prune(std::move(candidates), live);
    for (LengthTag t : kAllTags) {
      auto& done = next.finished[tag_index(t)];
      std::move(done.begin(), done.end(), std::back_inserter(finished[tag_index(t)]));
    }
    state.active = std::move(next.active);
    state.step = step;
    if (!early_stop) continue;
    for (std::size_t k = live.tags.size(); k-- > 0;) {
      const LengthTag t = live.tags[k];
      if (!settled(finished, state.active, {t})) continue;
      state.active[tag_index(t)].clear();
      live.tags.erase(live.tags.begin() + static_cast<std::ptrdiff_t>(k));
      live.beam_size -= std::min(share, live.beam_size);
    }
    if (live.tags.empty()) break;
  }

  auto result = select_nbest(finished, cfg);
  result.expanded = expanded;
  result.steps = state.step;
  result.wall_seconds = seconds_since(start);
  return result;
}

DecodeResult standard_beam_decode(const ScoringModel& model, const SourceUtterance& src,
                                  LengthTag tag, std::size_t width, std::size_t max_length,
                                  bool early_stop) {
  if (width < 1) throw ContractError("beam width must be at least 1");
  if (max_length < 1) throw ContractError("max length must be at least 1");
  const auto start = Clock::now();
  const auto& vocab = model.vocabulary();
  const std::size_t v = vocab.size();

  std::vector<Hypothesis> beam = {seed(vocab, tag)};
  std::vector<Hypothesis> finished;
  std::size_t expanded = 0;
  std::size_t steps = 0;
  for (std::size_t step = 1; step <= max_length && !beam.empty(); ++step) {
    std::vector<Prefix> prefixes;
    for (const auto& h : beam) prefixes.emplace_back(h.tokens);
    std::vector<double> scores(beam.size() * v);
    model.score_batch(src, prefixes, scores);
    expanded += beam.size();

    std::vector<Hypothesis> open;
    for (std::size_t r = 0; r < beam.size(); ++r) {
      for (auto& child : extend(beam[r], std::span<const double>(scores).subspan(r * v, v), vocab)) {
        (child.completed ? finished : open).push_back(std::move(child));
      }
    }
    sort_ranked(open);
    if (open.size() > width) open.resize(width);
    beam = std::move(open);
    steps = step;

    if (early_stop && !finished.empty()) {
      double best = finished.front().score;
      for (const auto& h : finished) best = std::max(best, h.score);
      if (std::all_of(beam.begin(), beam.end(), [best](const auto& h) { return h.score < best; })) {
        break;
      }
    }
  }

  DecodeResult result;
  sort_ranked(finished);
  if (finished.size() > width) finished.resize(width);
  result.status[tag_index(tag)] = finished.empty() ? TagStatus::LengthExhausted : TagStatus::Ok;
  result.hypotheses[tag_index(tag)] = std::move(finished);
  result.expanded = expanded;
  result.steps = steps;
  result.wall_seconds = seconds_since(start);
  return result;
}

}  // namespace labsearch
