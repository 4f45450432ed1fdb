#include "labs/metrics.hpp"

#include <cctype>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "labs/duration.hpp"

namespace labsearch {

double src_metric(std::span<const DurationRow> rows, double epsilon) {
  if (rows.empty()) throw ContractError("SRC needs at least one row");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ContractError("epsilon must lie in (0, 1)");
  std::size_t ok = 0;
  for (const auto& r : rows) {
    // An empty hypothesis may legitimately estimate to zero seconds.
    if (!(r.reference > 0.0) || !(r.hypothesis >= 0.0)) {
      throw ContractError("SRC needs positive reference and non-negative hypothesis durations");
    }
    if (is_compliant(r.hypothesis / r.reference, epsilon)) ++ok;
  }
  return 100.0 * static_cast<double>(ok) / static_cast<double>(rows.size());
}

double length_ratio(const std::vector<std::vector<std::string>>& hyps,
                    const std::vector<std::vector<std::string>>& refs) {
  if (hyps.empty() || hyps.size() != refs.size()) {
    throw ContractError("length ratio needs equally many non-zero hypotheses and references");
  }
  std::size_t h = 0, r = 0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    h += hyps[i].size();
    r += refs[i].size();
  }
  if (r == 0) throw ContractError("references contain no tokens");
  return static_cast<double>(h) / static_cast<double>(r);
}

std::vector<std::string> bleu_tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      out.emplace_back(1, ch);
    } else {
      cur += ch;
    }
  }
  flush();
  return out;
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  for (std::size_t n = 0; n < kBleuOrder; ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  hyp_length += other.hyp_length;
  ref_length += other.ref_length;
  return *this;
}

BleuStats sentence_stats(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  BleuStats s;
  s.hyp_length = hyp.size();
  s.ref_length = ref.size();
  for (std::size_t n = 1; n <= kBleuOrder; ++n) {
    std::map<std::vector<std::string>, std::size_t> ref_counts, hyp_counts;
    for (std::size_t i = 0; i + n <= ref.size(); ++i) {
      ++ref_counts[{ref.begin() + static_cast<std::ptrdiff_t>(i),
                    ref.begin() + static_cast<std::ptrdiff_t>(i + n)}];
    }
    for (std::size_t i = 0; i + n <= hyp.size(); ++i) {
      ++hyp_counts[{hyp.begin() + static_cast<std::ptrdiff_t>(i),
                    hyp.begin() + static_cast<std::ptrdiff_t>(i + n)}];
    }
    for (const auto& [gram, c] : hyp_counts) {
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) s.matches[n - 1] += std::min(c, it->second);
      s.totals[n - 1] += c;
    }
  }
  return s;
}

double bleu_from_stats(const BleuStats& s) {
  if (s.hyp_length == 0 || s.totals[0] == 0 || s.matches[0] == 0) return 0.0;
  double log_sum = std::log(static_cast<double>(s.matches[0]) / static_cast<double>(s.totals[0]));
  for (std::size_t n = 1; n < kBleuOrder; ++n) {
    log_sum += std::log((static_cast<double>(s.matches[n]) + 1.0) /
                        (static_cast<double>(s.totals[n]) + 1.0));
  }
  const double c = static_cast<double>(s.hyp_length);
  const double r = static_cast<double>(s.ref_length);
  const double log_bp = c < r ? 1.0 - r / c : 0.0;
  return 100.0 * std::exp(log_bp + log_sum / static_cast<double>(kBleuOrder));
}

double corpus_bleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs) {
  if (hyps.empty() || hyps.size() != refs.size()) {
    throw ContractError("BLEU needs equally many non-zero hypotheses and references");
  }
  BleuStats total;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    total += sentence_stats(bleu_tokenize(hyps[i]), bleu_tokenize(refs[i]));
  }
  return bleu_from_stats(total);
}

namespace {

void aggregate(EvalReport& report) {
  std::vector<DurationRow> durations;
  bool all_refs = true;
  std::size_t hyp_tokens = 0, ref_tokens = 0;
  BleuStats total;
  for (const auto& row : report.rows) {
    durations.push_back({row.reference_duration, row.estimated_duration});
    if (!row.bleu) {
      all_refs = false;
      continue;
    }
    total += *row.bleu;
    hyp_tokens += row.bleu->hyp_length;
    ref_tokens += row.bleu->ref_length;
  }
  report.src = src_metric(durations, report.epsilon);
  report.length_ratio.reset();
  report.bleu.reset();
  if (all_refs && ref_tokens > 0) {
    report.length_ratio = static_cast<double>(hyp_tokens) / static_cast<double>(ref_tokens);
    report.bleu = bleu_from_stats(total);
  }
}

}  // namespace

EvalReport evaluate(const std::vector<EvalInput>& inputs, double epsilon, const std::string& unit) {
  if (inputs.empty()) throw ContractError("nothing to evaluate");
  EvalReport report;
  report.epsilon = epsilon;
  report.unit = unit;
  for (const auto& in : inputs) {
    EvalRow row;
    row.id = in.id;
    row.tag = in.tag;
    row.reference_duration = in.reference_duration;
    row.estimated_duration = in.estimated_duration;
    if (!(in.reference_duration > 0.0)) {
      throw DataError("utterance '" + in.id + "' has a non-positive reference duration");
    }
    row.ratio = in.estimated_duration / in.reference_duration;
    row.compliant = is_compliant(row.ratio, epsilon);
    row.hypothesis = in.hypothesis;
    row.reference = in.reference;
    if (in.reference) row.bleu = sentence_stats(bleu_tokenize(in.hypothesis), bleu_tokenize(*in.reference));
    report.rows.push_back(std::move(row));
  }
  aggregate(report);
  return report;
}

bool self_consistent(const EvalReport& report) {
  if (report.rows.empty()) return false;
  EvalReport copy = report;
  std::size_t compliant = 0;
  for (const auto& row : report.rows) {
    if (row.compliant != is_compliant(row.estimated_duration / row.reference_duration, report.epsilon)) {
      return false;
    }
    compliant += row.compliant ? 1 : 0;
  }
  aggregate(copy);
  const double src = 100.0 * static_cast<double>(compliant) / static_cast<double>(report.rows.size());
  return copy.src == report.src && src == report.src && copy.length_ratio == report.length_ratio &&
         copy.bleu == report.bleu;
}

std::string format_table(const EvalReport& report) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "utterances  " << report.rows.size() << '\n';
  os << "epsilon     " << report.epsilon << '\n';
  os << "SRC         " << report.src << '\n';
  if (report.length_ratio) os << "LR          " << std::setprecision(3) << *report.length_ratio << '\n';
  if (report.bleu) os << "BLEU        " << std::setprecision(2) << *report.bleu << '\n';
  os << '\n' << std::left << std::setw(16) << "id" << std::setw(8) << "tag" << std::right
     << std::setw(9) << "ref(s)" << std::setw(9) << "est(s)" << std::setw(8) << "ratio"
     << "  ok\n";
  for (const auto& row : report.rows) {
    os << std::left << std::setw(16) << row.id << std::setw(8) << tag_name(row.tag) << std::right
       << std::setprecision(3) << std::setw(9) << row.reference_duration << std::setw(9)
       << row.estimated_duration << std::setw(8) << row.ratio << "  "
       << (row.compliant ? "yes" : "no") << '\n';
  }
  return os.str();
}

}  // namespace labsearch
