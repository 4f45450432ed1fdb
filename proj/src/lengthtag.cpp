#include "labs/lengthtag.hpp"

#include <omp.h>

#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

namespace labsearch {

namespace {

bool is_ascii_space(unsigned char c) { return c < 0x80 && std::isspace(c) != 0; }
bool is_ascii_punct(unsigned char c) { return c < 0x80 && std::ispunct(c) != 0; }

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (is_ascii_space(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::map<std::string, G2PLexicon::Phonemes> read_tsv(std::istream& in, const char* what,
                                                     bool normalize_key) {
  std::map<std::string, G2PLexicon::Phonemes> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError(std::string(what) + " line " + std::to_string(lineno) + ": missing tab");
    }
    std::string key = line.substr(0, tab);
    if (normalize_key) {
      auto words = normalize_words(key);
      if (words.size() != 1) {
        throw DataError(std::string(what) + " line " + std::to_string(lineno) +
                        ": entry must be a single word");
      }
      key = words.front();
    }
    auto phonemes = split_ws(std::string_view(line).substr(tab + 1));
    if (phonemes.empty()) {
      throw DataError(std::string(what) + " line " + std::to_string(lineno) + ": no phonemes");
    }
    out[key] = std::move(phonemes);
  }
  return out;
}

}  // namespace

std::vector<std::string> normalize_words(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (is_ascii_punct(c)) continue;
    cleaned += c < 0x80 ? static_cast<char>(std::tolower(c)) : ch;
  }
  return split_ws(cleaned);
}

std::vector<std::string> utf8_code_points(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    auto c = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (c >= 0xF0) {
      len = 4;
    } else if (c >= 0xE0) {
      len = 3;
    } else if (c >= 0xC0) {
      len = 2;
    }
    len = std::min(len, text.size() - i);
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

G2PLexicon::G2PLexicon(std::map<std::string, Phonemes> words,
                       std::map<std::string, Phonemes> letter_rules)
    : words_(std::move(words)), rules_(std::move(letter_rules)) {
  for (const auto& [w, ph] : words_) {
    if (ph.empty()) throw DataError("lexicon entry '" + w + "' has no phonemes");
  }
  for (const auto& [l, ph] : rules_) {
    if (ph.empty()) throw DataError("letter rule '" + l + "' has no phonemes");
    if (utf8_code_points(l).size() != 1) {
      throw DataError("letter rule key '" + l + "' is not a single character");
    }
  }
}

G2PLexicon G2PLexicon::load(std::istream& lexicon_tsv, std::istream* rules_tsv) {
  auto words = read_tsv(lexicon_tsv, "lexicon", true);
  std::map<std::string, Phonemes> rules;
  if (rules_tsv != nullptr) rules = read_tsv(*rules_tsv, "letter rules", false);
  return G2PLexicon(std::move(words), std::move(rules));
}

G2PLexicon G2PLexicon::load_files(const std::string& lexicon_path, const std::string& rules_path) {
  std::istringstream none;
  std::ifstream file;
  if (!lexicon_path.empty()) {
    file.open(lexicon_path);
    if (!file) throw DataError("cannot open lexicon '" + lexicon_path + "'");
  }
  std::istream& lex = lexicon_path.empty() ? static_cast<std::istream&>(none) : file;
  if (rules_path.empty()) return load(lex, nullptr);
  std::ifstream rules(rules_path);
  if (!rules) throw DataError("cannot open letter rules '" + rules_path + "'");
  return load(lex, &rules);
}

G2PLexicon::Phonemes G2PLexicon::word(std::string_view normalized) const {
  if (auto it = words_.find(std::string(normalized)); it != words_.end()) return it->second;
  Phonemes out;
  for (const auto& cp : utf8_code_points(normalized)) {
    auto rule = rules_.find(cp);
    if (rule == rules_.end()) {
      throw DataError("no letter rule for '" + cp + "' in word '" + std::string(normalized) + "'");
    }
    out.insert(out.end(), rule->second.begin(), rule->second.end());
  }
  return out;
}

std::vector<std::string> g2p(const G2PLexicon& lexicon, std::string_view text) {
  auto words = normalize_words(text);
  if (words.empty()) throw DataError("text is empty after normalization");
  std::vector<std::string> out;
  for (const auto& w : words) {
    auto ph = lexicon.word(w);
    out.insert(out.end(), ph.begin(), ph.end());
  }
  return out;
}

std::string_view unit_name(LengthUnit unit) {
  return unit == LengthUnit::Phoneme ? "phoneme" : "character";
}

std::optional<LengthUnit> parse_unit(std::string_view name) {
  if (name == "phoneme") return LengthUnit::Phoneme;
  if (name == "character") return LengthUnit::Character;
  return std::nullopt;
}

std::size_t count_units(std::string_view text, LengthUnit unit, const G2PLexicon& lexicon) {
  if (unit == LengthUnit::Phoneme) return g2p(lexicon, text).size();
  auto words = normalize_words(text);
  if (words.empty()) throw DataError("text is empty after normalization");
  std::size_t n = 0;
  for (const auto& w : words) n += utf8_code_points(w).size();
  return n;
}

TagAssignment assign_tag(std::size_t src_units, std::size_t tgt_units, double alpha) {
  if (src_units == 0 || tgt_units == 0) throw ContractError("unit counts must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ContractError("alpha must lie in (0, 1)");
  TagAssignment out;
  out.ratio = static_cast<double>(tgt_units) / static_cast<double>(src_units);
  // Boundaries belong to normal; the slack absorbs rounding in 1 +/- alpha.
  constexpr double kSlack = 1e-12;
  if (out.ratio < 1.0 - alpha - kSlack) {
    out.tag = LengthTag::Short;
  } else if (out.ratio > 1.0 + alpha + kSlack) {
    out.tag = LengthTag::Long;
  } else {
    out.tag = LengthTag::Normal;
  }
  return out;
}

std::size_t ratio_bin(double ratio) {
  if (!(ratio >= 0.0)) return 0;
  auto bin = static_cast<std::size_t>(std::floor(ratio / kRatioBinWidth + 1e-9));
  return std::min(bin, kRatioBins - 1);
}

Annotation annotate_corpus(const std::vector<TextPair>& pairs, LengthUnit unit, double alpha,
                           const G2PLexicon& source_lexicon, const G2PLexicon& target_lexicon,
                           int jobs) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ContractError("alpha must lie in (0, 1)");
  const std::size_t n = pairs.size();
  std::vector<std::optional<TaggedExample>> slots(n);
  std::vector<std::string> errors(n);

  auto annotate_one = [&](std::size_t i) {
    try {
      TaggedExample ex;
      ex.source = pairs[i].source;
      ex.target = pairs[i].target;
      ex.unit = unit;
      ex.source_units = count_units(ex.source, unit, source_lexicon);
      ex.target_units = count_units(ex.target, unit, target_lexicon);
      auto a = assign_tag(ex.source_units, ex.target_units, alpha);
      ex.ratio = a.ratio;
      ex.tag = a.tag;
      slots[i] = std::move(ex);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  };

  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) annotate_one(i);
  } else {
#pragma omp parallel for schedule(dynamic, 16) num_threads(jobs)
    for (std::size_t i = 0; i < n; ++i) annotate_one(i);
  }

  Annotation out;
  out.report.total = n;
  out.report.alpha = alpha;
  out.report.unit = unit;
  for (std::size_t i = 0; i < n; ++i) {
    if (!slots[i]) {
      out.report.failures.push_back({i, errors[i]});
      continue;
    }
    ++out.report.tag_counts[tag_index(slots[i]->tag)];
    ++out.report.histogram[ratio_bin(slots[i]->ratio)];
    out.examples.push_back(std::move(*slots[i]));
  }
  return out;
}

std::string format_report(const AnnotationReport& report) {
  std::ostringstream os;
  os << "unit: " << unit_name(report.unit) << "  alpha: " << report.alpha << '\n';
  os << "pairs: " << report.total << "  annotated: " << report.total - report.failures.size()
     << "  failed: " << report.failures.size() << '\n';
  for (LengthTag t : kAllTags) {
    os << std::left << std::setw(8) << tag_name(t) << report.tag_counts[tag_index(t)] << '\n';
  }
  os << "ratio histogram:\n";
  for (std::size_t b = 0; b < kRatioBins; ++b) {
    if (report.histogram[b] == 0) continue;
    std::ostringstream label;
    label << std::fixed << std::setprecision(1) << b * kRatioBinWidth;
    if (b + 1 == kRatioBins) {
      label << "+";
    } else {
      label << "-" << (b + 1) * kRatioBinWidth;
    }
    os << "  " << std::left << std::setw(10) << label.str() << report.histogram[b] << '\n';
  }
  for (const auto& f : report.failures) os << "failed #" << f.index << ": " << f.reason << '\n';
  return os.str();
}

}  // namespace labsearch
