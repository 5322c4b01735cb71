#include "trialage/supervision.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <set>
#include <json.hpp>

namespace trialage {

using nlohmann::json;

std::string_view age_kind_name(AgeKind kind) {
  return kind == AgeKind::Min ? "min" : "max";
}

std::optional<AgeKind> age_kind_from_name(std::string_view name) {
  if (name == "min") return AgeKind::Min;
  if (name == "max") return AgeKind::Max;
  return std::nullopt;
}

std::string_view age_unit_name(AgeUnit unit) {
  switch (unit) {
    case AgeUnit::Years: return "Years";
    case AgeUnit::Months: return "Months";
    case AgeUnit::Weeks: return "Weeks";
    case AgeUnit::Days: return "Days";
  }
  return "Years";
}

std::string_view bio_label_name(BioLabel label) {
  switch (label) {
    case BioLabel::B: return "B";
    case BioLabel::I: return "I";
    case BioLabel::O: return "O";
  }
  return "O";
}

std::optional<BioLabel> bio_label_from_name(std::string_view name) {
  if (name == "B") return BioLabel::B;
  if (name == "I") return BioLabel::I;
  if (name == "O") return BioLabel::O;
  return std::nullopt;
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// "21 Years" -> (21, Years); "N/A" / empty -> absent; anything else -> error.
enum class AgeParse { Present, Absent, Error };

AgeParse parse_age_string(std::string_view raw, AgeBound* out) {
  std::string_view s = trim(raw);
  if (s.empty()) return AgeParse::Absent;
  std::string low = lower(s);
  if (low == "n/a" || low == "na" || low == "none") return AgeParse::Absent;
  std::size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == 0) return AgeParse::Error;
  int value = 0;
  try {
    value = std::stoi(std::string(s.substr(0, i)));
  } catch (const std::exception&) {
    return AgeParse::Error;
  }
  std::string unit = lower(trim(s.substr(i)));
  AgeUnit parsed;
  if (unit == "years" || unit == "year") parsed = AgeUnit::Years;
  else if (unit == "months" || unit == "month") parsed = AgeUnit::Months;
  else if (unit == "weeks" || unit == "week") parsed = AgeUnit::Weeks;
  else if (unit == "days" || unit == "day") parsed = AgeUnit::Days;
  else return AgeParse::Error;
  out->value = value;
  out->unit = parsed;
  return AgeParse::Present;
}

// Bullet splitting: "-" at line starts or right after "; " (D8 keeps ranges
// like 18-65 intact).
std::vector<std::string> split_bullets(std::string_view text) {
  std::vector<std::string> parts;
  std::string current;
  std::size_t i = 0;
  bool at_line_start = true;
  while (i < text.size()) {
    char c = text[i];
    bool delimiter = false;
    if (c == '-') {
      if (at_line_start) {
        delimiter = true;
      } else if (i >= 2 && text[i - 1] == ' ' && text[i - 2] == ';') {
        delimiter = true;
      }
    }
    if (delimiter) {
      if (!trim(current).empty()) parts.emplace_back(trim(current));
      current.clear();
      ++i;
      at_line_start = false;
      continue;
    }
    if (c == '\n') {
      at_line_start = true;
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      at_line_start = false;
    }
    current.push_back(c);
    ++i;
  }
  if (!trim(current).empty()) parts.emplace_back(trim(current));
  return parts;
}

std::vector<std::string> criteria_clauses(std::string_view criteria) {
  std::vector<std::string> clauses;
  for (const std::string& bullet : split_bullets(criteria))
    for (const std::string& sent : split_sentences(bullet)) clauses.push_back(sent);
  return clauses;
}

bool clause_matches(const std::string& clause, int value) {
  bool has_value = false, has_keyword = false;
  for (const Token& tok : tokenize(clause)) {
    if (tok.numeric_value && *tok.numeric_value == value) has_value = true;
    if (is_age_keyword(tok.text)) has_keyword = true;
    if (has_value && has_keyword) return true;
  }
  return false;
}

const std::optional<AgeBound>& bound_for(const ClinicalRecord& record, AgeKind kind) {
  return kind == AgeKind::Min ? record.min_age : record.max_age;
}

bool usable_bound(const ClinicalRecord& record, AgeKind kind) {
  const auto& bound = bound_for(record, kind);
  return bound.has_value() && bound->unit == AgeUnit::Years;  // D5 unit filter
}

}  // namespace

std::optional<ClinicalRecord> parse_record(
    const std::string& json_text, const std::function<void(const std::string&)>& warn) {
  json rec = json::parse(json_text, nullptr, false);
  if (rec.is_discarded() || !rec.is_object())
    throw InputFormatError("registry record: not a JSON object");
  if (!rec.contains("nct_id") || !rec["nct_id"].is_string())
    throw InputFormatError("registry record: missing or non-string field 'nct_id'");
  if (!rec.contains("criteria") || !rec["criteria"].is_string())
    throw InputFormatError("registry record '" + rec["nct_id"].get<std::string>() +
                           "': missing or non-string field 'criteria'");
  ClinicalRecord out;
  out.nct_id = rec["nct_id"].get<std::string>();
  out.criteria_text = rec["criteria"].get<std::string>();
  if (rec.contains("description") && rec["description"].is_string())
    out.description = rec["description"].get<std::string>();

  auto read_age = [&](const char* field, std::optional<AgeBound>* slot) {
    if (!rec.contains(field)) return true;
    if (!rec[field].is_string())
      throw InputFormatError("registry record '" + out.nct_id + "': field '" + field +
                             "' is not a string");
    AgeBound bound;
    switch (parse_age_string(rec[field].get<std::string>(), &bound)) {
      case AgeParse::Present:
        *slot = bound;
        return true;
      case AgeParse::Absent:
        return true;
      case AgeParse::Error:
        if (warn)
          warn("record " + out.nct_id + ": unparseable age string '" +
               rec[field].get<std::string>() + "', record skipped");
        return false;
    }
    return false;
  };
  if (!read_age("minimum_age", &out.min_age)) return std::nullopt;
  if (!read_age("maximum_age", &out.max_age)) return std::nullopt;
  return out;
}

std::optional<std::string> select_age_clause(const ClinicalRecord& record, AgeKind kind) {
  if (!usable_bound(record, kind)) return std::nullopt;
  const int value = bound_for(record, kind)->value;
  for (const std::string& clause : criteria_clauses(record.criteria_text))
    if (clause_matches(clause, value)) return clause;
  return std::nullopt;
}

namespace {

template <typename T>
void deterministic_sample(std::vector<T>& items, std::size_t quota, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::shuffle(items.begin(), items.end(), rng);
  if (items.size() > quota) items.resize(quota);
}

std::vector<std::pair<std::string, const ClinicalRecord*>> collect_clauses(
    const std::vector<ClinicalRecord>& records, AgeKind kind, bool dedup) {
  std::vector<std::pair<std::string, const ClinicalRecord*>> out;
  std::set<std::string> seen;
  for (const ClinicalRecord& rec : records) {
    auto clause = select_age_clause(rec, kind);
    if (!clause) continue;
    if (dedup && !seen.insert(*clause).second) continue;
    out.emplace_back(std::move(*clause), &rec);
  }
  return out;
}

}  // namespace

std::vector<SentenceExample> build_sentfinder_dataset(
    const std::vector<ClinicalRecord>& records, const std::vector<Document>& negative_corpus,
    const DatasetQuotas& quotas, const SupervisionConfig& config, DatasetCounts* counts) {
  std::vector<SentenceExample> out;

  for (AgeKind kind : {AgeKind::Min, AgeKind::Max}) {
    auto clauses = collect_clauses(records, kind, config.dedup);
    std::size_t quota = kind == AgeKind::Min ? quotas.min_positive : quotas.max_positive;
    deterministic_sample(clauses, quota,
                         config.seed ^ (kind == AgeKind::Min ? 0x1ull : 0x2ull));
    for (auto& [clause, rec] : clauses) {
      (void)rec;
      SentenceExample ex;
      ex.text = std::move(clause);
      ex.positive = true;
      ex.kind = kind;
      out.push_back(std::move(ex));
    }
    if (counts) {
      auto& slot = kind == AgeKind::Min ? counts->min_positive : counts->max_positive;
      slot = clauses.size();
    }
  }

  std::vector<std::string> negatives;
  std::set<std::string> seen;
  for (const Document& doc : negative_corpus) {
    for (const Sentence* s : doc.sentences()) {
      if (has_age_keyword(*s)) continue;
      if (config.dedup && !seen.insert(s->text).second) continue;
      negatives.push_back(s->text);
    }
  }
  deterministic_sample(negatives, quotas.negative, config.seed ^ 0x3ull);
  for (std::string& text : negatives) {
    SentenceExample ex;
    ex.text = std::move(text);
    ex.positive = false;
    out.push_back(std::move(ex));
  }
  if (counts) counts->negative = negatives.size();
  return out;
}

std::vector<BioSequence> build_bio_dataset(const std::vector<ClinicalRecord>& records,
                                           AgeKind kind, std::size_t quota,
                                           const SupervisionConfig& config) {
  auto clauses = collect_clauses(records, kind, config.dedup);
  deterministic_sample(clauses, quota, config.seed ^ 0x10ull ^ static_cast<int>(kind));
  std::vector<BioSequence> out;
  out.reserve(clauses.size());
  for (const auto& [clause, rec] : clauses) {
    const int value = bound_for(*rec, kind)->value;
    BioSequence seq;
    seq.tokens = tokenize(clause);
    seq.kind = kind;
    seq.labels.assign(seq.tokens.size(), BioLabel::O);
    bool labeled = false;
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
      if (!labeled && seq.tokens[i].numeric_value &&
          *seq.tokens[i].numeric_value == value) {
        seq.labels[i] = BioLabel::B;  // first occurrence (D7)
        labeled = true;
      }
    }
    if (labeled) out.push_back(std::move(seq));
  }
  return out;
}

std::vector<QaPair> build_qa_dataset(const std::vector<ClinicalRecord>& records,
                                     AgeKind kind, std::size_t quota,
                                     const SupervisionConfig& config, QaContextMode mode) {
  std::vector<QaPair> out;
  std::set<std::string> seen;
  std::vector<QaPair> pool;
  for (const ClinicalRecord& rec : records) {
    if (!usable_bound(rec, kind)) continue;
    auto clause = select_age_clause(rec, kind);
    if (!clause) continue;
    const std::string& context =
        mode == QaContextMode::Clause ? *clause : rec.criteria_text;
    if (config.dedup && !seen.insert(context).second) continue;
    const int value = bound_for(rec, kind)->value;
    QaPair pair;
    pair.kind = kind;
    pair.answer_value = value;
    bool found = false;
    for (const Token& tok : tokenize(context)) {
      if (tok.numeric_value && *tok.numeric_value == value) {
        pair.answer_start = tok.start;  // first standalone occurrence (D7)
        pair.answer_end = tok.end;
        found = true;
        break;
      }
    }
    if (!found) continue;  // value never appears as a standalone token
    pair.context = context;
    pool.push_back(std::move(pair));
  }
  deterministic_sample(pool, quota, config.seed ^ 0x20ull ^ static_cast<int>(kind));
  out = std::move(pool);
  return out;
}

std::vector<Document> negative_corpus_from_descriptions(
    const std::vector<ClinicalRecord>& records) {
  std::vector<Document> out;
  for (const ClinicalRecord& rec : records) {
    if (rec.description.empty()) continue;
    out.push_back(load_document_text(rec.nct_id + ":description", rec.description));
  }
  return out;
}

}  // namespace trialage
