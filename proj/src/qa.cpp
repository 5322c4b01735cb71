#include "trialage/qa.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace trialage {

namespace {

std::string magnitude_bucket(std::int64_t value) {
  if (value < 10) return "lt10";
  if (value <= 17) return "10-17";
  if (value <= 25) return "18-25";
  if (value <= 40) return "26-40";
  if (value <= 64) return "41-64";
  if (value <= 100) return "65-100";
  return "gt100";
}

std::string distance_bucket(std::size_t d) {
  if (d <= 1) return "1";
  if (d == 2) return "2";
  if (d == 3) return "3";
  if (d <= 6) return "4-6";
  if (d <= 10) return "7-10";
  return "far";
}

const std::string kBos = "<s>";
const std::string kEos = "</s>";

}  // namespace

std::vector<Candidate> enumerate_candidates(const Sentence& s) {
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    if (auto value = parse_integer_token(s.tokens[i])) {
      out.push_back({i, *value});
    }
  }
  return out;
}

FeatureVector featurize_candidate(const Candidate& c, const Sentence& s,
                                  const AgeQuestion& q) {
  FeatureVector fv;
  const auto& toks = s.tokens;
  const auto n = static_cast<std::ptrdiff_t>(toks.size());
  const auto pos = static_cast<std::ptrdiff_t>(c.token_index);
  const std::string prefix = std::string(age_kind_name(q.kind)) + "|";

  auto word_at = [&](std::ptrdiff_t i) -> std::string {
    if (i < 0) return kBos;
    if (i >= n) return kEos;
    return normalized_text(toks[static_cast<std::size_t>(i)]);
  };
  auto token_at = [&](std::ptrdiff_t i) -> const Token* {
    if (i < 0 || i >= n) return nullptr;
    return &toks[static_cast<std::size_t>(i)];
  };

  for (int off = -3; off <= 3; ++off) {
    if (off == 0) continue;
    std::string tag = off > 0 ? "+" + std::to_string(off) : std::to_string(off);
    fv[prefix + "w@" + tag + ":" + word_at(pos + off)] += 1.0;
  }

  // letter n-grams of the immediate neighborhood
  for (int off : {-2, -1, 1, 2}) {
    const Token* t = token_at(pos + off);
    if (!t) continue;
    std::string w = normalized_text(*t);
    std::string tag = off > 0 ? "+" + std::to_string(off) : std::to_string(off);
    for (std::size_t len = 2; len <= 4; ++len) {
      if (w.size() < len) break;
      for (std::size_t i = 0; i + len <= w.size(); ++i)
        fv[prefix + "c@" + tag + ":" + w.substr(i, len)] += 1.0;
    }
  }

  // range position: digit-dash-digit patterns
  const Token* next = token_at(pos + 1);
  const Token* next2 = token_at(pos + 2);
  if (next && next2 && is_dash(*next) && next2->numeric_value)
    fv[prefix + "rangeLeft"] = 1.0;
  const Token* prev = token_at(pos - 1);
  const Token* prev2 = token_at(pos - 2);
  if (prev && prev2 && is_dash(*prev) && prev2->numeric_value)
    fv[prefix + "rangeRight"] = 1.0;

  if (prev && is_comparison(*prev))
    fv[prefix + "cmpLeft:" + normalized_text(*prev)] = 1.0;
  if (next && is_comparison(*next))
    fv[prefix + "cmpRight:" + normalized_text(*next)] = 1.0;

  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (!is_age_keyword(toks[static_cast<std::size_t>(i)].text)) continue;
    auto d = static_cast<std::size_t>(std::abs(i - pos));
    best = std::min(best, d);
  }
  if (best == std::numeric_limits<std::size_t>::max())
    fv[prefix + "kwdist:none"] = 1.0;
  else
    fv[prefix + "kwdist:" + distance_bucket(best)] = 1.0;

  fv[prefix + "vmag:" + magnitude_bucket(c.value)] = 1.0;
  return fv;
}

QaModel train_qa(const std::vector<QaPair>& pairs, const MaxEntConfig& config) {
  QaModel model;
  for (AgeKind kind : {AgeKind::Min, AgeKind::Max}) {
    std::vector<std::pair<FeatureVector, bool>> data;
    std::size_t positives = 0;
    AgeQuestion question{kind};
    for (const QaPair& pair : pairs) {
      if (pair.kind != kind) continue;
      Sentence context = make_sentence(pair.context);
      for (const Candidate& cand : enumerate_candidates(context)) {
        const Token& tok = context.tokens[cand.token_index];
        bool positive = tok.start == pair.answer_start && tok.end == pair.answer_end;
        positives += positive ? 1 : 0;
        data.emplace_back(featurize_candidate(cand, context, question), positive);
      }
    }
    if (data.empty() || positives == 0)
      throw TrainingError(std::string("no positive ") + std::string(age_kind_name(kind)) +
                          "-age candidates in QA training data");
    LogisticModel scorer = train_logistic(data, config);
    (kind == AgeKind::Min ? model.min_scorer : model.max_scorer) = std::move(scorer);
  }
  return model;
}

std::optional<AgeAnswer> answer(const QaModel& model, const Sentence& s,
                                const AgeQuestion& q) {
  auto candidates = enumerate_candidates(s);
  if (candidates.empty()) return std::nullopt;
  const LogisticModel& scorer = model.scorer(q.kind);
  std::optional<AgeAnswer> best;
  for (const Candidate& cand : candidates) {
    double p = scorer.probability(featurize_candidate(cand, s, q));
    if (!best || p > best->confidence) {
      AgeAnswer ans;
      ans.value = cand.value;
      ans.confidence = p;
      ans.kind = q.kind;
      ans.sentence_index = s.index;
      ans.span_start = s.tokens[cand.token_index].start;
      ans.span_end = s.tokens[cand.token_index].end;
      best = ans;
    }
  }
  return best;
}

void write_qa(const QaModel& model, std::ostream& os) {
  os << "trialage-qa v1\n";
  os << "[min]\n";
  write_maxent(model.min_scorer, os);
  os << "[max]\n";
  write_maxent(model.max_scorer, os);
}

QaModel read_qa(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "trialage-qa v1")
    throw InputFormatError("qa model: bad magic line");
  QaModel model;
  if (!std::getline(is, line) || line != "[min]")
    throw InputFormatError("qa model: missing [min] block");
  model.min_scorer = read_maxent(is);
  if (!std::getline(is, line) || line != "[max]")
    throw InputFormatError("qa model: missing [max] block");
  model.max_scorer = read_maxent(is);
  return model;
}

void save_qa(const QaModel& model, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputFormatError("cannot open model file for writing: " + path);
  write_qa(model, os);
}

QaModel load_qa(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputFormatError("cannot open model file: " + path);
  return read_qa(is);
}

}  // namespace trialage
