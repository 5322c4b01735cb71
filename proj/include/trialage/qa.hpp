#ifndef TRIALAGE_QA_HPP
#define TRIALAGE_QA_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trialage/answer.hpp"
#include "trialage/corpus.hpp"
#include "trialage/features.hpp"
#include "trialage/maxent.hpp"
#include "trialage/supervision.hpp"

namespace trialage {

struct AgeQuestion {
  AgeKind kind = AgeKind::Min;
};

// One integer-valued token of a sentence, a potential span answer.
struct Candidate {
  std::size_t token_index = 0;
  std::int64_t value = 0;
};

// Candidate scorer standing in for a neural span model: two binary logistic
// scorers, one per question kind, over candidate context features.
struct QaModel {
  LogisticModel min_scorer;
  LogisticModel max_scorer;

  const LogisticModel& scorer(AgeKind kind) const {
    return kind == AgeKind::Min ? min_scorer : max_scorer;
  }
};

std::vector<Candidate> enumerate_candidates(const Sentence& s);

// Word windows +-3, neighbor letter n-grams (2..4), range-dash and comparison
// indicators, bucketed keyword distance and value magnitude; everything
// conjoined with the question kind.
FeatureVector featurize_candidate(const Candidate& c, const Sentence& s,
                                  const AgeQuestion& q);

QaModel train_qa(const std::vector<QaPair>& pairs, const MaxEntConfig& config);

std::optional<AgeAnswer> answer(const QaModel& model, const Sentence& s,
                                const AgeQuestion& q);

void save_qa(const QaModel& model, const std::string& path);
QaModel load_qa(const std::string& path);
void write_qa(const QaModel& model, std::ostream& os);
QaModel read_qa(std::istream& is);

}  // namespace trialage

#endif  // TRIALAGE_QA_HPP
