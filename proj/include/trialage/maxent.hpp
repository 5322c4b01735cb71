#ifndef TRIALAGE_MAXENT_HPP
#define TRIALAGE_MAXENT_HPP

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "trialage/corpus.hpp"
#include "trialage/features.hpp"
#include "trialage/supervision.hpp"

namespace trialage {

struct TrainingError : std::runtime_error {
  explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

struct MaxEntConfig {
  double l2 = 1.0;
  int max_epochs = 500;
  double tol = 1e-4;
  std::uint64_t seed = 0;
};

// Binary logistic model over interned sparse features. Shared by the sentence
// finder and the QA candidate scorers.
struct LogisticModel {
  FeatureVocab vocab;
  std::vector<double> weights;  // indexed by vocab id
  double bias = 0.0;
  MaxEntConfig config;

  double raw_score(const FeatureVector& fv) const;   // w.x + bias, unseen dropped
  double probability(const FeatureVector& fv) const; // logistic(raw_score)
};

// L2-regularized negative log-likelihood of binary logistic regression,
// parameterized as [weights..., bias]; the bias is not regularized. Exposed so
// gradients can be checked against finite differences.
class LogisticObjective {
 public:
  LogisticObjective(std::vector<SparseVector> xs, std::vector<int> ys, double l2,
                    std::size_t feature_count);

  std::size_t dim() const { return feature_count_ + 1; }
  double value(const std::vector<double>& params) const;
  // Returns value; fills grad (same layout as params) when non-null.
  double value_and_gradient(const std::vector<double>& params,
                            std::vector<double>* grad) const;

 private:
  std::vector<SparseVector> xs_;
  std::vector<int> ys_;  // +1 / -1
  double l2_;
  std::size_t feature_count_;
};

LogisticModel train_logistic(const std::vector<std::pair<FeatureVector, bool>>& examples,
                             const MaxEntConfig& config);

using MaxEntModel = LogisticModel;

// Word n-grams (n=1..4) and within-token letter n-grams (n=2..4), lowercased
// and symbol-normalized, accumulated as counts.
FeatureVector featurize_sentence(const Sentence& s);

MaxEntModel train_maxent(const std::vector<SentenceExample>& examples,
                         const MaxEntConfig& config);

struct Classification {
  bool positive = false;
  double probability = 0.5;
};

Classification classify(const MaxEntModel& model, const Sentence& s);

void save_maxent(const MaxEntModel& model, const std::string& path);
MaxEntModel load_maxent(const std::string& path);
void write_maxent(const MaxEntModel& model, std::ostream& os);
MaxEntModel read_maxent(std::istream& is);

double logistic(double z);

}  // namespace trialage

#endif  // TRIALAGE_MAXENT_HPP
