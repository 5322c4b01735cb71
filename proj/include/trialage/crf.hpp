#ifndef TRIALAGE_CRF_HPP
#define TRIALAGE_CRF_HPP

#include <array>
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

// Label indices are fixed: B=0, I=1, O=2. Ties in decoding resolve to the
// lowest index.
inline constexpr int kCrfLabels = 3;

struct CrfConfig {
  double l2 = 1.0;
  int max_epochs = 200;
  double tol = 1e-3;
  std::uint64_t seed = 0;
};

struct CrfModel {
  FeatureVocab vocab;
  std::vector<double> state_weights;       // vocab.size() * 3, [id * 3 + label]
  std::array<double, 9> transitions{};     // [from * 3 + to]
  AgeKind kind = AgeKind::Min;
  CrfConfig config;
};

// Per-position features: unigrams at offsets -2..+2, the two bigrams and three
// trigrams over words, and the same templates over shape classes, or over the
// supplied POS tags instead when present. BOS/EOS sentinels at the edges.
std::vector<FeatureVector> featurize_sequence(
    const std::vector<Token>& tokens,
    const std::vector<std::string>* pos_tags = nullptr);

// Regularized negative conditional log-likelihood over BIO sequences.
// Parameter layout: [state weights (feature-major, 3 labels each), then the
// 9 transition weights].
class CrfObjective {
 public:
  CrfObjective(std::vector<std::vector<SparseVector>> xs,
               std::vector<std::vector<int>> ys, double l2, std::size_t feature_count);

  std::size_t dim() const { return feature_count_ * kCrfLabels + 9; }
  double value(const std::vector<double>& params) const;
  double value_and_gradient(const std::vector<double>& params,
                            std::vector<double>* grad) const;

 private:
  std::vector<std::vector<SparseVector>> xs_;
  std::vector<std::vector<int>> ys_;
  double l2_;
  std::size_t feature_count_;
};

CrfModel train_crf(const std::vector<BioSequence>& sequences, const CrfConfig& config);

std::vector<BioLabel> viterbi_decode(const CrfModel& model,
                                     const std::vector<Token>& tokens,
                                     const std::vector<std::string>* pos_tags = nullptr);

// Exact per-position label distributions from forward-backward in log space.
std::vector<std::array<double, kCrfLabels>> token_marginals(
    const CrfModel& model, const std::vector<Token>& tokens,
    const std::vector<std::string>* pos_tags = nullptr);

// Forward/backward quantities, exposed for verification.
struct CrfLattice {
  std::vector<std::array<double, kCrfLabels>> state_scores;
  std::vector<std::array<double, kCrfLabels>> alpha;
  std::vector<std::array<double, kCrfLabels>> beta;
  double log_z_forward = 0.0;
  double log_z_backward = 0.0;
};

CrfLattice crf_lattice(const CrfModel& model, const std::vector<Token>& tokens,
                       const std::vector<std::string>* pos_tags = nullptr);

// Scans every sentence containing an age keyword (all sections), decodes,
// and returns the integer-valued B-labeled token with the highest B marginal.
std::optional<AgeAnswer> extract_age_crf(const CrfModel& model, const Document& doc,
                                         AgeKind kind);

void save_crf(const CrfModel& model, const std::string& path);
CrfModel load_crf(const std::string& path);
void write_crf(const CrfModel& model, std::ostream& os);
CrfModel read_crf(std::istream& is);

}  // namespace trialage

#endif  // TRIALAGE_CRF_HPP
