#ifndef TRIALAGE_FEATURES_HPP
#define TRIALAGE_FEATURES_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace trialage {

// Sparse feature map keyed by interned-string feature ids. std::map keeps
// iteration order deterministic.
using FeatureVector = std::map<std::string, double>;

class FeatureVocab {
 public:
  std::uint32_t intern(const std::string& name);
  std::optional<std::uint32_t> find(const std::string& name) const;
  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::string> names_;
};

// Index-resolved sparse vector, sorted by feature index.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;
};

// Resolves names against the vocabulary. With grow=true unseen features are
// interned; otherwise they are dropped (inference-time behavior).
SparseVector to_sparse(const FeatureVector& fv, FeatureVocab& vocab, bool grow);
SparseVector to_sparse(const FeatureVector& fv, const FeatureVocab& vocab);

// Per-family feature counts ("w1" from "w1:aged"), used in model file headers.
std::map<std::string, std::size_t> family_counts(const std::vector<std::string>& names);

}  // namespace trialage

#endif  // TRIALAGE_FEATURES_HPP
