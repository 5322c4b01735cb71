#include "trialage/features.hpp"

#include <algorithm>

namespace trialage {

std::uint32_t FeatureVocab::intern(const std::string& name) {
  auto it = index_.find(name);
  if (it != index_.end()) return it->second;
  std::uint32_t id = static_cast<std::uint32_t>(names_.size());
  index_.emplace(name, id);
  names_.push_back(name);
  return id;
}

std::optional<std::uint32_t> FeatureVocab::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SparseVector to_sparse(const FeatureVector& fv, FeatureVocab& vocab, bool grow) {
  SparseVector out;
  out.entries.reserve(fv.size());
  for (const auto& [name, value] : fv) {
    if (grow) {
      out.entries.emplace_back(vocab.intern(name), value);
    } else if (auto id = vocab.find(name)) {
      out.entries.emplace_back(*id, value);
    }
  }
  std::sort(out.entries.begin(), out.entries.end());
  return out;
}

SparseVector to_sparse(const FeatureVector& fv, const FeatureVocab& vocab) {
  SparseVector out;
  out.entries.reserve(fv.size());
  for (const auto& [name, value] : fv)
    if (auto id = vocab.find(name)) out.entries.emplace_back(*id, value);
  std::sort(out.entries.begin(), out.entries.end());
  return out;
}

std::map<std::string, std::size_t> family_counts(const std::vector<std::string>& names) {
  std::map<std::string, std::size_t> out;
  for (const std::string& n : names) {
    std::size_t colon = n.find(':');
    out[colon == std::string::npos ? n : n.substr(0, colon)]++;
  }
  return out;
}

}  // namespace trialage
