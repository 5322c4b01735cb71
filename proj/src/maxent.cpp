#include "trialage/maxent.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "trialage/optimize.hpp"

namespace trialage {

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

// log(1 + exp(m)) without overflow
double log1pexp(double m) {
  if (m > 0) return m + std::log1p(std::exp(-m));
  return std::log1p(std::exp(m));
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double LogisticModel::raw_score(const FeatureVector& fv) const {
  double z = bias;
  for (const auto& [name, value] : fv)
    if (auto id = vocab.find(name)) z += weights[*id] * value;
  return z;
}

double LogisticModel::probability(const FeatureVector& fv) const {
  return logistic(raw_score(fv));
}

LogisticObjective::LogisticObjective(std::vector<SparseVector> xs, std::vector<int> ys,
                                     double l2, std::size_t feature_count)
    : xs_(std::move(xs)), ys_(std::move(ys)), l2_(l2), feature_count_(feature_count) {}

double LogisticObjective::value(const std::vector<double>& params) const {
  return value_and_gradient(params, nullptr);
}

double LogisticObjective::value_and_gradient(const std::vector<double>& params,
                                             std::vector<double>* grad) const {
  const double bias = params[feature_count_];
  double total = 0.0;
  if (grad) std::fill(grad->begin(), grad->end(), 0.0);
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    double z = bias;
    for (const auto& [id, v] : xs_[i].entries) z += params[id] * v;
    const int y = ys_[i];
    total += log1pexp(-y * z);
    if (grad) {
      // d/dz log(1+exp(-yz)) = -y * sigmoid(-yz) = sigmoid(z) - [y==+1]
      double coeff = logistic(z) - (y > 0 ? 1.0 : 0.0);
      for (const auto& [id, v] : xs_[i].entries) (*grad)[id] += coeff * v;
      (*grad)[feature_count_] += coeff;
    }
  }
  double reg = 0.0;
  for (std::size_t j = 0; j < feature_count_; ++j) {
    reg += params[j] * params[j];
    if (grad) (*grad)[j] += l2_ * params[j];
  }
  return total + 0.5 * l2_ * reg;
}

LogisticModel train_logistic(const std::vector<std::pair<FeatureVector, bool>>& examples,
                             const MaxEntConfig& config) {
  bool has_pos = false, has_neg = false;
  for (const auto& [fv, y] : examples) (y ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw TrainingError("training data is single-class: need at least one positive "
                        "and one negative example");

  LogisticModel model;
  model.config = config;
  std::vector<SparseVector> xs;
  std::vector<int> ys;
  xs.reserve(examples.size());
  ys.reserve(examples.size());
  for (const auto& [fv, y] : examples) {
    xs.push_back(to_sparse(fv, model.vocab, /*grow=*/true));
    ys.push_back(y ? 1 : -1);
  }

  LogisticObjective objective(std::move(xs), std::move(ys), config.l2, model.vocab.size());
  OptimOptions opts;
  opts.max_epochs = config.max_epochs;
  opts.tol = config.tol;
  OptimResult result = minimize_batch_gd(
      [&objective](const std::vector<double>& p, std::vector<double>* g) {
        return objective.value_and_gradient(p, g);
      },
      std::vector<double>(objective.dim(), 0.0), opts);

  model.weights.assign(result.x.begin(), result.x.end() - 1);
  model.bias = result.x.back();
  return model;
}

FeatureVector featurize_sentence(const Sentence& s) {
  FeatureVector fv;
  std::vector<std::string> words;
  words.reserve(s.tokens.size());
  for (const Token& t : s.tokens) words.push_back(normalized_text(t));

  for (std::size_t n = 1; n <= 4; ++n) {
    if (words.size() < n) break;
    const std::string family = "w" + std::to_string(n) + ":";
    for (std::size_t i = 0; i + n <= words.size(); ++i) {
      std::string key = family + words[i];
      for (std::size_t k = 1; k < n; ++k) {
        key += '_';
        key += words[i + k];
      }
      fv[key] += 1.0;
    }
  }
  for (const std::string& w : words) {
    for (std::size_t n = 2; n <= 4; ++n) {
      if (w.size() < n) break;
      const std::string family = "c" + std::to_string(n) + ":";
      for (std::size_t i = 0; i + n <= w.size(); ++i)
        fv[family + w.substr(i, n)] += 1.0;
    }
  }
  return fv;
}

MaxEntModel train_maxent(const std::vector<SentenceExample>& examples,
                         const MaxEntConfig& config) {
  std::vector<std::pair<FeatureVector, bool>> data;
  data.reserve(examples.size());
  for (const SentenceExample& ex : examples)
    data.emplace_back(featurize_sentence(make_sentence(ex.text)), ex.positive);
  return train_logistic(data, config);
}

Classification classify(const MaxEntModel& model, const Sentence& s) {
  double p = model.probability(featurize_sentence(s));
  return {p >= 0.5, p};
}

void write_maxent(const MaxEntModel& model, std::ostream& os) {
  os << "trialage-maxent v1\n";
  os << "families";
  for (const auto& [family, count] : family_counts(model.vocab.names()))
    os << ' ' << family << '=' << count;
  os << '\n';
  os << "bias " << format_double(model.bias) << '\n';
  os << "features " << model.vocab.size() << '\n';
  std::vector<std::pair<std::string, double>> rows;
  rows.reserve(model.vocab.size());
  for (std::uint32_t id = 0; id < model.vocab.size(); ++id)
    rows.emplace_back(model.vocab.name(id), model.weights[id]);
  std::sort(rows.begin(), rows.end());
  for (const auto& [name, weight] : rows)
    os << name << '\t' << format_double(weight) << '\n';
}

MaxEntModel read_maxent(std::istream& is) {
  MaxEntModel model;
  std::string line;
  if (!std::getline(is, line) || line != "trialage-maxent v1")
    throw InputFormatError("maxent model: bad magic line");
  if (!std::getline(is, line) || line.rfind("families", 0) != 0)
    throw InputFormatError("maxent model: missing 'families' header");
  if (!std::getline(is, line) || line.rfind("bias ", 0) != 0)
    throw InputFormatError("maxent model: missing 'bias' header");
  model.bias = std::stod(line.substr(5));
  if (!std::getline(is, line) || line.rfind("features ", 0) != 0)
    throw InputFormatError("maxent model: missing 'features' header");
  std::size_t count = std::stoul(line.substr(9));
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(is, line))
      throw InputFormatError("maxent model: truncated weight table");
    std::size_t tab = line.rfind('\t');
    if (tab == std::string::npos)
      throw InputFormatError("maxent model: malformed weight row '" + line + "'");
    model.vocab.intern(line.substr(0, tab));
    model.weights.push_back(std::stod(line.substr(tab + 1)));
  }
  return model;
}

void save_maxent(const MaxEntModel& model, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputFormatError("cannot open model file for writing: " + path);
  write_maxent(model, os);
}

MaxEntModel load_maxent(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputFormatError("cannot open model file: " + path);
  return read_maxent(is);
}

}  // namespace trialage
