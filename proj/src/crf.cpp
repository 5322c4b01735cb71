#include "trialage/crf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "trialage/optimize.hpp"

namespace trialage {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp3(const std::array<double, 3>& v) {
  double m = std::max({v[0], v[1], v[2]});
  if (m == kNegInf) return kNegInf;
  return m + std::log(std::exp(v[0] - m) + std::exp(v[1] - m) + std::exp(v[2] - m));
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const std::string kBos = "<s>";
const std::string kEos = "</s>";

std::array<double, 3> state_scores_at(const SparseVector& x,
                                      const std::vector<double>& params) {
  std::array<double, 3> s{0.0, 0.0, 0.0};
  for (const auto& [id, v] : x.entries)
    for (int l = 0; l < kCrfLabels; ++l) s[l] += params[id * kCrfLabels + l] * v;
  return s;
}

struct Lattice {
  std::vector<std::array<double, 3>> state;
  std::vector<std::array<double, 3>> alpha;
  std::vector<std::array<double, 3>> beta;
  double log_z_forward = 0.0;
  double log_z_backward = 0.0;
};

Lattice run_lattice(const std::vector<SparseVector>& xs,
                    const std::vector<double>& params, std::size_t trans_base) {
  Lattice lat;
  const std::size_t n = xs.size();
  lat.state.resize(n);
  lat.alpha.resize(n);
  lat.beta.resize(n);
  auto trans = [&](int a, int b) { return params[trans_base + a * kCrfLabels + b]; };

  for (std::size_t t = 0; t < n; ++t) lat.state[t] = state_scores_at(xs[t], params);

  lat.alpha[0] = lat.state[0];
  for (std::size_t t = 1; t < n; ++t) {
    for (int l = 0; l < kCrfLabels; ++l) {
      std::array<double, 3> acc;
      for (int k = 0; k < kCrfLabels; ++k) acc[k] = lat.alpha[t - 1][k] + trans(k, l);
      lat.alpha[t][l] = lat.state[t][l] + logsumexp3(acc);
    }
  }
  lat.log_z_forward = logsumexp3(lat.alpha[n - 1]);

  lat.beta[n - 1] = {0.0, 0.0, 0.0};
  for (std::size_t t = n - 1; t-- > 0;) {
    for (int l = 0; l < kCrfLabels; ++l) {
      std::array<double, 3> acc;
      for (int k = 0; k < kCrfLabels; ++k)
        acc[k] = trans(l, k) + lat.state[t + 1][k] + lat.beta[t + 1][k];
      lat.beta[t][l] = logsumexp3(acc);
    }
  }
  std::array<double, 3> start;
  for (int l = 0; l < kCrfLabels; ++l) start[l] = lat.state[0][l] + lat.beta[0][l];
  lat.log_z_backward = logsumexp3(start);
  return lat;
}

std::vector<SparseVector> resolve_features(const std::vector<FeatureVector>& fvs,
                                           const FeatureVocab& vocab) {
  std::vector<SparseVector> out;
  out.reserve(fvs.size());
  for (const FeatureVector& fv : fvs) out.push_back(to_sparse(fv, vocab));
  return out;
}

int bio_index(BioLabel l) { return static_cast<int>(l); }

void validate_bio(const BioSequence& seq, std::size_t ordinal) {
  if (seq.labels.size() != seq.tokens.size())
    throw TrainingError("sequence " + std::to_string(ordinal) +
                        ": labels/tokens length mismatch");
  int b_count = 0;
  BioLabel prev = BioLabel::O;
  for (std::size_t i = 0; i < seq.labels.size(); ++i) {
    BioLabel l = seq.labels[i];
    if (l == BioLabel::B) ++b_count;
    if (l == BioLabel::I && !(prev == BioLabel::B || prev == BioLabel::I))
      throw TrainingError("sequence " + std::to_string(ordinal) +
                          ": I label not preceded by B or I");
    prev = l;
  }
  if (b_count != 1)
    throw TrainingError("sequence " + std::to_string(ordinal) + ": expected exactly one B, got " +
                        std::to_string(b_count));
  if (!seq.pos_tags.empty() && seq.pos_tags.size() != seq.tokens.size())
    throw TrainingError("sequence " + std::to_string(ordinal) +
                        ": pos_tags/tokens length mismatch");
}

}  // namespace

std::vector<FeatureVector> featurize_sequence(const std::vector<Token>& tokens,
                                              const std::vector<std::string>* pos_tags) {
  const std::size_t n = tokens.size();
  std::vector<std::string> words(n);
  for (std::size_t i = 0; i < n; ++i) words[i] = normalized_text(tokens[i]);

  const bool use_pos = pos_tags != nullptr && pos_tags->size() == n;
  std::vector<std::string> tags(n);
  for (std::size_t i = 0; i < n; ++i)
    tags[i] = use_pos ? (*pos_tags)[i] : std::string(shape_name(tokens[i].shape));
  const std::string tag_family = use_pos ? "pos" : "shape";

  auto at = [](const std::vector<std::string>& v, std::ptrdiff_t i) -> const std::string& {
    if (i < 0) return kBos;
    if (i >= static_cast<std::ptrdiff_t>(v.size())) return kEos;
    return v[static_cast<std::size_t>(i)];
  };
  auto offset_tag = [](const char* base, int off) {
    std::string s(base);
    if (off > 0) s += "+" + std::to_string(off);
    else if (off < 0) s += std::to_string(off);
    else s += "0";
    return s;
  };

  std::vector<FeatureVector> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = static_cast<std::ptrdiff_t>(i);
    FeatureVector& fv = out[i];
    auto emit_unigrams = [&](const char* base, const std::vector<std::string>& v) {
      for (int off = -2; off <= 2; ++off)
        fv[offset_tag(base, off) + ":" + at(v, p + off)] += 1.0;
    };
    auto emit_ngrams = [&](const char* base, const std::vector<std::string>& v) {
      auto join2 = [&](int a, int b) { return at(v, p + a) + "_" + at(v, p + b); };
      auto join3 = [&](int a, int b, int c) {
        return at(v, p + a) + "_" + at(v, p + b) + "_" + at(v, p + c);
      };
      fv[offset_tag(base, -1) + offset_tag(base, 0) + ":" + join2(-1, 0)] += 1.0;
      fv[offset_tag(base, 0) + offset_tag(base, 1) + ":" + join2(0, 1)] += 1.0;
      fv[offset_tag(base, -2) + offset_tag(base, -1) + offset_tag(base, 0) + ":" +
         join3(-2, -1, 0)] += 1.0;
      fv[offset_tag(base, -1) + offset_tag(base, 0) + offset_tag(base, 1) + ":" +
         join3(-1, 0, 1)] += 1.0;
      fv[offset_tag(base, 0) + offset_tag(base, 1) + offset_tag(base, 2) + ":" +
         join3(0, 1, 2)] += 1.0;
    };
    emit_unigrams("w", words);
    emit_ngrams("w", words);
    emit_unigrams(tag_family.c_str(), tags);
    emit_ngrams(tag_family.c_str(), tags);
  }
  return out;
}

CrfObjective::CrfObjective(std::vector<std::vector<SparseVector>> xs,
                           std::vector<std::vector<int>> ys, double l2,
                           std::size_t feature_count)
    : xs_(std::move(xs)), ys_(std::move(ys)), l2_(l2), feature_count_(feature_count) {}

double CrfObjective::value(const std::vector<double>& params) const {
  return value_and_gradient(params, nullptr);
}

double CrfObjective::value_and_gradient(const std::vector<double>& params,
                                        std::vector<double>* grad) const {
  const std::size_t trans_base = feature_count_ * kCrfLabels;
  if (grad) std::fill(grad->begin(), grad->end(), 0.0);
  double neg_ll = 0.0;

  for (std::size_t s = 0; s < xs_.size(); ++s) {
    const auto& xs = xs_[s];
    const auto& ys = ys_[s];
    const std::size_t n = xs.size();
    if (n == 0) continue;
    Lattice lat = run_lattice(xs, params, trans_base);

    double gold = lat.state[0][ys[0]];
    for (std::size_t t = 1; t < n; ++t)
      gold += params[trans_base + ys[t - 1] * kCrfLabels + ys[t]] + lat.state[t][ys[t]];
    neg_ll += lat.log_z_forward - gold;

    if (!grad) continue;
    // state expectations
    for (std::size_t t = 0; t < n; ++t) {
      std::array<double, 3> marg;
      for (int l = 0; l < kCrfLabels; ++l)
        marg[l] = std::exp(lat.alpha[t][l] + lat.beta[t][l] - lat.log_z_forward);
      for (const auto& [id, v] : xs[t].entries)
        for (int l = 0; l < kCrfLabels; ++l)
          (*grad)[id * kCrfLabels + l] += marg[l] * v;
      for (const auto& [id, v] : xs[t].entries)
        (*grad)[id * kCrfLabels + ys[t]] -= v;
    }
    // transition expectations
    for (std::size_t t = 1; t < n; ++t) {
      for (int a = 0; a < kCrfLabels; ++a)
        for (int b = 0; b < kCrfLabels; ++b) {
          double lp = lat.alpha[t - 1][a] + params[trans_base + a * kCrfLabels + b] +
                      lat.state[t][b] + lat.beta[t][b] - lat.log_z_forward;
          (*grad)[trans_base + a * kCrfLabels + b] += std::exp(lp);
        }
      (*grad)[trans_base + ys[t - 1] * kCrfLabels + ys[t]] -= 1.0;
    }
  }

  double reg = 0.0;
  for (std::size_t j = 0; j < params.size(); ++j) {
    reg += params[j] * params[j];
    if (grad) (*grad)[j] += l2_ * params[j];
  }
  return neg_ll + 0.5 * l2_ * reg;
}

CrfModel train_crf(const std::vector<BioSequence>& sequences, const CrfConfig& config) {
  if (sequences.empty()) throw TrainingError("empty CRF training dataset");
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    validate_bio(sequences[i], i);
    if (sequences[i].kind != sequences.front().kind)
      throw TrainingError("mixed min/max kinds in one CRF training dataset");
  }

  CrfModel model;
  model.kind = sequences.front().kind;
  model.config = config;

  std::vector<std::vector<SparseVector>> xs;
  std::vector<std::vector<int>> ys;
  xs.reserve(sequences.size());
  ys.reserve(sequences.size());
  for (const BioSequence& seq : sequences) {
    auto fvs = featurize_sequence(seq.tokens,
                                  seq.pos_tags.empty() ? nullptr : &seq.pos_tags);
    std::vector<SparseVector> sx;
    sx.reserve(fvs.size());
    for (const FeatureVector& fv : fvs) sx.push_back(to_sparse(fv, model.vocab, true));
    xs.push_back(std::move(sx));
    std::vector<int> sy;
    sy.reserve(seq.labels.size());
    for (BioLabel l : seq.labels) sy.push_back(bio_index(l));
    ys.push_back(std::move(sy));
  }

  CrfObjective objective(std::move(xs), std::move(ys), config.l2, model.vocab.size());
  OptimOptions opts;
  opts.max_epochs = config.max_epochs;
  opts.tol = config.tol;
  OptimResult result = minimize_batch_gd(
      [&objective](const std::vector<double>& p, std::vector<double>* g) {
        return objective.value_and_gradient(p, g);
      },
      std::vector<double>(objective.dim(), 0.0), opts);

  const std::size_t trans_base = model.vocab.size() * kCrfLabels;
  model.state_weights.assign(result.x.begin(), result.x.begin() + trans_base);
  for (int i = 0; i < 9; ++i) model.transitions[i] = result.x[trans_base + i];
  return model;
}

namespace {

// Packs a model back into the flat parameter layout used by the lattice.
std::vector<double> model_params(const CrfModel& model) {
  std::vector<double> params(model.state_weights);
  params.insert(params.end(), model.transitions.begin(), model.transitions.end());
  return params;
}

}  // namespace

CrfLattice crf_lattice(const CrfModel& model, const std::vector<Token>& tokens,
                       const std::vector<std::string>* pos_tags) {
  CrfLattice out;
  if (tokens.empty()) return out;
  auto xs = resolve_features(featurize_sequence(tokens, pos_tags), model.vocab);
  auto params = model_params(model);
  Lattice lat = run_lattice(xs, params, model.vocab.size() * kCrfLabels);
  out.state_scores = std::move(lat.state);
  out.alpha = std::move(lat.alpha);
  out.beta = std::move(lat.beta);
  out.log_z_forward = lat.log_z_forward;
  out.log_z_backward = lat.log_z_backward;
  return out;
}

std::vector<BioLabel> viterbi_decode(const CrfModel& model,
                                     const std::vector<Token>& tokens,
                                     const std::vector<std::string>* pos_tags) {
  const std::size_t n = tokens.size();
  if (n == 0) return {};
  auto xs = resolve_features(featurize_sequence(tokens, pos_tags), model.vocab);
  auto params = model_params(model);
  const std::size_t trans_base = model.vocab.size() * kCrfLabels;
  auto trans = [&](int a, int b) { return params[trans_base + a * kCrfLabels + b]; };

  std::vector<std::array<double, 3>> delta(n);
  std::vector<std::array<int, 3>> back(n);
  delta[0] = state_scores_at(xs[0], params);
  back[0] = {0, 0, 0};
  for (std::size_t t = 1; t < n; ++t) {
    std::array<double, 3> state = state_scores_at(xs[t], params);
    for (int l = 0; l < kCrfLabels; ++l) {
      double best = kNegInf;
      int arg = 0;
      for (int k = 0; k < kCrfLabels; ++k) {
        double cand = delta[t - 1][k] + trans(k, l);
        if (cand > best) {  // strict: ties keep the lowest label index
          best = cand;
          arg = k;
        }
      }
      delta[t][l] = best + state[l];
      back[t][l] = arg;
    }
  }
  int best_label = 0;
  for (int l = 1; l < kCrfLabels; ++l)
    if (delta[n - 1][l] > delta[n - 1][best_label]) best_label = l;

  std::vector<BioLabel> labels(n);
  int cur = best_label;
  for (std::size_t t = n; t-- > 0;) {
    labels[t] = static_cast<BioLabel>(cur);
    cur = back[t][cur];
  }
  return labels;
}

std::vector<std::array<double, kCrfLabels>> token_marginals(
    const CrfModel& model, const std::vector<Token>& tokens,
    const std::vector<std::string>* pos_tags) {
  const std::size_t n = tokens.size();
  std::vector<std::array<double, kCrfLabels>> out(n);
  if (n == 0) return out;
  CrfLattice lat = crf_lattice(model, tokens, pos_tags);
  for (std::size_t t = 0; t < n; ++t) {
    double norm = 0.0;
    for (int l = 0; l < kCrfLabels; ++l) {
      out[t][l] = std::exp(lat.alpha[t][l] + lat.beta[t][l] - lat.log_z_forward);
      norm += out[t][l];
    }
    for (int l = 0; l < kCrfLabels; ++l) out[t][l] /= norm;
  }
  return out;
}

std::optional<AgeAnswer> extract_age_crf(const CrfModel& model, const Document& doc,
                                         AgeKind kind) {
  if (model.kind != kind)
    throw std::invalid_argument("CRF model kind does not match requested kind");
  std::optional<AgeAnswer> best;
  for (const Sentence* s : doc.sentences()) {
    if (!has_age_keyword(*s)) continue;
    auto labels = viterbi_decode(model, s->tokens);
    auto margs = token_marginals(model, s->tokens);
    for (std::size_t i = 0; i < s->tokens.size(); ++i) {
      if (labels[i] != BioLabel::B) continue;
      auto value = parse_integer_token(s->tokens[i]);
      if (!value) continue;
      double conf = margs[i][bio_index(BioLabel::B)];
      if (!best || conf > best->confidence) {
        AgeAnswer ans;
        ans.value = *value;
        ans.confidence = conf;
        ans.kind = kind;
        ans.sentence_index = s->index;
        ans.span_start = s->tokens[i].start;
        ans.span_end = s->tokens[i].end;
        best = ans;
      }
    }
  }
  return best;
}

void write_crf(const CrfModel& model, std::ostream& os) {
  os << "trialage-crf v1\n";
  os << "kind " << age_kind_name(model.kind) << '\n';
  os << "labels B I O\n";
  os << "families";
  for (const auto& [family, count] : family_counts(model.vocab.names()))
    os << ' ' << family << '=' << count;
  os << '\n';
  os << "transitions 9\n";
  static const char* names[3] = {"B", "I", "O"};
  for (int a = 0; a < kCrfLabels; ++a)
    for (int b = 0; b < kCrfLabels; ++b)
      os << names[a] << '\t' << names[b] << '\t'
         << format_double(model.transitions[a * kCrfLabels + b]) << '\n';
  os << "features " << model.vocab.size() << '\n';
  std::vector<std::pair<std::string, std::uint32_t>> rows;
  rows.reserve(model.vocab.size());
  for (std::uint32_t id = 0; id < model.vocab.size(); ++id)
    rows.emplace_back(model.vocab.name(id), id);
  std::sort(rows.begin(), rows.end());
  for (const auto& [name, id] : rows) {
    os << name;
    for (int l = 0; l < kCrfLabels; ++l)
      os << '\t' << format_double(model.state_weights[id * kCrfLabels + l]);
    os << '\n';
  }
}

CrfModel read_crf(std::istream& is) {
  CrfModel model;
  std::string line;
  if (!std::getline(is, line) || line != "trialage-crf v1")
    throw InputFormatError("crf model: bad magic line");
  if (!std::getline(is, line) || line.rfind("kind ", 0) != 0)
    throw InputFormatError("crf model: missing 'kind' header");
  auto kind = age_kind_from_name(line.substr(5));
  if (!kind) throw InputFormatError("crf model: unknown kind '" + line.substr(5) + "'");
  model.kind = *kind;
  if (!std::getline(is, line) || line != "labels B I O")
    throw InputFormatError("crf model: missing 'labels' header");
  if (!std::getline(is, line) || line.rfind("families", 0) != 0)
    throw InputFormatError("crf model: missing 'families' header");
  if (!std::getline(is, line) || line != "transitions 9")
    throw InputFormatError("crf model: missing 'transitions' header");
  auto label_index = [](const std::string& s) -> int {
    if (s == "B") return 0;
    if (s == "I") return 1;
    if (s == "O") return 2;
    throw InputFormatError("crf model: unknown label '" + s + "'");
  };
  for (int i = 0; i < 9; ++i) {
    if (!std::getline(is, line))
      throw InputFormatError("crf model: truncated transition table");
    std::size_t t1 = line.find('\t');
    std::size_t t2 = line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      throw InputFormatError("crf model: malformed transition row '" + line + "'");
    int a = label_index(line.substr(0, t1));
    int b = label_index(line.substr(t1 + 1, t2 - t1 - 1));
    model.transitions[a * kCrfLabels + b] = std::stod(line.substr(t2 + 1));
  }
  if (!std::getline(is, line) || line.rfind("features ", 0) != 0)
    throw InputFormatError("crf model: missing 'features' header");
  std::size_t count = std::stoul(line.substr(9));
  model.state_weights.assign(count * kCrfLabels, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(is, line))
      throw InputFormatError("crf model: truncated weight table");
    std::size_t t1 = line.find('\t');
    if (t1 == std::string::npos)
      throw InputFormatError("crf model: malformed weight row '" + line + "'");
    std::uint32_t id = model.vocab.intern(line.substr(0, t1));
    std::size_t pos = t1;
    for (int l = 0; l < kCrfLabels; ++l) {
      std::size_t next = line.find('\t', pos + 1);
      std::string field = line.substr(pos + 1, next == std::string::npos
                                                   ? std::string::npos
                                                   : next - pos - 1);
      model.state_weights[id * kCrfLabels + l] = std::stod(field);
      pos = next;
      if (pos == std::string::npos && l + 1 < kCrfLabels)
        throw InputFormatError("crf model: malformed weight row '" + line + "'");
    }
  }
  return model;
}

void save_crf(const CrfModel& model, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputFormatError("cannot open model file for writing: " + path);
  write_crf(model, os);
}

CrfModel load_crf(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputFormatError("cannot open model file: " + path);
  return read_crf(is);
}

}  // namespace trialage
