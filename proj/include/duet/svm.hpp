#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "duet/detail/text.hpp"
#include "duet/error.hpp"
#include "duet/pose.hpp"

namespace duet {

struct KernelConfig {
  double gamma = 0.0625;
};

struct SvcConfig {
  double c = 8.0;
  double tol = 1e-3;           // KKT violation tolerance
  long max_passes = 1000000;   // bound on pair updates before giving up
  KernelConfig kernel;
  std::uint64_t seed = 0;      // recorded for reproducibility; training is deterministic
  std::size_t cache_budget_bytes = 512ull << 20;  // full kernel matrix cache limit
  bool standardize = false;    // optional z-scoring of features, off by default

  void validate() const {
    if (!(c > 0)) throw std::invalid_argument("SvcConfig: c must be > 0");
    if (!(kernel.gamma > 0)) throw std::invalid_argument("SvcConfig: gamma must be > 0");
    if (!(tol > 0)) throw std::invalid_argument("SvcConfig: tol must be > 0");
    if (max_passes < 1) throw std::invalid_argument("SvcConfig: max_passes must be >= 1");
  }
};

/// exp(-gamma * ||x - z||^2), in (0, 1], symmetric in its arguments.
inline double rbf(const std::vector<double>& x, const std::vector<double>& z, double gamma) {
  if (x.size() != z.size()) throw std::invalid_argument("rbf: vector lengths differ");
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double d = x[i] - z[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

/// One trained binary C-SVC: retained support vectors, their signed dual
/// coefficients (alpha_i * y_i), and the bias.
struct BinaryModel {
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> coef;
  double bias = 0.0;
  std::pair<int, int> class_pair{0, 1};  // ordinals into the owning model's class list
  bool converged = true;
  long iterations = 0;
  double dual_objective = 0.0;
};

namespace detail {

class KernelEval {
 public:
  KernelEval(const std::vector<std::vector<double>>& x, double gamma, std::size_t budget_bytes)
      : x_(x), gamma_(gamma), n_(x.size()) {
    const std::size_t need = n_ * n_ * sizeof(double);
    if (n_ > 0 && need / n_ / sizeof(double) == n_ && need <= budget_bytes) {
      cache_.resize(n_ * n_);
      for (std::size_t i = 0; i < n_; ++i) {
        cache_[i * n_ + i] = 1.0;
        for (std::size_t j = i + 1; j < n_; ++j) {
          double k = rbf(x_[i], x_[j], gamma_);
          cache_[i * n_ + j] = k;
          cache_[j * n_ + i] = k;
        }
      }
    }
  }

  bool cached() const { return !cache_.empty(); }

  double operator()(std::size_t i, std::size_t j) const {
    if (!cache_.empty()) return cache_[i * n_ + j];
    return i == j ? 1.0 : rbf(x_[i], x_[j], gamma_);
  }

  /// Row i into `row` (used by the uncached gradient update).
  void fill_row(std::size_t i, std::vector<double>& row) const {
    if (!cache_.empty()) {
      std::copy(cache_.begin() + static_cast<std::ptrdiff_t>(i * n_),
                cache_.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_), row.begin());
      return;
    }
    for (std::size_t j = 0; j < n_; ++j) row[j] = (*this)(i, j);
  }

 private:
  const std::vector<std::vector<double>>& x_;
  double gamma_;
  std::size_t n_;
  std::vector<double> cache_;
};

}  // namespace detail

/// Trains a soft-margin binary C-SVC by sequential minimal optimization
/// with maximal-violating-pair selection. Labels are +1/-1. Stops when no
/// pair violates the KKT conditions by more than tol, or flags the model
/// non-converged after max_passes pair updates. Support vectors with
/// alpha below 1e-8 are dropped; the bias comes from the free support
/// vectors (average), or the margin midpoint when every alpha is at a
/// bound.
inline BinaryModel train_binary(const std::vector<std::vector<double>>& x,
                                const std::vector<int>& y, const SvcConfig& config) {
  config.validate();
  const std::size_t n = x.size();
  if (n != y.size()) throw std::invalid_argument("train_binary: sample/label count mismatch");
  if (n < 2) throw DegenerateTrainingError("train_binary: need at least 2 samples");
  bool has_pos = false, has_neg = false;
  for (int v : y) {
    if (v == 1)
      has_pos = true;
    else if (v == -1)
      has_neg = true;
    else
      throw std::invalid_argument("train_binary: labels must be +1 or -1");
  }
  if (!has_pos || !has_neg)
    throw DegenerateTrainingError("train_binary: both classes must be present");
  const std::size_t dim = x[0].size();
  for (const auto& row : x) {
    if (row.size() != dim) throw std::invalid_argument("train_binary: ragged feature matrix");
    for (double v : row)
      if (!std::isfinite(v)) throw std::invalid_argument("train_binary: non-finite feature");
  }

  const double c = config.c;
  const double gamma = config.kernel.gamma;
  detail::KernelEval kernel(x, gamma, config.cache_budget_bytes);

  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, 1.0);  // d/d alpha_k of the dual objective
  std::vector<double> row_i(n), row_j(n);

  long iterations = 0;
  bool converged = false;
  double last_m = 0.0, last_mm = 0.0;

  while (true) {
    // maximal violating pair over y_k * grad_k
    int i = -1, j = -1;
    double m = -std::numeric_limits<double>::infinity();
    double mm = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      const double v = y[k] * grad[k];
      const bool in_up = (y[k] == 1 && alpha[k] < c) || (y[k] == -1 && alpha[k] > 0.0);
      const bool in_low = (y[k] == -1 && alpha[k] < c) || (y[k] == 1 && alpha[k] > 0.0);
      if (in_up && v > m) {
        m = v;
        i = static_cast<int>(k);
      }
      if (in_low && v < mm) {
        mm = v;
        j = static_cast<int>(k);
      }
    }
    last_m = m;
    last_mm = mm;
    if (i < 0 || j < 0 || m - mm <= config.tol) {
      converged = true;
      break;
    }
    if (iterations >= config.max_passes) break;
    ++iterations;

    double quad = kernel(i, i) + kernel(j, j) - 2.0 * kernel(i, j);
    if (quad <= 0.0) quad = 1e-12;
    double lambda = (m - mm) / quad;
    const double room_i = y[i] == 1 ? c - alpha[i] : alpha[i];
    const double room_j = y[j] == 1 ? alpha[j] : c - alpha[j];
    lambda = std::min(lambda, std::min(room_i, room_j));

    alpha[i] += y[i] * lambda;
    alpha[j] -= y[j] * lambda;
    // snap to the box so bound membership stays exact
    for (int k : {i, j}) {
      if (alpha[k] < 1e-12 * c) alpha[k] = 0.0;
      if (alpha[k] > c * (1.0 - 1e-12)) alpha[k] = c;
    }

    kernel.fill_row(static_cast<std::size_t>(i), row_i);
    kernel.fill_row(static_cast<std::size_t>(j), row_j);
    for (std::size_t k = 0; k < n; ++k) grad[k] += lambda * y[k] * (row_j[k] - row_i[k]);
  }

  BinaryModel model;
  model.converged = converged;
  model.iterations = iterations;

  // W(alpha) = 0.5 * sum_i alpha_i * (1 + grad_i)
  for (std::size_t k = 0; k < n; ++k) model.dual_objective += 0.5 * alpha[k] * (1.0 + grad[k]);

  int free_count = 0;
  double free_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    if (alpha[k] > 0.0 && alpha[k] < c) {
      ++free_count;
      free_sum += y[k] * grad[k];
    }
  model.bias = free_count > 0 ? free_sum / free_count : 0.5 * (last_m + last_mm);

  for (std::size_t k = 0; k < n; ++k)
    if (alpha[k] > 1e-8) {
      model.support_vectors.push_back(x[k]);
      model.coef.push_back(alpha[k] * y[k]);
    }
  return model;
}

/// sum_i coef_i * K(sv_i, x) + bias. The sign picks the pair's class.
inline double decision_value(const BinaryModel& model, const std::vector<double>& x,
                             double gamma) {
  if (!model.support_vectors.empty() && model.support_vectors[0].size() != x.size())
    throw std::invalid_argument("decision_value: feature dimension mismatch");
  double sum = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
    sum += model.coef[i] * rbf(model.support_vectors[i], x, gamma);
  return sum;
}

/// Per-dimension affine transform fitted on training data.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> inv_sd;

  std::vector<double> apply(const std::vector<double>& x) const {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean[i]) * inv_sd[i];
    return out;
  }
};

/// One-vs-one multiclass model: one binary per unordered pair of the
/// classes present in training, majority vote at prediction time.
struct MulticlassModel {
  std::vector<InteractionLabel> classes;
  std::vector<BinaryModel> binaries;
  std::size_t feature_dim = 0;
  SvcConfig config;
  std::optional<Standardizer> standardizer;
  std::vector<std::string> warnings;
};

inline MulticlassModel train_multiclass(const std::vector<std::vector<double>>& x,
                                        const std::vector<InteractionLabel>& labels,
                                        const SvcConfig& config) {
  config.validate();
  if (x.size() != labels.size())
    throw std::invalid_argument("train_multiclass: sample/label count mismatch");
  if (x.empty()) throw DegenerateTrainingError("train_multiclass: no samples");

  MulticlassModel model;
  model.config = config;
  model.feature_dim = x[0].size();

  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i)
    by_class[static_cast<int>(labels[i])].push_back(i);
  for (int c = 0; c < kNumClasses; ++c)
    if (!by_class[c].empty()) model.classes.push_back(static_cast<InteractionLabel>(c));
  if (model.classes.size() < 2)
    throw DegenerateTrainingError("train_multiclass: need at least 2 distinct labels");

  const std::vector<std::vector<double>>* samples = &x;
  std::vector<std::vector<double>> standardized;
  if (config.standardize) {
    Standardizer s;
    s.mean.assign(model.feature_dim, 0.0);
    s.inv_sd.assign(model.feature_dim, 1.0);
    for (const auto& row : x)
      for (std::size_t d = 0; d < row.size(); ++d) s.mean[d] += row[d];
    for (double& m : s.mean) m /= static_cast<double>(x.size());
    std::vector<double> var(model.feature_dim, 0.0);
    for (const auto& row : x)
      for (std::size_t d = 0; d < row.size(); ++d) {
        double dlt = row[d] - s.mean[d];
        var[d] += dlt * dlt;
      }
    for (std::size_t d = 0; d < var.size(); ++d) {
      double sd = std::sqrt(var[d] / static_cast<double>(x.size()));
      s.inv_sd[d] = sd > 1e-12 ? 1.0 / sd : 1.0;
    }
    standardized.reserve(x.size());
    for (const auto& row : x) standardized.push_back(s.apply(row));
    model.standardizer = std::move(s);
    samples = &standardized;
  }

  for (std::size_t a = 0; a < model.classes.size(); ++a) {
    for (std::size_t b = a + 1; b < model.classes.size(); ++b) {
      const auto& ia = by_class[static_cast<int>(model.classes[a])];
      const auto& ib = by_class[static_cast<int>(model.classes[b])];
      if (ia.empty() || ib.empty()) {
        model.warnings.push_back(std::string("pair ") + std::string(label_name(model.classes[a])) +
                                 "/" + std::string(label_name(model.classes[b])) +
                                 " omitted: one side has no samples");
        continue;
      }
      std::vector<std::vector<double>> px;
      std::vector<int> py;
      px.reserve(ia.size() + ib.size());
      for (std::size_t idx : ia) {
        px.push_back((*samples)[idx]);
        py.push_back(+1);
      }
      for (std::size_t idx : ib) {
        px.push_back((*samples)[idx]);
        py.push_back(-1);
      }
      BinaryModel bm = train_binary(px, py, config);
      bm.class_pair = {static_cast<int>(a), static_cast<int>(b)};
      if (!bm.converged)
        model.warnings.push_back(std::string("pair ") + std::string(label_name(model.classes[a])) +
                                 "/" + std::string(label_name(model.classes[b])) +
                                 " hit the iteration bound before converging");
      model.binaries.push_back(std::move(bm));
    }
  }
  if (model.binaries.empty())
    throw DegenerateTrainingError("train_multiclass: every class pair was omitted");
  return model;
}

/// Majority vote over the pairwise decisions; ties go to the smallest
/// class ordinal.
inline InteractionLabel predict(const MulticlassModel& model, const std::vector<double>& x) {
  if (x.size() != model.feature_dim)
    throw std::invalid_argument("predict: feature dimension mismatch");
  std::vector<double> z = model.standardizer ? model.standardizer->apply(x) : x;

  std::vector<int> votes(model.classes.size(), 0);
  for (const BinaryModel& bm : model.binaries) {
    double dec = decision_value(bm, z, model.config.kernel.gamma);
    votes[dec > 0.0 ? bm.class_pair.first : bm.class_pair.second] += 1;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < votes.size(); ++i)
    if (votes[i] > votes[best]) best = i;  // classes are in ordinal order
  return model.classes[best];
}

// ---------------------------------------------------------------------------
// Model persistence: versioned text, full decimal precision, so a loaded
// model reproduces identical decision values.

inline void save_model(const MulticlassModel& model, std::ostream& out) {
  using detail::format_double;
  out << "duet-svm-model v1\n";
  out << "gamma " << format_double(model.config.kernel.gamma) << '\n';
  out << "c " << format_double(model.config.c) << '\n';
  out << "tol " << format_double(model.config.tol) << '\n';
  out << "seed " << model.config.seed << '\n';
  out << "feature_dim " << model.feature_dim << '\n';
  out << "standardize " << (model.standardizer ? 1 : 0) << '\n';
  if (model.standardizer) {
    out << "mean";
    for (double v : model.standardizer->mean) out << ' ' << format_double(v);
    out << "\ninv_sd";
    for (double v : model.standardizer->inv_sd) out << ' ' << format_double(v);
    out << '\n';
  }
  out << "classes " << model.classes.size();
  for (InteractionLabel l : model.classes) out << ' ' << label_name(l);
  out << '\n';
  out << "binaries " << model.binaries.size() << '\n';
  for (const BinaryModel& bm : model.binaries) {
    out << "binary " << bm.class_pair.first << ' ' << bm.class_pair.second << ' '
        << bm.support_vectors.size() << ' ' << format_double(bm.bias) << ' '
        << (bm.converged ? 1 : 0) << '\n';
    for (std::size_t i = 0; i < bm.support_vectors.size(); ++i) {
      out << "sv " << format_double(bm.coef[i]);
      for (double v : bm.support_vectors[i]) out << ' ' << format_double(v);
      out << '\n';
    }
  }
}

namespace detail {

inline std::string next_token(std::istream& in, const char* what) {
  std::string tok;
  if (!(in >> tok)) throw ParseError(std::string("model file: missing ") + what);
  return tok;
}

inline double next_double(std::istream& in, const char* what) {
  double v;
  if (!detail::parse_double(next_token(in, what), v))
    throw ParseError(std::string("model file: bad number for ") + what);
  return v;
}

inline long next_long(std::istream& in, const char* what) {
  long v;
  if (!detail::parse_int(next_token(in, what), v))
    throw ParseError(std::string("model file: bad integer for ") + what);
  return v;
}

inline void expect_keyword(std::istream& in, const char* kw) {
  std::string tok = next_token(in, kw);
  if (tok != kw) throw ParseError(std::string("model file: expected '") + kw + "', got '" + tok + "'");
}

}  // namespace detail

inline MulticlassModel load_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "duet-svm-model v1")
    throw ParseError("model file: unknown header '" + line + "'");

  MulticlassModel model;
  detail::expect_keyword(in, "gamma");
  model.config.kernel.gamma = detail::next_double(in, "gamma");
  detail::expect_keyword(in, "c");
  model.config.c = detail::next_double(in, "c");
  detail::expect_keyword(in, "tol");
  model.config.tol = detail::next_double(in, "tol");
  detail::expect_keyword(in, "seed");
  model.config.seed = static_cast<std::uint64_t>(detail::next_long(in, "seed"));
  detail::expect_keyword(in, "feature_dim");
  model.feature_dim = static_cast<std::size_t>(detail::next_long(in, "feature_dim"));
  detail::expect_keyword(in, "standardize");
  bool standardize = detail::next_long(in, "standardize") != 0;
  model.config.standardize = standardize;
  if (standardize) {
    Standardizer s;
    detail::expect_keyword(in, "mean");
    s.mean.resize(model.feature_dim);
    for (double& v : s.mean) v = detail::next_double(in, "mean entry");
    detail::expect_keyword(in, "inv_sd");
    s.inv_sd.resize(model.feature_dim);
    for (double& v : s.inv_sd) v = detail::next_double(in, "inv_sd entry");
    model.standardizer = std::move(s);
  }
  detail::expect_keyword(in, "classes");
  long n_classes = detail::next_long(in, "class count");
  for (long i = 0; i < n_classes; ++i) {
    auto l = label_from_class_dir(detail::next_token(in, "class name"));
    if (!l) throw ParseError("model file: unknown class name");
    model.classes.push_back(*l);
  }
  detail::expect_keyword(in, "binaries");
  long n_bin = detail::next_long(in, "binary count");
  for (long b = 0; b < n_bin; ++b) {
    detail::expect_keyword(in, "binary");
    BinaryModel bm;
    bm.class_pair.first = static_cast<int>(detail::next_long(in, "class ordinal"));
    bm.class_pair.second = static_cast<int>(detail::next_long(in, "class ordinal"));
    long n_sv = detail::next_long(in, "support vector count");
    bm.bias = detail::next_double(in, "bias");
    bm.converged = detail::next_long(in, "converged flag") != 0;
    if (bm.class_pair.first < 0 || bm.class_pair.second < 0 ||
        bm.class_pair.first >= static_cast<int>(model.classes.size()) ||
        bm.class_pair.second >= static_cast<int>(model.classes.size()))
      throw ParseError("model file: class ordinal out of range");
    for (long s = 0; s < n_sv; ++s) {
      detail::expect_keyword(in, "sv");
      bm.coef.push_back(detail::next_double(in, "coefficient"));
      std::vector<double> v(model.feature_dim);
      for (double& e : v) e = detail::next_double(in, "support vector entry");
      bm.support_vectors.push_back(std::move(v));
    }
    model.binaries.push_back(std::move(bm));
  }
  return model;
}

}  // namespace duet
