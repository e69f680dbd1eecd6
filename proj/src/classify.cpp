#include "restcal/classify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace restcal::classify {

namespace {

constexpr double kTraceFloor = 1e-30;

std::size_t class_index(TrialClass c) {
  return c == TrialClass::left ? 0 : 1;
}

struct ClassSplit {
  std::vector<std::size_t> rows[2];  // left, right
};

ClassSplit split_classes(const FeatureMatrix& train, std::size_t min_rows) {
  ClassSplit split;
  for (std::size_t r = 0; r < train.n_rows; ++r) {
    split.rows[class_index(train.labels[r])].push_back(r);
  }
  for (int c = 0; c < 2; ++c) {
    if (split.rows[c].size() < min_rows) {
      throw std::invalid_argument("training set is missing a class");
    }
  }
  return split;
}

std::vector<double> class_mean(const FeatureMatrix& m,
                               const std::vector<std::size_t>& rows) {
  std::vector<double> mu(m.n_cols, 0.0);
  for (std::size_t r : rows) {
    for (std::size_t c = 0; c < m.n_cols; ++c) mu[c] += m.at(r, c);
  }
  for (double& v : mu) v /= static_cast<double>(rows.size());
  return mu;
}

// In-place Cholesky factorization A = L L^T followed by the two triangular
// solves. A is row-major d x d, symmetric positive definite.
std::vector<double> cholesky_solve(std::vector<double> a, std::size_t d,
                                   std::vector<double> rhs) {
  for (std::size_t j = 0; j < d; ++j) {
    double diag = a[j * d + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * d + k] * a[j * d + k];
    if (diag <= 0.0) {
      throw std::runtime_error("cholesky_solve: matrix not positive definite");
    }
    const double l_jj = std::sqrt(diag);
    a[j * d + j] = l_jj;
    for (std::size_t i = j + 1; i < d; ++i) {
      double s = a[i * d + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * d + k] * a[j * d + k];
      a[i * d + j] = s / l_jj;
    }
  }
  // Forward solve L z = rhs.
  for (std::size_t i = 0; i < d; ++i) {
    double s = rhs[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * d + k] * rhs[k];
    rhs[i] = s / a[i * d + i];
  }
  // Back solve L^T x = z.
  for (std::size_t ii = d; ii-- > 0;) {
    double s = rhs[ii];
    for (std::size_t k = ii + 1; k < d; ++k) s -= a[k * d + ii] * rhs[k];
    rhs[ii] = s / a[ii * d + ii];
  }
  return rhs;
}

double dot_row(const FeatureMatrix& m, std::size_t r,
               const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t c = 0; c < m.n_cols; ++c) s += m.at(r, c) * w[c];
  return s;
}

}  // namespace

std::string to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::svm:
      return "svm";
    case ClassifierKind::lda:
      return "lda";
    case ClassifierKind::nb:
      return "nb";
  }
  throw std::logic_error("unhandled classifier kind");
}

ClassifierKind classifier_from_string(const std::string& s) {
  if (s == "svm") return ClassifierKind::svm;
  if (s == "lda") return ClassifierKind::lda;
  if (s == "nb" || s == "gnb") return ClassifierKind::nb;
  throw std::invalid_argument("unknown classifier: " + s);
}

LdaModel train_lda(const FeatureMatrix& train, const LdaParams& params) {
  const ClassSplit split = split_classes(train, 2);
  const std::size_t d = train.n_cols;
  const auto mu_left = class_mean(train, split.rows[0]);
  const auto mu_right = class_mean(train, split.rows[1]);

  // Pooled population covariance: average squared deviation from the
  // respective class mean over all training rows.
  std::vector<double> cov(d * d, 0.0);
  std::vector<double> dev(d);
  for (int ci = 0; ci < 2; ++ci) {
    const auto& mu = ci == 0 ? mu_left : mu_right;
    for (std::size_t r : split.rows[ci]) {
      for (std::size_t c = 0; c < d; ++c) dev[c] = train.at(r, c) - mu[c];
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
          cov[i * d + j] += dev[i] * dev[j];
        }
      }
    }
  }
  const double n = static_cast<double>(train.n_rows);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      cov[i * d + j] /= n;
      cov[j * d + i] = cov[i * d + j];
    }
  }

  double trace = 0.0;
  for (std::size_t i = 0; i < d; ++i) trace += cov[i * d + i];
  const double ridge = params.ridge_lambda *
                       std::max(trace / static_cast<double>(d), kTraceFloor);
  for (std::size_t i = 0; i < d; ++i) cov[i * d + i] += ridge;

  std::vector<double> diff(d);
  for (std::size_t c = 0; c < d; ++c) diff[c] = mu_right[c] - mu_left[c];

  LdaModel model;
  model.w = cholesky_solve(std::move(cov), d, std::move(diff));
  model.prior_left = static_cast<double>(split.rows[0].size()) / n;
  model.prior_right = static_cast<double>(split.rows[1].size()) / n;

  double mid = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    mid += model.w[c] * 0.5 * (mu_left[c] + mu_right[c]);
  }
  model.b = -mid + std::log(model.prior_right / model.prior_left);
  return model;
}

GnbModel train_gnb(const FeatureMatrix& train, const GnbParams& params) {
  const ClassSplit split = split_classes(train, 2);
  const std::size_t d = train.n_cols;

  // Global per-feature variance sets the scale of the variance floor.
  std::vector<double> global_mean(d, 0.0);
  std::vector<double> global_var(d, 0.0);
  for (std::size_t r = 0; r < train.n_rows; ++r) {
    for (std::size_t c = 0; c < d; ++c) global_mean[c] += train.at(r, c);
  }
  for (double& v : global_mean) v /= static_cast<double>(train.n_rows);
  for (std::size_t r = 0; r < train.n_rows; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double dv = train.at(r, c) - global_mean[c];
      global_var[c] += dv * dv;
    }
  }
  for (double& v : global_var) v /= static_cast<double>(train.n_rows);

  GnbModel model;
  model.mean.assign(2, std::vector<double>(d, 0.0));
  model.var.assign(2, std::vector<double>(d, 0.0));
  for (int ci = 0; ci < 2; ++ci) {
    model.mean[ci] = class_mean(train, split.rows[ci]);
    for (std::size_t r : split.rows[ci]) {
      for (std::size_t c = 0; c < d; ++c) {
        const double dv = train.at(r, c) - model.mean[ci][c];
        model.var[ci][c] += dv * dv;
      }
    }
    for (std::size_t c = 0; c < d; ++c) {
      model.var[ci][c] /= static_cast<double>(split.rows[ci].size());
      const double floor =
          std::max(params.var_floor_rel * global_var[c], params.var_floor_abs);
      if (model.var[ci][c] < floor) model.var[ci][c] = floor;
    }
  }
  const double n = static_cast<double>(train.n_rows);
  model.prior_left = static_cast<double>(split.rows[0].size()) / n;
  model.prior_right = static_cast<double>(split.rows[1].size()) / n;
  return model;
}

SvmModel train_svm(const FeatureMatrix& train, const SvmParams& params) {
  split_classes(train, 1);  // validates class presence
  const std::size_t n = train.n_rows;
  const std::size_t d = train.n_cols;

  // L1-loss dual coordinate descent over alpha in [0, C]^n with the bias
  // folded in as a constant-1 feature, so w_aug has d + 1 coordinates and
  // Q_ii = |x_i|^2 + 1 > 0 always.
  std::vector<double> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    y[r] = train.labels[r] == TrialClass::right ? 1.0 : -1.0;
  }
  std::vector<double> q_diag(n);
  for (std::size_t r = 0; r < n; ++r) {
    double s = 1.0;
    for (std::size_t c = 0; c < d; ++c) s += train.at(r, c) * train.at(r, c);
    q_diag[r] = s;
  }

  std::vector<double> alpha(n, 0.0);
  std::vector<double> w_aug(d + 1, 0.0);  // last coordinate is the bias

  const auto decision = [&](std::size_t r) {
    return dot_row(train, r, w_aug) + w_aug[d];
  };
  const auto objectives = [&](double& primal, double& dual) {
    double w_sq = 0.0;
    for (double v : w_aug) w_sq += v * v;
    double hinge = 0.0;
    double alpha_sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      hinge += std::max(0.0, 1.0 - y[r] * decision(r));
      alpha_sum += alpha[r];
    }
    primal = 0.5 * w_sq + params.c * hinge;
    dual = alpha_sum - 0.5 * w_sq;
  };

  SvmModel model;
  model.c = params.c;
  for (std::size_t epoch = 1; epoch <= params.max_epochs; ++epoch) {
    double max_violation = 0.0;
    for (std::size_t r = 0; r < n; ++r) {  // fixed order for determinism
      const double grad = y[r] * decision(r) - 1.0;
      double projected = grad;
      if (alpha[r] <= 0.0) {
        projected = std::min(grad, 0.0);
      } else if (alpha[r] >= params.c) {
        projected = std::max(grad, 0.0);
      }
      max_violation = std::max(max_violation, std::abs(projected));
      if (projected == 0.0) continue;
      const double next =
          std::clamp(alpha[r] - grad / q_diag[r], 0.0, params.c);
      const double delta = (next - alpha[r]) * y[r];
      if (delta == 0.0) continue;
      alpha[r] = next;
      for (std::size_t c = 0; c < d; ++c) w_aug[c] += delta * train.at(r, c);
      w_aug[d] += delta;
    }
    model.epochs = epoch;
    if (max_violation <= params.kkt_tol) {
      double primal = 0.0, dual = 0.0;
      objectives(primal, dual);
      model.duality_gap = primal - dual;
      if (model.duality_gap <= params.gap_tol_rel * (1.0 + std::abs(primal))) {
        model.converged = true;
        break;
      }
    }
  }
  if (!model.converged) {
    double primal = 0.0, dual = 0.0;
    objectives(primal, dual);
    model.duality_gap = primal - dual;
  }
  model.w.assign(w_aug.begin(), w_aug.begin() + static_cast<long>(d));
  model.b = w_aug[d];
  return model;
}

namespace {

void check_dim(std::size_t model_dim, std::size_t n_cols) {
  if (model_dim != n_cols) {
    throw std::invalid_argument("predict: feature dimension mismatch");
  }
}

double score_linear(const std::vector<double>& w, double b,
                    const FeatureMatrix& m, std::size_t r) {
  return dot_row(m, r, w) + b;
}

double log_gaussian(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * M_PI * var) + d * d / var);
}

double score_gnb(const GnbModel& model, const FeatureMatrix& m,
                 std::size_t r) {
  double log_left = std::log(model.prior_left);
  double log_right = std::log(model.prior_right);
  for (std::size_t c = 0; c < m.n_cols; ++c) {
    log_left += log_gaussian(m.at(r, c), model.mean[0][c], model.var[0][c]);
    log_right += log_gaussian(m.at(r, c), model.mean[1][c], model.var[1][c]);
  }
  return log_right - log_left;
}

}  // namespace

Prediction predict(const TrainedModel& model, const FeatureMatrix& m) {
  Prediction pred;
  pred.scores.resize(m.n_rows);
  pred.labels.resize(m.n_rows);
  std::visit(
      [&](const auto& mdl) {
        using T = std::decay_t<decltype(mdl)>;
        if constexpr (std::is_same_v<T, GnbModel>) {
          check_dim(mdl.mean[0].size(), m.n_cols);
          for (std::size_t r = 0; r < m.n_rows; ++r) {
            pred.scores[r] = score_gnb(mdl, m, r);
          }
        } else {
          check_dim(mdl.w.size(), m.n_cols);
          for (std::size_t r = 0; r < m.n_rows; ++r) {
            pred.scores[r] = score_linear(mdl.w, mdl.b, m, r);
          }
        }
      },
      model);
  for (std::size_t r = 0; r < m.n_rows; ++r) {
    pred.labels[r] =
        pred.scores[r] > 0.0 ? TrialClass::right : TrialClass::left;
  }
  return pred;
}

double accuracy(const Prediction& pred,
                const std::vector<TrialClass>& labels) {
  if (pred.labels.size() != labels.size()) {
    throw std::invalid_argument("accuracy: label count mismatch");
  }
  if (labels.empty()) {
    throw std::invalid_argument("accuracy: empty label set");
  }
  std::size_t correct = 0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (pred.labels[r] == labels[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

nlohmann::json model_to_json(const TrainedModel& model) {
  nlohmann::json j;
  std::visit(
      [&](const auto& mdl) {
        using T = std::decay_t<decltype(mdl)>;
        if constexpr (std::is_same_v<T, SvmModel>) {
          j["kind"] = "svm";
          j["w"] = mdl.w;
          j["b"] = mdl.b;
          j["c"] = mdl.c;
          j["epochs"] = mdl.epochs;
          j["duality_gap"] = mdl.duality_gap;
          j["converged"] = mdl.converged;
        } else if constexpr (std::is_same_v<T, LdaModel>) {
          j["kind"] = "lda";
          j["w"] = mdl.w;
          j["b"] = mdl.b;
          j["prior_left"] = mdl.prior_left;
          j["prior_right"] = mdl.prior_right;
        } else {
          j["kind"] = "gnb";
          j["mean"] = mdl.mean;
          j["var"] = mdl.var;
          j["prior_left"] = mdl.prior_left;
          j["prior_right"] = mdl.prior_right;
        }
      },
      model);
  return j;
}

TrainedModel model_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "svm") {
    SvmModel m;
    m.w = j.at("w").get<std::vector<double>>();
    m.b = j.at("b").get<double>();
    m.c = j.at("c").get<double>();
    m.epochs = j.at("epochs").get<std::size_t>();
    m.duality_gap = j.at("duality_gap").get<double>();
    m.converged = j.at("converged").get<bool>();
    return m;
  }
  if (kind == "lda") {
    LdaModel m;
    m.w = j.at("w").get<std::vector<double>>();
    m.b = j.at("b").get<double>();
    m.prior_left = j.at("prior_left").get<double>();
    m.prior_right = j.at("prior_right").get<double>();
    return m;
  }
  if (kind == "gnb") {
    GnbModel m;
    m.mean = j.at("mean").get<std::vector<std::vector<double>>>();
    m.var = j.at("var").get<std::vector<std::vector<double>>>();
    m.prior_left = j.at("prior_left").get<double>();
    m.prior_right = j.at("prior_right").get<double>();
    return m;
  }
  throw std::invalid_argument("unknown model kind: " + kind);
}

}  // namespace restcal::classify
