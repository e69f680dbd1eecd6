// Three from-scratch deterministic classifiers sharing one predict
// interface: linear soft-margin SVM (dual coordinate descent), ridge LDA,
// and Gaussian Naive Bayes.
#ifndef RESTCAL_CLASSIFY_HPP
#define RESTCAL_CLASSIFY_HPP

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "restcal/features.hpp"

namespace restcal::classify {

using dataio::TrialClass;
using features::FeatureMatrix;

enum class ClassifierKind { svm, lda, nb };

std::string to_string(ClassifierKind k);
ClassifierKind classifier_from_string(const std::string& s);

struct LdaModel {
  std::vector<double> w;
  double b = 0.0;
  double prior_left = 0.5;
  double prior_right = 0.5;
};

struct GnbModel {
  // [class][feature]; class order: left = 0, right = 1.
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> var;  // floored, always > 0
  double prior_left = 0.5;
  double prior_right = 0.5;
};

struct SvmModel {
  std::vector<double> w;
  double b = 0.0;
  double c = 1.0;
  std::size_t epochs = 0;   // passes over the training set
  double duality_gap = 0.0;
  bool converged = false;
};

using TrainedModel = std::variant<SvmModel, LdaModel, GnbModel>;

struct Prediction {
  std::vector<TrialClass> labels;
  std::vector<double> scores;  // > 0 means "right"; ties map to "left"
};

struct LdaParams {
  double ridge_lambda = 1e-3;  // scaled by trace(cov)/d
};

struct GnbParams {
  double var_floor_rel = 1e-9;   // times global per-feature variance
  double var_floor_abs = 1e-12;  // fallback when the global variance is ~0
};

struct SvmParams {
  double c = 1.0;
  double kkt_tol = 1e-4;        // max projected-gradient violation
  double gap_tol_rel = 1e-3;    // gap <= rel * (1 + |primal|)
  std::size_t max_epochs = 10000;
};

LdaModel train_lda(const FeatureMatrix& train, const LdaParams& params = {});
GnbModel train_gnb(const FeatureMatrix& train, const GnbParams& params = {});
SvmModel train_svm(const FeatureMatrix& train, const SvmParams& params = {});

Prediction predict(const TrainedModel& model, const FeatureMatrix& m);
double accuracy(const Prediction& pred, const std::vector<TrialClass>& labels);

// Model round-trip for reproducibility audits.
nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

}  // namespace restcal::classify

#endif  // RESTCAL_CLASSIFY_HPP
