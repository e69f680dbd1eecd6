// Leave-one-subject-out experiment runner: eye-mode and resting-duration
// sweeps over a dataset of epoch archives, with leakage-audited folds and
// deterministic CSV/JSON emitters.
#ifndef RESTCAL_HARNESS_HPP
#define RESTCAL_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "restcal/classify.hpp"
#include "restcal/dataio.hpp"
#include "restcal/dsp.hpp"
#include "restcal/features.hpp"
#include "restcal/selection.hpp"

namespace restcal::harness {

struct Condition {
  features::EyeMode mode = features::EyeMode::none;
  // Resting prefix length in seconds; nullopt = full segment. Ignored when
  // mode == none.
  std::optional<double> duration_s;

  std::string label() const;  // "no rest", "rest (eye-open)", "rest (30s)"...
  bool operator==(const Condition& other) const;
};

struct ExperimentConfig {
  std::filesystem::path dataset_root;
  std::vector<std::string> subjects;   // empty = discover from the dataset
  std::vector<std::string> channels;   // empty = archive's selected channels
  std::vector<classify::ClassifierKind> classifiers = {
      classify::ClassifierKind::svm, classify::ClassifierKind::lda,
      classify::ClassifierKind::nb};
  std::vector<features::EyeMode> eye_modes = {
      features::EyeMode::none, features::EyeMode::open,
      features::EyeMode::closed, features::EyeMode::movement};
  std::vector<double> durations_s = {30.0, 60.0, 120.0};

  dataio::EpochWindow epoch_window;
  dsp::BandpassSpec filter;
  bool zero_phase = false;
  features::FeatureParams feature_params;

  double eps_div = 1e-12;
  double eps_fdr = 1e-12;
  double norm_std_floor = 1e-12;
  std::size_t top_k = 25;
  classify::SvmParams svm;
  classify::LdaParams lda;
  classify::GnbParams gnb;

  bool shuffle_labels = false;  // permutation-null mode
  std::uint64_t shuffle_seed = 0;

  std::size_t threads = 0;  // 0 = hardware concurrency (RESTCAL_THREADS caps)

  // Skip the resting-duration tolerance check when loading archives whose
  // segments are intentionally short (synthetic stress configs).
  bool enforce_resting_expectation = true;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

// Per-fold instrumentation: how many rows from each origin reached each
// fitted stage. The *_from_test counters must be zero in a sound run.
struct LeakageAudit {
  std::size_t selection_rows = 0;
  std::size_t selection_rows_from_test = 0;
  std::size_t normalization_rows = 0;
  std::size_t normalization_rows_from_test = 0;
  std::size_t training_rows = 0;
  std::size_t training_rows_from_test = 0;
};

struct FoldResult {
  std::string held_out;
  Condition condition;
  classify::ClassifierKind classifier = classify::ClassifierKind::svm;
  double accuracy = 0.0;
  std::size_t n_test_trials = 0;
  std::vector<std::size_t> selected_indices;
  std::vector<std::string> selected_names;
  std::vector<double> selected_scores;
  int guard_count_train = 0;
  int guard_count_test = 0;
  LeakageAudit audit;
};

struct ResultsRow {
  std::string label;
  Condition condition;
  classify::ClassifierKind classifier = classify::ClassifierKind::svm;
  std::vector<double> per_subject_pct;  // accuracy * 100, subject order
  double mean_pct = 0.0;                // mean before any rounding
};

struct ResultsTable {
  std::vector<std::string> subject_columns;
  std::vector<ResultsRow> rows;
};

struct RunOutput {
  ResultsTable table;
  std::vector<FoldResult> folds;  // ordered by (condition, classifier, subject)
};

// Cached per-subject pipeline products, reused across conditions and folds.
struct SubjectBank {
  std::string subject_id;
  features::FeatureMatrix task_features;  // trials x (5 * channels), raw
  // Selected-channel resting segments (pre-truncation, pre-filtering) in
  // order open, closed, movement; empty when the archive has no resting
  // block (only the "none" condition works then).
  std::vector<dataio::ContinuousRecording> resting;
};

std::vector<std::string> discover_subjects(
    const std::filesystem::path& dataset_root);

SubjectBank load_subject_bank(const ExperimentConfig& config,
                              const std::string& subject_id);

// Calibration vector for one condition; duration is clamped to the segment.
features::CalibrationVector condition_calibration(
    const ExperimentConfig& config, const SubjectBank& bank,
    const Condition& condition);

RunOutput run_loso(const ExperimentConfig& config,
                   const std::vector<Condition>& conditions);

// Table 3 shape: none/open/closed/movement at full duration.
RunOutput run_eye_mode_sweep(const ExperimentConfig& config);

// Table 4 shape: none plus eyes-open prefixes of the configured durations.
RunOutput run_duration_sweep(const ExperimentConfig& config);

void write_csv(const ResultsTable& table, std::ostream& out);
nlohmann::json results_to_json(const RunOutput& output,
                               const ExperimentConfig& config);
void emit_results(const RunOutput& output, const ExperimentConfig& config,
                  const std::filesystem::path& out_dir);

std::size_t resolve_thread_count(const ExperimentConfig& config);

}  // namespace restcal::harness

#endif  // RESTCAL_HARNESS_HPP
