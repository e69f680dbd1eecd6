#include "restcal/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

#include "restcal/synth.hpp"  // deterministic Rng for label shuffling

namespace restcal::harness {

namespace {

std::string duration_label(double seconds) {
  if (seconds >= 60.0 && std::fmod(seconds, 60.0) == 0.0) {
    return std::to_string(static_cast<long long>(seconds / 60.0)) + "min";
  }
  std::ostringstream os;
  os << seconds << "s";
  return os.str();
}

std::string classifier_display(classify::ClassifierKind k) {
  switch (k) {
    case classify::ClassifierKind::svm:
      return "SVM";
    case classify::ClassifierKind::lda:
      return "LDA";
    case classify::ClassifierKind::nb:
      return "NB";
  }
  throw std::logic_error("unhandled classifier kind");
}

// "S2" before "S10": compare alphabetic prefix, then numeric suffix.
bool subject_less(const std::string& a, const std::string& b) {
  auto split = [](const std::string& s) {
    std::size_t i = s.size();
    while (i > 0 && std::isdigit(static_cast<unsigned char>(s[i - 1]))) --i;
    const std::string prefix = s.substr(0, i);
    const long long num = i < s.size() ? std::stoll(s.substr(i)) : -1;
    return std::pair<std::string, long long>(prefix, num);
  };
  const auto [pa, na] = split(a);
  const auto [pb, nb] = split(b);
  if (pa != pb) return pa < pb;
  if (na != nb) return na < nb;
  return a < b;
}

// Runs fn(0..n-1) on up to n_threads workers; exceptions are rethrown on
// the calling thread after all workers join.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t n_threads, Fn&& fn) {
  if (n == 0) return;
  if (n_threads <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  const std::size_t spawn = std::min(n_threads, n);
  threads.reserve(spawn);
  for (std::size_t t = 0; t < spawn; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

std::size_t resting_index(features::EyeMode mode) {
  switch (mode) {
    case features::EyeMode::open:
      return 0;
    case features::EyeMode::closed:
      return 1;
    case features::EyeMode::movement:
      return 2;
    case features::EyeMode::none:
      break;
  }
  throw std::logic_error("no resting segment for eye mode 'none'");
}

}  // namespace

std::string Condition::label() const {
  if (mode == features::EyeMode::none) return "no rest";
  if (duration_s.has_value()) {
    return "rest (" + duration_label(*duration_s) + ")";
  }
  return "rest (" + features::to_string(mode) + ")";
}

bool Condition::operator==(const Condition& other) const {
  return mode == other.mode && duration_s == other.duration_s;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.dataset_root = j.value("dataset_root", std::string());
  if (j.contains("subjects")) {
    c.subjects = j.at("subjects").get<std::vector<std::string>>();
  }
  if (j.contains("channels")) {
    c.channels = j.at("channels").get<std::vector<std::string>>();
  }
  if (j.contains("classifiers")) {
    c.classifiers.clear();
    for (const auto& name : j.at("classifiers")) {
      c.classifiers.push_back(
          classify::classifier_from_string(name.get<std::string>()));
    }
  }
  if (j.contains("eye_modes")) {
    c.eye_modes.clear();
    for (const auto& name : j.at("eye_modes")) {
      c.eye_modes.push_back(
          features::eye_mode_from_string(name.get<std::string>()));
    }
  }
  if (j.contains("durations_s")) {
    c.durations_s = j.at("durations_s").get<std::vector<double>>();
  }
  c.epoch_window.start_s = j.value("epoch_start_s", c.epoch_window.start_s);
  c.epoch_window.end_s = j.value("epoch_end_s", c.epoch_window.end_s);
  c.filter.low_hz = j.value("filter_low_hz", c.filter.low_hz);
  c.filter.high_hz = j.value("filter_high_hz", c.filter.high_hz);
  c.filter.order = j.value("filter_order", c.filter.order);
  c.zero_phase = j.value("zero_phase", c.zero_phase);
  c.feature_params.band_low_hz =
      j.value("band_low_hz", c.feature_params.band_low_hz);
  c.feature_params.band_high_hz =
      j.value("band_high_hz", c.feature_params.band_high_hz);
  c.feature_params.welch_segment_len =
      j.value("welch_segment_len", c.feature_params.welch_segment_len);
  c.feature_params.welch_overlap =
      j.value("welch_overlap", c.feature_params.welch_overlap);
  if (j.contains("welch_window")) {
    c.feature_params.welch_window =
        dsp::window_from_name(j.at("welch_window").get<std::string>());
  }
  c.feature_params.eps_var = j.value("eps_var", c.feature_params.eps_var);
  c.eps_div = j.value("eps_div", c.eps_div);
  c.eps_fdr = j.value("eps_fdr", c.eps_fdr);
  c.norm_std_floor = j.value("norm_std_floor", c.norm_std_floor);
  c.top_k = j.value("top_k", c.top_k);
  c.svm.c = j.value("svm_c", c.svm.c);
  c.svm.kkt_tol = j.value("svm_kkt_tol", c.svm.kkt_tol);
  c.svm.gap_tol_rel = j.value("svm_gap_tol_rel", c.svm.gap_tol_rel);
  c.svm.max_epochs = j.value("svm_max_epochs", c.svm.max_epochs);
  c.lda.ridge_lambda = j.value("lda_ridge_lambda", c.lda.ridge_lambda);
  c.gnb.var_floor_rel = j.value("gnb_var_floor_rel", c.gnb.var_floor_rel);
  c.gnb.var_floor_abs = j.value("gnb_var_floor_abs", c.gnb.var_floor_abs);
  c.shuffle_labels = j.value("shuffle_labels", c.shuffle_labels);
  c.shuffle_seed = j.value("shuffle_seed", c.shuffle_seed);
  c.threads = j.value("threads", c.threads);
  c.enforce_resting_expectation =
      j.value("enforce_resting_expectation", c.enforce_resting_expectation);
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["dataset_root"] = c.dataset_root.string();
  j["subjects"] = c.subjects;
  j["channels"] = c.channels;
  {
    std::vector<std::string> names;
    for (auto k : c.classifiers) names.push_back(classify::to_string(k));
    j["classifiers"] = names;
  }
  {
    std::vector<std::string> names;
    for (auto m : c.eye_modes) names.push_back(features::to_string(m));
    j["eye_modes"] = names;
  }
  j["durations_s"] = c.durations_s;
  j["epoch_start_s"] = c.epoch_window.start_s;
  j["epoch_end_s"] = c.epoch_window.end_s;
  j["filter_low_hz"] = c.filter.low_hz;
  j["filter_high_hz"] = c.filter.high_hz;
  j["filter_order"] = c.filter.order;
  j["zero_phase"] = c.zero_phase;
  j["band_low_hz"] = c.feature_params.band_low_hz;
  j["band_high_hz"] = c.feature_params.band_high_hz;
  j["welch_segment_len"] = c.feature_params.welch_segment_len;
  j["welch_overlap"] = c.feature_params.welch_overlap;
  j["welch_window"] = dsp::window_name(c.feature_params.welch_window);
  j["eps_var"] = c.feature_params.eps_var;
  j["eps_div"] = c.eps_div;
  j["eps_fdr"] = c.eps_fdr;
  j["norm_std_floor"] = c.norm_std_floor;
  j["top_k"] = c.top_k;
  j["svm_c"] = c.svm.c;
  j["svm_kkt_tol"] = c.svm.kkt_tol;
  j["svm_gap_tol_rel"] = c.svm.gap_tol_rel;
  j["svm_max_epochs"] = c.svm.max_epochs;
  j["lda_ridge_lambda"] = c.lda.ridge_lambda;
  j["gnb_var_floor_rel"] = c.gnb.var_floor_rel;
  j["gnb_var_floor_abs"] = c.gnb.var_floor_abs;
  j["shuffle_labels"] = c.shuffle_labels;
  j["shuffle_seed"] = c.shuffle_seed;
  j["threads"] = c.threads;
  j["enforce_resting_expectation"] = c.enforce_resting_expectation;
  return j;
}

std::size_t resolve_thread_count(const ExperimentConfig& config) {
  std::size_t n = config.threads;
  if (n == 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    n = hw == 0 ? 1 : hw;
  }
  if (const char* cap = std::getenv("RESTCAL_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(cap, &end, 10);
    if (end != cap && v > 0) n = std::min<std::size_t>(n, v);
  }
  return std::max<std::size_t>(n, 1);
}

std::vector<std::string> discover_subjects(
    const std::filesystem::path& dataset_root) {
  const auto manifest = dataset_root / "dataset.json";
  if (std::filesystem::exists(manifest)) {
    std::ifstream in(manifest);
    nlohmann::json j;
    in >> j;
    if (j.contains("subjects")) {
      return j.at("subjects").get<std::vector<std::string>>();
    }
  }
  std::vector<std::string> subjects;
  for (const auto& entry : std::filesystem::directory_iterator(dataset_root)) {
    if (entry.is_directory() &&
        std::filesystem::exists(entry.path() / "manifest.json")) {
      subjects.push_back(entry.path().filename().string());
    }
  }
  std::sort(subjects.begin(), subjects.end(), subject_less);
  return subjects;
}

SubjectBank load_subject_bank(const ExperimentConfig& config,
                              const std::string& subject_id) {
  const auto rec =
      dataio::load_recording((config.dataset_root / subject_id).string());
  const std::vector<std::string>& wanted =
      config.channels.empty() ? rec.channels.selected : config.channels;
  const auto selected = dataio::select_channels(rec, wanted);

  dsp::BandpassSpec filter_spec = config.filter;
  filter_spec.sample_rate_hz = rec.sample_rate_hz;
  const auto realization = dsp::design_butterworth_bandpass(filter_spec);

  SubjectBank bank;
  bank.subject_id = subject_id;

  const auto epochs = dataio::extract_epochs(
      selected, config.epoch_window,
      {dataio::TrialClass::left, dataio::TrialClass::right});
  for (std::size_t i = 0; i < epochs.n_trials(); ++i) {
    dsp::MultiChannel epoch = dsp::car_filter(epochs.trials[i]);
    for (auto& channel : epoch) {
      channel = dsp::apply_iir(realization, channel, config.zero_phase);
    }
    const auto fv = features::trial_features(
        epoch, rec.sample_rate_hz, epochs.channel_names, config.feature_params);
    bank.task_features.append_row(fv.values, epochs.labels[i]);
    if (bank.task_features.column_names.empty()) {
      bank.task_features.column_names = fv.names;
    }
  }

  try {
    const auto segments = dataio::segment_resting(
        rec, config.enforce_resting_expectation
                 ? std::optional<dataio::RestingExpectation>(
                       dataio::RestingExpectation{})
                 : std::nullopt);
    bank.resting.push_back(dataio::select_channels(segments.eyes_open, wanted));
    bank.resting.push_back(
        dataio::select_channels(segments.eyes_closed, wanted));
    bank.resting.push_back(
        dataio::select_channels(segments.eye_movement, wanted));
  } catch (const std::runtime_error& e) {
    // Archives without a resting block can still serve the "none"
    // condition; calibrated conditions will fail loudly later.
    if (std::string(e.what()).find("no resting block") == std::string::npos) {
      throw;
    }
  }
  return bank;
}

features::CalibrationVector condition_calibration(
    const ExperimentConfig& config, const SubjectBank& bank,
    const Condition& condition) {
  const std::size_t idx = resting_index(condition.mode);
  if (bank.resting.empty()) {
    throw std::runtime_error("no resting block in recording of subject " +
                             bank.subject_id);
  }
  const dataio::ContinuousRecording& segment = bank.resting[idx];
  double duration = segment.duration_s();
  if (condition.duration_s.has_value()) {
    duration = std::min(*condition.duration_s, duration);
  }
  auto block = dataio::truncate_segment(segment, duration);
  for (auto& channel : block.samples) {
    channel = dsp::fft_bandpass(channel, block.sample_rate_hz,
                                config.filter.low_hz, config.filter.high_hz);
  }
  block.samples = dsp::car_filter(block.samples);
  return features::resting_features(block.samples, block.sample_rate_hz,
                                    block.channels.names,
                                    config.feature_params, condition.mode,
                                    duration);
}

namespace {

struct ConditionData {
  // Per subject: calibrated (or raw, for mode none) feature matrix and the
  // number of epsilon-guard engagements while calibrating it.
  std::vector<features::FeatureMatrix> matrices;
  std::vector<int> guard_counts;
};

ConditionData prepare_condition(const ExperimentConfig& config,
                                const std::vector<SubjectBank>& banks,
                                const Condition& condition,
                                std::size_t n_threads) {
  ConditionData data;
  data.matrices.resize(banks.size());
  data.guard_counts.assign(banks.size(), 0);
  if (condition.mode == features::EyeMode::none) {
    for (std::size_t s = 0; s < banks.size(); ++s) {
      data.matrices[s] = banks[s].task_features;
    }
    return data;
  }
  parallel_for(banks.size(), n_threads, [&](std::size_t s) {
    const SubjectBank& bank = banks[s];
    try {
      const auto rest = condition_calibration(config, bank, condition);
      features::FeatureMatrix calibrated;
      calibrated.n_cols = bank.task_features.n_cols;
      calibrated.column_names = bank.task_features.column_names;
      features::FeatureVector row;
      for (std::size_t r = 0; r < bank.task_features.n_rows; ++r) {
        row.values.assign(
            bank.task_features.values.begin() +
                static_cast<long>(r * bank.task_features.n_cols),
            bank.task_features.values.begin() +
                static_cast<long>((r + 1) * bank.task_features.n_cols));
        auto outcome = features::calibrate(row, rest, config.eps_div);
        calibrated.append_row(outcome.features.values,
                              bank.task_features.labels[r]);
        data.guard_counts[s] += outcome.guard_count;
      }
      data.matrices[s] = std::move(calibrated);
    } catch (const std::exception& e) {
      throw std::runtime_error("condition '" + condition.label() +
                               "', subject " + bank.subject_id + ": " +
                               e.what());
    }
  });
  return data;
}

std::vector<FoldResult> run_single_fold(const ExperimentConfig& config,
                                        const std::vector<SubjectBank>& banks,
                                        const ConditionData& data,
                                        const Condition& condition,
                                        std::size_t held_out_index) {
  const std::string& held_out = banks[held_out_index].subject_id;

  // Assemble the training matrix while recording which subject each row came
  // from so the leakage audit counts what actually reached the fits.
  features::FeatureMatrix train;
  std::vector<std::size_t> row_subject;
  for (std::size_t s = 0; s < banks.size(); ++s) {
    if (s == held_out_index) continue;
    const features::FeatureMatrix& m = data.matrices[s];
    if (train.n_cols == 0) {
      train.n_cols = m.n_cols;
      train.column_names = m.column_names;
    }
    train.values.insert(train.values.end(), m.values.begin(), m.values.end());
    train.labels.insert(train.labels.end(), m.labels.begin(), m.labels.end());
    train.n_rows += m.n_rows;
    row_subject.insert(row_subject.end(), m.n_rows, s);
  }
  const features::FeatureMatrix& test = data.matrices[held_out_index];

  std::size_t rows_from_test = 0;
  for (std::size_t s : row_subject) {
    if (s == held_out_index) ++rows_from_test;
  }

  const auto scores = selection::fdr_scores(train, config.eps_fdr);
  const auto mask = selection::select_top_k(scores, config.top_k);
  const auto train_sel = selection::apply_mask(mask, train);
  const auto test_sel = selection::apply_mask(mask, test);
  const auto stats =
      features::fit_normalizer(train_sel, config.norm_std_floor);
  const auto train_norm = features::apply_normalizer(stats, train_sel);
  const auto test_norm = features::apply_normalizer(stats, test_sel);

  LeakageAudit audit;
  audit.selection_rows = train.n_rows;
  audit.selection_rows_from_test = rows_from_test;
  audit.normalization_rows = train_sel.n_rows;
  audit.normalization_rows_from_test = rows_from_test;
  audit.training_rows = train_norm.n_rows;
  audit.training_rows_from_test = rows_from_test;

  int guard_train = 0;
  for (std::size_t s = 0; s < banks.size(); ++s) {
    if (s != held_out_index) guard_train += data.guard_counts[s];
  }

  std::vector<FoldResult> results;
  for (const auto kind : config.classifiers) {
    classify::TrainedModel model = [&]() -> classify::TrainedModel {
      switch (kind) {
        case classify::ClassifierKind::svm:
          return classify::train_svm(train_norm, config.svm);
        case classify::ClassifierKind::lda:
          return classify::train_lda(train_norm, config.lda);
        case classify::ClassifierKind::nb:
          return classify::train_gnb(train_norm, config.gnb);
      }
      throw std::logic_error("unhandled classifier kind");
    }();
    const auto pred = classify::predict(model, test_norm);

    FoldResult fold;
    fold.held_out = held_out;
    fold.condition = condition;
    fold.classifier = kind;
    fold.accuracy = classify::accuracy(pred, test_norm.labels);
    fold.n_test_trials = test_norm.n_rows;
    fold.selected_indices = mask.indices;
    fold.selected_scores = mask.scores;
    if (!train.column_names.empty()) {
      for (std::size_t idx : mask.indices) {
        fold.selected_names.push_back(train.column_names[idx]);
      }
    }
    fold.guard_count_train = guard_train;
    fold.guard_count_test = data.guard_counts[held_out_index];
    fold.audit = audit;
    results.push_back(std::move(fold));
  }
  return results;
}

}  // namespace

RunOutput run_loso(const ExperimentConfig& config,
                   const std::vector<Condition>& conditions) {
  std::vector<std::string> subjects = config.subjects;
  if (subjects.empty()) subjects = discover_subjects(config.dataset_root);
  if (subjects.size() < 2) {
    throw std::invalid_argument("LOSO needs at least two subjects");
  }
  if (conditions.empty()) {
    throw std::invalid_argument("no conditions configured");
  }
  const std::size_t n_threads = resolve_thread_count(config);

  std::vector<SubjectBank> banks(subjects.size());
  parallel_for(subjects.size(), n_threads, [&](std::size_t s) {
    banks[s] = load_subject_bank(config, subjects[s]);
  });

  if (config.shuffle_labels) {
    // Permutation-null mode: destroy the class structure per subject with
    // a seeded shuffle so chance-level accuracy is the correct outcome.
    for (std::size_t s = 0; s < banks.size(); ++s) {
      synth::Rng rng(config.shuffle_seed, 0x73687566666cULL, s);
      synth::fisher_yates_shuffle(banks[s].task_features.labels, rng);
    }
  }

  RunOutput output;
  output.table.subject_columns = subjects;
  // folds[condition][subject] -> one result per classifier; filled in
  // parallel, emitted in deterministic (condition, classifier, subject)
  // order below.
  std::vector<std::vector<std::vector<FoldResult>>> fold_grid(
      conditions.size());
  for (std::size_t ci = 0; ci < conditions.size(); ++ci) {
    const ConditionData data =
        prepare_condition(config, banks, conditions[ci], n_threads);
    fold_grid[ci].resize(subjects.size());
    parallel_for(subjects.size(), n_threads, [&](std::size_t s) {
      try {
        fold_grid[ci][s] =
            run_single_fold(config, banks, data, conditions[ci], s);
      } catch (const std::exception& e) {
        throw std::runtime_error("condition '" + conditions[ci].label() +
                                 "', held-out " + subjects[s] + ": " +
                                 e.what());
      }
    });
  }

  for (std::size_t ci = 0; ci < conditions.size(); ++ci) {
    for (std::size_t k = 0; k < config.classifiers.size(); ++k) {
      for (std::size_t s = 0; s < subjects.size(); ++s) {
        output.folds.push_back(fold_grid[ci][s][k]);
      }
    }
  }

  // Table rows classifier-major to mirror the reporting layout.
  for (const auto kind : config.classifiers) {
    for (std::size_t ci = 0; ci < conditions.size(); ++ci) {
      ResultsRow row;
      row.condition = conditions[ci];
      row.classifier = kind;
      row.label =
          "SI " + classifier_display(kind) + " - " + conditions[ci].label();
      double sum = 0.0;
      for (std::size_t s = 0; s < subjects.size(); ++s) {
        for (const auto& fold : fold_grid[ci][s]) {
          if (fold.classifier == kind) {
            row.per_subject_pct.push_back(fold.accuracy * 100.0);
            sum += fold.accuracy * 100.0;
          }
        }
      }
      row.mean_pct = sum / static_cast<double>(row.per_subject_pct.size());
      output.table.rows.push_back(std::move(row));
    }
  }
  return output;
}

RunOutput run_eye_mode_sweep(const ExperimentConfig& config) {
  std::vector<Condition> conditions;
  for (const auto mode : config.eye_modes) {
    conditions.push_back({mode, std::nullopt});
  }
  return run_loso(config, conditions);
}

RunOutput run_duration_sweep(const ExperimentConfig& config) {
  std::vector<Condition> conditions;
  conditions.push_back({features::EyeMode::none, std::nullopt});
  for (const double d : config.durations_s) {
    conditions.push_back({features::EyeMode::open, d});
  }
  return run_loso(config, conditions);
}

void write_csv(const ResultsTable& table, std::ostream& out) {
  out << "label";
  for (const auto& s : table.subject_columns) out << ',' << s;
  out << ",mean\n";
  out << std::fixed << std::setprecision(2);
  for (const auto& row : table.rows) {
    out << row.label;
    for (const double pct : row.per_subject_pct) out << ',' << pct;
    out << ',' << row.mean_pct << '\n';
  }
}

namespace {

nlohmann::json condition_to_json(const Condition& c) {
  nlohmann::json j;
  j["mode"] = features::to_string(c.mode);
  if (c.duration_s.has_value()) {
    j["duration_s"] = *c.duration_s;
  } else {
    j["duration_s"] = nullptr;
  }
  j["label"] = c.label();
  return j;
}

}  // namespace

nlohmann::json results_to_json(const RunOutput& output,
                               const ExperimentConfig& config) {
  nlohmann::json j;
  j["config"] = config_to_json(config);
  j["subjects"] = output.table.subject_columns;
  j["table"] = nlohmann::json::array();
  for (const auto& row : output.table.rows) {
    nlohmann::json r;
    r["label"] = row.label;
    r["classifier"] = classify::to_string(row.classifier);
    r["condition"] = condition_to_json(row.condition);
    r["per_subject_pct"] = row.per_subject_pct;
    r["mean_pct"] = row.mean_pct;
    j["table"].push_back(std::move(r));
  }
  j["folds"] = nlohmann::json::array();
  for (const auto& fold : output.folds) {
    nlohmann::json f;
    f["held_out"] = fold.held_out;
    f["classifier"] = classify::to_string(fold.classifier);
    f["condition"] = condition_to_json(fold.condition);
    f["accuracy"] = fold.accuracy;
    f["n_test_trials"] = fold.n_test_trials;
    f["selected"]["indices"] = fold.selected_indices;
    f["selected"]["names"] = fold.selected_names;
    f["selected"]["scores"] = fold.selected_scores;
    f["guard_count_train"] = fold.guard_count_train;
    f["guard_count_test"] = fold.guard_count_test;
    f["audit"]["selection_rows"] = fold.audit.selection_rows;
    f["audit"]["selection_rows_from_test"] = fold.audit.selection_rows_from_test;
    f["audit"]["normalization_rows"] = fold.audit.normalization_rows;
    f["audit"]["normalization_rows_from_test"] =
        fold.audit.normalization_rows_from_test;
    f["audit"]["training_rows"] = fold.audit.training_rows;
    f["audit"]["training_rows_from_test"] = fold.audit.training_rows_from_test;
    j["folds"].push_back(std::move(f));
  }
  return j;
}

void emit_results(const RunOutput& output, const ExperimentConfig& config,
                  const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream csv(out_dir / "results.csv");
    if (!csv) {
      throw std::runtime_error("cannot write " +
                               (out_dir / "results.csv").string());
    }
    write_csv(output.table, csv);
  }
  {
    std::ofstream json_file(out_dir / "results.json");
    if (!json_file) {
      throw std::runtime_error("cannot write " +
                               (out_dir / "results.json").string());
    }
    json_file << results_to_json(output, config).dump(2) << "\n";
  }
}

}  // namespace restcal::harness
