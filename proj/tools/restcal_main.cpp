// restcal command-line tool: synthetic dataset generation, archive
// inspection/conversion, per-trial feature export, and the LOSO sweeps.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "restcal/dataio.hpp"
#include "restcal/features.hpp"
#include "restcal/harness.hpp"
#include "restcal/synth.hpp"

namespace {

restcal::harness::ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  return restcal::harness::config_from_json(j);
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir) {
  restcal::synth::SynthSpec spec;
  if (!spec_path.empty()) {
    std::ifstream in(spec_path);
    if (!in) throw std::runtime_error("cannot open spec file: " + spec_path);
    nlohmann::json j;
    in >> j;
    spec = restcal::synth::synth_spec_from_json(j);
  }
  const auto subjects = restcal::synth::generate_dataset(spec, out_dir);
  std::cout << "wrote " << subjects.size() << " subject archives to "
            << out_dir << "\n";
  return 0;
}

int cmd_inspect(const std::string& archive) {
  const auto rec = restcal::dataio::load_recording(archive);
  std::cout << restcal::dataio::describe_recording(rec);
  return 0;
}

int cmd_convert(const std::string& in_dir, const std::string& out_dir) {
  // Converter stub: validates an already-converted tree by loading it and
  // re-emitting a canonical archive.
  const auto rec = restcal::dataio::load_recording(in_dir);
  restcal::dataio::write_archive(rec, out_dir);
  std::cout << "validated " << in_dir << " and wrote " << out_dir << "\n";
  return 0;
}

int cmd_features(const std::string& archive, const std::string& eye_mode,
                 double rest_duration, bool enforce_rest,
                 const std::string& out_path) {
  namespace fs = std::filesystem;
  restcal::harness::ExperimentConfig config;
  config.enforce_resting_expectation = enforce_rest;
  const fs::path archive_path(archive);
  config.dataset_root = archive_path.parent_path();
  const std::string subject = archive_path.filename().string();

  const auto bank = restcal::harness::load_subject_bank(config, subject);
  restcal::features::FeatureMatrix matrix = bank.task_features;
  const auto mode = restcal::features::eye_mode_from_string(eye_mode);
  if (mode != restcal::features::EyeMode::none) {
    restcal::harness::Condition condition;
    condition.mode = mode;
    if (rest_duration > 0.0) condition.duration_s = rest_duration;
    const auto rest =
        restcal::harness::condition_calibration(config, bank, condition);
    restcal::features::FeatureMatrix calibrated;
    calibrated.n_cols = matrix.n_cols;
    calibrated.column_names = matrix.column_names;
    restcal::features::FeatureVector row;
    for (std::size_t r = 0; r < matrix.n_rows; ++r) {
      row.values.assign(
          matrix.values.begin() + static_cast<long>(r * matrix.n_cols),
          matrix.values.begin() + static_cast<long>((r + 1) * matrix.n_cols));
      calibrated.append_row(
          restcal::features::calibrate(row, rest).features.values,
          matrix.labels[r]);
    }
    matrix = std::move(calibrated);
  }

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  for (const auto& name : matrix.column_names) out << name << ',';
  out << "label,subject_id\n";
  out.precision(17);
  for (std::size_t r = 0; r < matrix.n_rows; ++r) {
    for (std::size_t c = 0; c < matrix.n_cols; ++c) {
      out << matrix.at(r, c) << ',';
    }
    out << restcal::dataio::to_string(matrix.labels[r]) << ',' << subject
        << '\n';
  }
  std::cout << "wrote " << matrix.n_rows << " trial rows to " << out_path
            << "\n";
  return 0;
}

int cmd_loso(const std::string& config_path, const std::string& out_dir) {
  const auto config = load_config(config_path);
  const auto output = restcal::harness::run_eye_mode_sweep(config);
  restcal::harness::emit_results(output, config, out_dir);
  restcal::harness::write_csv(output.table, std::cout);
  return 0;
}

int cmd_sweep(const std::string& mode, const std::string& config_path,
              const std::string& out_dir) {
  const auto config = load_config(config_path);
  restcal::harness::RunOutput output;
  if (mode == "eye") {
    output = restcal::harness::run_eye_mode_sweep(config);
  } else if (mode == "duration") {
    output = restcal::harness::run_duration_sweep(config);
  } else {
    throw std::runtime_error("unknown sweep mode: " + mode);
  }
  restcal::harness::emit_results(output, config, out_dir);
  restcal::harness::write_csv(output.table, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Motor-imagery EEG pipeline with resting-state calibration"};
  app.require_subcommand(1);

  std::string synth_spec, synth_out = "data";
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--spec", synth_spec, "Synthesis spec JSON (optional)");
  synth->add_option("--out", synth_out, "Output dataset directory")->required();

  std::string inspect_archive;
  auto* inspect = app.add_subcommand("inspect", "Summarize an epoch archive");
  inspect->add_option("archive", inspect_archive, "Archive directory")
      ->required();

  std::string convert_in, convert_out;
  auto* convert =
      app.add_subcommand("convert", "Validate and canonicalize an archive");
  convert->add_option("--in", convert_in, "Input archive directory")
      ->required();
  convert->add_option("--out", convert_out, "Output archive directory")
      ->required();

  std::string feat_archive, feat_mode = "none", feat_out = "features.csv";
  double feat_duration = 0.0;
  bool feat_no_enforce = false;
  auto* feat = app.add_subcommand("features", "Export per-trial features");
  feat->add_option("--archive", feat_archive, "Archive directory")->required();
  feat->add_option("--eye-mode", feat_mode,
                   "none|open|closed|movement (calibration source)");
  feat->add_option("--rest-duration", feat_duration,
                   "Resting prefix seconds (0 = full segment)");
  feat->add_flag("--no-enforce-rest", feat_no_enforce,
                 "Skip the nominal resting-duration check");
  feat->add_option("--out", feat_out, "Output CSV path");

  std::string loso_config, loso_out = "results";
  auto* loso = app.add_subcommand("loso", "Run the LOSO evaluation");
  loso->add_option("--config", loso_config, "Experiment config JSON");
  loso->add_option("--out", loso_out, "Results directory");

  std::string sweep_mode, sweep_config, sweep_out = "results";
  auto* sweep = app.add_subcommand("sweep", "Run an eye-mode/duration sweep");
  sweep->add_option("--mode", sweep_mode, "eye|duration")->required();
  sweep->add_option("--config", sweep_config, "Experiment config JSON");
  sweep->add_option("--out", sweep_out, "Results directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(synth_spec, synth_out);
    if (inspect->parsed()) return cmd_inspect(inspect_archive);
    if (convert->parsed()) return cmd_convert(convert_in, convert_out);
    if (feat->parsed()) {
      return cmd_features(feat_archive, feat_mode, feat_duration,
                          !feat_no_enforce, feat_out);
    }
    if (loso->parsed()) return cmd_loso(loso_config, loso_out);
    if (sweep->parsed()) return cmd_sweep(sweep_mode, sweep_config, sweep_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
