// Archive load/write round-trips, epoch extraction, resting segmentation
// and prefix truncation.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "restcal/dataio.hpp"
#include "restcal/synth.hpp"

namespace fs = std::filesystem;
namespace dataio = restcal::dataio;
using dataio::ContinuousRecording;
using dataio::TrialClass;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("restcal_dataio_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Writes a raw archive by hand, bypassing write_archive, so the loader is
// tested against the on-disk contract rather than our own writer.
void write_raw_archive(const fs::path& dir, const nlohmann::json& manifest,
                       const std::vector<float>& payload) {
  fs::create_directories(dir);
  std::ofstream mf(dir / "manifest.json");
  mf << manifest.dump(2);
  mf.close();
  std::ofstream pf(dir / "signal.f32", std::ios::binary);
  for (float v : payload) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(&v);
    pf.write(reinterpret_cast<const char*>(bytes), 4);
  }
}

nlohmann::json basic_manifest(std::size_t n_channels, std::size_t n_samples) {
  nlohmann::json m;
  m["format"] = "restcal-epoch-archive";
  m["subject_id"] = "T1";
  m["sample_rate_hz"] = 250.0;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n_channels; ++i) {
    names.push_back("ch" + std::to_string(i));
  }
  m["channels"] = names;
  m["payload"] = {{"file", "signal.f32"},
                  {"dtype", "float32_le"},
                  {"order", "channel_major"},
                  {"samples_per_channel", n_samples}};
  m["events"] = nlohmann::json::array();
  return m;
}

ContinuousRecording synth_recording() {
  restcal::synth::SynthSpec spec;
  spec.n_subjects = 1;
  return restcal::synth::generate_subject(spec, 0).recording;
}

}  // namespace

TEST_CASE("load_recording reads a zero archive") {
  const auto dir = fresh_dir("zeros");
  write_raw_archive(dir, basic_manifest(2, 10), std::vector<float>(20, 0.0f));
  const auto rec = dataio::load_recording(dir.string());
  CHECK(rec.subject_id == "T1");
  CHECK(rec.sample_rate_hz == 250.0);
  CHECK(rec.samples.size() == 2);
  CHECK(rec.n_samples() == 10);
  for (const auto& ch : rec.samples) {
    for (double v : ch) CHECK(v == 0.0);
  }
}

TEST_CASE("load_recording rejects a payload shape mismatch") {
  const auto dir = fresh_dir("mismatch");
  // Declares 22 channels but ships data for 21.
  write_raw_archive(dir, basic_manifest(22, 100),
                    std::vector<float>(21 * 100, 0.0f));
  CHECK_THROWS_WITH_AS(dataio::load_recording(dir.string()),
                       doctest::Contains("payload shape mismatch"),
                       std::runtime_error);
}

TEST_CASE("load_recording rejects a missing manifest") {
  const auto dir = fresh_dir("nomanifest");
  CHECK_THROWS_AS(dataio::load_recording(dir.string()), std::runtime_error);
}

TEST_CASE("load_recording rejects out-of-range events") {
  const auto dir = fresh_dir("badevent");
  auto manifest = basic_manifest(2, 10);
  manifest["events"].push_back({{"sample", 10}, {"code", "cue_left"}});
  write_raw_archive(dir, manifest, std::vector<float>(20, 0.0f));
  CHECK_THROWS_AS(dataio::load_recording(dir.string()), std::runtime_error);
}

TEST_CASE("archive round-trip is bit-exact") {
  const auto rec = synth_recording();  // samples already float32-snapped
  const auto dir = fresh_dir("roundtrip");
  dataio::write_archive(rec, dir.string());
  const auto back = dataio::load_recording(dir.string());
  CHECK(back.subject_id == rec.subject_id);
  CHECK(back.sample_rate_hz == rec.sample_rate_hz);
  REQUIRE(back.samples.size() == rec.samples.size());
  for (std::size_t c = 0; c < rec.samples.size(); ++c) {
    REQUIRE(back.samples[c].size() == rec.samples[c].size());
    for (std::size_t t = 0; t < rec.samples[c].size(); ++t) {
      CHECK(back.samples[c][t] == rec.samples[c][t]);  // bit-exact
    }
  }
  REQUIRE(back.events.size() == rec.events.size());
  for (std::size_t e = 0; e < rec.events.size(); ++e) {
    CHECK(back.events[e].sample == rec.events[e].sample);
    CHECK(back.events[e].code == rec.events[e].code);
  }
  REQUIRE(back.resting_offsets.has_value());
  CHECK(back.resting_offsets->end == rec.resting_offsets->end);
}

TEST_CASE("standard selection is the 11 motor-strip channels") {
  const auto& sel = dataio::standard_selected_channels();
  const std::vector<std::string> expected = {"FC3", "FC4", "C5", "C3", "C1",
                                             "Cz", "C2", "C4", "C6", "CP3",
                                             "CP4"};
  CHECK(sel == expected);
  CHECK(std::set<std::string>(sel.begin(), sel.end()).size() == 11);
}

TEST_CASE("extract_epochs cuts 144 four-second epochs") {
  const auto rec = synth_recording();
  const auto epochs = dataio::extract_epochs(
      rec, dataio::EpochWindow{0.0, 4.0},
      {TrialClass::left, TrialClass::right});
  CHECK(epochs.n_trials() == 144);
  CHECK(epochs.trials.front().size() == 11);
  CHECK(epochs.samples_per_trial() == 1000);
  CHECK(epochs.labels.size() == 144);
  std::size_t lefts = 0;
  for (auto l : epochs.labels) lefts += l == TrialClass::left ? 1 : 0;
  CHECK(lefts == 72);

  const auto only_left =
      dataio::extract_epochs(rec, dataio::EpochWindow{0.0, 4.0},
                             {TrialClass::left});
  CHECK(only_left.n_trials() == 72);
  for (auto l : only_left.labels) CHECK(l == TrialClass::left);

  // Rounding edge: a 4 ms window at 250 Hz is one sample.
  const auto tiny = dataio::extract_epochs(
      rec, dataio::EpochWindow{0.0, 0.004},
      {TrialClass::left, TrialClass::right});
  CHECK(tiny.samples_per_trial() == 1);
}

TEST_CASE("extract_epochs validates window bounds and event presence") {
  const auto dir = fresh_dir("epochbounds");
  auto manifest = basic_manifest(2, 1000);
  manifest["events"].push_back({{"sample", 900}, {"code", "cue_left"}});
  write_raw_archive(dir, manifest, std::vector<float>(2000, 0.0f));
  const auto rec = dataio::load_recording(dir.string());

  // 900 + 4 s * 250 Hz = 1900 > 1000 samples.
  CHECK_THROWS_AS(dataio::extract_epochs(rec, dataio::EpochWindow{0.0, 4.0},
                                         {TrialClass::left}),
                  std::runtime_error);
  // No admitted events.
  CHECK_THROWS_AS(dataio::extract_epochs(rec, dataio::EpochWindow{0.0, 0.4},
                                         {TrialClass::right}),
                  std::runtime_error);
}

TEST_CASE("epochs never overlap the resting block") {
  const auto rec = synth_recording();
  const auto epochs = dataio::extract_epochs(
      rec, dataio::EpochWindow{0.0, 4.0},
      {TrialClass::left, TrialClass::right});
  const auto rest_end = rec.resting_offsets->end;
  for (const auto& ev : rec.events) {
    if (ev.code == dataio::kCueLeft || ev.code == dataio::kCueRight) {
      CHECK(ev.sample >= rest_end);
    }
  }
  CHECK(epochs.n_trials() > 0);
}

TEST_CASE("select-then-epoch equals epoch-then-select") {
  const auto rec = synth_recording();
  const std::vector<std::string> subset = {"C3", "C4"};
  const auto sel_first = dataio::extract_epochs(
      dataio::select_channels(rec, subset), dataio::EpochWindow{0.0, 4.0},
      {TrialClass::left, TrialClass::right});

  const auto full = dataio::extract_epochs(
      rec, dataio::EpochWindow{0.0, 4.0},
      {TrialClass::left, TrialClass::right});
  std::vector<std::size_t> idx;
  for (const auto& name : subset) {
    for (std::size_t c = 0; c < full.channel_names.size(); ++c) {
      if (full.channel_names[c] == name) idx.push_back(c);
    }
  }
  REQUIRE(idx.size() == 2);
  REQUIRE(sel_first.n_trials() == full.n_trials());
  for (std::size_t k = 0; k < full.n_trials(); ++k) {
    for (std::size_t c = 0; c < 2; ++c) {
      CHECK(sel_first.trials[k][c] == full.trials[k][idx[c]]);
    }
  }
}

TEST_CASE("select_channels rejects unknown labels") {
  const auto rec = synth_recording();
  CHECK_THROWS_WITH_AS(dataio::select_channels(rec, {"C3", "Oz"}),
                       doctest::Contains("unknown channel label"),
                       std::runtime_error);
}

TEST_CASE("segment_resting splits 120/120/60 from events") {
  const auto rec = synth_recording();
  const auto seg = dataio::segment_resting(rec);
  CHECK(seg.eyes_open_s == doctest::Approx(120.0));
  CHECK(seg.eyes_closed_s == doctest::Approx(120.0));
  CHECK(seg.eye_movement_s == doctest::Approx(60.0));
  CHECK(seg.eyes_open.n_samples() == 30000);
  CHECK(seg.eyes_closed.n_samples() == 30000);
  CHECK(seg.eye_movement.n_samples() == 15000);
  // Slices are non-overlapping and in session order: check the content of
  // the boundaries against the source recording.
  CHECK(seg.eyes_open.samples[0][0] == rec.samples[0][0]);
  CHECK(seg.eyes_closed.samples[0][0] == rec.samples[0][30000]);
  CHECK(seg.eye_movement.samples[0][0] == rec.samples[0][60000]);
}

TEST_CASE("segment_resting accepts offsets fallback with slack") {
  const auto dir = fresh_dir("offsets");
  auto manifest = basic_manifest(2, 80000);
  manifest["resting_offsets"] = {{"eyes_open_start", 0},
                                 {"eyes_closed_start", 29750},  // 119 s
                                 {"eye_movement_start", 59750}, // +120 s
                                 {"end", 75000}};               // +61 s
  write_raw_archive(dir, manifest, std::vector<float>(160000, 0.0f));
  const auto rec = dataio::load_recording(dir.string());
  const auto seg = dataio::segment_resting(rec);
  CHECK(seg.eyes_open_s == doctest::Approx(119.0));
  CHECK(seg.eyes_closed_s == doctest::Approx(120.0));
  CHECK(seg.eye_movement_s == doctest::Approx(61.0));
}

TEST_CASE("segment_resting rejects out-of-tolerance durations") {
  const auto dir = fresh_dir("outoftol");
  auto manifest = basic_manifest(2, 80000);
  manifest["resting_offsets"] = {{"eyes_open_start", 0},
                                 {"eyes_closed_start", 25000},  // 100 s
                                 {"eye_movement_start", 60000},
                                 {"end", 75000}};
  write_raw_archive(dir, manifest, std::vector<float>(160000, 0.0f));
  const auto rec = dataio::load_recording(dir.string());
  CHECK_THROWS_AS(dataio::segment_resting(rec), std::runtime_error);
  // Without an expectation the same layout is accepted.
  const auto seg = dataio::segment_resting(rec, std::nullopt);
  CHECK(seg.eyes_open_s == doctest::Approx(100.0));
}

TEST_CASE("segment_resting signals a missing resting block") {
  const auto dir = fresh_dir("norest");
  write_raw_archive(dir, basic_manifest(2, 1000),
                    std::vector<float>(2000, 0.0f));
  const auto rec = dataio::load_recording(dir.string());
  CHECK_THROWS_WITH_AS(dataio::segment_resting(rec),
                       doctest::Contains("no resting block"),
                       std::runtime_error);
}

TEST_CASE("truncate_segment takes the prefix") {
  const auto rec = synth_recording();
  const auto seg = dataio::segment_resting(rec).eyes_open;

  const auto first30 = dataio::truncate_segment(seg, 30.0);
  CHECK(first30.n_samples() == 7500);
  for (std::size_t t = 0; t < 7500; ++t) {
    CHECK(first30.samples[0][t] == seg.samples[0][t]);
  }

  // Identity at full length.
  const auto full = dataio::truncate_segment(seg, 120.0);
  CHECK(full.n_samples() == seg.n_samples());

  // Prefix-of-prefix property.
  const auto first60 = dataio::truncate_segment(seg, 60.0);
  for (std::size_t t = 0; t < 7500; ++t) {
    CHECK(first30.samples[1][t] == first60.samples[1][t]);
  }

  CHECK_THROWS_AS(dataio::truncate_segment(seg, 121.0), std::runtime_error);
  CHECK_THROWS_AS(dataio::truncate_segment(seg, 0.0), std::invalid_argument);
}

TEST_CASE("trial class string round-trip") {
  CHECK(dataio::to_string(TrialClass::left) == "left");
  CHECK(dataio::to_string(TrialClass::right) == "right");
  CHECK(dataio::trial_class_from_string("left") == TrialClass::left);
  CHECK(dataio::trial_class_from_string("right") == TrialClass::right);
  CHECK_THROWS_AS(dataio::trial_class_from_string("feet"),
                  std::invalid_argument);
}
