// Epoch-archive loading, cue-aligned epoch extraction and resting-state
// segmentation. An archive is a directory holding manifest.json plus a
// float32 little-endian channel-major payload.
#ifndef RESTCAL_DATAIO_HPP
#define RESTCAL_DATAIO_HPP

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "restcal/dsp.hpp"

namespace restcal::dataio {

using dsp::MultiChannel;
using dsp::Samples;

enum class TrialClass : std::uint8_t { left, right };

std::string to_string(TrialClass c);
TrialClass trial_class_from_string(const std::string& s);

// Event codes understood by the pipeline.
inline constexpr const char* kCueLeft = "cue_left";
inline constexpr const char* kCueRight = "cue_right";
inline constexpr const char* kRestEyesOpenStart = "rest_eo_start";
inline constexpr const char* kRestEyesClosedStart = "rest_ec_start";
inline constexpr const char* kRestEyeMovementStart = "rest_em_start";
inline constexpr const char* kRestEnd = "rest_end";

struct EventMarker {
  std::int64_t sample = 0;
  std::string code;
};

struct ChannelLayout {
  std::vector<std::string> names;     // every channel in the payload
  std::vector<std::string> selected;  // ordered subset used by the pipeline

  std::size_t index_of(const std::string& name) const;  // throws if missing
};

// The 11 sensorimotor electrodes the pipeline runs on.
const std::vector<std::string>& standard_selected_channels();

// Sample offsets of the session-start resting block, used when the
// archive carries no boundary events.
struct RestingOffsets {
  std::int64_t eyes_open_start = 0;
  std::int64_t eyes_closed_start = 0;
  std::int64_t eye_movement_start = 0;
  std::int64_t end = 0;
};

struct ContinuousRecording {
  std::string subject_id;
  double sample_rate_hz = 0.0;
  ChannelLayout channels;
  MultiChannel samples;  // aligned with channels.names
  std::vector<EventMarker> events;
  std::optional<RestingOffsets> resting_offsets;

  std::size_t n_samples() const {
    return samples.empty() ? 0 : samples.front().size();
  }
  double duration_s() const {
    return sample_rate_hz > 0.0
               ? static_cast<double>(n_samples()) / sample_rate_hz
               : 0.0;
  }
};

struct EpochWindow {
  double start_s = 0.0;  // relative to cue onset
  double end_s = 4.0;
};

struct TrialEpochSet {
  std::vector<MultiChannel> trials;  // each: selected channels x samples
  std::vector<TrialClass> labels;
  EpochWindow window;
  std::string subject_id;
  double sample_rate_hz = 0.0;
  std::vector<std::string> channel_names;

  std::size_t n_trials() const { return trials.size(); }
  std::size_t samples_per_trial() const {
    return trials.empty() || trials.front().empty()
               ? 0
               : trials.front().front().size();
  }
};

struct RestingSegments {
  ContinuousRecording eyes_open;
  ContinuousRecording eyes_closed;
  ContinuousRecording eye_movement;
  double eyes_open_s = 0.0;
  double eyes_closed_s = 0.0;
  double eye_movement_s = 0.0;
};

// Nominal protocol durations with the accepted slack.
struct RestingExpectation {
  double eyes_open_s = 120.0;
  double eyes_closed_s = 120.0;
  double eye_movement_s = 60.0;
  double slack_s = 2.0;
};

// Reads manifest.json + payload from the archive directory. Throws
// std::runtime_error on missing manifest, payload shape mismatch or
// out-of-range events.
ContinuousRecording load_recording(const std::string& archive_dir);

// Writes a recording in the archive format. Samples are stored as
// float32, so exact round-trips require float-representable values.
void write_archive(const ContinuousRecording& rec,
                   const std::string& archive_dir);

// Restricts a recording to the named channels, in the given order.
ContinuousRecording select_channels(const ContinuousRecording& rec,
                                    const std::vector<std::string>& names);

// Contiguous sub-recording [start_sample, start_sample + count).
ContinuousRecording slice_recording(const ContinuousRecording& rec,
                                    std::int64_t start_sample,
                                    std::int64_t count);

// One epoch per admitted cue event; epoch data comes from the selected
// channels. Throws when no event matches or a window leaves the signal.
TrialEpochSet extract_epochs(const ContinuousRecording& rec,
                             const EpochWindow& window,
                             const std::set<TrialClass>& class_filter);

// Splits the session-start resting block into eyes-open / eyes-closed /
// eye-movement. Boundary events are preferred; manifest offsets are the
// fallback. Throws "no resting block" when neither exists.
RestingSegments segment_resting(
    const ContinuousRecording& rec,
    const std::optional<RestingExpectation>& expect = RestingExpectation{});

// First duration_s seconds of a segment (prefix rule).
ContinuousRecording truncate_segment(const ContinuousRecording& seg,
                                     double duration_s);

// Human-readable archive summary for the CLI.
std::string describe_recording(const ContinuousRecording& rec);

}  // namespace restcal::dataio

#endif  // RESTCAL_DATAIO_HPP
