#include "restcal/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace restcal::dataio {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(TrialClass c) {
  return c == TrialClass::left ? "left" : "right";
}

TrialClass trial_class_from_string(const std::string& s) {
  if (s == "left") return TrialClass::left;
  if (s == "right") return TrialClass::right;
  throw std::invalid_argument("unknown trial class: " + s);
}

const std::vector<std::string>& standard_selected_channels() {
  static const std::vector<std::string> kChannels = {
      "FC3", "FC4", "C5", "C3", "C1", "Cz", "C2", "C4", "C6", "CP3", "CP4"};
  return kChannels;
}

std::size_t ChannelLayout::index_of(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    throw std::runtime_error("unknown channel label: " + name);
  }
  return static_cast<std::size_t>(it - names.begin());
}

namespace {

constexpr const char* kManifestName = "manifest.json";
constexpr const char* kPayloadName = "signal.f32";
constexpr const char* kFormatTag = "restcal-epoch-archive";

std::vector<std::string> default_selection(
    const std::vector<std::string>& names) {
  const auto& standard = standard_selected_channels();
  const bool all_present = std::all_of(
      standard.begin(), standard.end(), [&names](const std::string& s) {
        return std::find(names.begin(), names.end(), s) != names.end();
      });
  return all_present ? standard : names;
}

void encode_f32_le(float v, unsigned char* out) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  out[0] = static_cast<unsigned char>(bits & 0xFF);
  out[1] = static_cast<unsigned char>((bits >> 8) & 0xFF);
  out[2] = static_cast<unsigned char>((bits >> 16) & 0xFF);
  out[3] = static_cast<unsigned char>((bits >> 24) & 0xFF);
}

float decode_f32_le(const unsigned char* in) {
  const std::uint32_t bits = static_cast<std::uint32_t>(in[0]) |
                             (static_cast<std::uint32_t>(in[1]) << 8) |
                             (static_cast<std::uint32_t>(in[2]) << 16) |
                             (static_cast<std::uint32_t>(in[3]) << 24);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace

ContinuousRecording load_recording(const std::string& archive_dir) {
  const fs::path dir(archive_dir);
  const fs::path manifest_path = dir / kManifestName;
  std::ifstream mf(manifest_path);
  if (!mf) {
    throw std::runtime_error("missing manifest: " + manifest_path.string());
  }
  json manifest;
  try {
    mf >> manifest;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("manifest parse error in " +
                             manifest_path.string() + ": " + e.what());
  }
  if (manifest.value("format", "") != kFormatTag) {
    throw std::runtime_error("not an epoch archive: " +
                             manifest_path.string());
  }

  ContinuousRecording rec;
  rec.subject_id = manifest.at("subject_id").get<std::string>();
  rec.sample_rate_hz = manifest.at("sample_rate_hz").get<double>();
  if (!(rec.sample_rate_hz > 0.0)) {
    throw std::runtime_error("sample_rate_hz must be positive");
  }
  rec.channels.names =
      manifest.at("channels").get<std::vector<std::string>>();
  if (rec.channels.names.empty()) {
    throw std::runtime_error("archive declares no channels");
  }
  rec.channels.selected = default_selection(rec.channels.names);

  const json& payload = manifest.at("payload");
  const std::string dtype = payload.at("dtype").get<std::string>();
  if (dtype != "float32_le") {
    throw std::runtime_error("unsupported payload dtype: " + dtype);
  }
  const std::string order = payload.value("order", "channel_major");
  if (order != "channel_major") {
    throw std::runtime_error("unsupported payload order: " + order);
  }
  const auto samples_per_channel =
      payload.at("samples_per_channel").get<std::int64_t>();
  if (samples_per_channel < 0) {
    throw std::runtime_error("negative samples_per_channel");
  }
  const fs::path payload_path =
      dir / payload.value("file", std::string(kPayloadName));

  std::ifstream pf(payload_path, std::ios::binary);
  if (!pf) {
    throw std::runtime_error("missing payload: " + payload_path.string());
  }
  pf.seekg(0, std::ios::end);
  const std::int64_t byte_count = static_cast<std::int64_t>(pf.tellg());
  pf.seekg(0, std::ios::beg);
  const std::int64_t expected =
      static_cast<std::int64_t>(rec.channels.names.size()) *
      samples_per_channel * 4;
  if (byte_count != expected) {
    std::ostringstream msg;
    msg << "payload shape mismatch: " << payload_path.string() << " has "
        << byte_count << " bytes, manifest declares " << expected;
    throw std::runtime_error(msg.str());
  }

  std::vector<unsigned char> raw(static_cast<std::size_t>(byte_count));
  pf.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (!pf) {
    throw std::runtime_error("payload read failed: " + payload_path.string());
  }

  const auto n = static_cast<std::size_t>(samples_per_channel);
  rec.samples.assign(rec.channels.names.size(), Samples(n));
  std::size_t pos = 0;
  for (auto& ch : rec.samples) {
    for (std::size_t i = 0; i < n; ++i, pos += 4) {
      ch[i] = static_cast<double>(decode_f32_le(raw.data() + pos));
    }
  }

  if (manifest.contains("events")) {
    for (const json& ev : manifest.at("events")) {
      EventMarker m;
      m.sample = ev.at("sample").get<std::int64_t>();
      m.code = ev.at("code").get<std::string>();
      if (m.sample < 0 || m.sample >= samples_per_channel) {
        std::ostringstream msg;
        msg << "event '" << m.code << "' at sample " << m.sample
            << " outside signal of length " << samples_per_channel;
        throw std::runtime_error(msg.str());
      }
      rec.events.push_back(std::move(m));
    }
  }

  if (manifest.contains("resting_offsets") &&
      !manifest.at("resting_offsets").is_null()) {
    const json& ro = manifest.at("resting_offsets");
    RestingOffsets offsets;
    offsets.eyes_open_start = ro.at("eyes_open_start").get<std::int64_t>();
    offsets.eyes_closed_start =
        ro.at("eyes_closed_start").get<std::int64_t>();
    offsets.eye_movement_start =
        ro.at("eye_movement_start").get<std::int64_t>();
    offsets.end = ro.at("end").get<std::int64_t>();
    rec.resting_offsets = offsets;
  }
  return rec;
}

void write_archive(const ContinuousRecording& rec,
                   const std::string& archive_dir) {
  if (rec.samples.size() != rec.channels.names.size()) {
    throw std::invalid_argument("write_archive: channel count mismatch");
  }
  const std::size_t n = rec.n_samples();
  for (const auto& ch : rec.samples) {
    if (ch.size() != n) {
      throw std::invalid_argument("write_archive: unequal channel lengths");
    }
  }

  const fs::path dir(archive_dir);
  fs::create_directories(dir);

  json manifest;
  manifest["format"] = kFormatTag;
  manifest["version"] = 1;
  manifest["subject_id"] = rec.subject_id;
  manifest["sample_rate_hz"] = rec.sample_rate_hz;
  manifest["channels"] = rec.channels.names;
  manifest["payload"] = {{"file", kPayloadName},
                         {"dtype", "float32_le"},
                         {"order", "channel_major"},
                         {"samples_per_channel", n}};
  json events = json::array();
  for (const auto& ev : rec.events) {
    events.push_back({{"sample", ev.sample}, {"code", ev.code}});
  }
  manifest["events"] = events;
  if (rec.resting_offsets) {
    manifest["resting_offsets"] = {
        {"eyes_open_start", rec.resting_offsets->eyes_open_start},
        {"eyes_closed_start", rec.resting_offsets->eyes_closed_start},
        {"eye_movement_start", rec.resting_offsets->eye_movement_start},
        {"end", rec.resting_offsets->end}};
  }

  std::ofstream mf(dir / kManifestName);
  if (!mf) {
    throw std::runtime_error("cannot write manifest under " + dir.string());
  }
  mf << manifest.dump(2) << '\n';

  std::vector<unsigned char> raw(rec.samples.size() * n * 4);
  std::size_t pos = 0;
  for (const auto& ch : rec.samples) {
    for (double v : ch) {
      encode_f32_le(static_cast<float>(v), raw.data() + pos);
      pos += 4;
    }
  }
  std::ofstream pf(dir / kPayloadName, std::ios::binary);
  if (!pf) {
    throw std::runtime_error("cannot write payload under " + dir.string());
  }
  pf.write(reinterpret_cast<const char*>(raw.data()),
           static_cast<std::streamsize>(raw.size()));
}

ContinuousRecording select_channels(const ContinuousRecording& rec,
                                    const std::vector<std::string>& names) {
  ContinuousRecording out;
  out.subject_id = rec.subject_id;
  out.sample_rate_hz = rec.sample_rate_hz;
  out.events = rec.events;
  out.resting_offsets = rec.resting_offsets;
  out.channels.names = names;
  out.channels.selected = names;
  out.samples.reserve(names.size());
  for (const auto& name : names) {
    out.samples.push_back(rec.samples[rec.channels.index_of(name)]);
  }
  return out;
}

ContinuousRecording slice_recording(const ContinuousRecording& rec,
                                    std::int64_t start_sample,
                                    std::int64_t count) {
  const auto n = static_cast<std::int64_t>(rec.n_samples());
  if (start_sample < 0 || count < 0 || start_sample + count > n) {
    throw std::out_of_range("slice_recording: range outside signal");
  }
  ContinuousRecording out;
  out.subject_id = rec.subject_id;
  out.sample_rate_hz = rec.sample_rate_hz;
  out.channels = rec.channels;
  out.samples.reserve(rec.samples.size());
  for (const auto& ch : rec.samples) {
    out.samples.emplace_back(ch.begin() + start_sample,
                             ch.begin() + start_sample + count);
  }
  return out;
}

TrialEpochSet extract_epochs(const ContinuousRecording& rec,
                             const EpochWindow& window,
                             const std::set<TrialClass>& class_filter) {
  if (!(window.end_s > window.start_s)) {
    throw std::invalid_argument("extract_epochs: empty window");
  }
  const double fs = rec.sample_rate_hz;
  const auto offset =
      static_cast<std::int64_t>(std::llround(window.start_s * fs));
  const auto count = static_cast<std::int64_t>(
      std::llround((window.end_s - window.start_s) * fs));
  if (count < 1) {
    throw std::invalid_argument("extract_epochs: window shorter than 1 sample");
  }

  TrialEpochSet out;
  out.window = window;
  out.subject_id = rec.subject_id;
  out.sample_rate_hz = fs;
  out.channel_names = rec.channels.selected;

  std::vector<std::size_t> selected_idx;
  selected_idx.reserve(rec.channels.selected.size());
  for (const auto& name : rec.channels.selected) {
    selected_idx.push_back(rec.channels.index_of(name));
  }

  const auto n = static_cast<std::int64_t>(rec.n_samples());
  for (const auto& ev : rec.events) {
    TrialClass cls;
    if (ev.code == kCueLeft) {
      cls = TrialClass::left;
    } else if (ev.code == kCueRight) {
      cls = TrialClass::right;
    } else {
      continue;
    }
    if (!class_filter.contains(cls)) continue;
    const std::int64_t start = ev.sample + offset;
    if (start < 0 || start + count > n) {
      std::ostringstream msg;
      msg << "epoch window [" << start << ", " << start + count
          << ") leaves recording of length " << n;
      throw std::runtime_error(msg.str());
    }
    MultiChannel epoch;
    epoch.reserve(selected_idx.size());
    for (std::size_t ci : selected_idx) {
      const auto& ch = rec.samples[ci];
      epoch.emplace_back(ch.begin() + start, ch.begin() + start + count);
    }
    out.trials.push_back(std::move(epoch));
    out.labels.push_back(cls);
  }
  if (out.trials.empty()) {
    throw std::runtime_error("extract_epochs: no matching cue events");
  }
  return out;
}

RestingSegments segment_resting(
    const ContinuousRecording& rec,
    const std::optional<RestingExpectation>& expect) {
  std::int64_t eo = -1, ec = -1, em = -1, end = -1;
  for (const auto& ev : rec.events) {
    if (ev.code == kRestEyesOpenStart) eo = ev.sample;
    if (ev.code == kRestEyesClosedStart) ec = ev.sample;
    if (ev.code == kRestEyeMovementStart) em = ev.sample;
    if (ev.code == kRestEnd) end = ev.sample;
  }
  const bool have_events = eo >= 0 && ec >= 0 && em >= 0 && end >= 0;
  if (!have_events && rec.resting_offsets) {
    eo = rec.resting_offsets->eyes_open_start;
    ec = rec.resting_offsets->eyes_closed_start;
    em = rec.resting_offsets->eye_movement_start;
    end = rec.resting_offsets->end;
  }
  if (eo < 0 || ec < 0 || em < 0 || end < 0) {
    throw std::runtime_error("no resting block in recording of subject " +
                             rec.subject_id);
  }
  if (!(eo < ec && ec < em && em < end) ||
      end > static_cast<std::int64_t>(rec.n_samples())) {
    throw std::runtime_error("resting block boundaries out of order");
  }

  RestingSegments out;
  out.eyes_open = slice_recording(rec, eo, ec - eo);
  out.eyes_closed = slice_recording(rec, ec, em - ec);
  out.eye_movement = slice_recording(rec, em, end - em);
  out.eyes_open_s = static_cast<double>(ec - eo) / rec.sample_rate_hz;
  out.eyes_closed_s = static_cast<double>(em - ec) / rec.sample_rate_hz;
  out.eye_movement_s = static_cast<double>(end - em) / rec.sample_rate_hz;

  if (expect) {
    auto check = [&expect](double actual, double nominal, const char* name) {
      if (std::abs(actual - nominal) > expect->slack_s) {
        std::ostringstream msg;
        msg << "resting segment '" << name << "' lasts " << actual
            << " s, expected " << nominal << " +/- " << expect->slack_s;
        throw std::runtime_error(msg.str());
      }
    };
    check(out.eyes_open_s, expect->eyes_open_s, "eyes_open");
    check(out.eyes_closed_s, expect->eyes_closed_s, "eyes_closed");
    check(out.eye_movement_s, expect->eye_movement_s, "eye_movement");
  }
  return out;
}

ContinuousRecording truncate_segment(const ContinuousRecording& seg,
                                     double duration_s) {
  if (!(duration_s > 0.0)) {
    throw std::invalid_argument("truncate_segment: duration must be positive");
  }
  const auto count =
      static_cast<std::int64_t>(std::llround(duration_s * seg.sample_rate_hz));
  if (count > static_cast<std::int64_t>(seg.n_samples())) {
    std::ostringstream msg;
    msg << "truncate_segment: requested " << duration_s
        << " s from a segment of " << seg.duration_s() << " s";
    throw std::runtime_error(msg.str());
  }
  return slice_recording(seg, 0, count);
}

std::string describe_recording(const ContinuousRecording& rec) {
  std::ostringstream os;
  os << "subject " << rec.subject_id << ", " << rec.channels.names.size()
     << " channels @ " << rec.sample_rate_hz << " Hz, " << rec.n_samples()
     << " samples (" << rec.duration_s() << " s)\n";
  os << "selected channels:";
  for (const auto& c : rec.channels.selected) os << ' ' << c;
  os << '\n';
  std::map<std::string, int> counts;
  for (const auto& ev : rec.events) counts[ev.code]++;
  os << "events:";
  if (counts.empty()) os << " none";
  for (const auto& [code, cnt] : counts) os << ' ' << code << "=" << cnt;
  os << '\n';
  if (rec.resting_offsets) {
    os << "resting offsets: eo=" << rec.resting_offsets->eyes_open_start
       << " ec=" << rec.resting_offsets->eyes_closed_start
       << " em=" << rec.resting_offsets->eye_movement_start
       << " end=" << rec.resting_offsets->end << '\n';
  }
  return os.str();
}

}  // namespace restcal::dataio
