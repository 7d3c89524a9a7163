#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "turnhold/audio.hpp"
#include "turnhold/error.hpp"
#include "turnhold/stats.hpp"
#include "turnhold/stimulus.hpp"
#include "turnhold/vap.hpp"
#include "turnhold/wire.hpp"

namespace turnhold {

enum class PredictorKind { synthetic, stream_file, external_process };

// The synthetic predictor is a CONTROLLABLE TEST ORACLE, not an audio model:
// it reads the stimulus metadata (trailing filler? question end?) and emits
// a sigmoid-shaped hold curve whose midpoint is planted at a configured
// time. It exists so the end-to-end pipeline can be tested against known
// effects; its output says nothing about real speech.
struct SyntheticConfig {
  double base_hold_time = 1.0;     // sigmoid midpoint, seconds after silence onset
  double filler_hold_bonus = 2.0;  // added when the stimulus ends in a filler
  double ynq_shift_time = 0.8;     // midpoint for question-final stimuli
  double decay_rate = 10.0;        // sigmoid steepness, 1/seconds
  std::uint64_t noise_seed = 0;
  double noise_sd = 0.0;             // per-member Gaussian jitter on the midpoint
  double duration_hold_slope = 0.0;  // extra hold per second of trailing filler
  double context_thp = 0.9;
  double frame_rate = 50.0;
};

struct PredictorSpec {
  PredictorKind kind = PredictorKind::synthetic;
  SyntheticConfig synthetic;
  std::string stream_dir;  // stream-file: holds <pair_id>.<kind>.vap files
  std::string command;     // external-process: receives the audio path, "{audio}"
                           // placeholder or appended as the last argument
};

// Turn-shift extraction result: `time` is seconds from silence onset and is
// present exactly when the shift was observed within the horizon.
struct ShiftOutcome {
  std::optional<double> time;
  bool censored = true;
  double horizon = 10.0;
};

// First frame at or after the silence onset whose value drops strictly
// below the threshold; a value of exactly 0.5 keeps the hold. Frame
// granularity, no interpolation.
inline ShiftOutcome turn_shift_time(const THPSeries& series, double silence_onset,
                                    double threshold = 0.5, double horizon = 10.0) {
  if (!(series.frame_rate > 0)) throw UsageError("turn_shift_time: series has no frame rate");
  const auto onset_f =
      static_cast<long long>(std::ceil(silence_onset * series.frame_rate - kTimeEps));
  const long long needed = std::llround(horizon * series.frame_rate);
  if (onset_f < 0 || static_cast<long long>(series.values.size()) < onset_f + needed)
    throw ValidationError("turn_shift_time: series covers " +
                          std::to_string(series.values.size() / series.frame_rate) +
                          "s, need silence onset + horizon");
  ShiftOutcome out;
  out.horizon = horizon;
  for (long long f = onset_f; f < onset_f + needed; ++f) {
    if (series.values[static_cast<std::size_t>(f)] < threshold) {
      out.time = static_cast<double>(f - onset_f) / series.frame_rate;
      out.censored = false;
      return out;
    }
  }
  out.censored = true;
  return out;
}

namespace detail {

inline double synthetic_hold_midpoint(const StimulusMember& m, const SyntheticConfig& cfg) {
  double t_hold = m.is_question_end ? cfg.ynq_shift_time : cfg.base_hold_time;
  if (m.has_trailing_filler)
    t_hold += cfg.filler_hold_bonus + cfg.duration_hold_slope * m.filler_duration;
  if (cfg.noise_sd > 0) {
    std::mt19937_64 rng(fnv1a64(m.pair_id + "/" + m.kind) ^ cfg.noise_seed);
    t_hold += cfg.noise_sd * std_normal(rng);
  }
  return std::max(t_hold, 0.02);
}

inline THPSeries synthetic_predict(const StimulusMember& m, const SyntheticConfig& cfg) {
  if (!(cfg.decay_rate > 0)) throw UsageError("synthetic predictor: decay_rate must be positive");
  const double total = m.silence_onset + m.silence_len;
  const double t_hold = synthetic_hold_midpoint(m, cfg);
  THPSeries series;
  series.frame_rate = cfg.frame_rate;
  series.current_speaker = m.current_speaker;
  const auto n = static_cast<std::size_t>(std::ceil(total * cfg.frame_rate - kTimeEps));
  series.values.resize(n);
  for (std::size_t f = 0; f < n; ++f) {
    const double t = static_cast<double>(f) / cfg.frame_rate;
    if (t < m.silence_onset) {
      series.values[f] = cfg.context_thp;
    } else {
      const double rel = t - m.silence_onset;
      series.values[f] = 1.0 / (1.0 + std::exp(cfg.decay_rate * (rel - t_hold)));
    }
  }
  return series;
}

inline THPSeries series_from_wire(const WireBlock& block, const StimulusMember& m) {
  THPSeries series;
  if (block.thp_only) {
    series.frame_rate = block.frame_rate;
    series.current_speaker = m.current_speaker;
    series.values.assign(block.data.begin(), block.data.end());
  } else {
    series = thp_stream(std::span<const float>(block.data), m.current_speaker,
                        block.frame_rate);
  }
  const double total = m.silence_onset + m.silence_len;
  const auto expected =
      static_cast<long long>(std::ceil(total * block.frame_rate - kTimeEps));
  const auto got = static_cast<long long>(series.values.size());
  if (got < expected || got > expected + std::llround(block.frame_rate))
    throw PredictorError("stream has " + std::to_string(got) + " frames, expected " +
                         std::to_string(expected) + " for a " + std::to_string(total) +
                         "s stimulus");
  return series;
}

inline THPSeries stream_file_predict(const StimulusMember& m, const PredictorSpec& spec) {
  const auto path =
      std::filesystem::path(spec.stream_dir) / (m.pair_id + "." + m.kind + ".vap");
  if (!std::filesystem::exists(path))
    throw PredictorError("no stream file " + path.string());
  try {
    return series_from_wire(read_wire_file(path), m);
  } catch (const DataError& e) {
    throw PredictorError(e.what());
  }
}

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  out += "'";
  return out;
}

inline THPSeries external_predict(const StimulusMember& m, const PredictorSpec& spec) {
  if (spec.command.empty()) throw UsageError("external predictor: no command configured");
  const auto tmp = std::filesystem::temp_directory_path() /
                   ("thp-" + std::to_string(fnv1a64(m.pair_id + "." + m.kind)) + "-" +
                    std::to_string(static_cast<unsigned long>(::getpid())) + ".wav");
  write_wav_stereo(tmp.string(), m.audio);
  std::string cmd = spec.command;
  const auto slot = cmd.find("{audio}");
  if (slot != std::string::npos)
    cmd = cmd.substr(0, slot) + shell_quote(tmp.string()) + cmd.substr(slot + 7);
  else
    cmd += " " + shell_quote(tmp.string());

  std::string bytes;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) {
    std::filesystem::remove(tmp);
    throw PredictorError("cannot launch predictor command");
  }
  char buf[1 << 16];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) bytes.append(buf, got);
  const int status = ::pclose(pipe);
  std::filesystem::remove(tmp);
  if (status != 0)
    throw PredictorError("predictor command exited with status " + std::to_string(status));
  try {
    return series_from_wire(parse_wire(bytes), m);
  } catch (const DataError& e) {
    throw PredictorError(e.what());
  }
}

}  // namespace detail

inline THPSeries predict(const StimulusMember& member, const PredictorSpec& spec) {
  try {
    switch (spec.kind) {
      case PredictorKind::synthetic:
        return detail::synthetic_predict(member, spec.synthetic);
      case PredictorKind::stream_file:
        return detail::stream_file_predict(member, spec);
      case PredictorKind::external_process:
        return detail::external_predict(member, spec);
    }
    throw UsageError("predictor: unknown kind");
  } catch (const PredictorError& e) {
    throw PredictorError(member.pair_id + "." + member.kind + ": " + e.what());
  }
}

inline ShiftOutcome predict_shift(const StimulusMember& member, const PredictorSpec& spec,
                                  double threshold = 0.5) {
  const THPSeries series = predict(member, spec);
  return turn_shift_time(series, member.silence_onset, threshold, member.silence_len);
}

}  // namespace turnhold
