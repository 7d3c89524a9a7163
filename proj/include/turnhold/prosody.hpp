#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "turnhold/audio.hpp"
#include "turnhold/error.hpp"
#include "turnhold/stimulus.hpp"

namespace turnhold {

struct ProsodyConfig {
  double frame_len = 0.025;        // seconds
  double hop = 0.010;              // seconds
  double f0_min = 50.0;            // Hz
  double f0_max = 400.0;           // Hz
  double voicing_threshold = 0.45; // normalized autocorrelation peak
  double rms_floor = 1e-4;         // frames quieter than this are unvoiced
};

// Location/scale used for covariate standardization: sample (n-1) statistics.
struct StandardizationStats {
  double mean = 0;
  double sd = 0;  // sample standard deviation
  std::size_t n = 0;
};

struct CovariateVector {
  double f0_std = 0;
  double intensity_std = 0;
  double log_duration_std = 0;
  double lex_um = 0;   // 1 when the token is "um"
  double pos_mid = 0;  // 1 when act-internal (reference level: act-initial)
  double f0_x_lexum = 0;
};

inline StandardizationStats standardization_stats(std::span<const double> values,
                                                  const std::string& group = "") {
  const std::string tag = group.empty() ? std::string() : " for group " + group;
  if (values.size() < 2)
    throw ValidationError("standardization needs at least 2 values" + tag);
  StandardizationStats s;
  s.n = values.size();
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(s.n);
  double ss = 0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  if (!(s.sd > 0)) throw ValidationError("zero variance" + tag);
  return s;
}

// Gelman-style scaling: center, then divide by TWO standard deviations, so
// a one-unit change is comparable to a binary predictor's two levels.
inline double apply_standardization(double x, const StandardizationStats& s) {
  return (x - s.mean) / (2.0 * s.sd);
}

inline std::vector<double> standardize(std::span<const double> values,
                                       const std::string& group = "") {
  const auto s = standardization_stats(values, group);
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(apply_standardization(v, s));
  return out;
}

namespace detail {

inline double frame_rms(std::span<const float> x) {
  double ss = 0;
  for (float v : x) ss += static_cast<double>(v) * v;
  return std::sqrt(ss / static_cast<double>(x.size()));
}

// Normalized cross-correlation at integer lag: invariant to amplitude and
// robust to window truncation (a clean periodic signal scores ~1 at its
// period regardless of how many cycles fit the frame).
inline double ncc_at(std::span<const float> x, std::size_t lag) {
  const std::size_t n = x.size() - lag;
  double num = 0, e0 = 0, e1 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = x[i];
    const double b = x[i + lag];
    num += a * b;
    e0 += a * a;
    e1 += b * b;
  }
  const double den = std::sqrt(e0 * e1);
  return den > 0 ? num / den : 0.0;
}

struct FramePitch {
  bool voiced = false;
  double f0 = 0;  // Hz
};

inline FramePitch frame_pitch(std::span<const float> frame, int sample_rate,
                              const ProsodyConfig& cfg) {
  FramePitch out;
  // Remove DC so silence-adjacent offsets don't masquerade as periodicity.
  std::vector<float> x(frame.begin(), frame.end());
  double mean = 0;
  for (float v : x) mean += v;
  mean /= static_cast<double>(x.size());
  for (auto& v : x) v = static_cast<float>(v - mean);
  if (frame_rms(x) < cfg.rms_floor) return out;

  const auto lag_min =
      static_cast<std::size_t>(std::ceil(sample_rate / cfg.f0_max - kTimeEps));
  auto lag_max = static_cast<std::size_t>(std::floor(sample_rate / cfg.f0_min + kTimeEps));
  lag_max = std::min(lag_max, x.size() - 1);
  if (lag_min < 1 || lag_min >= lag_max) return out;

  std::vector<double> r(lag_max + 1, 0.0);
  double best = -1;
  for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
    r[lag] = ncc_at(x, lag);
    best = std::max(best, r[lag]);
  }
  if (best < cfg.voicing_threshold) return out;

  // Octave-error guard: of all local maxima nearly as strong as the global
  // one, take the SHORTEST lag (highest candidate frequency).
  std::size_t pick = 0;
  for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
    const double left = lag > lag_min ? r[lag - 1] : -2;
    const double right = lag < lag_max ? r[lag + 1] : -2;
    if (r[lag] >= left && r[lag] >= right && r[lag] >= 0.9 * best) {
      pick = lag;
      break;
    }
  }
  if (pick == 0) return out;

  double lag_ref = static_cast<double>(pick);
  if (pick > lag_min && pick < lag_max) {
    const double denom = r[pick - 1] - 2 * r[pick] + r[pick + 1];
    if (std::abs(denom) > 1e-12) {
      const double delta = 0.5 * (r[pick - 1] - r[pick + 1]) / denom;
      if (std::abs(delta) < 1) lag_ref += delta;
    }
  }
  out.voiced = true;
  out.f0 = sample_rate / lag_ref;
  return out;
}

template <typename Fn>
inline void for_each_frame(std::span<const float> segment, int sample_rate,
                           const ProsodyConfig& cfg, Fn&& fn) {
  const auto frame_n = static_cast<std::size_t>(std::llround(cfg.frame_len * sample_rate));
  const auto hop_n = static_cast<std::size_t>(std::llround(cfg.hop * sample_rate));
  if (frame_n == 0 || hop_n == 0 || hop_n > frame_n)
    throw UsageError("prosody: invalid frame/hop configuration");
  if (segment.size() < frame_n)
    throw ValidationError("prosody: segment shorter than one analysis frame");
  for (std::size_t off = 0; off + frame_n <= segment.size(); off += hop_n)
    fn(segment.subspan(off, frame_n));
}

}  // namespace detail

// Mean F0 over voiced frames, in semitones re 1 Hz (12*log2 of Hz); absent
// when no frame passes the voicing gate.
inline std::optional<double> estimate_f0(std::span<const float> segment, int sample_rate,
                                         const ProsodyConfig& cfg = {}) {
  double sum = 0;
  std::size_t voiced = 0;
  detail::for_each_frame(segment, sample_rate, cfg, [&](std::span<const float> frame) {
    const auto fp = detail::frame_pitch(frame, sample_rate, cfg);
    if (fp.voiced) {
      sum += 12.0 * std::log2(fp.f0);
      ++voiced;
    }
  });
  if (voiced == 0) return std::nullopt;
  return sum / static_cast<double>(voiced);
}

// Mean frame intensity in dB re full scale; the epsilon keeps all-zero
// frames finite.
inline double mean_intensity(std::span<const float> segment, int sample_rate,
                             const ProsodyConfig& cfg = {}) {
  double sum = 0;
  std::size_t count = 0;
  detail::for_each_frame(segment, sample_rate, cfg, [&](std::span<const float> frame) {
    sum += 20.0 * std::log10(detail::frame_rms(frame) + 1e-10);
    ++count;
  });
  return sum / static_cast<double>(count);
}

// Raw (pre-standardization) measurements for one filler candidate.
struct RawProsody {
  std::optional<double> f0_semitones;
  double intensity_db = 0;
  double log_duration = 0;
  bool lex_um = false;
  bool pos_mid = false;
};

inline RawProsody measure_filler(const FillerCandidate& filler, const AudioChannelPair& audio,
                                 const ProsodyConfig& cfg = {}) {
  const auto& ch = audio.of(filler.speaker);
  const auto b = static_cast<std::size_t>(
      std::max(0ll, std::llround(filler.start * audio.sample_rate)));
  const auto e = std::min(ch.size(), static_cast<std::size_t>(std::max(
                                         0ll, std::llround(filler.end * audio.sample_rate))));
  if (e <= b) throw ValidationError("filler interval lies outside the session audio");
  const std::span<const float> seg(ch.data() + b, e - b);
  RawProsody raw;
  raw.f0_semitones = estimate_f0(seg, audio.sample_rate, cfg);
  raw.intensity_db = mean_intensity(seg, audio.sample_rate, cfg);
  raw.log_duration = std::log(filler.duration());
  raw.lex_um = filler.lexical_form == "um";
  raw.pos_mid = filler.position == FillerPosition::mid;
  return raw;
}

// Standardization context for covariate assembly: pitch and intensity stats
// must be the ones for this candidate's group (speaker within session);
// duration stats are population-global.
struct CovariateStats {
  StandardizationStats f0;
  StandardizationStats intensity;
  StandardizationStats log_duration;
};

// Missing F0 (all-unvoiced token) yields nullopt: the candidate is excluded
// from regression rather than imputed.
inline std::optional<CovariateVector> extract_covariates(const RawProsody& raw,
                                                         const CovariateStats& stats) {
  if (!raw.f0_semitones) return std::nullopt;
  CovariateVector v;
  v.f0_std = apply_standardization(*raw.f0_semitones, stats.f0);
  v.intensity_std = apply_standardization(raw.intensity_db, stats.intensity);
  v.log_duration_std = apply_standardization(raw.log_duration, stats.log_duration);
  v.lex_um = raw.lex_um ? 1.0 : 0.0;
  v.pos_mid = raw.pos_mid ? 1.0 : 0.0;
  v.f0_x_lexum = v.f0_std * v.lex_um;
  return v;
}

inline std::optional<CovariateVector> extract_covariates(const FillerCandidate& filler,
                                                         const AudioChannelPair& audio,
                                                         const CovariateStats& stats,
                                                         const ProsodyConfig& cfg = {}) {
  return extract_covariates(measure_filler(filler, audio, cfg), stats);
}

}  // namespace turnhold
