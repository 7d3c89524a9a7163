#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "turnhold/error.hpp"
#include "turnhold/speaker.hpp"

namespace turnhold {

inline constexpr int kNumBins = 4;
inline constexpr int kNumLabels = 256;  // 2 speakers x 4 bins -> 2^8 activity patterns

// Future-window discretization: per speaker, four contiguous bins covering
// a fixed projection horizon. Bin b spans [bin_start(b), bin_end(b)] seconds
// into the future.
struct BinLayout {
  std::array<double, kNumBins> widths;

  static constexpr BinLayout standard() { return BinLayout{{0.2, 0.4, 0.6, 0.8}}; }

  constexpr double bin_start(int b) const {
    double t = 0;
    for (int i = 0; i < b; ++i) t += widths[static_cast<std::size_t>(i)];
    return t;
  }
  constexpr double bin_end(int b) const { return bin_start(b + 1); }
  constexpr double horizon() const { return bin_start(kNumBins); }
};

// bits[speaker][bin]: predicted voice activity per speaker per future bin.
using LabelBits = std::array<std::array<bool, kNumBins>, 2>;

// Speaker A occupies the low nibble (bin 0 = LSB), speaker B the high nibble.
inline constexpr int encode_label(const LabelBits& bits) {
  int idx = 0;
  for (int s = 0; s < 2; ++s)
    for (int b = 0; b < kNumBins; ++b)
      if (bits[static_cast<std::size_t>(s)][static_cast<std::size_t>(b)])
        idx |= 1 << (kNumBins * s + b);
  return idx;
}

inline constexpr LabelBits decode_label(int index) {
  if (index < 0 || index >= kNumLabels)
    throw std::domain_error("projection label index out of range [0, 255]");
  LabelBits bits{};
  for (int s = 0; s < 2; ++s)
    for (int b = 0; b < kNumBins; ++b)
      bits[static_cast<std::size_t>(s)][static_cast<std::size_t>(b)] =
          (index >> (kNumBins * s + b)) & 1;
  return bits;
}

// Swaps the speaker nibbles: the label describing the mirrored dialog.
inline constexpr int swap_speakers(int index) {
  if (index < 0 || index >= kNumLabels)
    throw std::domain_error("projection label index out of range [0, 255]");
  return ((index & 0x0f) << 4) | ((index >> 4) & 0x0f);
}

// A probability distribution over the 256 projection labels.
class LabelDistribution {
 public:
  LabelDistribution() { p_.fill(1.0 / kNumLabels); }

  // Validates and normalizes: tiny negative entries (rounding noise) are
  // clamped to zero, and the vector is rescaled when the total is within
  // 1e-3 of one. Anything worse is rejected.
  explicit LabelDistribution(std::span<const double> probs) {
    if (probs.size() != kNumLabels)
      throw ValidationError("label distribution must have exactly 256 entries, got " +
                            std::to_string(probs.size()));
    double sum = 0;
    for (std::size_t i = 0; i < kNumLabels; ++i) {
      double v = probs[i];
      if (!std::isfinite(v)) throw ValidationError("label distribution has a non-finite entry");
      if (v < 0) {
        if (v < -1e-9)
          throw ValidationError("label distribution has a negative probability");
        v = 0;
      }
      p_[i] = v;
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-3)
      throw ValidationError("label distribution sums to " + std::to_string(sum) +
                            ", expected 1 within 1e-3");
    if (std::abs(sum - 1.0) > 1e-6) {
      for (auto& v : p_) v /= sum;
    }
  }

  static LabelDistribution point_mass(int label) {
    if (label < 0 || label >= kNumLabels)
      throw std::domain_error("projection label index out of range [0, 255]");
    LabelDistribution d;
    d.p_.fill(0.0);
    d.p_[static_cast<std::size_t>(label)] = 1.0;
    return d;
  }

  double operator[](std::size_t i) const { return p_[i]; }
  const std::array<double, kNumLabels>& probs() const { return p_; }

 private:
  std::array<double, kNumLabels> p_;
};

namespace detail {

// Per-label weight: total predicted speech time for `s` within the region of
// interest, i.e. the summed widths of s's active bins that end by `roi`.
inline constexpr double roi_weight(int label, int s, double roi, const BinLayout& layout) {
  double w = 0;
  for (int b = 0; b < kNumBins; ++b) {
    if (layout.bin_end(b) > roi + 1e-9) break;
    if ((label >> (kNumBins * s + b)) & 1) w += layout.widths[static_cast<std::size_t>(b)];
  }
  return w;
}

inline void check_roi(double roi, const BinLayout& layout) {
  for (int b = 0; b < kNumBins; ++b)
    if (std::abs(layout.bin_end(b) - roi) <= 1e-9) return;
  throw std::domain_error("region of interest must coincide with a bin boundary");
}

}  // namespace detail

// Turn-hold probability: of the expected near-future speech mass (within
// `roi` seconds), the fraction attributed to the current speaker. Labels
// predicting silence from both parties contribute to neither side; if no
// mass predicts any speech at all the result is an uninformative 0.5.
inline double thp(const LabelDistribution& dist, Speaker current, double roi = 0.6,
                  const BinLayout& layout = BinLayout::standard()) {
  detail::check_roi(roi, layout);
  const int cur = index(current);
  const int oth = 1 - cur;
  double num = 0, den = 0;
  for (int l = 0; l < kNumLabels; ++l) {
    const double p = dist[static_cast<std::size_t>(l)];
    if (p <= 0) continue;
    const double wc = detail::roi_weight(l, cur, roi, layout);
    const double wo = detail::roi_weight(l, oth, roi, layout);
    num += p * wc;
    den += p * (wc + wo);
  }
  if (den <= 0) return 0.5;
  return num / den;
}

// A per-frame turn-hold probability track for one fixed current speaker.
struct THPSeries {
  double frame_rate = 0;
  Speaker current_speaker = Speaker::A;
  std::vector<double> values;

  std::size_t frame_count() const { return values.size(); }
  double duration() const { return frame_rate > 0 ? values.size() / frame_rate : 0.0; }
};

inline THPSeries thp_stream(std::span<const LabelDistribution> dists, Speaker current,
                            double frame_rate, double roi = 0.6,
                            const BinLayout& layout = BinLayout::standard()) {
  if (dists.empty()) throw ValidationError("thp_stream: empty distribution sequence");
  if (!(frame_rate > 0)) throw UsageError("thp_stream: frame_rate must be positive");
  THPSeries out;
  out.frame_rate = frame_rate;
  out.current_speaker = current;
  out.values.reserve(dists.size());
  for (const auto& d : dists) out.values.push_back(thp(d, current, roi, layout));
  return out;
}

// Raw-floats overload for wire data: `probs` holds n_frames contiguous
// 256-entry rows. Each row is validated; a bad row reports its frame index.
inline THPSeries thp_stream(std::span<const float> probs, Speaker current, double frame_rate,
                            double roi = 0.6, const BinLayout& layout = BinLayout::standard()) {
  if (probs.empty()) throw ValidationError("thp_stream: empty distribution sequence");
  if (probs.size() % kNumLabels != 0)
    throw ValidationError("thp_stream: buffer size " + std::to_string(probs.size()) +
                          " is not a multiple of 256");
  if (!(frame_rate > 0)) throw UsageError("thp_stream: frame_rate must be positive");
  THPSeries out;
  out.frame_rate = frame_rate;
  out.current_speaker = current;
  const std::size_t n = probs.size() / kNumLabels;
  out.values.reserve(n);
  std::array<double, kNumLabels> row;
  for (std::size_t f = 0; f < n; ++f) {
    for (std::size_t l = 0; l < kNumLabels; ++l)
      row[l] = static_cast<double>(probs[f * kNumLabels + l]);
    try {
      const LabelDistribution d{std::span<const double>(row)};
      out.values.push_back(thp(d, current, roi, layout));
    } catch (const ValidationError& e) {
      throw ValidationError("frame " + std::to_string(f) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace turnhold
