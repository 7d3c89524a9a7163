#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <random>

#include "turnhold/stats.hpp"
#include "turnhold/vap.hpp"

using namespace turnhold;
using Catch::Approx;

TEST_CASE("label codec round trip") {
  for (int l = 0; l < kNumLabels; ++l) {
    const LabelBits bits = decode_label(l);
    CHECK(encode_label(bits) == l);
  }
  CHECK_THROWS_AS(decode_label(-1), std::domain_error);
  CHECK_THROWS_AS(decode_label(256), std::domain_error);
}

TEST_CASE("bit layout: speaker A low nibble, bin 0 least significant") {
  const LabelBits bits = decode_label(0x12);  // A bin 1, B bin 0
  CHECK(bits[0][1]);
  CHECK(bits[1][0]);
  CHECK_FALSE(bits[0][0]);
  CHECK_FALSE(bits[1][1]);
}

TEST_CASE("speaker swap is a nibble swap and an involution") {
  CHECK(swap_speakers(0x0f) == 0xf0);
  CHECK(swap_speakers(0x12) == 0x21);
  for (int l = 0; l < kNumLabels; ++l) {
    CHECK(swap_speakers(swap_speakers(l)) == l);
    const LabelBits orig = decode_label(l);
    const LabelBits swapped = decode_label(swap_speakers(l));
    for (int b = 0; b < kNumBins; ++b) {
      CHECK(orig[0][static_cast<std::size_t>(b)] == swapped[1][static_cast<std::size_t>(b)]);
      CHECK(orig[1][static_cast<std::size_t>(b)] == swapped[0][static_cast<std::size_t>(b)]);
    }
  }
}

TEST_CASE("bin layout boundaries") {
  const auto& layout = BinLayout::standard();
  CHECK(layout.bin_start(0) == Approx(0.0));
  CHECK(layout.bin_end(0) == Approx(0.2));
  CHECK(layout.bin_end(1) == Approx(0.6));
  CHECK(layout.bin_end(2) == Approx(1.2));
  CHECK(layout.bin_end(3) == Approx(2.0));
  CHECK(layout.horizon() == Approx(2.0));
}

TEST_CASE("turn-hold probability point cases") {
  // current speaker active everywhere, listener silent
  CHECK(thp(LabelDistribution::point_mass(15), Speaker::A) == 1.0);
  // nobody projected active: convention 0.5
  CHECK(thp(LabelDistribution::point_mass(0), Speaker::A) == 0.5);
  // uniform over all labels: symmetric
  CHECK(std::abs(thp(LabelDistribution(), Speaker::A) - 0.5) < 1e-12);

  // 0.75 mass on "A speaks through the region", 0.25 on "B speaks through it"
  std::array<double, 256> p{};
  p[3] = 0.75;
  p[48] = 0.25;
  const LabelDistribution d(p);
  CHECK(thp(d, Speaker::A) == 0.75);
  CHECK(thp(d, Speaker::B) == 0.25);
}

TEST_CASE("thp complement under perspective change") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    std::array<double, 256> p{};
    double sum = 0;
    for (auto& v : p) {
      v = uniform01(rng);
      sum += v;
    }
    for (auto& v : p) v /= sum;
    const LabelDistribution d(p);
    CHECK(std::abs(thp(d, Speaker::A) + thp(d, Speaker::B) - 1.0) < 1e-12);
  }
}

TEST_CASE("thp mixing two pure labels is linear in the mixture weight") {
  for (double alpha : {0.0, 0.1, 0.25, 0.5, 0.9, 1.0}) {
    std::array<double, 256> p{};
    p[15] = alpha;         // A active all bins
    p[240] = 1.0 - alpha;  // B active all bins
    const double v = thp(LabelDistribution(p), Speaker::A);
    CHECK(v == Approx(alpha).margin(1e-15));
  }
}

TEST_CASE("region of interest must land on a bin boundary") {
  const auto d = LabelDistribution::point_mass(15);
  CHECK_NOTHROW(thp(d, Speaker::A, 0.2));
  CHECK_NOTHROW(thp(d, Speaker::A, 0.6));
  CHECK_NOTHROW(thp(d, Speaker::A, 1.2));
  CHECK_NOTHROW(thp(d, Speaker::A, 2.0));
  CHECK_THROWS_AS(thp(d, Speaker::A, 0.3), std::domain_error);
  CHECK_THROWS_AS(thp(d, Speaker::A, 0.0), std::domain_error);
}

TEST_CASE("roi controls which bins count") {
  // label 8: A active only in bin 3 (1.2-2.0s), outside the default region
  const auto d = LabelDistribution::point_mass(8);
  CHECK(thp(d, Speaker::A, 0.6) == 0.5);  // no mass inside the region
  CHECK(thp(d, Speaker::A, 2.0) == 1.0);  // full-horizon region sees it
}

TEST_CASE("distribution validation") {
  std::array<double, 256> p{};
  p[0] = 0.9;  // sums to 0.9
  CHECK_THROWS_AS(LabelDistribution(p), ValidationError);
  p[0] = 2.0;
  CHECK_THROWS_AS(LabelDistribution(p), ValidationError);
  p[0] = 1.0;
  p[1] = -0.5;
  CHECK_THROWS_AS(LabelDistribution(p), ValidationError);
  p[1] = 0.0;
  p[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(LabelDistribution(p), ValidationError);

  // slightly off but within renormalization tolerance
  std::array<double, 256> q{};
  q[15] = 1.0 + 5e-4;
  const LabelDistribution d(q);
  CHECK(thp(d, Speaker::A) == 1.0);
}

TEST_CASE("thp_stream over raw frames") {
  std::vector<float> probs(3 * 256, 0.0f);
  probs[0 * 256 + 15] = 1.0f;
  probs[1 * 256 + 15] = 1.0f;
  probs[2 * 256 + 240] = 1.0f;
  const THPSeries s = thp_stream(std::span<const float>(probs), Speaker::A, 50.0);
  REQUIRE(s.values.size() == 3);
  CHECK(s.values[0] == 1.0);
  CHECK(s.values[1] == 1.0);
  CHECK(s.values[2] == 0.0);
  CHECK(s.frame_rate == 50.0);
  CHECK(s.duration() == Approx(0.06));

  CHECK_THROWS_AS(thp_stream(std::span<const float>(probs.data(), 100), Speaker::A, 50.0),
                  ValidationError);
  CHECK_THROWS_AS(thp_stream(std::span<const float>(), Speaker::A, 50.0), ValidationError);
}

TEST_CASE("thp_stream names the offending frame") {
  std::vector<float> probs(2 * 256, 0.0f);
  probs[15] = 1.0f;  // frame 0 fine, frame 1 sums to zero
  try {
    thp_stream(std::span<const float>(probs), Speaker::A, 50.0);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("frame 1") != std::string::npos);
  }
}
