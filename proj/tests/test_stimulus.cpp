#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"
#include "turnhold/stimulus.hpp"

using namespace turnhold;
using Catch::Approx;
using testutil::word;

namespace {

// A speaks up to a trailing "uh" at [20.6, 21.05]; B is far away.
Session exclusion_session(bool with_act = true) {
  Session s;
  s.id = "sess";
  s.words[0] = {word(Speaker::A, "so", 18.0, 19.0), word(Speaker::A, "well", 19.2, 20.3),
                word(Speaker::A, "uh", 20.6, 21.05), word(Speaker::A, "next", 21.5, 21.9)};
  s.words[1] = {word(Speaker::B, "yeah", 5.0, 5.4)};
  if (with_act)
    s.dialog_acts[0] = {{"sv", 20.5, 22.0, Speaker::A, 0, 0}};
  s.duration = 40.0;
  finalize_session(s);
  return s;
}

AudioChannelPair ramp_audio(int sr, double seconds) {
  AudioChannelPair audio;
  audio.sample_rate = sr;
  const auto n = static_cast<std::size_t>(std::llround(seconds * sr));
  audio.channels[0].resize(n);
  audio.channels[1].resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    audio.channels[0][i] = static_cast<float>(i % 997) / 1000.0f;
    audio.channels[1][i] = static_cast<float>((i * 7) % 883) / 1000.0f;
  }
  return audio;
}

}  // namespace

TEST_CASE("find_fillers accepts the canonical candidate") {
  const auto found = find_fillers(exclusion_session());
  REQUIRE(found.size() == 1);
  const auto& f = found[0];
  CHECK(f.session_id == "sess");
  CHECK(f.speaker == Speaker::A);
  CHECK(f.word_index == 2);
  CHECK(f.lexical_form == "uh");
  CHECK(f.start == Approx(20.6));
  CHECK(f.end == Approx(21.05));
  CHECK(f.duration() == Approx(0.45));
  // first word of its enclosing dialog act
  CHECK(f.position == FillerPosition::start);
}

TEST_CASE("filler position falls back to mid") {
  // no dialog act at all
  CHECK(find_fillers(exclusion_session(false))[0].position == FillerPosition::mid);

  // act where the filler is not the first word
  Session s = exclusion_session(false);
  s.dialog_acts[0] = {{"sv", 19.1, 22.0, Speaker::A, 0, 0}};
  finalize_session(s);
  CHECK(find_fillers(s)[0].position == FillerPosition::mid);
}

TEST_CASE("filler criteria rejections") {
  SECTION("0.15s filler is too short") {
    Session s = exclusion_session();
    s.words[0][2].end = 20.75;
    finalize_session(s);
    CHECK(find_fillers(s).empty());
  }
  SECTION("exactly 0.2s is still too short (strict)") {
    Session s = exclusion_session();
    s.words[0][2].end = 20.8;
    finalize_session(s);
    CHECK(find_fillers(s).empty());
  }
  SECTION("same-speaker pause under 0.2s") {
    Session s = exclusion_session();
    s.words[0][3] = word(Speaker::A, "next", 21.1, 21.5);
    finalize_session(s);
    CHECK(find_fillers(s).empty());
  }
  SECTION("listener word 0.4s after the filler") {
    Session s = exclusion_session();
    s.words[1].push_back(word(Speaker::B, "mhm", 21.45, 21.65));
    finalize_session(s);
    CHECK(find_fillers(s).empty());
  }
  SECTION("listener word just outside the 1s window is fine") {
    Session s = exclusion_session();
    s.words[1].push_back(word(Speaker::B, "mhm", 22.1, 22.3));
    finalize_session(s);
    CHECK(find_fillers(s).size() == 1);
  }
  SECTION("less than 20s of context") {
    Session s = exclusion_session();
    s.words[0] = {word(Speaker::A, "so", 16.0, 17.0), word(Speaker::A, "well", 17.2, 18.3),
                  word(Speaker::A, "uh", 18.6, 19.05), word(Speaker::A, "next", 19.5, 19.9)};
    s.dialog_acts[0].clear();
    finalize_session(s);
    CHECK(find_fillers(s).empty());
  }
  SECTION("no next same-speaker word passes the pause test") {
    Session s = exclusion_session();
    s.words[0].pop_back();
    s.dialog_acts[0].clear();
    finalize_session(s);
    CHECK(find_fillers(s).size() == 1);
  }
  SECTION("spelling map is configurable") {
    Session s = exclusion_session();
    s.words[0][2].text = "er";
    finalize_session(s);
    CHECK(find_fillers(s).empty());
    FillerCriteria crit;
    crit.spellings = {"er"};
    CHECK(find_fillers(s, crit).size() == 1);
  }
}

TEST_CASE("context window slicing zero-pads out-of-range samples") {
  AudioChannelPair audio = ramp_audio(1000, 1.0);
  const AudioChannelPair out = detail::context_plus_silence(audio, 5, 10, 4);
  REQUIRE(out.frames() == 14);
  for (int i = 0; i < 5; ++i) CHECK(out.channels[0][static_cast<std::size_t>(i)] == 0.0f);
  for (int i = 5; i < 10; ++i)
    CHECK(out.channels[0][static_cast<std::size_t>(i)] ==
          audio.channels[0][static_cast<std::size_t>(i - 5)]);
  for (int i = 10; i < 14; ++i) CHECK(out.channels[0][static_cast<std::size_t>(i)] == 0.0f);
}

TEST_CASE("exclusion pair: silenced variant") {
  const int sr = 1000;
  const Session s = exclusion_session();
  const AudioChannelPair audio = ramp_audio(sr, 40.0);
  const auto filler = find_fillers(s).at(0);
  const StimulusPair pair = build_exclusion_pair(s, audio, filler);

  CHECK(pair.id == "sess.A.w0002");
  CHECK(pair.manipulation == "silenced trailing uh");
  const auto& t = pair.treatment;
  const auto& c = pair.control;
  CHECK(t.kind == "treatment");
  CHECK(c.kind == "control");
  CHECK(t.pair_id == pair.id);
  CHECK(t.silence_onset == Approx(20.0));
  CHECK(c.silence_onset == Approx(20.0));
  CHECK(t.has_trailing_filler);
  CHECK_FALSE(c.has_trailing_filler);
  CHECK(t.filler_duration == Approx(0.45));
  CHECK(c.filler_duration == 0.0);
  CHECK(t.current_speaker == Speaker::A);
  CHECK_FALSE(t.is_question_end);

  const long long ctx_n = 20 * sr, end_idx = 21050, start_idx = 20600;
  const long long off = end_idx - ctx_n;
  REQUIRE(t.audio.frames() == 30000);
  REQUIRE(c.audio.frames() == 30000);
  // treatment is the untouched window ending at the filler's end
  for (long long i = 0; i < ctx_n; i += 13)
    REQUIRE(t.audio.channels[0][static_cast<std::size_t>(i)] ==
            audio.channels[0][static_cast<std::size_t>(off + i)]);
  // control differs only inside the filler interval on the speaker channel
  std::size_t zeroed = 0;
  for (long long i = 0; i < 30000; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (i >= start_idx - off && i < ctx_n) {
      REQUIRE(c.audio.channels[0][ui] == 0.0f);
      ++zeroed;
    } else {
      REQUIRE(c.audio.channels[0][ui] == t.audio.channels[0][ui]);
    }
    REQUIRE(c.audio.channels[1][ui] == t.audio.channels[1][ui]);
  }
  CHECK(zeroed == static_cast<std::size_t>(end_idx - start_idx));
  // appended silence is silent on both members
  for (long long i = ctx_n; i < 30000; i += 7) {
    CHECK(t.audio.channels[0][static_cast<std::size_t>(i)] == 0.0f);
    CHECK(t.audio.channels[1][static_cast<std::size_t>(i)] == 0.0f);
  }
}

TEST_CASE("exclusion pair: excised variant shifts the control window") {
  const int sr = 1000;
  const Session s = exclusion_session();
  const AudioChannelPair audio = ramp_audio(sr, 40.0);
  StimulusOptions opts;
  opts.excise = true;
  const StimulusPair pair = build_exclusion_pair(s, audio, find_fillers(s).at(0), opts);
  CHECK(pair.manipulation == "excised trailing uh");
  const long long ctx_n = 20 * sr, start_idx = 20600;
  for (long long i = 0; i < ctx_n; i += 13)
    REQUIRE(pair.control.audio.channels[0][static_cast<std::size_t>(i)] ==
            audio.channels[0][static_cast<std::size_t>(start_idx - ctx_n + i)]);
}

TEST_CASE("exclusion pair requires enough context") {
  const int sr = 1000;
  Session s = exclusion_session();
  const AudioChannelPair audio = ramp_audio(sr, 40.0);
  FillerCandidate f = find_fillers(s).at(0);
  f.start = 18.5;
  f.end = 19.0;  // ends before the 20s context window fits
  CHECK_THROWS_AS(build_exclusion_pair(s, audio, f), ValidationError);
}

namespace {

// B asks a question ending at 20.4s; B also produced an "um" at [10.0, 10.3].
Session insertion_session() {
  Session s;
  s.id = "sess";
  s.words[0] = {word(Speaker::A, "yeah", 5.0, 5.4)};
  s.words[1] = {word(Speaker::B, "um", 10.0, 10.3), word(Speaker::B, "so", 17.0, 18.0),
                word(Speaker::B, "do", 19.0, 19.4), word(Speaker::B, "you", 19.5, 20.4)};
  s.dialog_acts[1] = {{"ynq", 18.9, 20.5, Speaker::B, 0, 0}};
  s.duration = 40.0;
  finalize_session(s);
  return s;
}

FillerCandidate insertion_filler() {
  FillerCandidate f;
  f.session_id = "sess";
  f.speaker = Speaker::B;
  f.word_index = 0;
  f.lexical_form = "um";
  f.start = 10.0;
  f.end = 10.3;
  f.position = FillerPosition::mid;
  return f;
}

}  // namespace

TEST_CASE("find_ynq_utterances accepts and probes the control stimulus") {
  const Session s = insertion_session();
  const AudioChannelPair audio = ramp_audio(1000, 40.0);

  std::size_t probed = 0;
  const auto found = find_ynq_utterances(s, audio, [&](const StimulusMember& m) {
    ++probed;
    CHECK(m.kind == "control");
    CHECK(m.is_question_end);
    CHECK(m.pair_id == "sess.B.q0000");
    CHECK(m.silence_onset == Approx(20.0));
    return std::optional<double>(0.4);
  });
  REQUIRE(found.size() == 1);
  CHECK(probed == 1);
  CHECK(found[0].session_id == "sess");
  CHECK(found[0].speaker == Speaker::B);
  CHECK(found[0].da_index == 0);
  CHECK(found[0].utterance_end == Approx(20.4));
}

TEST_CASE("find_ynq_utterances rejections") {
  const AudioChannelPair audio = ramp_audio(1000, 40.0);
  const auto accept = [](const StimulusMember&) { return std::optional<double>(0.4); };

  SECTION("censored control") {
    CHECK(find_ynq_utterances(insertion_session(), audio, [](const StimulusMember&) {
            return std::optional<double>();
          }).empty());
  }
  SECTION("control shifts too late") {
    CHECK(find_ynq_utterances(insertion_session(), audio, [](const StimulusMember&) {
            return std::optional<double>(6.0);
          }).empty());
  }
  SECTION("same-speaker continuation inside the 0.5s pause") {
    Session s = insertion_session();
    s.words[1].push_back(word(Speaker::B, "and", 20.6, 20.9));
    finalize_session(s);
    CHECK(find_ynq_utterances(s, audio, accept).empty());
  }
  SECTION("listener speech near the utterance end") {
    Session s = insertion_session();
    s.words[0].push_back(word(Speaker::A, "uhhuh", 20.5, 20.7));
    finalize_session(s);
    CHECK(find_ynq_utterances(s, audio, accept).empty());
  }
  SECTION("non-question labels are ignored") {
    Session s = insertion_session();
    s.dialog_acts[1][0].label = "sv";
    finalize_session(s);
    CHECK(find_ynq_utterances(s, audio, accept).empty());
  }
  SECTION("predictor failures carry the candidate id") {
    try {
      find_ynq_utterances(insertion_session(), audio,
                          [](const StimulusMember&) -> std::optional<double> {
                            throw PredictorError("boom");
                          });
      FAIL("expected PredictorError");
    } catch (const PredictorError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("sess.B.q0000") != std::string::npos);
      CHECK(msg.find("boom") != std::string::npos);
    }
  }
}

TEST_CASE("insertion pair: splice geometry and metadata") {
  const int sr = 1000;
  const Session s = insertion_session();
  const AudioChannelPair audio = ramp_audio(sr, 40.0);
  const auto ynq = find_ynq_utterances(s, audio, [](const StimulusMember&) {
                     return std::optional<double>(0.4);
                   }).at(0);
  const StimulusPair pair = build_insertion_pair(s, audio, ynq, insertion_filler());

  CHECK(pair.id == "sess.B.q0000.B.w0000");
  const auto& c = pair.control;
  const auto& t = pair.treatment;
  REQUIRE(c.audio.frames() == 30000);   // 20s + 10s
  REQUIRE(t.audio.frames() == 30300);   // + 0.3s spliced filler
  CHECK(c.silence_onset == Approx(20.0));
  CHECK(t.silence_onset == Approx(20.3));
  CHECK(t.filler_duration == Approx(0.3));
  CHECK(t.has_trailing_filler);
  CHECK_FALSE(c.has_trailing_filler);
  CHECK(t.is_question_end);
  CHECK(c.is_question_end);

  const long long ctx_n = 20 * sr, ue_idx = 20400, f_begin = 10000, dur_n = 300, ramp_n = 10;
  // context identical in both members
  for (long long i = 0; i < ctx_n; i += 13) {
    REQUIRE(t.audio.channels[1][static_cast<std::size_t>(i)] ==
            audio.channels[1][static_cast<std::size_t>(ue_idx - ctx_n + i)]);
    REQUIRE(t.audio.channels[1][static_cast<std::size_t>(i)] ==
            c.audio.channels[1][static_cast<std::size_t>(i)]);
  }
  // spliced filler: untouched between the ramps, linearly faded at the ends
  for (long long i = 0; i < dur_n; ++i) {
    const float src = audio.channels[1][static_cast<std::size_t>(f_begin + i)];
    float expect = src;
    if (i < ramp_n) expect *= static_cast<float>(i + 1) / static_cast<float>(ramp_n);
    if (dur_n - 1 - i < ramp_n)
      expect *= static_cast<float>(dur_n - i) / static_cast<float>(ramp_n);
    REQUIRE(t.audio.channels[1][static_cast<std::size_t>(ctx_n + i)] == Approx(expect));
  }
  // everything after the splice is silent; the listener channel stays silent
  for (long long i = ctx_n + dur_n; i < 30300; i += 7)
    CHECK(t.audio.channels[1][static_cast<std::size_t>(i)] == 0.0f);
  for (long long i = ctx_n; i < 30300; i += 7)
    CHECK(t.audio.channels[0][static_cast<std::size_t>(i)] == 0.0f);
}

TEST_CASE("insertion pair preconditions") {
  const Session s = insertion_session();
  const AudioChannelPair audio = ramp_audio(1000, 40.0);
  const auto ynq = find_ynq_utterances(s, audio, [](const StimulusMember&) {
                     return std::optional<double>(0.4);
                   }).at(0);

  FillerCandidate wrong_speaker = insertion_filler();
  wrong_speaker.speaker = Speaker::A;
  CHECK_THROWS_AS(build_insertion_pair(s, audio, ynq, wrong_speaker), UsageError);

  FillerCandidate wrong_session = insertion_filler();
  wrong_session.session_id = "other";
  CHECK_THROWS_AS(build_insertion_pair(s, audio, ynq, wrong_session), UsageError);

  FillerCandidate huge = insertion_filler();
  huge.end = huge.start + 6.0;
  try {
    build_insertion_pair(s, audio, ynq, huge);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("implausible splice") != std::string::npos);
  }
}
