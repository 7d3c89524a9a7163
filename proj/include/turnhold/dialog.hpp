#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "turnhold/audio.hpp"
#include "turnhold/error.hpp"
#include "turnhold/speaker.hpp"

namespace turnhold {

// Tolerance for time/frame boundary arithmetic; well below one audio sample.
inline constexpr double kTimeEps = 1e-9;

struct Word {
  std::string text;  // lowercased token
  double start = 0;  // seconds
  double end = 0;    // seconds, > start
  Speaker speaker = Speaker::A;
};

struct DialogActSegment {
  std::string label;
  double start = 0;
  double end = 0;
  Speaker speaker = Speaker::A;
  // Half-open index range into this speaker's word list; never empty.
  std::size_t word_begin = 0;
  std::size_t word_end = 0;
};

// Audio backing a session: either one stereo file or a pair of mono files
// (one per speaker), always 16-bit PCM.
struct AudioRef {
  std::array<std::string, 2> paths;  // per speaker; equal strings mean one stereo file
  int sample_rate = 0;
  int channels = 0;  // total across files, always 2 when present
  std::size_t frames = 0;

  bool present() const { return channels > 0; }
  bool stereo_file() const { return present() && paths[0] == paths[1]; }
  double duration() const {
    return sample_rate > 0 ? static_cast<double>(frames) / sample_rate : 0.0;
  }
};

struct Session {
  std::string id;
  std::array<std::vector<Word>, 2> words;              // per speaker, sorted by start
  std::array<std::vector<DialogActSegment>, 2> dialog_acts;  // per speaker, sorted by start
  AudioRef audio;
  double duration = 0;

  const std::vector<Word>& words_of(Speaker s) const {
    return words[static_cast<std::size_t>(index(s))];
  }
  const std::vector<DialogActSegment>& acts_of(Speaker s) const {
    return dialog_acts[static_cast<std::size_t>(index(s))];
  }
};

// Binary per-frame voice activity for both speakers at a fixed frame rate.
struct ActivityTimeline {
  double frame_rate = 0;
  std::array<std::vector<std::uint8_t>, 2> frames;  // identical lengths

  std::size_t frame_count() const { return frames[0].size(); }
};

namespace detail {

inline std::string describe_word(const Word& w) {
  std::ostringstream os;
  os << "word \"" << w.text << "\" (" << to_char(w.speaker) << " " << w.start << "-" << w.end
     << "s)";
  return os.str();
}

inline std::string describe_segment(const DialogActSegment& s) {
  std::ostringstream os;
  os << "dialog act \"" << s.label << "\" (" << to_char(s.speaker) << " " << s.start << "-"
     << s.end << "s)";
  return os.str();
}

inline void check_word(const Word& w) {
  if (w.start < 0 || !(w.end > w.start))
    throw ValidationError("invalid interval for " + describe_word(w));
}

// A segment owns the same-speaker words whose midpoint falls inside it.
// Words are sorted, so the selection is a contiguous range.
inline std::pair<std::size_t, std::size_t> span_for_segment(const DialogActSegment& seg,
                                                            const std::vector<Word>& words) {
  std::size_t b = 0;
  while (b < words.size() && 0.5 * (words[b].start + words[b].end) < seg.start) ++b;
  std::size_t e = b;
  while (e < words.size() && 0.5 * (words[e].start + words[e].end) < seg.end) ++e;
  return {b, e};
}

}  // namespace detail

// Validates per-type invariants and derives dialog-act word spans.
// Emits (not throws) a warning when segment times and word times disagree
// by more than `mismatch_warn` seconds.
inline void finalize_session(Session& session, std::vector<std::string>* warnings = nullptr,
                             double mismatch_warn = 0.5) {
  for (auto sp : {Speaker::A, Speaker::B}) {
    auto& words = session.words[static_cast<std::size_t>(index(sp))];
    std::stable_sort(words.begin(), words.end(),
                     [](const Word& a, const Word& b) { return a.start < b.start; });
    for (std::size_t i = 0; i < words.size(); ++i) {
      detail::check_word(words[i]);
      if (i > 0 && words[i].start < words[i - 1].end - kTimeEps)
        throw ValidationError("overlapping same-speaker words: " +
                              detail::describe_word(words[i - 1]) + " and " +
                              detail::describe_word(words[i]));
      if (session.duration > 0 && words[i].end > session.duration + 1e-6)
        throw ValidationError(detail::describe_word(words[i]) + " extends past session duration");
    }
    auto& acts = session.dialog_acts[static_cast<std::size_t>(index(sp))];
    std::stable_sort(acts.begin(), acts.end(),
                     [](const DialogActSegment& a, const DialogActSegment& b) {
                       return a.start < b.start;
                     });
    for (auto& seg : acts) {
      if (!(seg.end > seg.start))
        throw ValidationError("invalid interval for " + detail::describe_segment(seg));
      if (session.duration > 0 && seg.end > session.duration + 1e-6)
        throw ValidationError(detail::describe_segment(seg) + " extends past session duration");
      auto [b, e] = detail::span_for_segment(seg, words);
      if (b == e)
        throw ValidationError(detail::describe_segment(seg) + " covers no words");
      seg.word_begin = b;
      seg.word_end = e;
      const double mismatch =
          std::max({seg.start - words[b].start, words[e - 1].end - seg.end, 0.0});
      if (mismatch > mismatch_warn && warnings) {
        std::ostringstream os;
        os << detail::describe_segment(seg) << " disagrees with its word timings by " << mismatch
           << "s";
        warnings->push_back(os.str());
      }
    }
  }
  if (session.duration <= 0) {
    double last = 0;
    for (const auto& ws : session.words)
      for (const auto& w : ws) last = std::max(last, w.end);
    for (const auto& as : session.dialog_acts)
      for (const auto& s : as) last = std::max(last, s.end);
    session.duration = last;
  }
}

// Parses the audio manifest JSON and checks the referenced WAV headers.
// Relative paths resolve against the manifest's directory.
inline AudioRef load_audio_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot open audio manifest " + manifest_path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(manifest_path.string(), 1, e.what());
  }
  if (!j.contains("channels") || !j["channels"].is_array() || j["channels"].size() != 2)
    throw ValidationError(manifest_path.string() + ": manifest must list exactly two channels");
  AudioRef ref;
  ref.sample_rate = j.value("sample_rate", 0);
  if (ref.sample_rate <= 0)
    throw ValidationError(manifest_path.string() + ": missing or invalid sample_rate");
  std::array<bool, 2> seen{false, false};
  const auto base = manifest_path.parent_path();
  for (const auto& ch : j["channels"]) {
    const Speaker sp = parse_speaker(ch.value("speaker", ""));
    if (seen[static_cast<std::size_t>(index(sp))])
      throw ValidationError(manifest_path.string() + ": duplicate channel for speaker " +
                            to_string(sp));
    seen[static_cast<std::size_t>(index(sp))] = true;
    const std::string rel = ch.value("path", "");
    if (rel.empty()) throw ValidationError(manifest_path.string() + ": channel missing path");
    ref.paths[static_cast<std::size_t>(index(sp))] = (base / rel).lexically_normal().string();
  }
  if (!seen[0] || !seen[1])
    throw ValidationError(manifest_path.string() + ": both speakers A and B are required");
  ref.channels = 2;

  if (ref.stereo_file()) {
    const WavData wav = read_wav(ref.paths[0]);
    if (wav.channels != 2)
      throw ValidationError(ref.paths[0] + ": expected a stereo file for both speakers");
    if (wav.sample_rate != ref.sample_rate)
      throw ValidationError(ref.paths[0] + ": sample rate disagrees with manifest");
    ref.frames = wav.frames();
  } else {
    std::size_t frames = 0;
    for (int c = 0; c < 2; ++c) {
      const WavData wav = read_wav(ref.paths[static_cast<std::size_t>(c)]);
      if (wav.channels != 1)
        throw ValidationError(ref.paths[static_cast<std::size_t>(c)] +
                              ": expected a mono file per speaker");
      if (wav.sample_rate != ref.sample_rate)
        throw ValidationError(ref.paths[static_cast<std::size_t>(c)] +
                              ": sample rate disagrees with manifest");
      if (c == 0)
        frames = wav.frames();
      else if (wav.frames() != frames)
        throw ValidationError(manifest_path.string() + ": mono channel files differ in length");
    }
    ref.frames = frames;
  }
  return ref;
}

// Loads both channels of a session's audio into memory.
inline AudioChannelPair load_audio(const AudioRef& ref) {
  if (!ref.present()) throw DataError("session has no audio reference");
  AudioChannelPair out;
  out.sample_rate = ref.sample_rate;
  if (ref.stereo_file()) {
    const WavData wav = read_wav(ref.paths[0]);
    out.channels[0].resize(wav.frames());
    out.channels[1].resize(wav.frames());
    for (std::size_t i = 0; i < wav.frames(); ++i) {
      out.channels[0][i] = wav.samples[2 * i];
      out.channels[1][i] = wav.samples[2 * i + 1];
    }
  } else {
    for (int c = 0; c < 2; ++c) {
      const WavData wav = read_wav(ref.paths[static_cast<std::size_t>(c)]);
      out.channels[static_cast<std::size_t>(c)] = wav.samples;
    }
  }
  return out;
}

// Loads a transcript (JSONL: one {"type":"word",...} or {"type":"da",...}
// record per line) plus an optional audio manifest into a validated Session.
inline Session load_session(const std::filesystem::path& transcript_path,
                            const std::filesystem::path& audio_manifest = {},
                            std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(transcript_path);
  if (!in) throw DataError("cannot open transcript " + transcript_path.string());

  Session session;
  session.id = transcript_path.stem().string();
  if (!audio_manifest.empty()) {
    session.audio = load_audio_manifest(audio_manifest);
    session.duration = session.audio.duration();
  }

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(transcript_path.string(), line_no, e.what());
    }
    // Schema problems (bad JSON, missing fields, unknown type/speaker) are
    // parse errors with a line number; semantic problems (end <= start,
    // overlaps) are validation errors naming the offending word or segment.
    Word w;
    DialogActSegment s;
    bool is_word = false;
    try {
      const std::string type = j.value("type", "");
      if (type == "word") {
        is_word = true;
        w.text = j.at("text").get<std::string>();
        std::transform(w.text.begin(), w.text.end(), w.text.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        w.start = j.at("start").get<double>();
        w.end = j.at("end").get<double>();
        w.speaker = parse_speaker(j.at("speaker").get<std::string>());
      } else if (type == "da") {
        s.label = j.at("label").get<std::string>();
        s.start = j.at("start").get<double>();
        s.end = j.at("end").get<double>();
        s.speaker = parse_speaker(j.at("speaker").get<std::string>());
      } else {
        throw ParseError(transcript_path.string(), line_no,
                         "unknown record type \"" + type + "\"");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(transcript_path.string(), line_no, e.what());
    } catch (const ValidationError& e) {
      throw ParseError(transcript_path.string(), line_no, e.what());
    }
    if (is_word) {
      detail::check_word(w);
      session.words[static_cast<std::size_t>(index(w.speaker))].push_back(w);
    } else {
      session.dialog_acts[static_cast<std::size_t>(index(s.speaker))].push_back(s);
    }
  }
  finalize_session(session, warnings);
  return session;
}

// Canonical transcript serialization: word records first (speaker A then B,
// each sorted by start), then dialog-act records in the same order. Doubles
// use the shortest round-trip representation, so save(load(x)) is
// byte-identical for files produced by this writer.
inline std::string serialize_transcript(const Session& session) {
  std::ostringstream out;
  const auto dump_word = [&](const Word& w) {
    nlohmann::json j{{"type", "word"},
                     {"speaker", to_string(w.speaker)},
                     {"text", w.text},
                     {"start", w.start},
                     {"end", w.end}};
    out << j.dump() << "\n";
  };
  const auto dump_act = [&](const DialogActSegment& s) {
    nlohmann::json j{{"type", "da"},
                     {"speaker", to_string(s.speaker)},
                     {"label", s.label},
                     {"start", s.start},
                     {"end", s.end}};
    out << j.dump() << "\n";
  };
  for (auto sp : {Speaker::A, Speaker::B})
    for (const auto& w : session.words_of(sp)) dump_word(w);
  for (auto sp : {Speaker::A, Speaker::B})
    for (const auto& s : session.acts_of(sp)) dump_act(s);
  return out.str();
}

inline void save_session(const Session& session, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write transcript " + path.string());
  const std::string text = serialize_transcript(session);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

// Frame f of speaker s is active iff [f/rate, (f+1)/rate) overlaps any word
// of s. Frame count is ceil(duration * rate).
inline ActivityTimeline voice_activity(const Session& session, double frame_rate = 50.0) {
  if (!(frame_rate > 0)) throw UsageError("voice_activity: frame_rate must be positive");
  ActivityTimeline tl;
  tl.frame_rate = frame_rate;
  const auto n_frames =
      static_cast<std::size_t>(std::max(0.0, std::ceil(session.duration * frame_rate - kTimeEps)));
  for (auto sp : {Speaker::A, Speaker::B}) {
    auto& frames = tl.frames[static_cast<std::size_t>(index(sp))];
    frames.assign(n_frames, 0);
    for (const auto& w : session.words_of(sp)) {
      const auto first = static_cast<long long>(std::floor(w.start * frame_rate + kTimeEps));
      const auto last = static_cast<long long>(std::ceil(w.end * frame_rate - kTimeEps)) - 1;
      for (long long f = std::max(0ll, first);
           f <= last && f < static_cast<long long>(n_frames); ++f)
        frames[static_cast<std::size_t>(f)] = 1;
    }
  }
  return tl;
}

}  // namespace turnhold
