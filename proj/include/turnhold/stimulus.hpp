#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "turnhold/audio.hpp"
#include "turnhold/dialog.hpp"
#include "turnhold/error.hpp"
#include "turnhold/speaker.hpp"

namespace turnhold {

// Selection thresholds for lexical-filler candidates. Defaults follow the
// protocol this toolkit reproduces; all are perturbable via config.
struct FillerCriteria {
  double min_duration = 0.2;   // candidate must be strictly longer
  double min_pause = 0.2;      // same-speaker pause after the candidate (>=)
  double isolation = 1.0;      // no listener words this close before/after
  double min_context = 20.0;   // seconds of dialog before the candidate's end
  std::vector<std::string> spellings = {"uh", "um"};  // corpus-variant map
};

enum class FillerPosition { start, mid };

inline const char* to_string(FillerPosition p) {
  return p == FillerPosition::start ? "start" : "mid";
}

struct FillerCandidate {
  std::string session_id;
  Speaker speaker = Speaker::A;
  std::size_t word_index = 0;
  std::string lexical_form;  // one of the configured spellings
  double start = 0;
  double end = 0;
  FillerPosition position = FillerPosition::mid;

  double duration() const { return end - start; }
};

// Selection thresholds for question-final utterances.
struct YnqCriteria {
  std::vector<std::string> question_labels = {"ynq"};
  double min_pause = 0.5;    // same-speaker pause after the utterance (strict)
  double isolation = 0.5;    // listener silence around the utterance end
  double min_context = 20.0;
  double max_shift = 5.0;    // control stimulus must shift before this
};

struct YnqCandidate {
  std::string session_id;
  Speaker speaker = Speaker::A;
  std::size_t da_index = 0;      // into that speaker's dialog-act list
  double utterance_end = 0;      // end of the act's last word
};

// One member of a stimulus pair: context audio followed by artificial
// silence. The metadata block mirrors how the member was constructed; the
// synthetic predictor consumes it as its ground truth.
struct StimulusMember {
  std::string pair_id;
  std::string kind;  // "treatment" or "control"
  AudioChannelPair audio;
  double context_len = 20.0;
  double silence_len = 10.0;
  double silence_onset = 20.0;  // seconds from sample start
  Speaker current_speaker = Speaker::A;
  bool has_trailing_filler = false;
  double filler_duration = 0.0;  // seconds, when has_trailing_filler
  bool is_question_end = false;
};

struct StimulusPair {
  std::string id;
  std::string session_id;
  std::string manipulation;  // human-readable description
  StimulusMember treatment;
  StimulusMember control;
  std::optional<FillerCandidate> filler;
  std::optional<YnqCandidate> ynq;
};

struct StimulusOptions {
  double context_len = 20.0;
  double silence_len = 10.0;
  double crossfade = 0.010;     // splice ramp length, seconds
  bool excise = false;          // exclusion variant: cut instead of silence
  double max_splice = 5.0;      // longest filler accepted for insertion
};

namespace detail {

inline std::string pair_tag(const std::string& session, Speaker sp, const char* what,
                            std::size_t idx) {
  char buf[32];
  std::snprintf(buf, sizeof buf, ".%c.%s%04zu", to_char(sp), what, idx);
  return session + buf;
}

// True when some word of `words` intrudes into the open interval (lo, hi).
inline bool any_word_within(const std::vector<Word>& words, double lo, double hi) {
  for (const auto& w : words) {
    if (w.start >= hi - kTimeEps) break;  // sorted; nothing later can overlap
    if (w.end > lo + kTimeEps) return true;
  }
  return false;
}

inline FillerPosition classify_position(const Session& session, Speaker sp,
                                        std::size_t word_index) {
  for (const auto& seg : session.acts_of(sp)) {
    if (seg.word_begin <= word_index && word_index < seg.word_end)
      return word_index == seg.word_begin ? FillerPosition::start : FillerPosition::mid;
  }
  return FillerPosition::mid;  // unannotated stretch: treat as act-internal
}

}  // namespace detail

inline std::vector<FillerCandidate> find_fillers(const Session& session,
                                                 const FillerCriteria& criteria = {}) {
  std::vector<FillerCandidate> out;
  for (auto sp : {Speaker::A, Speaker::B}) {
    const auto& words = session.words_of(sp);
    const auto& listener = session.words_of(other(sp));
    for (std::size_t i = 0; i < words.size(); ++i) {
      const Word& w = words[i];
      if (std::find(criteria.spellings.begin(), criteria.spellings.end(), w.text) ==
          criteria.spellings.end())
        continue;
      if (!(w.end - w.start > criteria.min_duration)) continue;
      // Trailing same-speaker pause; a turn-final token trivially satisfies it.
      if (i + 1 < words.size() &&
          words[i + 1].start - w.end + kTimeEps < criteria.min_pause)
        continue;
      if (detail::any_word_within(listener, w.start - criteria.isolation,
                                  w.end + criteria.isolation))
        continue;
      if (w.end + kTimeEps < criteria.min_context) continue;
      FillerCandidate c;
      c.session_id = session.id;
      c.speaker = sp;
      c.word_index = i;
      c.lexical_form = w.text;
      c.start = w.start;
      c.end = w.end;
      c.position = detail::classify_position(session, sp, i);
      out.push_back(std::move(c));
    }
  }
  return out;
}

// `control_shift` runs the configured predictor on a candidate's control
// stimulus and returns the uncensored turn-shift time, or nullopt when
// censored. Utterance-finality is operationalized by the trailing-pause
// criterion itself: a question immediately followed by more same-speaker
// speech fails the pause check.
inline std::vector<YnqCandidate> find_ynq_utterances(
    const Session& session, const AudioChannelPair& audio,
    const std::function<std::optional<double>(const StimulusMember&)>& control_shift,
    const YnqCriteria& criteria = {}, const StimulusOptions& opts = {});

namespace detail {

// Copies `ctx_n` samples ending at `end_idx` from every channel, then
// appends `sil_n` zeros.
inline AudioChannelPair context_plus_silence(const AudioChannelPair& audio, long long end_idx,
                                             long long ctx_n, long long sil_n) {
  AudioChannelPair out;
  out.sample_rate = audio.sample_rate;
  for (int c = 0; c < 2; ++c) {
    const auto& src = audio.channels[static_cast<std::size_t>(c)];
    auto& dst = out.channels[static_cast<std::size_t>(c)];
    dst.assign(static_cast<std::size_t>(ctx_n + sil_n), 0.0f);
    for (long long i = 0; i < ctx_n; ++i) {
      const long long s = end_idx - ctx_n + i;
      if (s >= 0 && s < static_cast<long long>(src.size()))
        dst[static_cast<std::size_t>(i)] = src[static_cast<std::size_t>(s)];
    }
  }
  return out;
}

}  // namespace detail

// Builds the filler-exclusion pair: both members hold the 20s of dialog
// ending at the filler's end plus 10s of silence; the control differs only
// in that the filler interval is zeroed on the filler speaker's channel.
// With opts.excise the control instead uses the 20s ending at the filler's
// START, removing the token from the timeline entirely (sensitivity runs
// only: it desynchronizes the two members' context windows).
inline StimulusPair build_exclusion_pair(const Session& session, const AudioChannelPair& audio,
                                         const FillerCandidate& filler,
                                         const StimulusOptions& opts = {}) {
  const int sr = audio.sample_rate;
  const long long ctx_n = std::llround(opts.context_len * sr);
  const long long sil_n = std::llround(opts.silence_len * sr);
  const long long end_idx = std::llround(filler.end * sr);
  const long long start_idx = std::llround(filler.start * sr);
  if (end_idx < ctx_n)
    throw ValidationError("insufficient context before filler ending at " +
                          std::to_string(filler.end) + "s");
  if (end_idx > static_cast<long long>(audio.frames()))
    throw ValidationError("filler interval extends past the session audio");

  StimulusPair pair;
  pair.id = detail::pair_tag(session.id, filler.speaker, "w", filler.word_index);
  pair.session_id = session.id;
  pair.manipulation = std::string(opts.excise ? "excised" : "silenced") + " trailing " +
                      filler.lexical_form;
  pair.filler = filler;

  auto& t = pair.treatment;
  t.pair_id = pair.id;
  t.kind = "treatment";
  t.audio = detail::context_plus_silence(audio, end_idx, ctx_n, sil_n);
  t.context_len = opts.context_len;
  t.silence_len = opts.silence_len;
  t.silence_onset = opts.context_len;
  t.current_speaker = filler.speaker;
  t.has_trailing_filler = true;
  t.filler_duration = filler.end - filler.start;

  auto& c = pair.control;
  c = t;
  c.kind = "control";
  c.has_trailing_filler = false;
  c.filler_duration = 0.0;
  if (opts.excise) {
    if (start_idx < ctx_n)
      throw ValidationError("insufficient context before filler starting at " +
                            std::to_string(filler.start) + "s");
    c.audio = detail::context_plus_silence(audio, start_idx, ctx_n, sil_n);
  } else {
    auto& ch = c.audio.channels[static_cast<std::size_t>(index(filler.speaker))];
    for (long long i = start_idx - (end_idx - ctx_n); i < ctx_n; ++i)
      if (i >= 0) ch[static_cast<std::size_t>(i)] = 0.0f;
  }
  return pair;
}

// Builds the filler-insertion pair for a question-final utterance: the
// control is the 20s ending at the utterance plus silence; the treatment
// splices the filler's waveform onto the question speaker's channel right
// after the utterance (10ms linear ramps at both splice points), delaying
// the silence onset by the filler's duration.
inline StimulusPair build_insertion_pair(const Session& session, const AudioChannelPair& audio,
                                         const YnqCandidate& ynq, const FillerCandidate& filler,
                                         const StimulusOptions& opts = {}) {
  if (filler.speaker != ynq.speaker)
    throw UsageError("insertion filler must come from the question speaker");
  if (filler.session_id != ynq.session_id || filler.session_id != session.id)
    throw UsageError("insertion filler must come from the question's session");
  if (filler.duration() > opts.max_splice)
    throw ValidationError("filler of " + std::to_string(filler.duration()) +
                          "s rejected as implausible splice");

  const int sr = audio.sample_rate;
  const long long ctx_n = std::llround(opts.context_len * sr);
  const long long sil_n = std::llround(opts.silence_len * sr);
  const long long ue_idx = std::llround(ynq.utterance_end * sr);
  const long long f_begin = std::llround(filler.start * sr);
  const long long f_end = std::llround(filler.end * sr);
  const long long dur_n = f_end - f_begin;
  if (ue_idx < ctx_n)
    throw ValidationError("insufficient context before utterance ending at " +
                          std::to_string(ynq.utterance_end) + "s");

  StimulusPair pair;
  pair.id = detail::pair_tag(session.id, ynq.speaker, "q", ynq.da_index) +
            detail::pair_tag("", filler.speaker, "w", filler.word_index);
  pair.session_id = session.id;
  pair.manipulation = "inserted " + filler.lexical_form + " after question";
  pair.filler = filler;
  pair.ynq = ynq;

  auto& c = pair.control;
  c.pair_id = pair.id;
  c.kind = "control";
  c.audio = detail::context_plus_silence(audio, ue_idx, ctx_n, sil_n);
  c.context_len = opts.context_len;
  c.silence_len = opts.silence_len;
  c.silence_onset = opts.context_len;
  c.current_speaker = ynq.speaker;
  c.is_question_end = true;

  auto& t = pair.treatment;
  t = c;
  t.kind = "treatment";
  t.has_trailing_filler = true;
  t.filler_duration = static_cast<double>(dur_n) / sr;
  t.silence_onset = static_cast<double>(ctx_n + dur_n) / sr;
  const auto& src = audio.channels[static_cast<std::size_t>(index(filler.speaker))];
  auto& ch = t.audio.channels[static_cast<std::size_t>(index(filler.speaker))];
  ch.resize(static_cast<std::size_t>(ctx_n + dur_n + sil_n), 0.0f);
  std::fill(ch.begin() + ctx_n, ch.end(), 0.0f);
  const long long ramp_n = std::min(std::llround(opts.crossfade * sr), dur_n / 2);
  for (long long i = 0; i < dur_n; ++i) {
    const long long s = f_begin + i;
    float v = (s >= 0 && s < static_cast<long long>(src.size()))
                  ? src[static_cast<std::size_t>(s)]
                  : 0.0f;
    if (ramp_n > 0) {
      if (i < ramp_n) v *= static_cast<float>(i + 1) / static_cast<float>(ramp_n);
      if (dur_n - 1 - i < ramp_n)
        v *= static_cast<float>(dur_n - i) / static_cast<float>(ramp_n);
    }
    ch[static_cast<std::size_t>(ctx_n + i)] = v;
  }
  auto& other_ch = t.audio.channels[static_cast<std::size_t>(index(other(filler.speaker)))];
  other_ch.resize(static_cast<std::size_t>(ctx_n + dur_n + sil_n), 0.0f);
  return pair;
}

inline std::vector<YnqCandidate> find_ynq_utterances(
    const Session& session, const AudioChannelPair& audio,
    const std::function<std::optional<double>(const StimulusMember&)>& control_shift,
    const YnqCriteria& criteria, const StimulusOptions& opts) {
  std::vector<YnqCandidate> out;
  for (auto sp : {Speaker::A, Speaker::B}) {
    const auto& acts = session.acts_of(sp);
    const auto& words = session.words_of(sp);
    const auto& listener = session.words_of(other(sp));
    for (std::size_t di = 0; di < acts.size(); ++di) {
      const auto& seg = acts[di];
      if (std::find(criteria.question_labels.begin(), criteria.question_labels.end(),
                    seg.label) == criteria.question_labels.end())
        continue;
      const double ue = words[seg.word_end - 1].end;
      if (seg.word_end < words.size() &&
          !(words[seg.word_end].start - ue > criteria.min_pause))
        continue;
      if (detail::any_word_within(listener, ue - criteria.isolation, ue + criteria.isolation))
        continue;
      if (ue + kTimeEps < criteria.min_context) continue;

      YnqCandidate cand;
      cand.session_id = session.id;
      cand.speaker = sp;
      cand.da_index = di;
      cand.utterance_end = ue;

      if (control_shift) {
        const long long sr = audio.sample_rate;
        StimulusMember control;
        control.pair_id = detail::pair_tag(session.id, sp, "q", di);
        control.kind = "control";
        control.audio = detail::context_plus_silence(
            audio, std::llround(ue * sr), std::llround(opts.context_len * sr),
            std::llround(opts.silence_len * sr));
        control.context_len = opts.context_len;
        control.silence_len = opts.silence_len;
        control.silence_onset = opts.context_len;
        control.current_speaker = sp;
        control.is_question_end = true;
        std::optional<double> shift;
        try {
          shift = control_shift(control);
        } catch (const PredictorError& e) {
          throw PredictorError("candidate " + control.pair_id + ": " + e.what());
        }
        if (!shift || !(*shift < criteria.max_shift)) continue;
      }
      out.push_back(std::move(cand));
    }
  }
  return out;
}

}  // namespace turnhold
