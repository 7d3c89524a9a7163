#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "turnhold/audio.hpp"
#include "turnhold/dialog.hpp"
#include "turnhold/error.hpp"
#include "turnhold/io.hpp"
#include "turnhold/stats.hpp"
#include "turnhold/stimulus.hpp"

namespace turnhold {

// Synthetic-corpus generator: builds deterministic two-speaker dialogs with
// words rendered as harmonic tones, planting known-valid and known-invalid
// filler and question candidates. The ground-truth ledger records every
// planted item so selection logic can be tested exactly.
struct SyntheticCorpusConfig {
  std::uint64_t seed = 42;
  int n_sessions = 4;
  int sample_rate = 8000;
  int valid_fillers_per_session = 4;
  int invalid_fillers_per_session = 3;
  int ynq_per_session = 2;
  int invalid_ynq_per_session = 1;
  double context_buildup = 24.0;  // plain dialog before planted roles, seconds
  double tail_pad = 6.0;          // trailing silence, seconds
};

struct PlantedFiller {
  std::string session_id;
  Speaker speaker = Speaker::A;
  std::size_t word_index = 0;
  std::string lexical_form;
  double start = 0;
  double end = 0;
  FillerPosition position = FillerPosition::mid;
  bool valid = false;
  std::string reason;  // "valid" or why it must be rejected
};

// Structural validity only: a planted "valid" question still has to pass the
// model-dependent turn-shift criterion, which belongs to the predictor
// config, not the corpus.
struct PlantedYnq {
  std::string session_id;
  Speaker speaker = Speaker::A;
  std::size_t da_index = 0;
  double utterance_end = 0;
  bool valid = false;
  std::string reason;
};

struct GroundTruth {
  std::vector<PlantedFiller> fillers;
  std::vector<PlantedYnq> ynqs;
};

struct GeneratedSession {
  Session session;
  AudioChannelPair audio;
};

struct SyntheticCorpus {
  SyntheticCorpusConfig config;
  std::vector<GeneratedSession> sessions;
  GroundTruth truth;
};

namespace detail {

constexpr std::array<const char*, 20> kPlainWords = {
    "yeah", "so",   "i",    "think", "that",  "we",     "should", "go",    "now",   "right",
    "okay", "well", "it",   "is",    "kind",  "of",     "nice",   "today", "really", "maybe"};
constexpr std::array<const char*, 6> kQuestionWords = {"do", "you", "want", "to", "try", "this"};

struct TonePlan {
  Speaker speaker;
  double start, end;
  double f0;
  double amp;
};

class SessionBuilder {
 public:
  SessionBuilder(std::string id, const SyntheticCorpusConfig& cfg, GroundTruth& truth)
      : cfg_(cfg), truth_(truth), rng_(fnv1a64(id) ^ cfg.seed) {
    session_.id = std::move(id);
    t_ = uniform_in(rng_, 0.3, 0.8);
  }

  GeneratedSession build() {
    struct Role {
      enum Kind {
        valid_filler,
        short_duration,
        no_pause,
        listener_overlap,
        early_context,
        ynq,
        trailing_listener,
        non_final
      } kind;
    };
    std::vector<Role> roles;
    int early = 0;
    for (int i = 0; i < cfg_.valid_fillers_per_session; ++i)
      roles.push_back({Role::valid_filler});
    constexpr std::array<Role::Kind, 4> invalid_cycle = {
        Role::short_duration, Role::no_pause, Role::listener_overlap, Role::early_context};
    for (int i = 0; i < cfg_.invalid_fillers_per_session; ++i) {
      const auto kind = invalid_cycle[static_cast<std::size_t>(i) % invalid_cycle.size()];
      if (kind == Role::early_context)
        ++early;  // planted during the context buildup, not the role phase
      else
        roles.push_back({kind});
    }
    for (int i = 0; i < cfg_.ynq_per_session; ++i) roles.push_back({Role::ynq});
    for (int i = 0; i < cfg_.invalid_ynq_per_session; ++i)
      roles.push_back({i % 2 == 0 ? Role::trailing_listener : Role::non_final});
    // Fisher-Yates with raw engine draws: stable across standard libraries.
    for (std::size_t i = roles.size(); i > 1; --i)
      std::swap(roles[i - 1], roles[static_cast<std::size_t>(rng_() % i)]);

    while (t_ < cfg_.context_buildup) {
      if (early > 0 && t_ > 4.0 && t_ < 16.0) {
        plant_filler_turn(uniform_in(rng_, 0.25, 0.55), true, false, "early_context");
        --early;
      } else {
        plain_turn();
      }
      turn_gap();
    }
    for (const auto& role : roles) {
      plain_turn();
      turn_gap();
      switch (role.kind) {
        case Role::valid_filler: {
          const bool start_pos = (valid_planted_ % 2) == 0;
          plant_filler_turn(uniform_in(rng_, 0.25, 0.55), start_pos, true, "valid");
          ++valid_planted_;
          break;
        }
        case Role::short_duration:
          plant_filler_turn(uniform_in(rng_, 0.10, 0.18), true, false, "short_duration");
          break;
        case Role::no_pause:
          plant_no_pause_turn();
          break;
        case Role::listener_overlap:
          plant_listener_overlap_turn();
          break;
        case Role::early_context:
          break;  // handled above
        case Role::ynq:
          plant_ynq_turn(true, "valid");
          break;
        case Role::trailing_listener: {
          const Speaker sp = plant_ynq_turn(false, "trailing_listener");
          backchannel(other(sp), 0.2, 0.2);
          break;
        }
        case Role::non_final: {
          const Speaker sp = plant_ynq_turn(false, "non_final");
          // Same speaker keeps talking too soon for the question to be
          // utterance-final.
          const double gap = uniform_in(rng_, 0.25, 0.45);
          t_ += gap;
          const double ws = t_;
          add_word(sp, next_plain_word(), uniform_in(rng_, 0.2, 0.4), 1.0);
          add_act(sp, "sv", ws, t_);
          break;
        }
      }
      turn_gap();
    }
    plain_turn();
    turn_gap();
    plain_turn();

    double last_end = 0;
    for (const auto& ws : session_.words)
      for (const auto& w : ws) last_end = std::max(last_end, w.end);
    session_.duration = last_end + cfg_.tail_pad;
    finalize_session(session_);

    GeneratedSession out;
    out.session = std::move(session_);
    out.audio = render();
    return out;
  }

 private:
  static constexpr std::array<double, 2> kBaseF0 = {120.0, 210.0};

  void turn_gap() { t_ += uniform_in(rng_, 1.1, 1.8); }

  std::string next_plain_word() {
    const auto i = word_cursor_++ % kPlainWords.size();
    return kPlainWords[i];
  }

  void add_word(Speaker sp, const std::string& text, double dur, double f0_mult) {
    Word w;
    w.text = text;
    w.start = t_;
    w.end = t_ + dur;
    w.speaker = sp;
    session_.words[static_cast<std::size_t>(index(sp))].push_back(w);
    tones_.push_back({sp, w.start, w.end,
                      kBaseF0[static_cast<std::size_t>(index(sp))] * f0_mult,
                      uniform_in(rng_, 0.05, 0.2)});
    t_ = w.end;
  }

  void add_act(Speaker sp, const std::string& label, double start, double end) {
    DialogActSegment s;
    s.label = label;
    s.start = start;
    s.end = end;
    s.speaker = sp;
    session_.dialog_acts[static_cast<std::size_t>(index(sp))].push_back(s);
  }

  Speaker take_turn() {
    const Speaker sp = next_;
    next_ = other(next_);
    return sp;
  }

  void plain_turn() {
    const Speaker sp = take_turn();
    const double start = t_;
    const auto n = 1 + rng_() % 3;
    for (std::uint64_t i = 0; i < n; ++i) {
      if (i) t_ += uniform_in(rng_, 0.05, 0.15);
      add_word(sp, next_plain_word(), uniform_in(rng_, 0.15, 0.45),
               uniform_in(rng_, 0.95, 1.05));
    }
    add_act(sp, "sv", start, t_);
  }

  // A turn ending in a filler token. `act_initial` makes the filler the
  // act's only word; otherwise plain words precede it.
  void plant_filler_turn(double dur, bool act_initial, bool valid, const std::string& reason) {
    const Speaker sp = take_turn();
    const double start = t_;
    if (!act_initial) {
      const auto n = 1 + rng_() % 3;
      for (std::uint64_t i = 0; i < n; ++i) {
        if (i) t_ += uniform_in(rng_, 0.05, 0.15);
        add_word(sp, next_plain_word(), uniform_in(rng_, 0.15, 0.45),
                 uniform_in(rng_, 0.95, 1.05));
      }
      t_ += uniform_in(rng_, 0.05, 0.15);
    }
    record_filler(sp, dur, valid, reason, act_initial);
    add_act(sp, "sv", start, t_);
  }

  void record_filler(Speaker sp, double dur, bool valid, const std::string& reason,
                     bool act_initial) {
    PlantedFiller pf;
    pf.session_id = session_.id;
    pf.speaker = sp;
    pf.word_index = session_.words[static_cast<std::size_t>(index(sp))].size();
    pf.lexical_form = (filler_lex_++ % 2 == 0) ? "uh" : "um";
    pf.start = t_;
    pf.end = t_ + dur;
    pf.position = act_initial ? FillerPosition::start : FillerPosition::mid;
    pf.valid = valid;
    pf.reason = reason;
    truth_.fillers.push_back(pf);
    add_word(sp, pf.lexical_form, dur, uniform_in(rng_, 0.8, 1.3));
  }

  // Filler sandwiched between words with only 0.1s to the next one: fails
  // the trailing-pause criterion.
  void plant_no_pause_turn() {
    const Speaker sp = take_turn();
    const double start = t_;
    add_word(sp, next_plain_word(), uniform_in(rng_, 0.15, 0.45), uniform_in(rng_, 0.95, 1.05));
    t_ += uniform_in(rng_, 0.05, 0.15);
    record_filler(sp, uniform_in(rng_, 0.25, 0.55), false, "no_pause", false);
    t_ += 0.1;
    add_word(sp, next_plain_word(), uniform_in(rng_, 0.15, 0.45), uniform_in(rng_, 0.95, 1.05));
    add_act(sp, "sv", start, t_);
  }

  void backchannel(Speaker sp, double delay, double dur) {
    t_ += delay;
    add_word(sp, "mhm", dur, uniform_in(rng_, 0.95, 1.05));
  }

  void plant_listener_overlap_turn() {
    const Speaker sp = take_turn();
    const double start = t_;
    record_filler(sp, uniform_in(rng_, 0.25, 0.55), false, "listener_overlap", true);
    add_act(sp, "sv", start, t_);
    backchannel(other(sp), uniform_in(rng_, 0.25, 0.6), 0.25);
  }

  Speaker plant_ynq_turn(bool valid, const std::string& reason) {
    const Speaker sp = take_turn();
    const double start = t_;
    const auto n = 3 + rng_() % 3;
    for (std::uint64_t i = 0; i < n; ++i) {
      if (i) t_ += uniform_in(rng_, 0.05, 0.15);
      add_word(sp, kQuestionWords[static_cast<std::size_t>(i % kQuestionWords.size())],
               uniform_in(rng_, 0.15, 0.4), uniform_in(rng_, 0.95, 1.08));
    }
    PlantedYnq py;
    py.session_id = session_.id;
    py.speaker = sp;
    py.da_index = session_.dialog_acts[static_cast<std::size_t>(index(sp))].size();
    py.utterance_end = t_;
    py.valid = valid;
    py.reason = reason;
    truth_.ynqs.push_back(py);
    add_act(sp, "ynq", start, t_);
    return sp;
  }

  AudioChannelPair render() const {
    AudioChannelPair audio;
    audio.sample_rate = cfg_.sample_rate;
    const auto n = static_cast<std::size_t>(
        std::llround(session_.duration * cfg_.sample_rate));
    audio.channels[0].assign(n, 0.0f);
    audio.channels[1].assign(n, 0.0f);
    constexpr std::array<double, 3> partials = {1.0, 0.5, 0.25};
    constexpr double norm = 1.75;
    for (const auto& tone : tones_) {
      auto& ch = audio.channels[static_cast<std::size_t>(index(tone.speaker))];
      const auto i0 = static_cast<std::size_t>(std::llround(tone.start * cfg_.sample_rate));
      const auto i1 = std::min(
          n, static_cast<std::size_t>(std::llround(tone.end * cfg_.sample_rate)));
      const auto len = i1 - i0;
      const auto ramp = std::min<std::size_t>(
          static_cast<std::size_t>(cfg_.sample_rate / 200), len / 4);  // 5ms attack/release
      for (std::size_t i = 0; i < len; ++i) {
        const double tt = static_cast<double>(i) / cfg_.sample_rate;
        double v = 0;
        for (std::size_t k = 0; k < partials.size(); ++k)
          v += partials[k] *
               std::sin(2.0 * 3.141592653589793 * tone.f0 * static_cast<double>(k + 1) * tt);
        v *= tone.amp / norm;
        if (ramp > 0) {
          if (i < ramp) v *= static_cast<double>(i + 1) / static_cast<double>(ramp);
          if (len - 1 - i < ramp) v *= static_cast<double>(len - i) / static_cast<double>(ramp);
        }
        ch[i0 + i] += static_cast<float>(v);
      }
    }
    return audio;
  }

  const SyntheticCorpusConfig& cfg_;
  GroundTruth& truth_;
  std::mt19937_64 rng_;
  Session session_;
  std::vector<TonePlan> tones_;
  double t_ = 0;
  Speaker next_ = Speaker::A;
  std::size_t word_cursor_ = 0;
  int filler_lex_ = 0;
  int valid_planted_ = 0;
};

}  // namespace detail

inline std::string synth_session_id(int idx) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "synth-%03d", idx);
  return buf;
}

inline SyntheticCorpus generate_corpus(const SyntheticCorpusConfig& cfg) {
  SyntheticCorpus corpus;
  corpus.config = cfg;
  for (int i = 0; i < cfg.n_sessions; ++i) {
    detail::SessionBuilder builder(synth_session_id(i), cfg, corpus.truth);
    corpus.sessions.push_back(builder.build());
  }
  return corpus;
}

inline nlohmann::json ground_truth_to_json(const GroundTruth& truth) {
  nlohmann::json j;
  j["fillers"] = nlohmann::json::array();
  for (const auto& f : truth.fillers)
    j["fillers"].push_back({{"session", f.session_id},
                            {"speaker", to_string(f.speaker)},
                            {"word_index", f.word_index},
                            {"lexical_form", f.lexical_form},
                            {"start", f.start},
                            {"end", f.end},
                            {"position", to_string(f.position)},
                            {"valid", f.valid},
                            {"reason", f.reason}});
  j["ynqs"] = nlohmann::json::array();
  for (const auto& y : truth.ynqs)
    j["ynqs"].push_back({{"session", y.session_id},
                         {"speaker", to_string(y.speaker)},
                         {"da_index", y.da_index},
                         {"utterance_end", y.utterance_end},
                         {"valid", y.valid},
                         {"reason", y.reason}});
  return j;
}

inline GroundTruth ground_truth_from_json(const nlohmann::json& j) {
  GroundTruth truth;
  for (const auto& e : j.at("fillers")) {
    PlantedFiller f;
    f.session_id = e.at("session").get<std::string>();
    f.speaker = parse_speaker(e.at("speaker").get<std::string>());
    f.word_index = e.at("word_index").get<std::size_t>();
    f.lexical_form = e.at("lexical_form").get<std::string>();
    f.start = e.at("start").get<double>();
    f.end = e.at("end").get<double>();
    f.position = e.at("position").get<std::string>() == "start" ? FillerPosition::start
                                                                : FillerPosition::mid;
    f.valid = e.at("valid").get<bool>();
    f.reason = e.at("reason").get<std::string>();
    truth.fillers.push_back(std::move(f));
  }
  for (const auto& e : j.at("ynqs")) {
    PlantedYnq y;
    y.session_id = e.at("session").get<std::string>();
    y.speaker = parse_speaker(e.at("speaker").get<std::string>());
    y.da_index = e.at("da_index").get<std::size_t>();
    y.utterance_end = e.at("utterance_end").get<double>();
    y.valid = e.at("valid").get<bool>();
    y.reason = e.at("reason").get<std::string>();
    truth.ynqs.push_back(std::move(y));
  }
  return truth;
}

inline void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "sessions");
  fs::create_directories(dir / "audio");
  nlohmann::json index;
  index["seed"] = corpus.config.seed;
  index["sample_rate"] = corpus.config.sample_rate;
  index["generator"] = {{"n_sessions", corpus.config.n_sessions},
                        {"valid_fillers_per_session", corpus.config.valid_fillers_per_session},
                        {"invalid_fillers_per_session", corpus.config.invalid_fillers_per_session},
                        {"ynq_per_session", corpus.config.ynq_per_session},
                        {"invalid_ynq_per_session", corpus.config.invalid_ynq_per_session},
                        {"context_buildup", corpus.config.context_buildup},
                        {"tail_pad", corpus.config.tail_pad}};
  index["sessions"] = nlohmann::json::array();
  for (const auto& gs : corpus.sessions) {
    const auto& id = gs.session.id;
    index["sessions"].push_back(id);
    save_session(gs.session, dir / "sessions" / (id + ".jsonl"));
    write_wav(dir / "audio" / (id + ".A.wav"), gs.audio.sample_rate, 1, gs.audio.channels[0]);
    write_wav(dir / "audio" / (id + ".B.wav"), gs.audio.sample_rate, 1, gs.audio.channels[1]);
    nlohmann::json manifest;
    manifest["session"] = id;
    manifest["sample_rate"] = gs.audio.sample_rate;
    manifest["channels"] = {{{"speaker", "A"}, {"path", "../audio/" + id + ".A.wav"}},
                            {{"speaker", "B"}, {"path", "../audio/" + id + ".B.wav"}}};
    write_text_file(dir / "sessions" / (id + ".manifest.json"), manifest.dump(2) + "\n");
  }
  write_text_file(dir / "corpus.json", index.dump(2) + "\n");
  write_text_file(dir / "ground_truth.json", ground_truth_to_json(corpus.truth).dump(2) + "\n");
}

inline std::vector<std::string> corpus_session_ids(const std::filesystem::path& dir) {
  const auto j = nlohmann::json::parse(read_text_file(dir / "corpus.json"));
  std::vector<std::string> ids;
  for (const auto& s : j.at("sessions")) ids.push_back(s.get<std::string>());
  return ids;
}

inline GroundTruth load_ground_truth(const std::filesystem::path& dir) {
  return ground_truth_from_json(nlohmann::json::parse(read_text_file(dir / "ground_truth.json")));
}

}  // namespace turnhold
