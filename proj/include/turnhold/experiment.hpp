#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "turnhold/dialog.hpp"
#include "turnhold/error.hpp"
#include "turnhold/io.hpp"
#include "turnhold/predictor.hpp"
#include "turnhold/prosody.hpp"
#include "turnhold/stats.hpp"
#include "turnhold/stimulus.hpp"
#include "turnhold/survival.hpp"
#include "turnhold/synth.hpp"
#include "turnhold/version.hpp"

namespace turnhold {

inline constexpr const char* kGroupWithFiller = "with-filler";
inline constexpr const char* kGroupWithoutFiller = "without-filler";

struct ExperimentConfig {
  std::string corpus_dir;
  std::string output_dir;
  PredictorSpec predictor;
  FillerCriteria filler_criteria;
  YnqCriteria ynq_criteria;
  StimulusOptions stimulus;
  ProsodyConfig prosody;
  double frame_rate = 50.0;      // activity-timeline granularity
  double shift_threshold = 0.5;
  TieMethod ties = TieMethod::efron;
  int parallelism = 1;
  std::uint64_t seed = 42;       // forwarded to the corpus generator
  SyntheticCorpusConfig generator;
};

// Canonical JSON dump of everything that affects results (output paths
// excluded); hashed into every report for provenance.
inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["corpus_dir"] = c.corpus_dir;
  j["frame_rate"] = c.frame_rate;
  j["shift_threshold"] = c.shift_threshold;
  j["ties"] = c.ties == TieMethod::efron ? "efron" : "breslow";
  j["seed"] = c.seed;
  j["predictor"] = {
      {"kind", c.predictor.kind == PredictorKind::synthetic        ? "synthetic"
               : c.predictor.kind == PredictorKind::stream_file    ? "stream-file"
                                                                   : "external-process"},
      {"stream_dir", c.predictor.stream_dir},
      {"command", c.predictor.command},
      {"synthetic",
       {{"base_hold_time", c.predictor.synthetic.base_hold_time},
        {"filler_hold_bonus", c.predictor.synthetic.filler_hold_bonus},
        {"ynq_shift_time", c.predictor.synthetic.ynq_shift_time},
        {"decay_rate", c.predictor.synthetic.decay_rate},
        {"noise_seed", c.predictor.synthetic.noise_seed},
        {"noise_sd", c.predictor.synthetic.noise_sd},
        {"duration_hold_slope", c.predictor.synthetic.duration_hold_slope},
        {"context_thp", c.predictor.synthetic.context_thp},
        {"frame_rate", c.predictor.synthetic.frame_rate}}}};
  j["filler_criteria"] = {{"min_duration", c.filler_criteria.min_duration},
                          {"min_pause", c.filler_criteria.min_pause},
                          {"isolation", c.filler_criteria.isolation},
                          {"min_context", c.filler_criteria.min_context},
                          {"spellings", c.filler_criteria.spellings}};
  j["ynq_criteria"] = {{"question_labels", c.ynq_criteria.question_labels},
                       {"min_pause", c.ynq_criteria.min_pause},
                       {"isolation", c.ynq_criteria.isolation},
                       {"min_context", c.ynq_criteria.min_context},
                       {"max_shift", c.ynq_criteria.max_shift}};
  j["stimulus"] = {{"context_len", c.stimulus.context_len},
                   {"silence_len", c.stimulus.silence_len},
                   {"crossfade", c.stimulus.crossfade},
                   {"excise", c.stimulus.excise},
                   {"max_splice", c.stimulus.max_splice}};
  j["prosody"] = {{"frame_len", c.prosody.frame_len},
                  {"hop", c.prosody.hop},
                  {"f0_min", c.prosody.f0_min},
                  {"f0_max", c.prosody.f0_max},
                  {"voicing_threshold", c.prosody.voicing_threshold},
                  {"rms_floor", c.prosody.rms_floor}};
  j["generator"] = {{"n_sessions", c.generator.n_sessions},
                    {"sample_rate", c.generator.sample_rate},
                    {"valid_fillers_per_session", c.generator.valid_fillers_per_session},
                    {"invalid_fillers_per_session", c.generator.invalid_fillers_per_session},
                    {"ynq_per_session", c.generator.ynq_per_session},
                    {"invalid_ynq_per_session", c.generator.invalid_ynq_per_session},
                    {"context_buildup", c.generator.context_buildup},
                    {"tail_pad", c.generator.tail_pad}};
  return j;
}

inline std::string config_hash(const ExperimentConfig& c) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(config_to_json(c).dump())));
  return buf;
}

// Sequential access to a corpus, one session in memory at a time.
struct LoadedSession {
  Session session;
  AudioChannelPair audio;
};

class CorpusSource {
 public:
  virtual ~CorpusSource() = default;
  virtual std::size_t size() const = 0;
  virtual LoadedSession load(std::size_t i) const = 0;
};

class DirCorpusSource final : public CorpusSource {
 public:
  explicit DirCorpusSource(std::filesystem::path dir) : dir_(std::move(dir)) {
    const auto index = dir_ / "corpus.json";
    if (std::filesystem::exists(index)) {
      ids_ = corpus_session_ids(dir_);
    } else {
      const auto sessions = dir_ / "sessions";
      if (!std::filesystem::is_directory(sessions))
        throw DataError("corpus directory " + dir_.string() + " has no sessions/");
      for (const auto& e : std::filesystem::directory_iterator(sessions))
        if (e.path().extension() == ".jsonl") ids_.push_back(e.path().stem().string());
      std::sort(ids_.begin(), ids_.end());
    }
    if (ids_.empty()) throw DataError("corpus directory " + dir_.string() + " lists no sessions");
  }

  std::size_t size() const override { return ids_.size(); }

  LoadedSession load(std::size_t i) const override {
    const auto& id = ids_[i];
    const auto transcript = dir_ / "sessions" / (id + ".jsonl");
    const auto manifest = dir_ / "sessions" / (id + ".manifest.json");
    if (!std::filesystem::exists(manifest))
      throw DataError("session " + id + " has no audio manifest");
    LoadedSession ls;
    ls.session = load_session(transcript, manifest);
    ls.audio = load_audio(ls.session.audio);
    return ls;
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> ids_;
};

class MemoryCorpusSource final : public CorpusSource {
 public:
  explicit MemoryCorpusSource(const SyntheticCorpus& corpus) : corpus_(&corpus) {}
  std::size_t size() const override { return corpus_->sessions.size(); }
  LoadedSession load(std::size_t i) const override {
    return {corpus_->sessions[i].session, corpus_->sessions[i].audio};
  }

 private:
  const SyntheticCorpus* corpus_;
};

struct ExperimentResult {
  std::string experiment;  // "exp1" | "exp2" | "exp3"
  std::vector<SurvivalRecord> records;
  std::vector<KMCurve> curves;
  std::optional<LogRankResult> logrank;
  std::optional<CoxFit> cox;
  std::size_t n_sessions = 0;
  std::size_t n_candidates = 0;  // exp2: utterances; exp1/3: fillers
  std::size_t n_pairings = 0;    // exp2: (utterance, filler) insertions
  std::size_t n_censored = 0;
  std::size_t n_dropped_no_f0 = 0;
  std::size_t n_dropped_small_group = 0;
  std::string covariates_csv;  // exp3 only
  std::string config_hash;
};

namespace detail {

// Deterministic parallel map: results land in index-fixed slots, so thread
// timing never changes output. Exceptions are rethrown on the caller.
template <typename Fn>
inline void parallel_for(std::size_t n, int parallelism, Fn&& fn) {
  const int threads = std::max(1, std::min<int>(parallelism, static_cast<int>(n)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// Shift outcome -> survival record fields. Censored records take the
// horizon as their time; an observed shift in the onset frame itself is
// clamped to half a frame so times stay positive.
inline void fill_record(SurvivalRecord& rec, const ShiftOutcome& outcome, double frame_rate) {
  if (outcome.censored) {
    rec.time = outcome.horizon;
    rec.event = false;
  } else {
    rec.time = std::max(*outcome.time, 0.5 / frame_rate);
    rec.event = true;
  }
}

inline ShiftOutcome member_shift(const StimulusMember& m, const ExperimentConfig& cfg,
                                 double* frame_rate_out = nullptr) {
  const THPSeries series = predict(m, cfg.predictor);
  if (frame_rate_out) *frame_rate_out = series.frame_rate;
  return turn_shift_time(series, m.silence_onset, cfg.shift_threshold, m.silence_len);
}

inline void finish_groups(ExperimentResult& res) {
  std::sort(res.records.begin(), res.records.end(),
            [](const SurvivalRecord& a, const SurvivalRecord& b) {
              return a.id != b.id ? a.id < b.id : a.group < b.group;
            });
  for (const auto& r : res.records)
    if (!r.event) ++res.n_censored;
  std::vector<std::string> groups;
  for (const auto& r : res.records)
    if (std::find(groups.begin(), groups.end(), r.group) == groups.end())
      groups.push_back(r.group);
  std::sort(groups.begin(), groups.end());
  for (const auto& g : groups) {
    std::vector<SurvivalRecord> sub;
    for (const auto& r : res.records)
      if (r.group == g) sub.push_back(r);
    res.curves.push_back(kaplan_meier(sub, g));
  }
  if (groups.size() == 2) {
    try {
      res.logrank = log_rank(res.records);
    } catch (const ValidationError&) {
      // no events while both groups at risk (e.g. everything censored):
      // the statistic is undefined, the report just omits it
    }
  }
}

}  // namespace detail

// Experiment 1: for every valid filler, compare the model's turn-shift time
// on the stimulus including the filler against the same stimulus with the
// filler silenced.
inline ExperimentResult run_exp1(const CorpusSource& corpus, const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.experiment = "exp1";
  res.config_hash = config_hash(cfg);
  res.n_sessions = corpus.size();
  for (std::size_t si = 0; si < corpus.size(); ++si) {
    const LoadedSession ls = corpus.load(si);
    const auto fillers = find_fillers(ls.session, cfg.filler_criteria);
    res.n_candidates += fillers.size();
    std::vector<std::array<SurvivalRecord, 2>> slots(fillers.size());
    detail::parallel_for(fillers.size(), cfg.parallelism, [&](std::size_t fi) {
      const StimulusPair pair = build_exclusion_pair(ls.session, ls.audio, fillers[fi],
                                                     cfg.stimulus);
      for (int m = 0; m < 2; ++m) {
        const StimulusMember& member = m == 0 ? pair.treatment : pair.control;
        double rate = 0;
        const ShiftOutcome outcome = detail::member_shift(member, cfg, &rate);
        auto& rec = slots[fi][static_cast<std::size_t>(m)];
        rec.id = pair.id;
        rec.group = m == 0 ? kGroupWithFiller : kGroupWithoutFiller;
        detail::fill_record(rec, outcome, rate);
      }
    });
    for (auto& pair_records : slots)
      for (auto& rec : pair_records) res.records.push_back(std::move(rec));
  }
  detail::finish_groups(res);
  return res;
}

// Experiment 2: insert each valid filler from the same speaker and session
// after each accepted question-final utterance; compare against the
// unmodified utterance.
inline ExperimentResult run_exp2(const CorpusSource& corpus, const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.experiment = "exp2";
  res.config_hash = config_hash(cfg);
  res.n_sessions = corpus.size();
  for (std::size_t si = 0; si < corpus.size(); ++si) {
    const LoadedSession ls = corpus.load(si);
    const auto fillers = find_fillers(ls.session, cfg.filler_criteria);

    // The candidate filter already runs the predictor on each control
    // stimulus; capture those outcomes so accepted controls are not
    // predicted twice.
    std::map<std::string, std::pair<ShiftOutcome, double>> control_runs;
    const auto control_shift = [&](const StimulusMember& m) -> std::optional<double> {
      double rate = 0;
      const ShiftOutcome outcome = detail::member_shift(m, cfg, &rate);
      control_runs[m.pair_id] = {outcome, rate};
      if (outcome.censored) return std::nullopt;
      return outcome.time;
    };
    const auto ynqs =
        find_ynq_utterances(ls.session, ls.audio, control_shift, cfg.ynq_criteria, cfg.stimulus);
    res.n_candidates += ynqs.size();

    for (const auto& ynq : ynqs) {
      const auto control_id =
          detail::pair_tag(ls.session.id, ynq.speaker, "q", ynq.da_index);
      SurvivalRecord control_rec;
      control_rec.id = control_id;
      control_rec.group = kGroupWithoutFiller;
      const auto& [outcome, rate] = control_runs.at(control_id);
      detail::fill_record(control_rec, outcome, rate);
      res.records.push_back(std::move(control_rec));

      std::vector<const FillerCandidate*> same_speaker;
      for (const auto& f : fillers)
        if (f.speaker == ynq.speaker) same_speaker.push_back(&f);
      std::vector<SurvivalRecord> slots(same_speaker.size());
      detail::parallel_for(same_speaker.size(), cfg.parallelism, [&](std::size_t fi) {
        const StimulusPair pair =
            build_insertion_pair(ls.session, ls.audio, ynq, *same_speaker[fi], cfg.stimulus);
        double rate = 0;
        const ShiftOutcome outcome = detail::member_shift(pair.treatment, cfg, &rate);
        auto& rec = slots[fi];
        rec.id = pair.id;
        rec.group = kGroupWithFiller;
        detail::fill_record(rec, outcome, rate);
      });
      res.n_pairings += slots.size();
      for (auto& rec : slots) res.records.push_back(std::move(rec));
    }
  }
  detail::finish_groups(res);
  return res;
}

inline const std::vector<std::string>& exp3_term_names() {
  static const std::vector<std::string> names = {"F0",       "Intensity", "Lex_um",
                                                 "Duration", "Pos_mid",   "F0:Lex_um"};
  return names;
}

// Experiment 3: joint covariate effects on the with-filler shift times via
// proportional-hazards regression. Pitch and intensity are standardized
// within (session, speaker); log duration globally. `exp1_records`, when
// given, supplies the response (time, event) per pair id instead of
// re-running the predictor.
inline ExperimentResult run_exp3(
    const CorpusSource& corpus, const ExperimentConfig& cfg,
    const std::map<std::string, std::pair<double, bool>>* exp1_records = nullptr) {
  ExperimentResult res;
  res.experiment = "exp3";
  res.config_hash = config_hash(cfg);
  res.n_sessions = corpus.size();

  struct Row {
    std::string id;
    std::string group_key;  // session/speaker
    RawProsody raw;
    SurvivalRecord rec;
  };
  std::vector<Row> rows;

  for (std::size_t si = 0; si < corpus.size(); ++si) {
    const LoadedSession ls = corpus.load(si);
    const auto fillers = find_fillers(ls.session, cfg.filler_criteria);
    res.n_candidates += fillers.size();
    std::vector<Row> slots(fillers.size());
    detail::parallel_for(fillers.size(), cfg.parallelism, [&](std::size_t fi) {
      const auto& f = fillers[fi];
      Row row;
      row.group_key = ls.session.id + "/" + to_string(f.speaker);
      row.raw = measure_filler(f, ls.audio, cfg.prosody);
      const StimulusPair pair = build_exclusion_pair(ls.session, ls.audio, f, cfg.stimulus);
      row.id = pair.id;
      row.rec.id = pair.id;
      row.rec.group = kGroupWithFiller;
      if (exp1_records) {
        const auto it = exp1_records->find(pair.id);
        if (it == exp1_records->end())
          throw DataError("no with-filler record for pair " + pair.id +
                          " in the supplied records");
        row.rec.time = it->second.first;
        row.rec.event = it->second.second;
      } else {
        double rate = 0;
        const ShiftOutcome outcome = detail::member_shift(pair.treatment, cfg, &rate);
        detail::fill_record(row.rec, outcome, rate);
      }
      slots[fi] = std::move(row);
    });
    for (auto& row : slots) rows.push_back(std::move(row));
  }

  // Drop unusable candidates: no voiced frames, or too few groupmates to
  // standardize against.
  std::vector<Row> kept;
  std::map<std::string, std::size_t> group_sizes;
  for (const auto& row : rows) {
    if (!row.raw.f0_semitones) {
      ++res.n_dropped_no_f0;
      continue;
    }
    ++group_sizes[row.group_key];
    kept.push_back(row);
  }
  std::vector<Row> usable;
  for (auto& row : kept) {
    if (group_sizes[row.group_key] < 2) {
      ++res.n_dropped_small_group;
      continue;
    }
    usable.push_back(std::move(row));
  }

  std::size_t n_events = 0;
  for (const auto& row : usable) n_events += row.rec.event ? 1 : 0;
  if (n_events < 10)
    throw ValidationError(
        "experiment 3 needs at least 10 observed turn-shift events, got " +
        std::to_string(n_events) +
        "; enlarge the corpus, relax the selection criteria, or check the predictor");

  std::map<std::string, StandardizationStats> f0_stats, int_stats;
  {
    std::map<std::string, std::vector<double>> f0_by_group, int_by_group;
    for (const auto& row : usable) {
      f0_by_group[row.group_key].push_back(*row.raw.f0_semitones);
      int_by_group[row.group_key].push_back(row.raw.intensity_db);
    }
    for (const auto& [key, values] : f0_by_group)
      f0_stats[key] = standardization_stats(values, key + " pitch");
    for (const auto& [key, values] : int_by_group)
      int_stats[key] = standardization_stats(values, key + " intensity");
  }
  std::vector<double> durations;
  for (const auto& row : usable) durations.push_back(row.raw.log_duration);
  const auto dur_stats = standardization_stats(durations, "log duration");

  std::sort(usable.begin(), usable.end(), [](const Row& a, const Row& b) { return a.id < b.id; });
  std::string cov_csv =
      "pair_id,time,censored,f0_std,intensity_std,lex_um,log_duration_std,pos_mid,f0_x_lexum\n";
  for (auto& row : usable) {
    CovariateStats stats;
    stats.f0 = f0_stats.at(row.group_key);
    stats.intensity = int_stats.at(row.group_key);
    stats.log_duration = dur_stats;
    const auto cov = extract_covariates(row.raw, stats);
    const auto& v = *cov;  // F0 presence established above
    row.rec.covariates = {v.f0_std, v.intensity_std, v.lex_um,
                          v.log_duration_std, v.pos_mid, v.f0_x_lexum};
    cov_csv += csv_field(row.id) + "," + format_double(row.rec.time) + "," +
               (row.rec.event ? "0" : "1") + "," + format_double(v.f0_std) + "," +
               format_double(v.intensity_std) + "," + format_double(v.lex_um) + "," +
               format_double(v.log_duration_std) + "," + format_double(v.pos_mid) + "," +
               format_double(v.f0_x_lexum) + "\n";
    res.records.push_back(row.rec);
  }
  res.covariates_csv = std::move(cov_csv);
  for (const auto& r : res.records)
    if (!r.event) ++res.n_censored;
  res.curves.push_back(kaplan_meier(res.records, kGroupWithFiller));
  res.cox = cox_fit(res.records, exp3_term_names(), cfg.ties);
  return res;
}

inline std::vector<SurvivalRecord> read_records_csv(const std::string& csv) {
  std::vector<SurvivalRecord> out;
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != "pair_id,group,time,event")
    throw DataError("records CSV: unexpected header \"" + line + "\"");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::array<std::string, 4> field;
    std::size_t pos = 0;
    for (int f = 0; f < 3; ++f) {
      const auto comma = line.find(',', pos);
      if (comma == std::string::npos)
        throw ParseError("records CSV", line_no, "expected 4 fields");
      field[static_cast<std::size_t>(f)] = line.substr(pos, comma - pos);
      pos = comma + 1;
    }
    field[3] = line.substr(pos);
    SurvivalRecord rec;
    rec.id = field[0];
    rec.group = field[1];
    try {
      rec.time = std::stod(field[2]);
    } catch (const std::exception&) {
      throw ParseError("records CSV", line_no, "bad time value \"" + field[2] + "\"");
    }
    if (field[3] != "0" && field[3] != "1")
      throw ParseError("records CSV", line_no, "event flag must be 0 or 1");
    rec.event = field[3] == "1";
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::map<std::string, std::pair<double, bool>> parse_records_csv(
    const std::string& csv, const std::string& group_filter = "") {
  std::map<std::string, std::pair<double, bool>> out;
  for (const auto& rec : read_records_csv(csv)) {
    if (!group_filter.empty() && rec.group != group_filter) continue;
    out[rec.id] = {rec.time, rec.event};
  }
  return out;
}

// ---- report emission ----------------------------------------------------

inline std::string result_to_markdown(const ExperimentResult& res) {
  std::ostringstream md;
  md << "# " << res.experiment << " report\n\n";
  md << "- toolkit version: " << kVersion << "\n";
  md << "- config hash: " << res.config_hash << "\n";
  md << "- sessions: " << res.n_sessions << "\n";
  md << "- candidates: " << res.n_candidates << "\n";
  if (res.experiment == "exp2") md << "- insertion pairings: " << res.n_pairings << "\n";
  md << "- records: " << res.records.size() << " (censored: " << res.n_censored << ")\n";
  if (res.n_dropped_no_f0 > 0)
    md << "- candidates dropped for missing F0: " << res.n_dropped_no_f0 << "\n";
  if (res.n_dropped_small_group > 0)
    md << "- candidates dropped for undersized standardization group: "
       << res.n_dropped_small_group << "\n";
  if (res.records.empty()) {
    md << "\nStatus: no candidates matched; empty result.\n";
    return md.str();
  }
  md << "\n## Survival\n\n";
  for (const auto& c : res.curves) {
    const auto& last = c.steps.back();
    md << "- group `" << (c.group.empty() ? "all" : c.group) << "`: final survival "
       << format_fixed(last.survival, 4) << " after " << (c.steps.size() - 1)
       << " distinct event times\n";
  }
  if (res.logrank) {
    md << "\n## Log-rank\n\n";
    md << "- chi2 = " << format_fixed(res.logrank->chi2, 4) << " (df " << res.logrank->df
       << "), p = " << format_p_value(res.logrank->p) << "\n";
    for (int g = 0; g < 2; ++g)
      md << "- " << res.logrank->groups[static_cast<std::size_t>(g)]
         << ": observed " << format_fixed(res.logrank->observed[static_cast<std::size_t>(g)], 1)
         << ", expected " << format_fixed(res.logrank->expected[static_cast<std::size_t>(g)], 1)
         << "\n";
  }
  if (res.cox) {
    md << "\n## Proportional hazards\n\n";
    md << "```\n" << format_cox_table(*res.cox) << "```\n\n";
    md << "- log partial likelihood: " << format_fixed(res.cox->log_likelihood, 4) << " (null "
       << format_fixed(res.cox->null_log_likelihood, 4) << ")\n";
    md << "- iterations: " << res.cox->iterations
       << (res.cox->converged ? ", converged" : ", NOT converged") << "\n";
    md << "- ties: " << (res.cox->ties == TieMethod::efron ? "efron" : "breslow") << "\n";
  }
  return md.str();
}

inline void write_result(const ExperimentResult& res, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_text_file(out_dir / "records.csv", records_to_csv(res.records));
  write_text_file(out_dir / "km.csv", km_to_csv(res.curves));
  if (!res.covariates_csv.empty())
    write_text_file(out_dir / "covariates.csv", res.covariates_csv);
  if (res.cox) {
    write_text_file(out_dir / "cox.csv", cox_to_csv(*res.cox));
    write_text_file(out_dir / "cox.txt", format_cox_table(*res.cox));
  }
  write_text_file(out_dir / "report.md", result_to_markdown(res));
}

}  // namespace turnhold
