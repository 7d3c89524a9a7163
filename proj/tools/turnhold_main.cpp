// turnhold: stimulus-manipulation experiments probing filled pauses as
// turn-holding cues, driven by a turn-hold-probability predictor.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "turnhold/experiment.hpp"
#include "turnhold/plot.hpp"

namespace fs = std::filesystem;
using namespace turnhold;

namespace {

struct ExpCli {
  ExperimentConfig cfg;
  std::string predictor = "synthetic";
  std::string ties = "efron";
  std::string exp1_records;  // exp3: join times from an existing records.csv
};

struct SynthCli {
  SyntheticCorpusConfig cfg;
  std::string out_dir;
};

struct PlotCli {
  std::string kind;
  std::string in;
  std::string out_dir;
  std::string title;
  std::string speaker = "A";
  double silence_onset = 0.0;
  double threshold = 0.5;
};

void add_experiment_options(CLI::App* cmd, ExpCli& o) {
  cmd->add_option("--corpus", o.cfg.corpus_dir, "corpus directory (sessions/, audio/)")
      ->required();
  cmd->add_option("--out", o.cfg.output_dir, "output directory for CSVs and report.md")
      ->required();
  cmd->add_option("--frame-rate", o.cfg.frame_rate, "activity frame rate, Hz")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--threshold", o.cfg.shift_threshold, "turn-shift probability threshold")
      ->check(CLI::Range(1e-9, 1.0))
      ->capture_default_str();
  cmd->add_option("--ties", o.ties, "Cox tie handling")
      ->check(CLI::IsMember({"efron", "breslow"}))
      ->capture_default_str();
  cmd->add_option("--parallelism", o.cfg.parallelism, "prediction worker threads")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();

  cmd->add_option("--predictor", o.predictor, "predictor kind")
      ->check(CLI::IsMember({"synthetic", "stream", "command"}))
      ->capture_default_str();
  cmd->add_option("--stream-dir", o.cfg.predictor.stream_dir,
                  "directory of <pair>.<kind>.vap files (stream predictor)");
  cmd->add_option("--predictor-cmd", o.cfg.predictor.command,
                  "external predictor command; {audio} expands to the stimulus WAV")
      ->envname("TURNHOLD_PREDICTOR_CMD");

  auto& syn = o.cfg.predictor.synthetic;
  cmd->add_option("--base-hold-time", syn.base_hold_time,
                  "synthetic: hold midpoint after silence onset, s")
      ->capture_default_str();
  cmd->add_option("--filler-hold-bonus", syn.filler_hold_bonus,
                  "synthetic: extra hold when the stimulus ends in a filler, s")
      ->capture_default_str();
  cmd->add_option("--ynq-shift-time", syn.ynq_shift_time,
                  "synthetic: shift midpoint after question-final stimuli, s")
      ->capture_default_str();
  cmd->add_option("--decay-rate", syn.decay_rate, "synthetic: sigmoid steepness, 1/s")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--noise-seed", syn.noise_seed, "synthetic: midpoint jitter seed")
      ->capture_default_str();
  cmd->add_option("--noise-sd", syn.noise_sd, "synthetic: midpoint jitter SD, s")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--duration-hold-slope", syn.duration_hold_slope,
                  "synthetic: extra hold per second of trailing filler")
      ->capture_default_str();
  cmd->add_option("--context-thp", syn.context_thp,
                  "synthetic: hold probability before silence onset")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--pred-frame-rate", syn.frame_rate, "synthetic: output frame rate, Hz")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto& fc = o.cfg.filler_criteria;
  cmd->add_option("--min-filler-duration", fc.min_duration,
                  "candidate fillers must be strictly longer, s")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--filler-pause", fc.min_pause,
                  "required same-speaker pause after the filler, s")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--filler-isolation", fc.isolation,
                  "required listener silence around the filler, s")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--min-context", fc.min_context, "required dialog context before a filler, s")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--spelling", fc.spellings, "accepted filler spellings")
      ->capture_default_str();

  auto& yc = o.cfg.ynq_criteria;
  cmd->add_option("--ynq-label", yc.question_labels, "dialog-act labels treated as questions")
      ->capture_default_str();
  cmd->add_option("--ynq-pause", yc.min_pause,
                  "required same-speaker pause after the question, s")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--ynq-isolation", yc.isolation,
                  "required listener silence around the question end, s")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--ynq-min-context", yc.min_context,
                  "required dialog context before the question end, s")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--ynq-max-shift", yc.max_shift,
                  "control stimulus must shift before this, s")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto& st = o.cfg.stimulus;
  cmd->add_option("--context-len", st.context_len, "stimulus context length, s")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--silence-len", st.silence_len, "appended silence / horizon, s")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--crossfade", st.crossfade, "splice ramp length, s")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_flag("--excise", st.excise, "cut trailing fillers out instead of silencing them");
  cmd->add_option("--max-splice", st.max_splice, "longest filler accepted for insertion, s")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

void finalize(ExpCli& o) {
  if (o.predictor == "synthetic") o.cfg.predictor.kind = PredictorKind::synthetic;
  if (o.predictor == "stream") o.cfg.predictor.kind = PredictorKind::stream_file;
  if (o.predictor == "command") o.cfg.predictor.kind = PredictorKind::external_process;
  o.cfg.ties = o.ties == "breslow" ? TieMethod::breslow : TieMethod::efron;
  if (o.cfg.predictor.kind == PredictorKind::stream_file && o.cfg.predictor.stream_dir.empty())
    throw UsageError("--stream-dir is required with --predictor stream");
  if (o.cfg.predictor.kind == PredictorKind::external_process && o.cfg.predictor.command.empty())
    throw UsageError(
        "--predictor-cmd (or TURNHOLD_PREDICTOR_CMD) is required with --predictor command");
}

void print_summary(const ExperimentResult& res, const fs::path& out_dir) {
  std::cout << res.experiment << ": " << res.n_sessions << " sessions, " << res.n_candidates
            << " candidates";
  if (res.n_pairings > 0) std::cout << ", " << res.n_pairings << " insertion pairings";
  std::cout << ", " << res.records.size() << " records (" << res.n_censored << " censored)\n";
  if (res.records.empty()) {
    std::cout << "no candidates matched; empty result\n";
  } else if (res.logrank) {
    std::cout << "log-rank chi2 " << format_double(res.logrank->chi2) << ", p "
              << format_p_value(res.logrank->p) << "\n";
  }
  if (res.cox) std::cout << format_cox_table(*res.cox);
  std::cout << "wrote " << (out_dir / "report.md").string() << "\n";
}

void run_experiment_cmd(int which, ExpCli& o) {
  finalize(o);
  DirCorpusSource corpus(o.cfg.corpus_dir);
  ExperimentResult res;
  if (which == 1) {
    res = run_exp1(corpus, o.cfg);
  } else if (which == 2) {
    res = run_exp2(corpus, o.cfg);
  } else {
    std::optional<std::map<std::string, std::pair<double, bool>>> join;
    if (!o.exp1_records.empty())
      join = parse_records_csv(read_text_file(o.exp1_records), kGroupWithFiller);
    res = run_exp3(corpus, o.cfg, join ? &*join : nullptr);
  }
  write_result(res, o.cfg.output_dir);
  print_summary(res, o.cfg.output_dir);
}

void run_synth_cmd(const SynthCli& o) {
  const SyntheticCorpus corpus = generate_corpus(o.cfg);
  write_corpus(corpus, o.out_dir);
  std::size_t vf = 0, vq = 0;
  for (const auto& f : corpus.truth.fillers) vf += f.valid ? 1 : 0;
  for (const auto& q : corpus.truth.ynqs) vq += q.valid ? 1 : 0;
  std::cout << "wrote " << corpus.sessions.size() << " sessions to " << o.out_dir << "\n"
            << "planted fillers: " << vf << " valid, " << corpus.truth.fillers.size() - vf
            << " invalid\n"
            << "planted questions: " << vq << " valid, " << corpus.truth.ynqs.size() - vq
            << " invalid\n";
}

void run_plot_cmd(const PlotCli& o) {
  fs::create_directories(o.out_dir);
  if (o.kind == "km") {
    const auto records = read_records_csv(read_text_file(o.in));
    if (records.empty()) throw ValidationError("no records in " + o.in);
    std::vector<std::string> groups;
    for (const auto& r : records)
      if (std::find(groups.begin(), groups.end(), r.group) == groups.end())
        groups.push_back(r.group);
    std::sort(groups.begin(), groups.end());
    std::vector<KMCurve> curves;
    for (const auto& g : groups) {
      std::vector<SurvivalRecord> sub;
      for (const auto& r : records)
        if (r.group == g) sub.push_back(r);
      curves.push_back(kaplan_meier(sub, g));
    }
    write_text_file(fs::path(o.out_dir) / "km.svg", plot::km_svg(curves, o.title));
    write_text_file(fs::path(o.out_dir) / "km.csv", km_to_csv(curves));
    std::cout << "wrote " << (fs::path(o.out_dir) / "km.svg").string() << "\n";
    return;
  }
  // thp-trace
  const WireBlock block = read_wire_file(o.in);
  const Speaker sp = parse_speaker(o.speaker);
  THPSeries series;
  if (block.thp_only) {
    series.frame_rate = block.frame_rate;
    series.current_speaker = sp;
    series.values.assign(block.data.begin(), block.data.end());
  } else {
    series = thp_stream(std::span<const float>(block.data), sp, block.frame_rate);
  }
  std::optional<double> shift;
  const auto onset_f =
      static_cast<long long>(std::ceil(o.silence_onset * series.frame_rate - kTimeEps));
  const auto n = static_cast<long long>(series.values.size());
  if (onset_f >= 0 && onset_f < n) {
    const double horizon = static_cast<double>(n - onset_f) / series.frame_rate;
    const ShiftOutcome outcome =
        turn_shift_time(series, o.silence_onset, o.threshold, horizon);
    if (!outcome.censored) shift = outcome.time;
  }
  write_text_file(fs::path(o.out_dir) / "thp.svg",
                  plot::thp_svg(series, o.silence_onset, shift, o.title));
  write_text_file(fs::path(o.out_dir) / "thp.csv", plot::thp_to_csv(series));
  std::cout << "wrote " << (fs::path(o.out_dir) / "thp.svg").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"turn-holding experiments driven by a shift-probability predictor"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "TOML-style config file; command-line flags override");

  SynthCli synth_opts;
  auto* synth = app.add_subcommand("synth", "generate a synthetic dialog corpus");
  synth->add_option("--out", synth_opts.out_dir, "corpus output directory")->required();
  synth->add_option("--seed", synth_opts.cfg.seed, "generator seed")->capture_default_str();
  synth->add_option("--sessions", synth_opts.cfg.n_sessions, "number of sessions")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth->add_option("--sample-rate", synth_opts.cfg.sample_rate, "audio sample rate, Hz")
      ->check(CLI::Range(1000, 96000))
      ->capture_default_str();
  synth->add_option("--valid-fillers", synth_opts.cfg.valid_fillers_per_session,
                    "criteria-passing fillers per session")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synth->add_option("--invalid-fillers", synth_opts.cfg.invalid_fillers_per_session,
                    "criteria-violating fillers per session")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synth->add_option("--ynq", synth_opts.cfg.ynq_per_session,
                    "criteria-passing yes/no questions per session")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synth->add_option("--invalid-ynq", synth_opts.cfg.invalid_ynq_per_session,
                    "criteria-violating yes/no questions per session")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synth->add_option("--context-buildup", synth_opts.cfg.context_buildup,
                    "plain dialog before planted material, s")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth->callback([&] { run_synth_cmd(synth_opts); });

  ExpCli e1, e2, e3;
  auto* exp1 = app.add_subcommand(
      "exp1", "filler exclusion: silence trailing fillers, compare shift latency");
  add_experiment_options(exp1, e1);
  exp1->callback([&] { run_experiment_cmd(1, e1); });

  auto* exp2 =
      app.add_subcommand("exp2", "filler insertion after yes/no questions vs. bare questions");
  add_experiment_options(exp2, e2);
  exp2->callback([&] { run_experiment_cmd(2, e2); });

  auto* exp3 =
      app.add_subcommand("exp3", "prosodic covariate Cox regression on with-filler stimuli");
  add_experiment_options(exp3, e3);
  exp3->add_option("--exp1-records", e3.exp1_records,
                   "join shift times from an existing records.csv instead of re-predicting")
      ->check(CLI::ExistingFile);
  exp3->callback([&] { run_experiment_cmd(3, e3); });

  PlotCli plot_opts;
  auto* plot_cmd = app.add_subcommand("plot", "render survival curves or a THP trace as SVG");
  plot_cmd->add_option("--kind", plot_opts.kind, "plot kind")
      ->required()
      ->check(CLI::IsMember({"km", "thp-trace"}));
  plot_cmd->add_option("--in", plot_opts.in, "records CSV (km) or .vap wire file (thp-trace)")
      ->required()
      ->check(CLI::ExistingFile);
  plot_cmd->add_option("--out", plot_opts.out_dir, "output directory")->required();
  plot_cmd->add_option("--title", plot_opts.title, "plot title");
  plot_cmd->add_option("--speaker", plot_opts.speaker, "current speaker of the trace")
      ->check(CLI::IsMember({"A", "B"}))
      ->capture_default_str();
  plot_cmd->add_option("--silence-onset", plot_opts.silence_onset,
                       "silence onset within the trace, s")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  plot_cmd->add_option("--threshold", plot_opts.threshold, "turn-shift probability threshold")
      ->check(CLI::Range(1e-9, 1.0))
      ->capture_default_str();
  plot_cmd->callback([&] { run_plot_cmd(plot_opts); });

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "turnhold: usage error: " << e.what() << "\n";
    return 1;
  } catch (const PredictorError& e) {
    std::cerr << "turnhold: predictor error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "turnhold: error: " << e.what() << "\n";
    return 2;
  }
}
