#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "turnhold/experiment.hpp"

using namespace turnhold;
using Catch::Approx;
using testutil::TempDir;

namespace {

constexpr double kFrame = 1.0 / 50.0 + 1e-9;

ExperimentConfig quiet_config() {
  ExperimentConfig cfg;
  cfg.predictor.synthetic.noise_sd = 0.0;
  return cfg;
}

SyntheticCorpus small_corpus(int sessions = 2) {
  SyntheticCorpusConfig gc;
  gc.n_sessions = sessions;
  return generate_corpus(gc);
}

}  // namespace

TEST_CASE("filler exclusion produces paired grouped records") {
  const SyntheticCorpus corpus = small_corpus();
  const ExperimentConfig cfg = quiet_config();
  const ExperimentResult res = run_exp1(MemoryCorpusSource(corpus), cfg);

  std::size_t planted = 0;
  for (const auto& f : corpus.truth.fillers) planted += f.valid ? 1 : 0;
  CHECK(res.n_sessions == 2);
  CHECK(res.n_candidates == planted);
  REQUIRE(res.records.size() == 2 * planted);
  CHECK(res.n_censored == 0);

  std::map<std::string, int> per_id;
  for (const auto& r : res.records) {
    ++per_id[r.id];
    REQUIRE(r.event);
    if (r.group == kGroupWithFiller)
      CHECK(r.time == Approx(3.0).margin(kFrame));  // base hold 1s + filler bonus 2s
    else if (r.group == kGroupWithoutFiller)
      CHECK(r.time == Approx(1.0).margin(kFrame));
    else
      FAIL("unexpected group " + r.group);
  }
  for (const auto& [id, n] : per_id) {
    INFO(id);
    CHECK(n == 2);
  }

  REQUIRE(res.curves.size() == 2);
  REQUIRE(res.logrank.has_value());
  CHECK(res.logrank->p < 0.001);
  CHECK_FALSE(res.cox.has_value());
  CHECK(std::is_sorted(res.records.begin(), res.records.end(),
                       [](const SurvivalRecord& a, const SurvivalRecord& b) {
                         return a.id != b.id ? a.id < b.id : a.group < b.group;
                       }));
}

TEST_CASE("parallel execution changes nothing") {
  const SyntheticCorpus corpus = small_corpus();
  ExperimentConfig cfg = quiet_config();
  const ExperimentResult serial = run_exp1(MemoryCorpusSource(corpus), cfg);
  cfg.parallelism = 4;
  const ExperimentResult parallel = run_exp1(MemoryCorpusSource(corpus), cfg);
  CHECK(records_to_csv(serial.records) == records_to_csv(parallel.records));
  CHECK(km_to_csv(serial.curves) == km_to_csv(parallel.curves));
}

TEST_CASE("statistics recompute from the emitted CSV") {
  const SyntheticCorpus corpus = small_corpus();
  const ExperimentResult res = run_exp1(MemoryCorpusSource(corpus), quiet_config());

  const auto back = read_records_csv(records_to_csv(res.records));
  REQUIRE(back.size() == res.records.size());
  const LogRankResult lr = log_rank(back);
  CHECK(lr.chi2 == Approx(res.logrank->chi2).margin(1e-9));

  for (const auto& curve : res.curves) {
    std::vector<SurvivalRecord> sub;
    for (const auto& r : back)
      if (r.group == curve.group) sub.push_back(r);
    const KMCurve re = kaplan_meier(sub, curve.group);
    REQUIRE(re.steps.size() == curve.steps.size());
    for (std::size_t i = 0; i < re.steps.size(); ++i) {
      CHECK(re.steps[i].time == Approx(curve.steps[i].time).margin(1e-12));
      CHECK(re.steps[i].survival == Approx(curve.steps[i].survival).margin(1e-12));
      CHECK(re.steps[i].at_risk == curve.steps[i].at_risk);
    }
  }
}

TEST_CASE("an unmatched corpus yields an empty but writable result") {
  const SyntheticCorpus corpus = small_corpus(1);
  ExperimentConfig cfg = quiet_config();
  cfg.filler_criteria.min_duration = 10.0;  // nothing is that long
  const ExperimentResult res = run_exp1(MemoryCorpusSource(corpus), cfg);
  CHECK(res.records.empty());
  CHECK(res.curves.empty());
  CHECK_FALSE(res.logrank.has_value());

  TempDir out("empty");
  write_result(res, out.path);
  const std::string report = read_text_file(out.path / "report.md");
  CHECK(report.find("no candidates matched") != std::string::npos);
  CHECK(report.find(res.config_hash) != std::string::npos);
}

TEST_CASE("config hash tracks semantic settings only") {
  ExperimentConfig a = quiet_config();
  a.corpus_dir = "/data/corpus";
  a.output_dir = "/tmp/out1";
  ExperimentConfig b = a;
  CHECK(config_hash(a) == config_hash(b));

  b.output_dir = "/tmp/out2";  // output location must not affect the hash
  CHECK(config_hash(a) == config_hash(b));

  b.shift_threshold = 0.4;
  CHECK(config_hash(a) != config_hash(b));
  b = a;
  b.corpus_dir = "/data/other";
  CHECK(config_hash(a) != config_hash(b));
  b = a;
  b.predictor.synthetic.noise_seed += 1;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("insertion experiment pairs each question with same-speaker fillers") {
  const SyntheticCorpus corpus = small_corpus();
  const ExperimentResult res = run_exp2(MemoryCorpusSource(corpus), quiet_config());

  std::size_t valid_ynq = 0, expected_pairings = 0;
  for (const auto& y : corpus.truth.ynqs) {
    if (!y.valid) continue;
    ++valid_ynq;
    for (const auto& f : corpus.truth.fillers)
      if (f.valid && f.session_id == y.session_id && f.speaker == y.speaker)
        ++expected_pairings;
  }
  CHECK(res.n_candidates == valid_ynq);
  CHECK(res.n_pairings == expected_pairings);
  REQUIRE(res.records.size() == valid_ynq + expected_pairings);

  for (const auto& r : res.records) {
    REQUIRE(r.event);
    if (r.group == kGroupWithoutFiller)
      CHECK(r.time == Approx(0.8).margin(kFrame));  // question-final shift
    else
      CHECK(r.time == Approx(2.8).margin(kFrame));  // plus the filler bonus
  }
  REQUIRE(res.logrank.has_value());
  CHECK(res.logrank->p < 0.001);
}

TEST_CASE("covariate regression runs end to end") {
  const SyntheticCorpus corpus = small_corpus(4);
  const ExperimentConfig cfg = quiet_config();
  const ExperimentResult res = run_exp3(MemoryCorpusSource(corpus), cfg);

  CHECK(res.n_candidates == 16);
  CHECK(res.records.size() == 16);
  for (const auto& r : res.records) CHECK(r.group == kGroupWithFiller);
  REQUIRE(res.cox.has_value());
  REQUIRE(res.cox->terms.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(res.cox->terms[i].name == exp3_term_names()[i]);
  CHECK(res.covariates_csv.rfind(
            "pair_id,time,censored,f0_std,intensity_std,lex_um,log_duration_std,"
            "pos_mid,f0_x_lexum\n",
            0) == 0);
  REQUIRE(res.curves.size() == 1);

  SECTION("the written bundle includes the regression artifacts") {
    TempDir out("exp3");
    write_result(res, out.path);
    for (const char* name : {"records.csv", "km.csv", "covariates.csv", "cox.csv", "cox.txt",
                             "report.md"})
      CHECK(std::filesystem::exists(out.path / name));
    const std::string report = read_text_file(out.path / "report.md");
    CHECK(report.find("Proportional hazards") != std::string::npos);
    CHECK(report.find(res.config_hash) != std::string::npos);
  }
}

TEST_CASE("regression can take its response from exclusion-run records") {
  const SyntheticCorpus corpus = small_corpus(4);
  const ExperimentConfig cfg = quiet_config();
  const ExperimentResult exp1 = run_exp1(MemoryCorpusSource(corpus), cfg);
  const auto joined =
      parse_records_csv(records_to_csv(exp1.records), kGroupWithFiller);

  const ExperimentResult direct = run_exp3(MemoryCorpusSource(corpus), cfg);
  const ExperimentResult via_join = run_exp3(MemoryCorpusSource(corpus), cfg, &joined);
  REQUIRE(via_join.records.size() == direct.records.size());
  for (std::size_t i = 0; i < direct.records.size(); ++i) {
    CHECK(via_join.records[i].id == direct.records[i].id);
    CHECK(via_join.records[i].time == direct.records[i].time);
    CHECK(via_join.records[i].time == joined.at(via_join.records[i].id).first);
  }
  CHECK(via_join.cox->terms[0].coef == Approx(direct.cox->terms[0].coef).margin(1e-12));

  SECTION("a missing pair id is a data error") {
    auto broken = joined;
    broken.erase(broken.begin());
    CHECK_THROWS_AS(run_exp3(MemoryCorpusSource(corpus), cfg, &broken), DataError);
  }
}

TEST_CASE("regression refuses starved event counts") {
  const SyntheticCorpus corpus = small_corpus(4);
  ExperimentConfig cfg = quiet_config();
  cfg.predictor.synthetic.base_hold_time = 50.0;  // never shifts inside the horizon
  try {
    run_exp3(MemoryCorpusSource(corpus), cfg);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("at least 10") != std::string::npos);
    CHECK(msg.find("enlarge the corpus") != std::string::npos);
  }
}

TEST_CASE("records CSV parsing") {
  const std::string good =
      "pair_id,group,time,event\n"
      "p1,with-filler,1.5,1\n"
      "p1,without-filler,0.9,0\n"
      "p2,with-filler,2.5,1\n";
  const auto recs = read_records_csv(good);
  REQUIRE(recs.size() == 3);
  CHECK(recs[1].group == "without-filler");
  CHECK(recs[1].time == 0.9);
  CHECK_FALSE(recs[1].event);

  const auto filtered = parse_records_csv(good, "with-filler");
  CHECK(filtered.size() == 2);  // one with-filler row each for p1 and p2
  CHECK(filtered.at("p1").first == 1.5);
  CHECK(filtered.at("p2").second == true);

  CHECK_THROWS_AS(read_records_csv("id,group,time,event\n"), DataError);
  try {
    read_records_csv("pair_id,group,time,event\np1,g,abc,1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(std::string(e.what()).find("bad time value") != std::string::npos);
  }
  CHECK_THROWS_AS(read_records_csv("pair_id,group,time,event\np1,g,1.0,2\n"), ParseError);
  CHECK_THROWS_AS(read_records_csv("pair_id,group,time,event\np1,g\n"), ParseError);
}

TEST_CASE("directory-backed corpora behave like in-memory ones") {
  const SyntheticCorpus corpus = small_corpus();
  TempDir dir("corpus");
  write_corpus(corpus, dir.path);

  const ExperimentConfig cfg = quiet_config();
  const ExperimentResult mem = run_exp1(MemoryCorpusSource(corpus), cfg);
  const ExperimentResult disk = run_exp1(DirCorpusSource(dir.path), cfg);
  CHECK(records_to_csv(mem.records) == records_to_csv(disk.records));

  SECTION("an empty directory is rejected") {
    TempDir empty("empty");
    CHECK_THROWS_AS(DirCorpusSource(empty.path), DataError);
  }
  SECTION("a transcript without a manifest is rejected") {
    TempDir stub("stub");
    std::filesystem::create_directories(stub.path / "sessions");
    write_text_file(stub.path / "sessions" / "x.jsonl", "");
    DirCorpusSource src(stub.path);
    REQUIRE(src.size() == 1);
    CHECK_THROWS_AS(src.load(0), DataError);
  }
}
