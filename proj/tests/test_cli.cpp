#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "helpers.hpp"
#include "turnhold/io.hpp"
#include "turnhold/wire.hpp"

using namespace turnhold;
using testutil::TempDir;

namespace {

constexpr const char* kCli = TURNHOLD_CLI_PATH;

int run(const std::string& args, const std::string& env_prefix = "") {
  std::string cmd;
  if (!env_prefix.empty()) cmd += "env " + env_prefix + " ";
  cmd += std::string(kCli) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string make_corpus(const TempDir& tmp, int sessions) {
  const auto dir = tmp / "corpus";
  REQUIRE(run("synth --out " + dir.string() + " --sessions " + std::to_string(sessions)) == 0);
  return dir.string();
}

}  // namespace

TEST_CASE("argument validation exit codes") {
  CHECK(run("--version") == 0);
  CHECK(run("") == 1);                   // a subcommand is required
  CHECK(run("frobnicate") == 1);
  CHECK(run("exp1 --out /tmp/x") == 1);  // --corpus is required
  CHECK(run("exp1 --corpus /tmp --out /tmp/x --no-such-flag") == 1);
  CHECK(run("plot --kind bogus --in /etc/hostname --out /tmp/x") == 1);
}

TEST_CASE("corpus generation is reproducible from the command line") {
  TempDir tmp("cli-synth");
  const auto d1 = tmp / "c1";
  const auto d2 = tmp / "c2";
  REQUIRE(run("synth --out " + d1.string() + " --sessions 2") == 0);
  REQUIRE(run("synth --out " + d2.string() + " --sessions 2") == 0);
  for (const char* rel : {"corpus.json", "ground_truth.json", "sessions/synth-000.jsonl",
                          "sessions/synth-000.manifest.json", "audio/synth-001.A.wav"}) {
    INFO(rel);
    REQUIRE(std::filesystem::exists(d1 / rel));
    CHECK(slurp(d1 / rel) == slurp(d2 / rel));
  }
}

TEST_CASE("exclusion experiment runs end to end") {
  TempDir tmp("cli-exp1");
  const std::string corpus = make_corpus(tmp, 2);
  const auto out1 = tmp / "e1";
  const auto out2 = tmp / "e2";
  const std::string common = " --corpus " + corpus + " --noise-sd 0";
  REQUIRE(run("exp1 --out " + out1.string() + common) == 0);
  REQUIRE(run("exp1 --out " + out2.string() + common) == 0);

  for (const char* rel : {"records.csv", "km.csv", "report.md"}) {
    INFO(rel);
    REQUIRE(std::filesystem::exists(out1 / rel));
    CHECK(slurp(out1 / rel) == slurp(out2 / rel));  // reruns are byte-identical
  }
  CHECK(slurp(out1 / "records.csv").rfind("pair_id,group,time,event\n", 0) == 0);
  CHECK(slurp(out1 / "report.md").find("Log-rank") != std::string::npos);

  SECTION("a missing corpus is a data error") {
    CHECK(run("exp1 --corpus " + (tmp / "nowhere").string() + " --out " +
              (tmp / "x").string()) == 2);
  }
}

TEST_CASE("predictor selection from flags and environment") {
  TempDir tmp("cli-pred");
  const std::string corpus = make_corpus(tmp, 1);
  const std::string base = "exp1 --corpus " + corpus + " --out " + (tmp / "out").string();

  // stream predictor needs its directory
  CHECK(run(base + " --predictor stream", "-u TURNHOLD_PREDICTOR_CMD") == 1);
  // command predictor needs a command, from flag or environment
  CHECK(run(base + " --predictor command", "-u TURNHOLD_PREDICTOR_CMD") == 1);
  // a failing external command is a predictor error
  CHECK(run(base + " --predictor command --predictor-cmd false") == 3);
  // the environment variable supplies the default command
  CHECK(run(base + " --predictor command", "TURNHOLD_PREDICTOR_CMD=false") == 3);
}

TEST_CASE("regression experiment joins exclusion-run records") {
  TempDir tmp("cli-exp3");
  const std::string corpus = make_corpus(tmp, 3);
  const auto e1 = tmp / "e1";
  const auto e3 = tmp / "e3";
  const auto e3j = tmp / "e3-joined";
  const std::string common = " --corpus " + corpus + " --noise-sd 0";

  REQUIRE(run("exp1 --out " + e1.string() + common) == 0);
  REQUIRE(run("exp3 --out " + e3.string() + common) == 0);
  REQUIRE(run("exp3 --out " + e3j.string() + common + " --exp1-records " +
              (e1 / "records.csv").string()) == 0);

  for (const auto& dir : {e3, e3j}) {
    for (const char* rel : {"records.csv", "km.csv", "covariates.csv", "cox.csv", "cox.txt",
                            "report.md"}) {
      INFO(dir.string() << "/" << rel);
      CHECK(std::filesystem::exists(dir / rel));
    }
  }
  // noise-free predictions make the joined and direct responses identical
  CHECK(slurp(e3 / "records.csv") == slurp(e3j / "records.csv"));
  CHECK(slurp(e3 / "cox.csv").rfind("term,coef,", 0) == 0);
}

TEST_CASE("insertion experiment runs end to end") {
  TempDir tmp("cli-exp2");
  const std::string corpus = make_corpus(tmp, 2);
  const auto out = tmp / "e2";
  REQUIRE(run("exp2 --corpus " + corpus + " --out " + out.string() + " --noise-sd 0") == 0);
  CHECK(slurp(out / "report.md").find("insertion pairings") != std::string::npos);
}

TEST_CASE("plots render from the emitted files") {
  TempDir tmp("cli-plot");
  const std::string corpus = make_corpus(tmp, 2);
  const auto e1 = tmp / "e1";
  REQUIRE(run("exp1 --corpus " + corpus + " --out " + e1.string() + " --noise-sd 0") == 0);

  const auto p1 = tmp / "p1";
  const auto p2 = tmp / "p2";
  const std::string km = "plot --kind km --in " + (e1 / "records.csv").string();
  REQUIRE(run(km + " --out " + p1.string() + " --title LATENCY") == 0);
  REQUIRE(run(km + " --out " + p2.string() + " --title LATENCY") == 0);
  REQUIRE(std::filesystem::exists(p1 / "km.svg"));
  REQUIRE(std::filesystem::exists(p1 / "km.csv"));
  CHECK(slurp(p1 / "km.svg") == slurp(p2 / "km.svg"));
  CHECK(slurp(p1 / "km.svg").find("<svg xmlns") != std::string::npos);

  SECTION("probability traces plot from wire files") {
    WireBlock block;
    block.frame_rate = 50.0;
    block.n_frames = 150;
    block.thp_only = true;
    block.data.assign(150, 0.9f);
    for (std::size_t f = 90; f < 150; ++f) block.data[f] = 0.2f;
    const auto vap = tmp / "trace.vap";
    write_wire_file(vap, block);

    const auto p3 = tmp / "p3";
    REQUIRE(run("plot --kind thp-trace --in " + vap.string() + " --out " + p3.string() +
                " --silence-onset 1 --speaker A") == 0);
    REQUIRE(std::filesystem::exists(p3 / "thp.svg"));
    REQUIRE(std::filesystem::exists(p3 / "thp.csv"));
    CHECK(slurp(p3 / "thp.csv").rfind("frame,time,thp\n", 0) == 0);
    CHECK(slurp(p3 / "thp.svg").find("<circle") != std::string::npos);  // shift observed
  }
}

TEST_CASE("config files feed subcommand options, flags override") {
  TempDir tmp("cli-config");
  const std::string corpus = make_corpus(tmp, 2);
  const auto out_cfg = tmp / "from-config";
  const auto out_flag = tmp / "from-flag";
  const auto cfg = tmp / "run.toml";
  write_text_file(cfg, "[exp1]\n"
                       "corpus = \"" + corpus + "\"\n"
                       "out = \"" + out_cfg.string() + "\"\n"
                       "noise-sd = 0.0\n");

  // the flag wins over the config value
  REQUIRE(run("--config " + cfg.string() + " exp1 --out " + out_flag.string()) == 0);
  CHECK(std::filesystem::exists(out_flag / "records.csv"));
  CHECK_FALSE(std::filesystem::exists(out_cfg / "records.csv"));

  // with no override, the config value applies (and satisfies required options)
  REQUIRE(run("--config " + cfg.string() + " exp1") == 0);
  CHECK(std::filesystem::exists(out_cfg / "records.csv"));
}
