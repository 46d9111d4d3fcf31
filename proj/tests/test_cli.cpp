#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "irispad/areas.hpp"
#include "irispad/imageio.hpp"
#include "irispad/manifest.hpp"
#include "irispad/stereo.hpp"
#include "support/oracles.hpp"

#ifndef IRISPAD_CLI_PATH
#error "IRISPAD_CLI_PATH must be defined by the build"
#endif

using oracles::TempDir;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
  std::string stderr_text;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

RunResult run_cli(const std::string& args, const TempDir& tmp) {
  const auto out = tmp.file("stdout.txt");
  const auto err = tmp.file("stderr.txt");
  const std::string cmd = std::string(IRISPAD_CLI_PATH) + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.stdout_text = slurp(out);
  r.stderr_text = slurp(err);
  return r;
}

// one shared corpus for the suite; regenerating per test would dominate runtime
struct CliFixture {
  TempDir tmp{"cli"};
  std::filesystem::path corpus;

  CliFixture() {
    corpus = tmp.file("corpus");
    const RunResult r = run_cli(
        "synth --out " + corpus.string() +
            " --n-bonafide 8 --n-attack 8 --n-clear 2 --width 96 --height 96 --seed 42",
        tmp);
    if (r.exit_code != 0) throw std::runtime_error("fixture synth failed: " + r.stderr_text);
  }

  std::string manifest() const { return (corpus / "manifest.csv").string(); }
  std::string rig() const { return (corpus / "rig.json").string(); }
};

CliFixture& fixture() {
  static CliFixture f;
  return f;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("no subcommand or bad flags exit 2") {
  TempDir tmp("cli-bad");
  CHECK(run_cli("", tmp).exit_code == 2);
  CHECK(run_cli("score", tmp).exit_code == 2);             // missing --manifest
  CHECK(run_cli("unknown-subcommand", tmp).exit_code == 2);
  CHECK(run_cli("score --manifest x.csv --banana", tmp).exit_code == 2);
}

TEST_CASE("missing rig file exits 2 and names the path") {
  auto& f = fixture();
  TempDir tmp("cli-norig");
  const RunResult r = run_cli("score --manifest " + f.manifest() + " --rig /nonexistent/rig.json --out " +
                                  tmp.file("out").string(),
                              tmp);
  CHECK(r.exit_code == 2);
  CHECK(r.stderr_text.find("/nonexistent/rig.json") != std::string::npos);
}

TEST_CASE("synth corpus loads and carries the expected composition") {
  auto& f = fixture();
  const irispad::DatasetManifest manifest = irispad::load_manifest(f.manifest());
  REQUIRE(manifest.size() == 18);
  std::size_t attacks = 0;
  for (const auto& e : manifest.entries)
    if (e.label == irispad::Label::Attack) ++attacks;
  CHECK(attacks == 8);
}

TEST_CASE("score subcommand emits ordered csv and is deterministic") {
  auto& f = fixture();
  TempDir tmp("cli-score");
  const std::string out1 = tmp.file("s1").string();
  const std::string out2 = tmp.file("s2").string();
  const std::string base_args =
      "score --manifest " + f.manifest() + " --rig " + f.rig() + " --jobs 2 --out ";
  REQUIRE(run_cli(base_args + out1, tmp).exit_code == 0);
  REQUIRE(run_cli(base_args + out2, tmp).exit_code == 0);

  const std::string csv = slurp(tmp.file("s1") / "scores.csv");
  CHECK(csv == slurp(tmp.file("s2") / "scores.csv"));

  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "sample_id,variant,score,n_pixels,label");
  const irispad::DatasetManifest manifest = irispad::load_manifest(f.manifest());
  std::size_t row = 0;
  while (std::getline(lines, line)) {
    REQUIRE(row < manifest.size());
    CHECK(line.substr(0, line.find(',')) == manifest.entries[row].sample_id);
    ++row;
  }
  CHECK(row == manifest.size());
}

TEST_CASE("score with threshold adds a decision column") {
  auto& f = fixture();
  TempDir tmp("cli-decide");
  const std::string out = tmp.file("d").string();
  REQUIRE(run_cli("score --manifest " + f.manifest() + " --rig " + f.rig() +
                      " --threshold 0.003 --out " + out,
                  tmp).exit_code == 0);
  const std::string csv = slurp(tmp.file("d") / "scores.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "sample_id,variant,score,n_pixels,label,decision");
  std::size_t attacks_flagged = 0, bona_cleared = 0;
  while (std::getline(lines, line)) {
    if (line.size() > 7 && line.rfind(",attack") == line.size() - 7) ++attacks_flagged;
    if (line.size() > 9 && line.rfind(",bonafide") == line.size() - 9) ++bona_cleared;
  }
  CHECK(attacks_flagged == 8);   // clean corpus separates at this threshold
  CHECK(bona_cleared == 10);
}

TEST_CASE("corrupt sample row marked error, run exits 1, others still scored") {
  auto& f = fixture();
  TempDir tmp("cli-partial");
  // clone the manifest, point one row at a truncated image
  const irispad::DatasetManifest manifest = irispad::load_manifest(f.manifest());
  std::ofstream bad(tmp.file("broken.pgm"), std::ios::binary);
  bad << "P5\n96 96\n255\nshort";
  bad.close();
  irispad::DatasetManifest edited = manifest;
  edited.entries[3].left = tmp.file("broken.pgm");
  irispad::save_manifest(edited, tmp.file("edited.csv"));

  const std::string out = tmp.file("out").string();
  const RunResult r = run_cli("score --manifest " + tmp.file("edited.csv").string() + " --rig " +
                                  f.rig() + " --out " + out,
                              tmp);
  CHECK(r.exit_code == 1);
  CHECK(r.stderr_text.find(edited.entries[3].sample_id) != std::string::npos);

  std::istringstream lines(slurp(tmp.file("out") / "scores.csv"));
  std::string line;
  std::getline(lines, line);
  std::size_t error_rows = 0, ok_rows = 0;
  while (std::getline(lines, line)) {
    if (line.find(",error,") != std::string::npos) ++error_rows;
    else ++ok_rows;
  }
  CHECK(error_rows == 1);
  CHECK(ok_rows == manifest.size() - 1);
}

TEST_CASE("normals subcommand writes field, quiver, and optional components") {
  auto& f = fixture();
  TempDir tmp("cli-normals");
  const irispad::DatasetManifest manifest = irispad::load_manifest(f.manifest());
  const auto& e = manifest.entries[0];
  const std::string out = tmp.file("n").string();
  const RunResult r = run_cli("normals --left " + e.left.string() + " --right " +
                                  e.right.string() + " --mask-left " + e.mask_left.string() +
                                  " --mask-right " + e.mask_right.string() + " --rig " + f.rig() +
                                  " --components --out " + out,
                              tmp);
  REQUIRE(r.exit_code == 0);
  const auto field = irispad::load_normal_field(tmp.file("n") / "normals.nrm");
  CHECK(field.width == 96);
  CHECK(slurp(tmp.file("n") / "quiver.svg").find("<svg") != std::string::npos);
  for (const char* name : {"normal_x.pgm", "normal_y.pgm", "normal_z.pgm"})
    CHECK(std::filesystem::exists(tmp.file("n") / name));
  // run log exists and carries a timestamped line
  CHECK(slurp(tmp.file("n") / "run.log").find("-> ok") != std::string::npos);
}

TEST_CASE("train-areas writes a valid model and significance map") {
  auto& f = fixture();
  TempDir tmp("cli-train");
  const std::string out = tmp.file("m").string();
  const RunResult r = run_cli("train-areas --manifest " + f.manifest() + " --rig " + f.rig() +
                                  " --radial 2,3 --angular 6 --out " + out,
                              tmp);
  REQUIRE(r.exit_code == 0);
  const irispad::AreaModel model =
      irispad::load_area_model(tmp.file("m") / "area_model.json");
  CHECK((model.params.radial == 2 || model.params.radial == 3));
  CHECK(model.params.angular == 6);
  CHECK_FALSE(model.selected.empty());
  const irispad::GrayImage sig = irispad::load_gray(tmp.file("m") / "significance.pgm");
  CHECK(sig.width == 512);

  // weighted scoring with the trained model
  const std::string sout = tmp.file("ws").string();
  const RunResult ws = run_cli("score --manifest " + f.manifest() + " --rig " + f.rig() +
                                   " --method weighted-areas --model " +
                                   (tmp.file("m") / "area_model.json").string() + " --out " + sout,
                               tmp);
  CHECK(ws.exit_code == 0);
  CHECK(slurp(tmp.file("ws") / "scores.csv").find(",weighted,") != std::string::npos);

  // weighted without --model is a config error
  CHECK(run_cli("score --manifest " + f.manifest() + " --rig " + f.rig() +
                    " --method weighted-areas --out " + tmp.file("x").string(),
                tmp).exit_code == 2);
}

TEST_CASE("eval subcommand produces report artifacts, byte-stable across runs") {
  auto& f = fixture();
  TempDir tmp("cli-eval");
  const std::string args = "eval --manifest " + f.manifest() + " --rig " + f.rig() +
                           " --scenario mixed-crossval --folds 3 --seed 8 --jobs 2 --out ";
  const std::string out1 = tmp.file("e1").string();
  const std::string out2 = tmp.file("e2").string();
  REQUIRE(run_cli(args + out1, tmp).exit_code == 0);
  REQUIRE(run_cli(args + out2, tmp).exit_code == 0);
  for (const char* name : {"report.json", "roc.csv", "roc.svg", "folds.csv"}) {
    CHECK(slurp(tmp.file("e1") / name) == slurp(tmp.file("e2") / name));
    CHECK(std::filesystem::file_size(tmp.file("e1") / name) > 0);
  }
  const std::string report = slurp(tmp.file("e1") / "report.json");
  CHECK(report.find("\"scenario\": \"mixed-crossval\"") != std::string::npos);
  CHECK(report.find("\"per_fold\"") != std::string::npos);

  // single-class manifest is a config error (exit 2)
  const irispad::DatasetManifest manifest = irispad::load_manifest(f.manifest());
  irispad::DatasetManifest bona_only;
  for (const auto& e : manifest.entries)
    if (e.label == irispad::Label::BonaFide) bona_only.entries.push_back(e);
  irispad::save_manifest(bona_only, tmp.file("bona.csv"));
  CHECK(run_cli("eval --manifest " + tmp.file("bona.csv").string() + " --rig " + f.rig() +
                    " --out " + tmp.file("x").string(),
                tmp).exit_code == 2);
}

TEST_CASE("clear-lens scenario runs through the cli") {
  auto& f = fixture();
  TempDir tmp("cli-clear");
  const std::string out = tmp.file("c").string();
  const RunResult r = run_cli("eval --manifest " + f.manifest() + " --rig " + f.rig() +
                                  " --scenario clear-lens-test --folds 2 --seed 5 --out " + out,
                              tmp);
  REQUIRE(r.exit_code == 0);
  const std::string report = slurp(tmp.file("c") / "report.json");
  CHECK(report.find("\"scenario\": \"clear-lens-test\"") != std::string::npos);
}

TEST_CASE("synth rejects contradictory parameters with exit 2") {
  TempDir tmp("cli-synbad");
  const RunResult r = run_cli("synth --out " + tmp.file("x").string() +
                                  " --n-bonafide 2 --n-attack 2 --flat-amp 0.9 --seed 1",
                              tmp);
  CHECK(r.exit_code == 2);
}

}  // TEST_SUITE
