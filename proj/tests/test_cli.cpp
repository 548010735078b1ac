#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include <json.hpp>

#include "testkg/catalog.hpp"
#include "testkg/en50549.hpp"
#include "testkg/synth.hpp"
#include "testkg/trace.hpp"

using namespace testkg;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) { return catalog::detail::read_file(p); }

void spit(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  catalog::detail::write_file(p, content);
}

std::uint64_t fresh_id() {
  static std::mt19937_64 rng(std::random_device{}());
  return rng();
}

struct ScopedDir {
  fs::path path;
  ScopedDir() {
    path = fs::temp_directory_path() / ("testkg-cli-" + std::to_string(fresh_id()));
    fs::create_directories(path);
  }
  ~ScopedDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args, const fs::path& cwd = {}) {
  fs::path out = fs::temp_directory_path() / ("testkg-out-" + std::to_string(fresh_id()));
  fs::path err = fs::temp_directory_path() / ("testkg-err-" + std::to_string(fresh_id()));
  std::string cmd;
  if (!cwd.empty()) cmd += "cd '" + cwd.string() + "' && ";
  cmd += std::string("'") + TESTKG_CLI_PATH + "' " + args + " > '" + out.string() +
         "' 2> '" + err.string() + "'";
  int rc = std::system(cmd.c_str());
  RunResult result;
  result.code = (rc != -1 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
  result.out = slurp(out);
  result.err = slurp(err);
  fs::remove(out);
  fs::remove(err);
  return result;
}

fs::path source_root() { return fs::path(TESTKG_SOURCE_ROOT); }
fs::path ucd() { return source_root() / "fixtures" / "ucd"; }
fs::path ucd_gap() { return source_root() / "fixtures" / "ucd-gap"; }

const char* kKgFiles = "kg/annotation.ttl kg/htd.ttl kg/prov.ttl kg/scm-ucd.ttl";

std::string first_line(const std::string& text) {
  return text.substr(0, text.find('\n'));
}

}  // namespace

TEST(Cli, HelpAndArgumentErrors) {
  EXPECT_EQ(run_cli("--help").code, 0);
  EXPECT_EQ(run_cli("").code, 1);                   // subcommand required
  EXPECT_EQ(run_cli("frobnicate").code, 1);         // unknown subcommand
  EXPECT_EQ(run_cli("annotate").code, 1);           // missing required options
  EXPECT_EQ(run_cli("--format yaml validate x.ttl").code, 1);
}

TEST(Cli, AnnotateReproducesCommittedGolden) {
  auto result = run_cli(
      "annotate --suite suite.ste"
      " --test tests/power-reduction.tst --test tests/voltage-range.tst"
      " --log logs/power-reduction.csv --log logs/voltage-range.csv"
      " --channels channels.json --context context.json",
      ucd());
  ASSERT_EQ(result.code, 0) << result.err;
  EXPECT_EQ(result.out, slurp(ucd() / "kg/annotation.ttl"));

  // Byte-identical on re-run, and --out writes the same bytes.
  ScopedDir tmp;
  auto to_file = run_cli(
      "--quiet annotate --suite suite.ste"
      " --test tests/power-reduction.tst --test tests/voltage-range.tst"
      " --log logs/power-reduction.csv --log logs/voltage-range.csv"
      " --channels channels.json --context context.json --out '" +
          (tmp.path / "annotation.ttl").string() + "'",
      ucd());
  ASSERT_EQ(to_file.code, 0) << to_file.err;
  EXPECT_TRUE(to_file.err.empty());  // --quiet suppresses the note
  EXPECT_EQ(slurp(tmp.path / "annotation.ttl"), result.out);
}

TEST(Cli, AnnotateInputErrors) {
  auto missing = run_cli(
      "annotate --suite nope.ste --test tests/voltage-range.tst --context context.json",
      ucd());
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.err.find("error:"), std::string::npos);

  // Logs without a channel map cannot be interpreted.
  auto no_channels = run_cli(
      "annotate --suite suite.ste --test tests/power-reduction.tst"
      " --test tests/voltage-range.tst --log logs/voltage-range.csv"
      " --context context.json",
      ucd());
  EXPECT_EQ(no_channels.code, 1);
  EXPECT_NE(no_channels.err.find("channel map"), std::string::npos);

  ScopedDir tmp;
  spit(tmp.path / "broken.ste", "[suite\n");
  auto broken = run_cli("annotate --suite '" + (tmp.path / "broken.ste").string() +
                            "' --test tests/voltage-range.tst --context context.json",
                        ucd());
  EXPECT_EQ(broken.code, 1);
  EXPECT_NE(broken.err.find("broken.ste"), std::string::npos);
}

TEST(Cli, ValidateCleanAndViolating) {
  auto clean = run_cli("validate " + std::string(kKgFiles), ucd());
  EXPECT_EQ(clean.code, 0) << clean.out + clean.err;

  ScopedDir tmp;
  spit(tmp.path / "bad.ttl",
       "@prefix annot: <https://w3id.org/testkg/annot#> .\n"
       "@prefix ex: <https://ex.org/> .\n"
       "ex:m a annot:Measurement .\n");
  auto violating = run_cli("validate '" + (tmp.path / "bad.ttl").string() + "'", ucd());
  EXPECT_EQ(violating.code, 2);
  EXPECT_NE(violating.out.find("annot-measurement-phenomenon"), std::string::npos);

  auto structured = run_cli(
      "--format structured validate '" + (tmp.path / "bad.ttl").string() + "'", ucd());
  EXPECT_EQ(structured.code, 2);
  auto doc = nlohmann::json::parse(structured.out);
  EXPECT_GE(doc["violations"].get<int>(), 2);

  EXPECT_EQ(run_cli("validate missing.ttl", ucd()).code, 1);
  EXPECT_EQ(run_cli("validate --profile sparql kg/annotation.ttl", ucd()).code, 1);
}

TEST(Cli, QuerySelectsOverFixtureGraphs) {
  auto result = run_cli(
      "query kg/annotation.ttl --query"
      " 'SELECT ?t WHERE { ?t rdf:type htd:TestCase }'",
      ucd());
  ASSERT_EQ(result.code, 0) << result.err;
  EXPECT_EQ(first_line(result.out), "?t");
  EXPECT_NE(result.out.find("test/power-reduction"), std::string::npos);
  EXPECT_NE(result.out.find("test/voltage-range"), std::string::npos);
  EXPECT_NE(result.err.find("(2 rows)"), std::string::npos);

  auto structured = run_cli(
      "--format structured query kg/annotation.ttl --query"
      " 'SELECT ?t WHERE { ?t rdf:type htd:TestCase }'",
      ucd());
  ASSERT_EQ(structured.code, 0);
  auto doc = nlohmann::json::parse(structured.out);
  EXPECT_EQ(doc["vars"], nlohmann::json::array({"t"}));
  EXPECT_EQ(doc["rows"].size(), 2u);

  // Exactly one of --query / --query-file.
  EXPECT_EQ(run_cli("query kg/annotation.ttl", ucd()).code, 1);
  EXPECT_EQ(run_cli("query kg/annotation.ttl --query 'SELECT' --query-file q.rq", ucd()).code,
            1);
  EXPECT_EQ(run_cli("query kg/annotation.ttl --query 'ASK { ?s ?p ?o }'", ucd()).code, 1);
}

TEST(Cli, DiffReportsConfigurationChanges) {
  auto result = run_cli("diff scm/ucd-setup.json scm/zhaw-setup.json", ucd());
  ASSERT_EQ(result.code, 0) << result.err;
  EXPECT_NE(result.out.find("changed pv-inverter.operatingPoint: 0.62 -> 0.92"),
            std::string::npos);
  EXPECT_NE(result.out.find("changed pv-inverter.phases: 1 -> 3"), std::string::npos);

  auto same = run_cli("diff scm/ucd-setup.json scm/ucd-setup.json", ucd());
  EXPECT_EQ(same.code, 0);
  EXPECT_TRUE(same.out.empty());
  EXPECT_NE(same.err.find("no differences"), std::string::npos);

  // JSON and its exported Turtle describe the same configuration.
  auto cross = run_cli("diff scm/ucd-setup.json kg/scm-ucd.ttl", ucd());
  EXPECT_EQ(cross.code, 0);
  EXPECT_TRUE(cross.out.empty());

  auto structured = run_cli("--format structured diff scm/ucd-setup.json scm/zhaw-setup.json",
                            ucd());
  ASSERT_EQ(structured.code, 0);
  auto doc = nlohmann::json::parse(structured.out);
  EXPECT_EQ(doc["changedAttributes"].size(), 2u);
}

TEST(Cli, CheckScoresCompleteness) {
  auto full = run_cli("check " + std::string(kKgFiles), ucd());
  EXPECT_EQ(full.code, 0) << full.out + full.err;
  EXPECT_NE(first_line(full.out).find("completeness score 1 ("), std::string::npos);

  auto structured = run_cli("--format structured check " + std::string(kKgFiles), ucd());
  ASSERT_EQ(structured.code, 0);
  auto doc = nlohmann::json::parse(structured.out);
  EXPECT_EQ(doc["score"].get<double>(), 1.0);
  EXPECT_TRUE(doc["violations"].empty());

  // The gap fixture omits the breaker channel its specification requires.
  auto gap = run_cli("check " + std::string(kKgFiles), ucd_gap());
  EXPECT_EQ(gap.code, 2);
  EXPECT_NE(gap.out.find("R7"), std::string::npos);
  EXPECT_NE(gap.out.find("phenomenon/BreakerState"), std::string::npos);
}

TEST(Cli, EvaluatePassFailInconclusive) {
  auto nor = run_cli(
      "evaluate --trace logs/voltage-range.csv --channels channels.json"
      " --kind nor --un 230 --connectivity Breaker",
      ucd());
  EXPECT_EQ(nor.code, 0) << nor.out + nor.err;
  EXPECT_EQ(first_line(nor.out), "PASS");

  auto apr = run_cli(
      "evaluate --trace logs/power-reduction.csv --channels channels.json"
      " --kind apr --pn 10000",
      ucd());
  EXPECT_EQ(apr.code, 0) << apr.out + apr.err;
  EXPECT_EQ(first_line(apr.out), "PASS");

  // A disconnected run fails with exit code 2.
  ScopedDir tmp;
  auto spec = en50549::apr_spec(10000);
  auto tr = synth::generate_synthetic_trace(spec, 1.0, 0.002, 700.0, 43);
  spit(tmp.path / "disconnected.csv", trace::write_log(tr));
  auto fail = run_cli("evaluate --trace '" + (tmp.path / "disconnected.csv").string() +
                          "' --channels channels.json --kind apr --pn 10000",
                      ucd());
  EXPECT_EQ(fail.code, 2);
  EXPECT_EQ(first_line(fail.out), "FAIL");
  EXPECT_NE(fail.out.find("disconnection detected at t=700 s"), std::string::npos);

  // A power trace that never steps through the sequence is inconclusive.
  auto inconclusive = run_cli(
      "evaluate --trace logs/voltage-range.csv --channels channels.json"
      " --kind apr --pn 10000",
      ucd());
  EXPECT_EQ(inconclusive.code, 2);
  EXPECT_EQ(first_line(inconclusive.out), "INCONCLUSIVE");

  EXPECT_EQ(run_cli("evaluate --trace logs/voltage-range.csv --channels channels.json"
                    " --kind frequency --un 230",
                    ucd())
                .code,
            1);
  EXPECT_EQ(run_cli("evaluate --trace logs/voltage-range.csv --channels channels.json"
                    " --kind nor",
                    ucd())
                .code,
            1);
}

TEST(Cli, EvaluateSideOutputsAreDeterministic) {
  ScopedDir tmp;
  std::string outs = " --report '" + (tmp.path / "verdict.json").string() + "' --rdf '" +
                     (tmp.path / "verdict.ttl").string() + "' --plot '" +
                     (tmp.path / "plot.csv").string() + "'";
  std::string cmd =
      "--quiet evaluate --trace logs/power-reduction.csv --channels channels.json"
      " --kind apr --pn 10000 --test-iri https://w3id.org/testkg/data/test/power-reduction" +
      outs;
  ASSERT_EQ(run_cli(cmd, ucd()).code, 0);
  auto report = slurp(tmp.path / "verdict.json");
  auto rdf = slurp(tmp.path / "verdict.ttl");
  auto plot = slurp(tmp.path / "plot.csv");

  auto doc = nlohmann::json::parse(report);
  EXPECT_EQ(doc["outcome"], "PASS");
  EXPECT_EQ(doc["perLevel"].size(), 12u);
  EXPECT_NE(rdf.find("htd:verdictOutcome \"PASS\""), std::string::npos);
  EXPECT_EQ(first_line(plot), "time,level_pu");

  ASSERT_EQ(run_cli(cmd, ucd()).code, 0);
  EXPECT_EQ(slurp(tmp.path / "verdict.json"), report);
  EXPECT_EQ(slurp(tmp.path / "verdict.ttl"), rdf);
  EXPECT_EQ(slurp(tmp.path / "plot.csv"), plot);
}

TEST(Cli, PublishVerifyAndTamper) {
  ScopedDir ws;
  std::string publish_cmd =
      "--quiet --workspace '" + ws.path.string() +
      "' publish --dataset ucd-2023 --title 'PV inverter conformance dataset'"
      " --publisher 'UCD laboratory'"
      " --conforms-to 'https://w3id.org/testkg/annot#'"
      " --created-at 2023-06-12T12:00:00Z"
      " kg/annotation.ttl logs/voltage-range.csv logs/power-reduction.csv";
  ASSERT_EQ(run_cli(publish_cmd, ucd()).code, 0);
  auto manifest = slurp(ws.path / "catalog.json");

  // Republishing identical content leaves the manifest byte-identical.
  ASSERT_EQ(run_cli(publish_cmd, ucd()).code, 0);
  EXPECT_EQ(slurp(ws.path / "catalog.json"), manifest);

  auto verify = run_cli("--workspace '" + ws.path.string() + "' publish --verify", ucd());
  EXPECT_EQ(verify.code, 0);
  EXPECT_NE(verify.err.find("3 files checked, 0 mismatches"), std::string::npos);

  // Tampering with a published copy is caught by verify and blocks republish.
  auto copy = ws.path / "datasets/ucd-2023/voltage-range.csv";
  spit(copy, slurp(copy) + "x");
  auto bad = run_cli("--workspace '" + ws.path.string() + "' publish --verify", ucd());
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.out.find("datasets/ucd-2023/voltage-range.csv: expected"),
            std::string::npos);
  auto blocked = run_cli(publish_cmd, ucd());
  EXPECT_EQ(blocked.code, 2);
  EXPECT_NE(blocked.err.find("modified outside publish"), std::string::npos);

  EXPECT_EQ(run_cli("--workspace '" + ws.path.string() + "' publish --verify"
                    " --dataset ucd-2023",
                    ucd())
                .code,
            1);
  EXPECT_EQ(run_cli("--workspace '" + ws.path.string() + "' publish --dataset d", ucd()).code,
            1);
}

TEST(Cli, VocabEmitMatchesCommittedFiles) {
  ScopedDir tmp;
  auto result =
      run_cli("--quiet vocab emit --out-dir '" + (tmp.path / "vocab").string() + "'");
  ASSERT_EQ(result.code, 0) << result.err;
  for (const char* name : {"htd", "scm", "provx", "annot"}) {
    auto file = std::string(name) + ".ttl";
    EXPECT_EQ(slurp(tmp.path / "vocab" / file), slurp(source_root() / "vocab" / file))
        << file;
  }

  auto single = run_cli("--quiet vocab emit --out-dir '" + (tmp.path / "one").string() +
                        "' htd");
  ASSERT_EQ(single.code, 0);
  EXPECT_TRUE(fs::exists(tmp.path / "one" / "htd.ttl"));
  EXPECT_FALSE(fs::exists(tmp.path / "one" / "scm.ttl"));

  EXPECT_EQ(run_cli("vocab emit --out-dir '" + tmp.path.string() + "' skos").code, 1);
}

// End-to-end over the fixture: every pipeline stage exits 0 and the final
// workspace verifies cleanly.
TEST(Cli, PipelineRunsCleanOverFixture) {
  ScopedDir tmp;
  fs::path ws = tmp.path / "workspace";
  fs::create_directories(ws);
  fs::path annotation = tmp.path / "annotation.ttl";

  ASSERT_EQ(run_cli("--quiet annotate --suite suite.ste"
                    " --test tests/power-reduction.tst --test tests/voltage-range.tst"
                    " --log logs/power-reduction.csv --log logs/voltage-range.csv"
                    " --channels channels.json --context context.json --out '" +
                        annotation.string() + "'",
                    ucd())
                .code,
            0);
  ASSERT_EQ(run_cli("--quiet validate '" + annotation.string() +
                        "' kg/htd.ttl kg/prov.ttl kg/scm-ucd.ttl",
                    ucd())
                .code,
            0);
  ASSERT_EQ(run_cli("--quiet check '" + annotation.string() +
                        "' kg/htd.ttl kg/prov.ttl kg/scm-ucd.ttl",
                    ucd())
                .code,
            0);
  ASSERT_EQ(run_cli("--quiet evaluate --trace logs/voltage-range.csv"
                    " --channels channels.json --kind nor --un 230 --connectivity Breaker",
                    ucd())
                .code,
            0);
  ASSERT_EQ(run_cli("--quiet evaluate --trace logs/power-reduction.csv"
                    " --channels channels.json --kind apr --pn 10000",
                    ucd())
                .code,
            0);
  ASSERT_EQ(run_cli("--quiet --workspace '" + ws.string() +
                        "' publish --dataset ucd-2023 --title t --publisher p"
                        " --created-at 2023-06-12T12:00:00Z '" +
                        annotation.string() + "' logs/voltage-range.csv",
                    ucd())
                .code,
            0);
  auto verify = run_cli("--workspace '" + ws.string() + "' publish --verify", ucd());
  EXPECT_EQ(verify.code, 0);
  EXPECT_NE(verify.err.find("0 mismatches"), std::string::npos);
}
