#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "testkg/catalog.hpp"
#include "testkg/checksum.hpp"
#include "testkg/timeutil.hpp"

using namespace testkg;
namespace fs = std::filesystem;

namespace {

testkg::Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const testkg::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a testkg::Error";
  return testkg::Errc::IoError;
}

std::string slurp(const fs::path& p) { return catalog::detail::read_file(p); }

void spit(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  catalog::detail::write_file(p, content);
}

// Scratch directory removed when the test ends.
struct ScopedDir {
  fs::path path;
  ScopedDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path = fs::temp_directory_path() / ("testkg-" + std::to_string(rng()));
    fs::create_directories(path);
  }
  ~ScopedDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

}  // namespace

TEST(Instants, ParseFormatRoundTrip) {
  EXPECT_EQ(timeutil::parse_instant("1970-01-01T00:00:00Z"), 0);
  EXPECT_EQ(timeutil::format_instant(0), "1970-01-01T00:00:00Z");
  EXPECT_EQ(timeutil::format_instant(timeutil::parse_instant("2023-06-12T12:30:00.250Z")),
            "2023-06-12T12:30:00.250Z");
  // Offsets normalize to UTC.
  EXPECT_EQ(timeutil::parse_instant("2023-06-12T14:30:00+02:00"),
            timeutil::parse_instant("2023-06-12T12:30:00Z"));
  EXPECT_EQ(timeutil::parse_instant("2023-06-12T10:00:00-02:30"),
            timeutil::parse_instant("2023-06-12T12:30:00Z"));
  EXPECT_TRUE(timeutil::is_valid_instant("2024-02-29T00:00:00Z"));

  EXPECT_FALSE(timeutil::is_valid_instant("2023-02-29T00:00:00Z"));
  EXPECT_FALSE(timeutil::is_valid_instant("2023-06-12T12:30:00"));  // no timezone
  EXPECT_FALSE(timeutil::is_valid_instant("2023-06-12 12:30:00Z"));
  EXPECT_FALSE(timeutil::is_valid_instant("2023-13-01T00:00:00Z"));
  EXPECT_FALSE(timeutil::is_valid_instant("2023-06-12T24:00:00Z"));
  EXPECT_FALSE(timeutil::is_valid_instant("2023-06-12T12:30:00Zx"));
  EXPECT_FALSE(timeutil::is_valid_instant("2023-06-12T12:30:00.Z"));
}

TEST(RuleProfiles, NamesMapToRuleSets) {
  auto all = catalog::rules_for_profile("all");
  auto htd = catalog::rules_for_profile("htd");
  auto scm_rules = catalog::rules_for_profile("scm");
  auto prov = catalog::rules_for_profile("prov");
  auto annotation = catalog::rules_for_profile("annotation");
  EXPECT_FALSE(htd.empty());
  EXPECT_EQ(all.size(),
            htd.size() + scm_rules.size() + prov.size() + annotation.size());
  EXPECT_EQ(catalog::rules_for_profile("htd,scm").size(), htd.size() + scm_rules.size());
  EXPECT_TRUE(catalog::rules_for_profile("none").empty());
  EXPECT_TRUE(catalog::rules_for_profile("").empty());
  EXPECT_EQ(code_of([] { catalog::rules_for_profile("bogus"); }),
            Errc::InvalidConfiguration);
}

TEST(MediaKinds, ExtensionAndNameMapping) {
  EXPECT_EQ(catalog::media_kind_for("a/b.ttl"), catalog::MediaKind::Turtle);
  EXPECT_EQ(catalog::media_kind_for("a/b.csv"), catalog::MediaKind::Csv);
  EXPECT_EQ(catalog::media_kind_for("a/b.json"), catalog::MediaKind::Report);
  EXPECT_EQ(catalog::media_kind_for("README"), catalog::MediaKind::Report);
  for (auto kind : {catalog::MediaKind::Turtle, catalog::MediaKind::Csv,
                    catalog::MediaKind::Report})
    EXPECT_EQ(catalog::media_kind_from_name(catalog::media_kind_name(kind)), kind);
  EXPECT_EQ(code_of([] { catalog::media_kind_from_name("excel"); }),
            Errc::InvalidConfiguration);
}

TEST(WorkspaceConfig, MissingFileYieldsDefaults) {
  ScopedDir ws;
  auto config = catalog::load_workspace_config(ws.path);
  EXPECT_EQ(config.base_iri, std::string(rdf::ns::data_base));
  EXPECT_EQ(config.prefixes, vocab::default_prefixes());
  EXPECT_EQ(config.level_tolerance, 0.05);
  EXPECT_EQ(config.step_deadband, 0.02);
  EXPECT_EQ(config.rule_profile, "all");
}

TEST(WorkspaceConfig, FileOverridesDefaults) {
  ScopedDir ws;
  spit(ws.path / catalog::config_file_name(), R"({
    "baseIri": "https://lab.example/kg/",
    "prefixes": {"lab": "https://lab.example/ns#"},
    "tolerances": {"level": 0.03, "deadband": 0.01},
    "ruleProfile": "htd,annotation"
  })");
  auto config = catalog::load_workspace_config(ws.path);
  EXPECT_EQ(config.base_iri, "https://lab.example/kg/");
  EXPECT_EQ(config.prefixes.at("lab"), "https://lab.example/ns#");
  EXPECT_EQ(config.prefixes.at("htd"), std::string(rdf::ns::htd));  // defaults kept
  EXPECT_EQ(config.level_tolerance, 0.03);
  EXPECT_EQ(config.step_deadband, 0.01);
  EXPECT_EQ(config.rule_profile, "htd,annotation");
}

TEST(WorkspaceConfig, Validation) {
  ScopedDir ws;
  auto path = ws.path / catalog::config_file_name();
  spit(path, "{");
  EXPECT_EQ(code_of([&] { catalog::load_workspace_config(ws.path); }), Errc::SyntaxError);
  spit(path, R"({"baseIri": "not absolute"})");
  EXPECT_EQ(code_of([&] { catalog::load_workspace_config(ws.path); }),
            Errc::InvalidConfiguration);
  spit(path, R"({"prefixes": ["x"]})");
  EXPECT_EQ(code_of([&] { catalog::load_workspace_config(ws.path); }),
            Errc::InvalidConfiguration);
  spit(path, R"({"prefixes": {"x": "no iri"}})");
  EXPECT_EQ(code_of([&] { catalog::load_workspace_config(ws.path); }),
            Errc::InvalidConfiguration);
  spit(path, R"({"tolerances": {"level": 0}})");
  EXPECT_EQ(code_of([&] { catalog::load_workspace_config(ws.path); }),
            Errc::InvalidConfiguration);
  spit(path, R"({"ruleProfile": "shacl"})");
  EXPECT_EQ(code_of([&] { catalog::load_workspace_config(ws.path); }),
            Errc::InvalidConfiguration);
}

TEST(CatalogJson, RoundTrip) {
  catalog::Catalog cat;
  catalog::DatasetDescriptor ds;
  ds.id = "ucd-2023";
  ds.title = "PV inverter conformance dataset";
  ds.publisher = "UCD laboratory";
  ds.created_at = "2023-06-12T12:00:00Z";
  ds.conforms_to = {std::string(rdf::ns::annot)};
  ds.files = {{"datasets/ucd-2023/annotation.ttl", catalog::MediaKind::Turtle, "ab12"},
              {"datasets/ucd-2023/voltage-range.csv", catalog::MediaKind::Csv, "cd34"}};
  cat.datasets = {ds};
  auto doc = catalog::to_json(cat);
  EXPECT_EQ(doc["version"], 1);
  EXPECT_EQ(catalog::catalog_from_json(doc), cat);
}

TEST(CatalogJson, Validation) {
  using nlohmann::json;
  EXPECT_EQ(code_of([] { catalog::catalog_from_json(json::object()); }),
            Errc::InvalidConfiguration);
  EXPECT_EQ(code_of([] { catalog::catalog_from_json(json{{"version", 2}}); }),
            Errc::InvalidConfiguration);
  auto with_dataset = [](json entry) {
    return json{{"version", 1}, {"datasets", json::array({entry})}};
  };
  EXPECT_EQ(code_of([&] { catalog::catalog_from_json(with_dataset({{"id", "a b"}})); }),
            Errc::InvalidConfiguration);
  EXPECT_EQ(code_of([&] {
              catalog::catalog_from_json(
                  json{{"version", 1},
                       {"datasets", json::array({{{"id", "a"}}, {{"id", "a"}}})}});
            }),
            Errc::InvalidConfiguration);
  EXPECT_EQ(code_of([&] {
              catalog::catalog_from_json(
                  with_dataset({{"id", "a"}, {"createdAt", "yesterday"}}));
            }),
            Errc::InvalidTimestamp);
  EXPECT_EQ(code_of([&] {
              catalog::catalog_from_json(with_dataset(
                  {{"id", "a"},
                   {"files", json::array({{{"relativePath", "x"}, {"mediaKind", "tape"}}})}}));
            }),
            Errc::InvalidConfiguration);
}

// ---------------------------------------------------------------------------
// Publish / verify
// ---------------------------------------------------------------------------

namespace {

struct PublishBench {
  ScopedDir root;
  fs::path ws, src;
  PublishBench() {
    ws = root.path / "workspace";
    src = root.path / "sources";
    fs::create_directories(ws);
    spit(src / "annotation.ttl", "@prefix ex: <https://ex.org/> .\nex:s ex:p ex:o .\n");
    spit(src / "voltage-range.csv", "time,AC_VRMS\n0,230\n");
    spit(src / "report.json", "{\"ok\": true}\n");
  }
};

}  // namespace

TEST(Publish, CopiesFilesAndWritesManifest) {
  PublishBench bench;
  catalog::PublishOptions opts;
  opts.title = "demo";
  opts.publisher = "lab";
  opts.conforms_to = {std::string(rdf::ns::annot)};
  opts.created_at = "2023-06-12T12:00:00Z";
  auto cat = catalog::publish(bench.ws, "ds-1",
                              {bench.src / "voltage-range.csv", bench.src / "annotation.ttl"},
                              opts);
  ASSERT_EQ(cat.datasets.size(), 1u);
  const auto& ds = cat.datasets[0];
  EXPECT_EQ(ds.id, "ds-1");
  EXPECT_EQ(ds.title, "demo");
  EXPECT_EQ(ds.created_at, "2023-06-12T12:00:00Z");
  ASSERT_EQ(ds.files.size(), 2u);
  // Sorted by relative path, checksummed, media kind from the extension.
  EXPECT_EQ(ds.files[0].relative_path, "datasets/ds-1/annotation.ttl");
  EXPECT_EQ(ds.files[0].media_kind, catalog::MediaKind::Turtle);
  EXPECT_EQ(ds.files[0].sha256,
            checksum::sha256_hex(slurp(bench.src / "annotation.ttl")));
  EXPECT_EQ(ds.files[1].relative_path, "datasets/ds-1/voltage-range.csv");
  EXPECT_EQ(ds.files[1].media_kind, catalog::MediaKind::Csv);

  EXPECT_EQ(slurp(bench.ws / "datasets/ds-1/annotation.ttl"),
            slurp(bench.src / "annotation.ttl"));
  EXPECT_FALSE(fs::exists(bench.ws / catalog::lock_file_name()));

  auto report = catalog::verify(bench.ws);
  EXPECT_TRUE(report.ok());
  EXPECT_EQ(report.files_checked, 2u);
}

TEST(Publish, RepublishIsByteIdenticalAndKeepsCreatedAt) {
  PublishBench bench;
  catalog::PublishOptions opts;
  opts.title = "demo";
  opts.created_at = "2023-06-12T12:00:00Z";
  std::vector<fs::path> files{bench.src / "annotation.ttl", bench.src / "voltage-range.csv"};
  catalog::publish(bench.ws, "ds-1", files, opts);
  auto first = slurp(bench.ws / catalog::catalog_file_name());

  catalog::PublishOptions again;  // no createdAt, no title
  catalog::publish(bench.ws, "ds-1", files, again);
  EXPECT_EQ(slurp(bench.ws / catalog::catalog_file_name()), first);
}

TEST(Publish, UpdateAddsFilesAndUnionsConformsTo) {
  PublishBench bench;
  catalog::PublishOptions opts;
  opts.conforms_to = {"https://b.example/ns#"};
  opts.created_at = "2023-06-12T12:00:00Z";
  catalog::publish(bench.ws, "ds-1", {bench.src / "annotation.ttl"}, opts);

  catalog::PublishOptions more;
  more.conforms_to = {"https://a.example/ns#", "https://b.example/ns#"};
  auto cat = catalog::publish(bench.ws, "ds-1", {bench.src / "report.json"}, more);
  const auto& ds = cat.datasets[0];
  EXPECT_EQ(ds.created_at, "2023-06-12T12:00:00Z");
  ASSERT_EQ(ds.files.size(), 2u);
  EXPECT_EQ(ds.files[1].relative_path, "datasets/ds-1/report.json");
  EXPECT_EQ(ds.files[1].media_kind, catalog::MediaKind::Report);
  EXPECT_EQ(ds.conforms_to,
            (std::vector<std::string>{"https://a.example/ns#", "https://b.example/ns#"}));
}

TEST(Publish, SecondDatasetSortsById) {
  PublishBench bench;
  catalog::PublishOptions opts;
  opts.created_at = "2023-06-12T12:00:00Z";
  catalog::publish(bench.ws, "zeta", {bench.src / "annotation.ttl"}, opts);
  auto cat = catalog::publish(bench.ws, "alpha", {bench.src / "report.json"}, opts);
  ASSERT_EQ(cat.datasets.size(), 2u);
  EXPECT_EQ(cat.datasets[0].id, "alpha");
  EXPECT_EQ(cat.datasets[1].id, "zeta");
}

TEST(Publish, InputValidation) {
  PublishBench bench;
  EXPECT_EQ(code_of([&] { catalog::publish(bench.ws, "bad id", {}); }),
            Errc::InvalidConfiguration);
  EXPECT_EQ(code_of([&] {
              catalog::publish(bench.ws, "ds-1", {bench.src / "missing.ttl"});
            }),
            Errc::IoError);
  catalog::PublishOptions opts;
  opts.created_at = "noonish";
  EXPECT_EQ(code_of([&] {
              catalog::publish(bench.ws, "ds-1", {bench.src / "annotation.ttl"}, opts);
            }),
            Errc::InvalidTimestamp);

  // Two sources with the same basename cannot land in one dataset directory.
  spit(bench.root.path / "other" / "annotation.ttl", "different\n");
  EXPECT_EQ(code_of([&] {
              catalog::publish(bench.ws, "ds-1",
                               {bench.src / "annotation.ttl",
                                bench.root.path / "other" / "annotation.ttl"});
            }),
            Errc::InvalidConfiguration);
}

TEST(Publish, DefaultCreatedAtIsARealInstant) {
  PublishBench bench;
  auto cat = catalog::publish(bench.ws, "ds-1", {bench.src / "annotation.ttl"});
  EXPECT_TRUE(timeutil::is_valid_instant(cat.datasets[0].created_at));
}

TEST(Publish, TamperDetection) {
  PublishBench bench;
  catalog::PublishOptions opts;
  opts.created_at = "2023-06-12T12:00:00Z";
  std::vector<fs::path> files{bench.src / "annotation.ttl", bench.src / "voltage-range.csv"};
  catalog::publish(bench.ws, "ds-1", files, opts);

  auto published = bench.ws / "datasets/ds-1/voltage-range.csv";
  spit(published, slurp(published) + "tampered\n");

  auto report = catalog::verify(bench.ws);
  EXPECT_FALSE(report.ok());
  ASSERT_EQ(report.mismatches.size(), 1u);
  EXPECT_EQ(report.mismatches[0].dataset_id, "ds-1");
  EXPECT_EQ(report.mismatches[0].relative_path, "datasets/ds-1/voltage-range.csv");
  EXPECT_NE(report.mismatches[0].actual_sha256, report.mismatches[0].expected_sha256);

  EXPECT_EQ(code_of([&] { catalog::publish(bench.ws, "ds-1", files, opts); }),
            Errc::ChecksumMismatch);
  // The failed publish released the lock on the way out.
  EXPECT_FALSE(fs::exists(bench.ws / catalog::lock_file_name()));

  fs::remove(published);
  report = catalog::verify(bench.ws);
  ASSERT_EQ(report.mismatches.size(), 1u);
  EXPECT_EQ(report.mismatches[0].actual_sha256, "missing");
  EXPECT_EQ(code_of([&] { catalog::publish(bench.ws, "ds-1", files, opts); }),
            Errc::ChecksumMismatch);
}

TEST(Publish, WorkspaceLockIsExclusive) {
  PublishBench bench;
  {
    catalog::WorkspaceLock lock(bench.ws);
    EXPECT_TRUE(fs::exists(bench.ws / catalog::lock_file_name()));
    EXPECT_EQ(code_of([&] { catalog::WorkspaceLock second(bench.ws); }), Errc::IoError);
    EXPECT_EQ(code_of([&] {
                catalog::publish(bench.ws, "ds-1", {bench.src / "annotation.ttl"});
              }),
              Errc::IoError);
  }
  EXPECT_FALSE(fs::exists(bench.ws / catalog::lock_file_name()));
  EXPECT_NO_THROW(catalog::publish(bench.ws, "ds-1", {bench.src / "annotation.ttl"}));
}
