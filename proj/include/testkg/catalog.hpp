#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "testkg/checksum.hpp"
#include "testkg/errors.hpp"
#include "testkg/rdf.hpp"
#include "testkg/scm.hpp"
#include "testkg/timeutil.hpp"
#include "testkg/vocab.hpp"

// File-tree "dataspace": a workspace directory holding published dataset
// copies under datasets/<id>/ plus a catalog.json manifest with SHA-256
// checksums. Publishing is idempotent for unchanged content; a workspace
// copy that no longer matches its manifest checksum is treated as tampering.
// No network protocol is implied; a catalog service could be layered on the
// manifest without changing published workspaces (the manifest is versioned
// for that reason).

namespace testkg::catalog {

namespace fs = std::filesystem;

struct WorkspaceConfig {
  std::string base_iri = std::string(rdf::ns::data_base);
  std::map<std::string, std::string> prefixes = vocab::default_prefixes();
  double level_tolerance = 0.05;  // verdict tolerance, pu
  double step_deadband = 0.02;    // step detection deadband, pu
  std::string rule_profile = "all";
};

inline const char* config_file_name() { return "testkg.json"; }
inline const char* catalog_file_name() { return "catalog.json"; }
inline const char* lock_file_name() { return ".testkg.lock"; }

/// Maps a profile name ("all", "none", or comma list of htd/scm/prov/
/// annotation) to the shape rules it enables.
inline std::vector<vocab::ShapeRule> rules_for_profile(const std::string& profile) {
  std::vector<vocab::ShapeRule> rules;
  std::stringstream ss(profile);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part == "all")
      for (auto& r : vocab::all_shape_rules()) rules.push_back(std::move(r));
    else if (part == "htd")
      for (auto& r : vocab::htd_shape_rules()) rules.push_back(std::move(r));
    else if (part == "scm")
      for (auto& r : vocab::scm_shape_rules()) rules.push_back(std::move(r));
    else if (part == "prov")
      for (auto& r : vocab::prov_shape_rules()) rules.push_back(std::move(r));
    else if (part == "annotation")
      for (auto& r : vocab::annotation_shape_rules()) rules.push_back(std::move(r));
    else if (part != "none" && !part.empty())
      throw Error(Errc::InvalidConfiguration, "unknown rule profile '" + part + "'");
  }
  return rules;
}

namespace detail {

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(Errc::IoError, "short write to " + path.string());
}

}  // namespace detail

/// Reads testkg.json from the workspace root; a missing file yields the
/// defaults. Command-line flags are expected to override these values;
/// environment variables never do.
inline WorkspaceConfig load_workspace_config(const fs::path& workspace) {
  WorkspaceConfig config;
  fs::path path = workspace / config_file_name();
  if (!fs::exists(path)) return config;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(detail::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::SyntaxError, path.string() + ": " + e.what());
  }
  config.base_iri = doc.value("baseIri", config.base_iri);
  if (!rdf::detail::valid_iri(config.base_iri))
    throw Error(Errc::InvalidConfiguration, "baseIri must be an absolute IRI");
  if (doc.contains("prefixes")) {
    if (!doc["prefixes"].is_object())
      throw Error(Errc::InvalidConfiguration, "prefixes must be an object");
    for (const auto& [name, iri] : doc["prefixes"].items()) {
      if (!iri.is_string() || !rdf::detail::valid_iri(iri.get<std::string>()))
        throw Error(Errc::InvalidConfiguration, "prefix '" + name + "' has no valid IRI");
      config.prefixes[name] = iri.get<std::string>();
    }
  }
  if (doc.contains("tolerances")) {
    const auto& tol = doc["tolerances"];
    config.level_tolerance = tol.value("level", config.level_tolerance);
    config.step_deadband = tol.value("deadband", config.step_deadband);
    if (config.level_tolerance <= 0 || config.step_deadband < 0)
      throw Error(Errc::InvalidConfiguration, "tolerances must be positive");
  }
  config.rule_profile = doc.value("ruleProfile", config.rule_profile);
  rules_for_profile(config.rule_profile);  // validates the name
  return config;
}

// ---------------------------------------------------------------------------
// Catalog manifest
// ---------------------------------------------------------------------------

enum class MediaKind { Turtle, Csv, Report };

inline const char* media_kind_name(MediaKind k) {
  switch (k) {
    case MediaKind::Turtle: return "turtle";
    case MediaKind::Csv: return "csv";
    default: return "report";
  }
}

inline MediaKind media_kind_for(const fs::path& path) {
  auto ext = path.extension().string();
  if (ext == ".ttl") return MediaKind::Turtle;
  if (ext == ".csv") return MediaKind::Csv;
  return MediaKind::Report;
}

inline MediaKind media_kind_from_name(const std::string& name) {
  if (name == "turtle") return MediaKind::Turtle;
  if (name == "csv") return MediaKind::Csv;
  if (name == "report") return MediaKind::Report;
  throw Error(Errc::InvalidConfiguration, "unknown media kind '" + name + "'");
}

struct FileEntry {
  std::string relative_path;  // from the workspace root
  MediaKind media_kind = MediaKind::Report;
  std::string sha256;

  friend bool operator==(const FileEntry&, const FileEntry&) = default;
};

struct DatasetDescriptor {
  std::string id;
  std::string title;
  std::string publisher;
  std::vector<FileEntry> files;           // sorted by relative path
  std::vector<std::string> conforms_to;   // vocabulary IRIs, sorted
  std::string created_at;                 // ISO-8601 instant

  friend bool operator==(const DatasetDescriptor&, const DatasetDescriptor&) = default;
};

struct Catalog {
  int version = 1;
  std::vector<DatasetDescriptor> datasets;  // sorted by id

  friend bool operator==(const Catalog&, const Catalog&) = default;
};

inline nlohmann::json to_json(const Catalog& catalog) {
  nlohmann::json doc;
  doc["version"] = catalog.version;
  doc["datasets"] = nlohmann::json::array();
  for (const auto& ds : catalog.datasets) {
    nlohmann::json entry;
    entry["id"] = ds.id;
    entry["title"] = ds.title;
    entry["publisher"] = ds.publisher;
    entry["createdAt"] = ds.created_at;
    entry["conformsTo"] = ds.conforms_to;
    entry["files"] = nlohmann::json::array();
    for (const auto& file : ds.files)
      entry["files"].push_back({{"relativePath", file.relative_path},
                                {"mediaKind", media_kind_name(file.media_kind)},
                                {"sha256", file.sha256}});
    doc["datasets"].push_back(entry);
  }
  return doc;
}

inline Catalog catalog_from_json(const nlohmann::json& doc) {
  Catalog catalog;
  if (!doc.is_object() || !doc.contains("version") || !doc["version"].is_number_integer())
    throw Error(Errc::InvalidConfiguration, "catalog manifest needs an integer version");
  catalog.version = doc["version"].get<int>();
  if (catalog.version != 1)
    throw Error(Errc::InvalidConfiguration,
                "unsupported catalog version " + std::to_string(catalog.version));
  std::set<std::string> seen;
  for (const auto& entry : doc.value("datasets", nlohmann::json::array())) {
    DatasetDescriptor ds;
    ds.id = entry.value("id", std::string());
    if (!scm::detail::valid_id(ds.id))
      throw Error(Errc::InvalidConfiguration, "dataset id '" + ds.id + "' is invalid");
    if (!seen.insert(ds.id).second)
      throw Error(Errc::InvalidConfiguration, "duplicate dataset id '" + ds.id + "'");
    ds.title = entry.value("title", std::string());
    ds.publisher = entry.value("publisher", std::string());
    ds.created_at = entry.value("createdAt", std::string());
    if (!ds.created_at.empty() && !timeutil::is_valid_instant(ds.created_at))
      throw Error(Errc::InvalidTimestamp, "dataset '" + ds.id + "' createdAt is invalid");
    for (const auto& iri : entry.value("conformsTo", nlohmann::json::array()))
      ds.conforms_to.push_back(iri.get<std::string>());
    for (const auto& file : entry.value("files", nlohmann::json::array()))
      ds.files.push_back(FileEntry{file.value("relativePath", std::string()),
                                   media_kind_from_name(file.value("mediaKind", "report")),
                                   file.value("sha256", std::string())});
    catalog.datasets.push_back(std::move(ds));
  }
  return catalog;
}

inline Catalog load_catalog(const fs::path& workspace) {
  fs::path path = workspace / catalog_file_name();
  if (!fs::exists(path)) return Catalog{};
  try {
    return catalog_from_json(nlohmann::json::parse(detail::read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::SyntaxError, path.string() + ": " + e.what());
  }
}

inline void store_catalog(const fs::path& workspace, const Catalog& catalog) {
  detail::write_file(workspace / catalog_file_name(), to_json(catalog).dump(2) + "\n");
}

/// Advisory exclusive lock on the workspace; a leftover lock file from a
/// crashed run must be removed by hand.
class WorkspaceLock {
 public:
  explicit WorkspaceLock(const fs::path& workspace)
      : path_(workspace / lock_file_name()) {
    if (fs::exists(path_))
      throw Error(Errc::IoError,
                  "workspace is locked (" + path_.string() + " exists)");
    std::ofstream out(path_);
    if (!out) throw Error(Errc::IoError, "cannot create " + path_.string());
    out << "locked\n";
  }
  ~WorkspaceLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  WorkspaceLock(const WorkspaceLock&) = delete;
  WorkspaceLock& operator=(const WorkspaceLock&) = delete;

 private:
  fs::path path_;
};

inline std::string now_instant() {
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::system_clock::now().time_since_epoch())
                .count();
  return timeutil::format_instant(ms);
}

struct PublishOptions {
  std::string title;
  std::string publisher;
  std::vector<std::string> conforms_to;
  std::optional<std::string> created_at;  // default: current time, kept on update
};

/// Copies files into <workspace>/datasets/<id>/ and updates the manifest.
/// Re-publishing identical content is a no-op; a workspace copy that
/// disagrees with its manifest checksum aborts with ChecksumMismatch before
/// anything is modified.
inline Catalog publish(const fs::path& workspace, const std::string& dataset_id,
                       const std::vector<fs::path>& files,
                       const PublishOptions& options = {}) {
  if (!scm::detail::valid_id(dataset_id))
    throw Error(Errc::InvalidConfiguration,
                "dataset id must match [A-Za-z0-9_-]+, got '" + dataset_id + "'");
  if (options.created_at && !timeutil::is_valid_instant(*options.created_at))
    throw Error(Errc::InvalidTimestamp, "createdAt is not a valid instant");
  std::map<std::string, fs::path> sources;  // basename -> source path
  for (const auto& file : files) {
    if (!fs::exists(file)) throw Error(Errc::IoError, "no such file: " + file.string());
    std::string name = file.filename().string();
    if (!sources.emplace(name, file).second)
      throw Error(Errc::InvalidConfiguration, "duplicate file name '" + name + "'");
  }

  fs::create_directories(workspace / "datasets" / dataset_id);
  WorkspaceLock lock(workspace);
  Catalog catalog = load_catalog(workspace);

  auto it = std::find_if(catalog.datasets.begin(), catalog.datasets.end(),
                         [&](const DatasetDescriptor& d) { return d.id == dataset_id; });
  if (it == catalog.datasets.end()) {
    DatasetDescriptor ds;
    ds.id = dataset_id;
    ds.created_at = options.created_at.value_or(now_instant());
    catalog.datasets.push_back(ds);
    std::sort(catalog.datasets.begin(), catalog.datasets.end(),
              [](const DatasetDescriptor& a, const DatasetDescriptor& b) {
                return a.id < b.id;
              });
    it = std::find_if(catalog.datasets.begin(), catalog.datasets.end(),
                      [&](const DatasetDescriptor& d) { return d.id == dataset_id; });
  }

  // Detect tampering with already-published copies before touching anything.
  for (const auto& entry : it->files) {
    fs::path copy = workspace / entry.relative_path;
    if (!fs::exists(copy))
      throw Error(Errc::ChecksumMismatch,
                  "published file missing: " + entry.relative_path);
    if (checksum::sha256_file(copy) != entry.sha256)
      throw Error(Errc::ChecksumMismatch,
                  "published file was modified outside publish: " + entry.relative_path);
  }

  if (!options.title.empty()) it->title = options.title;
  if (!options.publisher.empty()) it->publisher = options.publisher;
  if (options.created_at) it->created_at = *options.created_at;
  std::set<std::string> conforms(it->conforms_to.begin(), it->conforms_to.end());
  conforms.insert(options.conforms_to.begin(), options.conforms_to.end());
  it->conforms_to.assign(conforms.begin(), conforms.end());

  for (const auto& [name, source] : sources) {
    std::string content = detail::read_file(source);
    std::string digest = checksum::sha256_hex(content);
    std::string relative = "datasets/" + dataset_id + "/" + name;
    fs::path copy = workspace / relative;
    if (!fs::exists(copy) || checksum::sha256_file(copy) != digest)
      detail::write_file(copy, content);
    FileEntry entry{relative, media_kind_for(source), digest};
    auto pos = std::find_if(it->files.begin(), it->files.end(), [&](const FileEntry& f) {
      return f.relative_path == relative;
    });
    if (pos == it->files.end())
      it->files.push_back(entry);
    else
      *pos = entry;
  }
  std::sort(it->files.begin(), it->files.end(),
            [](const FileEntry& a, const FileEntry& b) {
              return a.relative_path < b.relative_path;
            });

  store_catalog(workspace, catalog);
  return catalog;
}

struct VerifyMismatch {
  std::string dataset_id;
  std::string relative_path;
  std::string expected_sha256;
  std::string actual_sha256;  // "missing" when the file does not exist

  friend bool operator==(const VerifyMismatch&, const VerifyMismatch&) = default;
};

struct VerifyReport {
  std::size_t files_checked = 0;
  std::vector<VerifyMismatch> mismatches;

  bool ok() const { return mismatches.empty(); }
};

/// Recomputes every checksum in the manifest against the workspace copies.
inline VerifyReport verify(const fs::path& workspace) {
  VerifyReport report;
  Catalog catalog = load_catalog(workspace);
  for (const auto& ds : catalog.datasets) {
    for (const auto& entry : ds.files) {
      ++report.files_checked;
      fs::path copy = workspace / entry.relative_path;
      if (!fs::exists(copy)) {
        report.mismatches.push_back(
            VerifyMismatch{ds.id, entry.relative_path, entry.sha256, "missing"});
        continue;
      }
      std::string actual = checksum::sha256_file(copy);
      if (actual != entry.sha256)
        report.mismatches.push_back(
            VerifyMismatch{ds.id, entry.relative_path, entry.sha256, actual});
    }
  }
  return report;
}

}  // namespace testkg::catalog
