// Command-line front end: annotate test artifacts into RDF, validate and
// query the graphs, diff system configurations, check reproducibility
// completeness, evaluate conformance traces, and publish datasets to a
// workspace catalog.
//
// Exit status: 0 success, 1 input or parse error, 2 validation violations
// (including FAIL/INCONCLUSIVE verdicts and checksum mismatches), 3 internal
// error. Primary output goes to stdout; diagnostics and progress notes go to
// stderr.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "testkg/catalog.hpp"
#include "testkg/checksum.hpp"
#include "testkg/en50549.hpp"
#include "testkg/errors.hpp"
#include "testkg/ingest.hpp"
#include "testkg/numfmt.hpp"
#include "testkg/prov.hpp"
#include "testkg/query.hpp"
#include "testkg/rdf.hpp"
#include "testkg/scm.hpp"
#include "testkg/store.hpp"
#include "testkg/trace.hpp"
#include "testkg/turtle.hpp"
#include "testkg/vocab.hpp"

namespace fs = std::filesystem;
using namespace testkg;

namespace {

struct GlobalOptions {
  std::string workspace = ".";
  std::string format = "text";
  bool quiet = false;

  bool structured() const { return format == "structured"; }
};

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::ShapeViolation:
    case Errc::ChecksumMismatch:
      return 2;
    default:
      return 1;
  }
}

Error with_file(const fs::path& path, const Error& e) {
  std::string message = path.string() + ": " + e.message();
  if (e.position()) return Error(e.code(), message, *e.position());
  return Error(e.code(), message);
}

std::string read_file(const fs::path& path) { return catalog::detail::read_file(path); }

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  catalog::detail::write_file(path, content);
}

rdf::Graph load_graph(const fs::path& path) {
  try {
    return turtle::parse_turtle(read_file(path));
  } catch (const Error& e) {
    throw with_file(path, e);
  }
}

store::Store load_store(const std::vector<std::string>& paths,
                        const catalog::WorkspaceConfig& config) {
  store::Store st;
  for (const auto& [name, iri] : config.prefixes) st.add_prefix(name, iri);
  for (const auto& path : paths) st.load(load_graph(path));
  return st;
}

void note(const GlobalOptions& global, const std::string& line) {
  if (!global.quiet) std::cerr << line << '\n';
}

std::string format_term(const rdf::Term& term, const rdf::Graph& prefixes) {
  switch (term.kind) {
    case rdf::TermKind::Iri:
      if (auto pn = prefixes.shrink(term.value)) return *pn;
      return "<" + term.value + ">";
    case rdf::TermKind::Blank:
      return "_:" + term.value;
    default: {
      std::string out = "\"" + term.value + "\"";
      if (!term.lang.empty()) return out + "@" + term.lang;
      if (!term.datatype.empty() && term.datatype != rdf::xsd::string_) {
        if (auto pn = prefixes.shrink(term.datatype)) return out + "^^" + *pn;
        return out + "^^<" + term.datatype + ">";
      }
      return out;
    }
  }
}

std::string focus_text(const rdf::Term& focus) {
  if (focus.kind == rdf::TermKind::Blank) return "_:" + focus.value;
  return focus.value;
}

nlohmann::json findings_json(const std::vector<vocab::ShapeFinding>& findings) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& f : findings)
    out.push_back({{"rule", f.rule_id},
                   {"focus", focus_text(f.focus)},
                   {"severity", vocab::severity_name(f.severity)},
                   {"message", f.message}});
  return out;
}

// -------------------------------------------------------------------------
// annotate
// -------------------------------------------------------------------------

struct AnnotateOptions {
  std::string suite_path;
  std::vector<std::string> test_paths;
  std::vector<std::string> log_paths;
  std::string channels_path;
  std::string context_path;
  std::string out_path;
};

int cmd_annotate(const AnnotateOptions& opts, const GlobalOptions& global,
                 const catalog::WorkspaceConfig& config) {
  ingest::SuiteConfig suite;
  try {
    suite = ingest::parse_suite(read_file(opts.suite_path));
  } catch (const Error& e) {
    throw with_file(opts.suite_path, e);
  }

  std::vector<ingest::TestConfig> tests;
  for (const auto& path : opts.test_paths) {
    try {
      tests.push_back(ingest::parse_test(read_file(path)));
    } catch (const Error& e) {
      throw with_file(path, e);
    }
  }

  std::map<std::string, trace::MeasurementTrace> traces;
  if (!opts.log_paths.empty()) {
    if (opts.channels_path.empty())
      throw Error(Errc::UnmappedColumn,
                  "log files given but no channel map (--channels)");
    auto channel_map = ingest::read_channel_map_json(read_file(opts.channels_path));
    for (const auto& path : opts.log_paths) {
      try {
        trace::MeasurementTrace tr = trace::parse_log(read_file(path), channel_map);
        tr.source_path = path;
        tr.sha256 = checksum::sha256_file(path);
        traces[fs::path(path).stem().string()] = std::move(tr);
      } catch (const Error& e) {
        throw with_file(path, e);
      }
    }
  }

  auto ctx = ingest::read_context_json(read_file(opts.context_path), config.base_iri);
  rdf::Graph graph = ingest::annotate(suite, tests, traces, ctx);

  store::Store st;
  st.load(graph);
  auto findings = vocab::check_shapes(st, vocab::annotation_shape_rules());
  if (vocab::has_violation(findings)) {
    for (const auto& f : findings)
      std::cerr << vocab::severity_name(f.severity) << ' ' << f.rule_id << ' '
                << focus_text(f.focus) << ": " << f.message << '\n';
    return 2;
  }

  std::string ttl = turtle::serialize_turtle(graph);
  if (opts.out_path.empty()) {
    std::cout << ttl;
  } else {
    write_file(opts.out_path, ttl);
    note(global, "wrote " + opts.out_path + " (" +
                     std::to_string(graph.triples().size()) + " triples)");
  }
  return 0;
}

// -------------------------------------------------------------------------
// validate
// -------------------------------------------------------------------------

struct ValidateOptions {
  std::vector<std::string> ttl_paths;
  std::string profile;
};

int cmd_validate(const ValidateOptions& opts, const GlobalOptions& global,
                 const catalog::WorkspaceConfig& config) {
  std::string profile = opts.profile.empty() ? config.rule_profile : opts.profile;
  auto rules = catalog::rules_for_profile(profile);
  store::Store st = load_store(opts.ttl_paths, config);
  auto findings = vocab::check_shapes(st, rules);

  std::size_t violations = 0, warnings = 0;
  for (const auto& f : findings)
    (f.severity == vocab::Severity::Violation ? violations : warnings) += 1;

  if (global.structured()) {
    nlohmann::json out{{"findings", findings_json(findings)},
                       {"violations", violations},
                       {"warnings", warnings}};
    std::cout << out.dump(2) << '\n';
  } else {
    for (const auto& f : findings)
      std::cout << vocab::severity_name(f.severity) << ' ' << f.rule_id << ' '
                << focus_text(f.focus) << ": " << f.message << '\n';
    note(global, std::to_string(violations) + " violations, " +
                     std::to_string(warnings) + " warnings");
  }
  return violations ? 2 : 0;
}

// -------------------------------------------------------------------------
// query
// -------------------------------------------------------------------------

struct QueryOptions {
  std::string query_text;
  std::string query_file;
  std::vector<std::string> ttl_paths;
};

int cmd_query(const QueryOptions& opts, const GlobalOptions& global,
              const catalog::WorkspaceConfig& config) {
  if (opts.query_text.empty() == opts.query_file.empty())
    throw Error(Errc::InvalidConfiguration,
                "exactly one of --query or --query-file is required");
  std::string text =
      opts.query_text.empty() ? read_file(opts.query_file) : opts.query_text;

  store::Store st = load_store(opts.ttl_paths, config);
  auto q = query::parse_query(text, st.prefixes());
  auto rows = st.select(q);

  std::vector<std::string> columns = q.projection;
  if (q.star) {
    columns.clear();
    for (const auto& pattern : q.patterns)
      for (const auto& var : pattern.variables())
        if (std::find(columns.begin(), columns.end(), var) == columns.end())
          columns.push_back(var);
  }

  rdf::Graph prefix_view;
  for (const auto& [name, iri] : st.prefixes()) prefix_view.add_prefix(name, iri);

  if (global.structured()) {
    nlohmann::json out;
    out["vars"] = columns;
    out["rows"] = nlohmann::json::array();
    for (const auto& row : rows) {
      nlohmann::json jrow = nlohmann::json::array();
      for (const auto& var : columns) {
        auto it = row.find(var);
        jrow.push_back(it == row.end() ? "" : format_term(it->second, prefix_view));
      }
      out["rows"].push_back(jrow);
    }
    std::cout << out.dump(2) << '\n';
  } else {
    for (std::size_t i = 0; i < columns.size(); ++i)
      std::cout << (i ? "\t" : "") << '?' << columns[i];
    if (!columns.empty()) std::cout << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < columns.size(); ++i) {
        auto it = row.find(columns[i]);
        std::cout << (i ? "\t" : "")
                  << (it == row.end() ? "" : format_term(it->second, prefix_view));
      }
      std::cout << '\n';
    }
    note(global, "(" + std::to_string(rows.size()) + " rows)");
  }
  return 0;
}

// -------------------------------------------------------------------------
// diff
// -------------------------------------------------------------------------

scm::SystemConfiguration load_configuration(const fs::path& path) {
  try {
    if (path.extension() == ".ttl") return scm::from_rdf(load_graph(path));
    return scm::read_configuration_json(read_file(path));
  } catch (const Error& e) {
    throw with_file(path, e);
  }
}

struct DiffOptions {
  std::string path_a;
  std::string path_b;
};

int cmd_diff(const DiffOptions& opts, const GlobalOptions& global,
             const catalog::WorkspaceConfig&) {
  auto a = load_configuration(opts.path_a);
  auto b = load_configuration(opts.path_b);
  scm::DiffReport report = scm::diff_configurations(a, b);

  if (global.structured()) {
    nlohmann::json changed = nlohmann::json::array();
    for (const auto& c : report.changed_attributes)
      changed.push_back({{"systemA", c.system_a},
                         {"systemB", c.system_b},
                         {"attribute", c.name},
                         {"valueA", c.value_a},
                         {"valueB", c.value_b}});
    nlohmann::json out{{"addedSystems", report.added_systems},
                       {"removedSystems", report.removed_systems},
                       {"changedAttributes", changed},
                       {"addedConnections", report.added_connections},
                       {"removedConnections", report.removed_connections}};
    std::cout << out.dump(2) << '\n';
  } else if (report.empty()) {
    note(global, "no differences");
  } else {
    for (const auto& id : report.removed_systems) std::cout << "removed system " << id << '\n';
    for (const auto& id : report.added_systems) std::cout << "added system " << id << '\n';
    for (const auto& c : report.changed_attributes) {
      std::cout << "changed " << c.system_a;
      if (c.system_b != c.system_a) std::cout << " (as " << c.system_b << ")";
      std::cout << '.' << c.name << ": " << (c.value_a.empty() ? "(absent)" : c.value_a)
                << " -> " << (c.value_b.empty() ? "(absent)" : c.value_b) << '\n';
    }
    for (const auto& id : report.removed_connections)
      std::cout << "removed connection " << id << '\n';
    for (const auto& id : report.added_connections)
      std::cout << "added connection " << id << '\n';
  }
  return 0;
}

// -------------------------------------------------------------------------
// check
// -------------------------------------------------------------------------

struct CheckOptions {
  std::vector<std::string> ttl_paths;
  std::string profile;
};

int cmd_check(const CheckOptions& opts, const GlobalOptions& global,
              const catalog::WorkspaceConfig& config) {
  std::string profile = opts.profile.empty() ? config.rule_profile : opts.profile;
  store::Store st = load_store(opts.ttl_paths, config);
  prov::CompletenessReport report =
      prov::check_completeness(st, catalog::rules_for_profile(profile));

  if (global.structured()) {
    nlohmann::json violations = nlohmann::json::array();
    for (const auto& v : report.violations)
      violations.push_back({{"rule", v.rule}, {"focus", v.focus}, {"message", v.message}});
    nlohmann::json out{{"score", report.score},
                       {"totalInstances", report.total_instances},
                       {"satisfiedInstances", report.satisfied_instances},
                       {"violations", violations},
                       {"warnings", report.warnings}};
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << "completeness score " << numfmt::format_double(report.score) << " ("
              << report.satisfied_instances << '/' << report.total_instances << ")\n";
    for (const auto& v : report.violations)
      std::cout << v.rule << ' ' << v.focus << ": " << v.message << '\n';
    for (const auto& w : report.warnings) std::cout << "warning: " << w << '\n';
  }
  return report.violations.empty() ? 0 : 2;
}

// -------------------------------------------------------------------------
// evaluate
// -------------------------------------------------------------------------

struct EvaluateCmdOptions {
  std::string trace_path;
  std::string channels_path;
  std::string kind;
  double un = 0;
  double pn = 0;
  std::optional<double> tolerance;
  std::optional<double> deadband;
  std::string connectivity;
  std::string report_path;
  std::string rdf_path;
  std::string test_iri;
  std::string plot_path;
};

nlohmann::json verdict_json(const en50549::Verdict& verdict) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& level : verdict.per_level)
    levels.push_back({{"expected", level.expected},
                      {"observedMean", level.observed_mean},
                      {"withinTolerance", level.within_tolerance},
                      {"connected", level.connected}});
  return nlohmann::json{{"outcome", en50549::outcome_name(verdict.outcome)},
                        {"perLevel", levels},
                        {"reasons", verdict.reasons}};
}

int cmd_evaluate(const EvaluateCmdOptions& opts, const GlobalOptions& global,
                 const catalog::WorkspaceConfig& config) {
  auto kind = en50549::kind_from_text(opts.kind);
  if (!kind)
    throw Error(Errc::InvalidSpec,
                "unknown sequence kind '" + opts.kind + "' (expected nor or apr)");

  en50549::TestSequenceSpec spec;
  if (*kind == en50549::SequenceKind::NormalOperatingRange) {
    if (opts.un <= 0)
      throw Error(Errc::InvalidNominal, "the voltage range test requires --un > 0");
    spec = en50549::nor_spec(opts.un);
    if (opts.pn > 0) spec.pn = opts.pn;
  } else {
    if (opts.pn <= 0)
      throw Error(Errc::InvalidNominal, "the power reduction test requires --pn > 0");
    spec = en50549::apr_spec(opts.pn);
  }
  spec.tolerance = opts.tolerance.value_or(config.level_tolerance);

  auto channel_map = ingest::read_channel_map_json(read_file(opts.channels_path));
  trace::MeasurementTrace tr;
  try {
    tr = trace::parse_log(read_file(opts.trace_path), channel_map);
  } catch (const Error& e) {
    throw with_file(opts.trace_path, e);
  }

  en50549::EvaluateOptions eval_opts;
  eval_opts.deadband = opts.deadband.value_or(config.step_deadband);
  eval_opts.connectivity_channel = opts.connectivity;
  en50549::Verdict verdict = en50549::evaluate(tr, spec, eval_opts);

  if (global.structured()) {
    std::cout << verdict_json(verdict).dump(2) << '\n';
  } else {
    std::cout << en50549::outcome_name(verdict.outcome) << '\n';
    for (std::size_t i = 0; i < verdict.per_level.size(); ++i) {
      const auto& level = verdict.per_level[i];
      std::cout << "level " << i + 1 << ": expected "
                << numfmt::format_double(level.expected) << " pu, mean "
                << numfmt::format_double(level.observed_mean) << " pu, "
                << (level.within_tolerance ? "within tolerance" : "out of tolerance")
                << ", " << (level.connected ? "connected" : "disconnected") << '\n';
    }
    for (const auto& reason : verdict.reasons) std::cout << "note: " << reason << '\n';
  }

  if (!opts.report_path.empty())
    write_file(opts.report_path, verdict_json(verdict).dump(2) + "\n");
  if (!opts.rdf_path.empty()) {
    std::string test_iri = opts.test_iri;
    if (test_iri.empty())
      test_iri = config.base_iri + "test/" +
                 ingest::detail::slug(fs::path(opts.trace_path).stem().string());
    write_file(opts.rdf_path,
               turtle::serialize_turtle(en50549::verdict_rdf(verdict, test_iri)));
  }
  if (!opts.plot_path.empty())
    write_file(opts.plot_path, trace::write_log(en50549::normalized_trace(tr, spec)));

  return verdict.outcome == en50549::Outcome::Pass ? 0 : 2;
}

// -------------------------------------------------------------------------
// publish
// -------------------------------------------------------------------------

struct PublishCmdOptions {
  std::string dataset_id;
  std::vector<std::string> files;
  std::string title;
  std::string publisher;
  std::vector<std::string> conforms_to;
  std::string created_at;
  bool verify = false;
};

int cmd_publish(const PublishCmdOptions& opts, const GlobalOptions& global,
                const catalog::WorkspaceConfig&) {
  fs::path workspace = global.workspace;
  if (opts.verify) {
    if (!opts.files.empty() || !opts.dataset_id.empty())
      throw Error(Errc::InvalidConfiguration,
                  "--verify checks the whole catalog; drop --dataset and file arguments");
    catalog::VerifyReport report = catalog::verify(workspace);
    if (global.structured()) {
      nlohmann::json mismatches = nlohmann::json::array();
      for (const auto& m : report.mismatches)
        mismatches.push_back({{"dataset", m.dataset_id},
                              {"relativePath", m.relative_path},
                              {"expected", m.expected_sha256},
                              {"actual", m.actual_sha256}});
      nlohmann::json out{{"filesChecked", report.files_checked},
                         {"mismatches", mismatches}};
      std::cout << out.dump(2) << '\n';
    } else {
      for (const auto& m : report.mismatches)
        std::cout << m.dataset_id << ' ' << m.relative_path << ": expected "
                  << m.expected_sha256 << ", got " << m.actual_sha256 << '\n';
      note(global, std::to_string(report.files_checked) + " files checked, " +
                       std::to_string(report.mismatches.size()) + " mismatches");
    }
    return report.ok() ? 0 : 2;
  }

  if (opts.dataset_id.empty())
    throw Error(Errc::InvalidConfiguration, "--dataset is required");
  if (opts.files.empty())
    throw Error(Errc::InvalidConfiguration, "no files to publish");

  catalog::PublishOptions publish_opts;
  publish_opts.title = opts.title;
  publish_opts.publisher = opts.publisher;
  publish_opts.conforms_to = opts.conforms_to;
  if (!opts.created_at.empty()) publish_opts.created_at = opts.created_at;

  std::vector<fs::path> files(opts.files.begin(), opts.files.end());
  catalog::publish(workspace, opts.dataset_id, files, publish_opts);
  note(global, "published " + std::to_string(files.size()) + " files to datasets/" +
                   opts.dataset_id + "; catalog at " +
                   (workspace / catalog::catalog_file_name()).string());
  return 0;
}

// -------------------------------------------------------------------------
// vocab emit
// -------------------------------------------------------------------------

struct VocabEmitOptions {
  std::string out_dir = "vocab";
  std::vector<std::string> names;
};

int cmd_vocab_emit(const VocabEmitOptions& opts, const GlobalOptions& global,
                   const catalog::WorkspaceConfig&) {
  std::vector<std::string> names =
      opts.names.empty() ? std::vector<std::string>{"htd", "scm", "provx", "annot"}
                         : opts.names;
  for (const auto& name : names) {
    rdf::Graph graph;
    if (name == "htd")
      graph = vocab::emit_vocabulary(vocab::htd_vocabulary());
    else if (name == "scm")
      graph = vocab::emit_vocabulary(vocab::scm_vocabulary());
    else if (name == "provx")
      graph = vocab::provenance_graph();
    else if (name == "annot")
      graph = vocab::emit_vocabulary(vocab::annotation_vocabulary());
    else
      throw Error(Errc::InvalidConfiguration,
                  "unknown vocabulary '" + name + "' (htd, scm, provx, annot)");
    fs::path out = fs::path(opts.out_dir) / (name + ".ttl");
    write_file(out, turtle::serialize_turtle(graph));
    note(global, "wrote " + out.string());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-graph toolkit for cyber-physical energy system test artifacts"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--workspace", global.workspace,
                 "Workspace directory holding testkg.json and the catalog")
      ->capture_default_str();
  app.add_option("--format", global.format, "Output format")
      ->check(CLI::IsMember({"text", "structured"}))
      ->capture_default_str();
  app.add_flag("--quiet", global.quiet, "Suppress informational notes");

  AnnotateOptions annotate_opts;
  auto* annotate = app.add_subcommand(
      "annotate", "Build an annotation graph from suite, tests, and logs");
  annotate->add_option("--suite", annotate_opts.suite_path, "Suite file (.ste)")
      ->required();
  annotate->add_option("--test", annotate_opts.test_paths, "Test file (.tst), repeatable")
      ->required();
  annotate->add_option("--log", annotate_opts.log_paths, "Measurement log (.csv)");
  annotate->add_option("--channels", annotate_opts.channels_path,
                       "Channel map (JSON column -> phenomenon/unit)");
  annotate->add_option("--context", annotate_opts.context_path,
                       "Annotation context (JSON organization/dataset ids)")
      ->required();
  annotate->add_option("--out", annotate_opts.out_path,
                       "Output .ttl path (default: stdout)");

  ValidateOptions validate_opts;
  auto* validate =
      app.add_subcommand("validate", "Check RDF files against shape rules");
  validate->add_option("files", validate_opts.ttl_paths, "Turtle files")->required();
  validate->add_option("--profile", validate_opts.profile,
                       "Rule profile (all, none, or comma list of htd,scm,prov,annotation)");

  QueryOptions query_opts;
  auto* query_cmd = app.add_subcommand("query", "Run a SELECT query over RDF files");
  query_cmd->add_option("files", query_opts.ttl_paths, "Turtle files")->required();
  query_cmd->add_option("--query", query_opts.query_text, "Query text");
  query_cmd->add_option("--query-file", query_opts.query_file, "File with query text");

  DiffOptions diff_opts;
  auto* diff =
      app.add_subcommand("diff", "Compare two system configurations (.json or .ttl)");
  diff->add_option("a", diff_opts.path_a, "First configuration")->required();
  diff->add_option("b", diff_opts.path_b, "Second configuration")->required();

  CheckOptions check_opts;
  auto* check = app.add_subcommand(
      "check", "Score reproducibility completeness of a knowledge graph");
  check->add_option("files", check_opts.ttl_paths, "Turtle files")->required();
  check->add_option("--profile", check_opts.profile, "Extra shape-rule profile");

  EvaluateCmdOptions evaluate_opts;
  auto* evaluate =
      app.add_subcommand("evaluate", "Evaluate a measurement trace against a sequence");
  evaluate->add_option("--trace", evaluate_opts.trace_path, "Measurement log (.csv)")
      ->required();
  evaluate->add_option("--channels", evaluate_opts.channels_path, "Channel map (JSON)")
      ->required();
  evaluate->add_option("--kind", evaluate_opts.kind, "Sequence kind: nor or apr")
      ->required();
  evaluate->add_option("--un", evaluate_opts.un, "Nominal voltage, volts");
  evaluate->add_option("--pn", evaluate_opts.pn, "Nominal power, watts");
  evaluate->add_option("--tolerance", evaluate_opts.tolerance,
                       "Per-level tolerance, pu (default from workspace config)");
  evaluate->add_option("--deadband", evaluate_opts.deadband,
                       "Step-detection deadband, pu (default from workspace config)");
  evaluate->add_option("--connectivity", evaluate_opts.connectivity,
                       "Breaker channel name (default: infer from active power)");
  evaluate->add_option("--report", evaluate_opts.report_path,
                       "Write the verdict report (JSON) to this path");
  evaluate->add_option("--rdf", evaluate_opts.rdf_path,
                       "Write the verdict as RDF (.ttl) to this path");
  evaluate->add_option("--test-iri", evaluate_opts.test_iri,
                       "Test-case IRI for the RDF verdict");
  evaluate->add_option("--plot", evaluate_opts.plot_path,
                       "Write per-unit plot data (CSV) to this path");

  PublishCmdOptions publish_opts;
  auto* publish =
      app.add_subcommand("publish", "Publish files to the workspace catalog");
  publish->add_option("files", publish_opts.files, "Files to publish");
  publish->add_option("--dataset", publish_opts.dataset_id, "Dataset identifier");
  publish->add_option("--title", publish_opts.title, "Dataset title");
  publish->add_option("--publisher", publish_opts.publisher, "Publishing organization");
  publish->add_option("--conforms-to", publish_opts.conforms_to,
                      "Vocabulary IRI the dataset conforms to, repeatable");
  publish->add_option("--created-at", publish_opts.created_at,
                      "Creation timestamp (ISO-8601; default: now)");
  publish->add_flag("--verify", publish_opts.verify,
                    "Verify catalog checksums instead of publishing");

  VocabEmitOptions vocab_opts;
  auto* vocab_cmd = app.add_subcommand("vocab", "Vocabulary utilities");
  vocab_cmd->require_subcommand(1);
  auto* vocab_emit = vocab_cmd->add_subcommand("emit", "Write vocabularies as Turtle");
  vocab_emit->add_option("--out-dir", vocab_opts.out_dir, "Output directory")
      ->capture_default_str();
  vocab_emit->add_option("names", vocab_opts.names,
                         "Vocabularies to emit (default: htd scm provx annot)");

  // Let global flags appear after the subcommand too.
  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
    sub->fallthrough();
    for (CLI::App* nested : sub->get_subcommands([](const CLI::App*) { return true; }))
      nested->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 1 : 0;
  }

  try {
    catalog::WorkspaceConfig config = catalog::load_workspace_config(global.workspace);
    if (*annotate) return cmd_annotate(annotate_opts, global, config);
    if (*validate) return cmd_validate(validate_opts, global, config);
    if (*query_cmd) return cmd_query(query_opts, global, config);
    if (*diff) return cmd_diff(diff_opts, global, config);
    if (*check) return cmd_check(check_opts, global, config);
    if (*evaluate) return cmd_evaluate(evaluate_opts, global, config);
    if (*publish) return cmd_publish(publish_opts, global, config);
    if (*vocab_emit) return cmd_vocab_emit(vocab_opts, global, config);
    std::cerr << "error: no subcommand\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
}
