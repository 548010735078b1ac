#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "testkg/errors.hpp"
#include "testkg/numfmt.hpp"
#include "testkg/rdf.hpp"
#include "testkg/scm.hpp"
#include "testkg/trace.hpp"
#include "testkg/vocab.hpp"

// Suite/test configuration ingestion and the annotation step that turns a
// suite, its tests, and their measurement logs into one RDF graph:
// organization -> dataset -> log file -> measurement -> phenomenon, plus
// test-case nodes linked to the system configuration.
//
// The .ste/.tst files use a simplified INI-style schema documented in
// docs/ste-tst-schema.md; they capture the information content of suite and
// test metadata files, not any vendor byte format.

namespace testkg::ingest {

using ParamValue = std::variant<bool, double, std::string>;

struct SuiteConfig {
  std::string suite_name;
  std::vector<std::string> test_refs;          // ordered
  std::vector<std::string> nested_suite_refs;  // ordered
  std::map<std::string, ParamValue> global_params;
};

struct TestConfig {
  std::string test_name;
  std::string script_ref;
  std::optional<std::string> standard_ref;
  std::map<std::string, ParamValue> params;
};

struct AnnotationContext {
  std::string organization_id;
  std::string organization_label;
  std::string system_config_id;
  std::string dataset_id;
  std::string dataset_title;
  std::string base_iri = std::string(rdf::ns::data_base);
};

inline std::string param_text(const ParamValue& v) {
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v) ? "true" : "false";
  if (std::holds_alternative<double>(v)) return numfmt::format_double(std::get<double>(v));
  return std::get<std::string>(v);
}

// ---------------------------------------------------------------------------
// INI-style parsing
// ---------------------------------------------------------------------------

namespace detail {

struct IniEntry {
  std::string key;
  std::string value;
  int line;
};

struct IniSection {
  std::string name;
  int line;
  std::vector<IniEntry> entries;
};

inline std::string trim(std::string_view text) {
  std::size_t b = text.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  std::size_t e = text.find_last_not_of(" \t");
  return std::string(text.substr(b, e - b + 1));
}

inline std::vector<IniSection> parse_ini(std::string_view text) {
  std::vector<IniSection> sections;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view raw =
        text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw Error(Errc::SyntaxError, "malformed section header", Position{line_no, 1});
      sections.push_back(IniSection{trim(line.substr(1, line.size() - 2)), line_no, {}});
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::SyntaxError, "expected 'key = value'", Position{line_no, 1});
    if (sections.empty())
      throw Error(Errc::SyntaxError, "entry before any [section]", Position{line_no, 1});
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw Error(Errc::SyntaxError, "empty key", Position{line_no, 1});
    sections.back().entries.push_back(IniEntry{key, value, line_no});
  }
  return sections;
}

inline ParamValue parse_param_value(const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  if (auto num = numfmt::parse_double(text)) return *num;
  return text;
}

inline std::string slug(std::string_view text) {
  std::string out;
  for (char c : text)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') ? c : '-';
  return out;
}

}  // namespace detail

/// Parses a suite configuration (.ste). A suite directly referencing itself
/// is rejected here; cross-file cycles are caught by check_suite_tree.
inline SuiteConfig parse_suite(std::string_view text) {
  SuiteConfig suite;
  bool named = false;
  for (const auto& section : detail::parse_ini(text)) {
    if (section.name == "suite") {
      for (const auto& e : section.entries) {
        if (e.key == "name") {
          suite.suite_name = e.value;
          named = true;
        } else {
          throw Error(Errc::SyntaxError, "unknown key '" + e.key + "' in [suite]",
                      Position{e.line, 1});
        }
      }
    } else if (section.name == "members") {
      for (const auto& e : section.entries) {
        if (e.key == "test")
          suite.test_refs.push_back(e.value);
        else if (e.key == "suite")
          suite.nested_suite_refs.push_back(e.value);
        else
          throw Error(Errc::SyntaxError, "unknown key '" + e.key + "' in [members]",
                      Position{e.line, 1});
      }
    } else if (section.name == "params") {
      for (const auto& e : section.entries)
        suite.global_params[e.key] = detail::parse_param_value(e.value);
    } else {
      throw Error(Errc::SyntaxError, "unknown section [" + section.name + "]",
                  Position{section.line, 1});
    }
  }
  if (!named || suite.suite_name.empty())
    throw Error(Errc::SyntaxError, "suite has no name", Position{1, 1});
  for (const auto& ref : suite.nested_suite_refs)
    if (ref == suite.suite_name)
      throw Error(Errc::CyclicSuite, "suite '" + suite.suite_name + "' references itself");
  return suite;
}

/// Parses a test configuration (.tst).
inline TestConfig parse_test(std::string_view text) {
  TestConfig test;
  bool named = false;
  for (const auto& section : detail::parse_ini(text)) {
    if (section.name == "test") {
      for (const auto& e : section.entries) {
        if (e.key == "name") {
          test.test_name = e.value;
          named = true;
        } else if (e.key == "script") {
          test.script_ref = e.value;
        } else if (e.key == "standard") {
          test.standard_ref = e.value;
        } else {
          throw Error(Errc::SyntaxError, "unknown key '" + e.key + "' in [test]",
                      Position{e.line, 1});
        }
      }
    } else if (section.name == "params") {
      for (const auto& e : section.entries)
        test.params[e.key] = detail::parse_param_value(e.value);
    } else {
      throw Error(Errc::SyntaxError, "unknown section [" + section.name + "]",
                  Position{section.line, 1});
    }
  }
  if (!named || test.test_name.empty())
    throw Error(Errc::SyntaxError, "test has no name", Position{1, 1});
  return test;
}

/// Detects reference cycles across a set of suites (keyed by suite name).
inline void check_suite_tree(const std::map<std::string, SuiteConfig>& suites) {
  std::set<std::string> done, in_progress;
  std::vector<std::pair<std::string, std::size_t>> stack;
  for (const auto& [name, _] : suites) {
    if (done.count(name)) continue;
    stack.push_back({name, 0});
    in_progress.insert(name);
    while (!stack.empty()) {
      auto& [current, next] = stack.back();
      auto it = suites.find(current);
      if (it == suites.end() || next >= it->second.nested_suite_refs.size()) {
        in_progress.erase(current);
        done.insert(current);
        stack.pop_back();
        continue;
      }
      const std::string& ref = it->second.nested_suite_refs[next++];
      if (in_progress.count(ref))
        throw Error(Errc::CyclicSuite, "suite cycle through '" + ref + "'");
      if (!done.count(ref)) {
        in_progress.insert(ref);
        stack.push_back({ref, 0});
      }
    }
  }
}

// ---------------------------------------------------------------------------
// JSON side files: channel map + annotation context
// ---------------------------------------------------------------------------

/// Channel map: { "column": { "phenomenon": IRI-or-local-name, "unit": text } }.
/// Local phenomenon names resolve against the annotation vocabulary.
inline trace::ChannelMap read_channel_map_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::SyntaxError, std::string("channel map is not valid JSON: ") + e.what());
  }
  if (!doc.is_object())
    throw Error(Errc::InvalidConfiguration, "channel map must be a JSON object");
  trace::ChannelMap map;
  for (const auto& [column, binding] : doc.items()) {
    if (!binding.is_object() || !binding.contains("phenomenon") ||
        !binding["phenomenon"].is_string())
      throw Error(Errc::InvalidConfiguration,
                  "channel '" + column + "' needs a phenomenon IRI");
    std::string ph = binding["phenomenon"].get<std::string>();
    if (ph.find("://") == std::string::npos) ph = vocab::annot(ph);
    map[column] = trace::ChannelBinding{ph, binding.value("unit", std::string())};
  }
  return map;
}

inline AnnotationContext read_context_json(
    const std::string& text, const std::string& fallback_base = std::string(rdf::ns::data_base)) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::SyntaxError, std::string("context is not valid JSON: ") + e.what());
  }
  AnnotationContext ctx;
  if (!doc.contains("organization") || !doc["organization"].is_object() ||
      !doc["organization"].contains("id"))
    throw Error(Errc::InvalidConfiguration, "context needs organization.id");
  ctx.organization_id = doc["organization"]["id"].get<std::string>();
  ctx.organization_label = doc["organization"].value("label", std::string());
  if (!doc.contains("systemConfigId") || !doc.contains("datasetId"))
    throw Error(Errc::InvalidConfiguration, "context needs systemConfigId and datasetId");
  ctx.system_config_id = doc["systemConfigId"].get<std::string>();
  ctx.dataset_id = doc["datasetId"].get<std::string>();
  ctx.dataset_title = doc.value("datasetTitle", std::string());
  ctx.base_iri = doc.value("baseIri", fallback_base);
  if (!rdf::detail::valid_iri(ctx.base_iri))
    throw Error(Errc::InvalidConfiguration, "baseIri is not an absolute IRI");
  return ctx;
}

// ---------------------------------------------------------------------------
// Annotation
// ---------------------------------------------------------------------------

/// Builds the annotation graph. IRIs are minted deterministically from the
/// context ids and sorted trace keys, so identical inputs serialize to
/// identical bytes. Raw samples stay in their CSV files; the graph carries
/// the file path and checksum.
inline rdf::Graph annotate(const SuiteConfig& suite, const std::vector<TestConfig>& tests,
                           const std::map<std::string, trace::MeasurementTrace>& traces,
                           const AnnotationContext& ctx) {
  std::set<std::string> test_names;
  for (const auto& t : tests) test_names.insert(t.test_name);
  for (const auto& ref : suite.test_refs)
    if (!test_names.count(ref))
      throw Error(Errc::UnresolvedReference,
                  "suite '" + suite.suite_name + "' references unknown test '" + ref + "'");
  for (const auto& [name, _] : traces)
    if (!test_names.count(name))
      throw Error(Errc::UnresolvedReference, "trace '" + name + "' matches no test");
  for (const std::string* id :
       {&ctx.organization_id, &ctx.system_config_id, &ctx.dataset_id})
    if (!scm::detail::valid_id(*id))
      throw Error(Errc::InvalidConfiguration, "context id '" + *id +
                                                  "' must match [A-Za-z0-9_-]+");

  rdf::Graph g;
  g.add_prefix("annot", rdf::ns::annot);
  g.add_prefix("htd", rdf::ns::htd);
  g.add_prefix("rdf", rdf::ns::rdf);
  g.add_prefix("rdfs", rdf::ns::rdfs);
  g.add_prefix("scm", rdf::ns::scm);
  g.add_prefix("xsd", rdf::ns::xsd);

  auto type = rdf::make_iri(rdf::rdf_type);
  auto label = rdf::make_iri(rdf::rdfs_label);
  const std::string& base = ctx.base_iri;

  auto org = rdf::make_iri(base + "org/" + ctx.organization_id);
  auto dataset = rdf::make_iri(base + "dataset/" + ctx.dataset_id);
  g.insert(org, type, rdf::make_iri(vocab::annot("Organization")));
  g.insert(org, label,
           rdf::make_literal(ctx.organization_label.empty() ? ctx.organization_id
                                                            : ctx.organization_label));
  g.insert(org, rdf::make_iri(vocab::annot("owns")), dataset);
  g.insert(org, rdf::make_iri(vocab::annot("provides")), dataset);
  g.insert(dataset, type, rdf::make_iri(vocab::annot("Dataset")));
  g.insert(dataset, label,
           rdf::make_literal(ctx.dataset_title.empty() ? ctx.dataset_id : ctx.dataset_title));

  auto config = rdf::make_iri(base + "config/" + ctx.system_config_id);
  for (const auto& test : tests) {
    auto test_iri = rdf::make_iri(base + "test/" + detail::slug(test.test_name));
    g.insert(test_iri, type, rdf::make_iri(vocab::htd("TestCase")));
    g.insert(test_iri, label, rdf::make_literal(test.test_name));
    g.insert(test_iri, rdf::make_iri(vocab::htd("usesSystemConfiguration")), config);
    if (test.standard_ref) {
      auto crit = rdf::make_iri(base + "criteria/" + detail::slug(*test.standard_ref));
      g.insert(test_iri, rdf::make_iri(vocab::htd("appliesCriteria")), crit);
      g.insert(crit, type, rdf::make_iri(vocab::htd("TestCriteria")));
      g.insert(crit, label, rdf::make_literal(*test.standard_ref));
    }
  }

  std::size_t log_index = 0;
  for (const auto& [test_name, tr] : traces) {
    ++log_index;
    std::string log_path =
        base + "dataset/" + ctx.dataset_id + "/log/" + std::to_string(log_index);
    auto log = rdf::make_iri(log_path);
    g.insert(dataset, rdf::make_iri(vocab::annot("containsLogFile")), log);
    g.insert(log, type, rdf::make_iri(vocab::annot("LogFile")));
    g.insert(log, label, rdf::make_literal(test_name));
    if (!tr.source_path.empty())
      g.insert(log, rdf::make_iri(vocab::annot("filePath")),
               rdf::make_literal(tr.source_path));
    if (!tr.sha256.empty())
      g.insert(log, rdf::make_iri(vocab::annot("sha256")), rdf::make_literal(tr.sha256));

    for (const auto& ch : tr.channels) {
      auto m = rdf::make_iri(base + "measurement/" + ctx.dataset_id + "/log/" +
                             std::to_string(log_index) + "/" + detail::slug(ch.name));
      g.insert(log, rdf::make_iri(vocab::annot("storesMeasurement")), m);
      g.insert(m, type, rdf::make_iri(vocab::annot("Measurement")));
      g.insert(m, label, rdf::make_literal(ch.name));
      auto ph = rdf::make_iri(ch.phenomenon);
      g.insert(m, rdf::make_iri(vocab::annot("recordsPhenomenon")), ph);
      g.insert(ph, type, rdf::make_iri(vocab::annot("Phenomenon")));
      auto unit = rdf::make_iri(base + "unit/" + detail::slug(ch.unit.empty() ? "none"
                                                                               : ch.unit));
      g.insert(m, rdf::make_iri(vocab::annot("hasUnit")), unit);
      g.insert(unit, type, rdf::make_iri(vocab::annot("Unit")));
      g.insert(unit, label, rdf::make_literal(ch.unit.empty() ? "none" : ch.unit));
    }
  }
  return g;
}

}  // namespace testkg::ingest
