#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "testkg/errors.hpp"
#include "testkg/rdf.hpp"
#include "testkg/store.hpp"

// The three ontology viewpoints (test descriptions, system configurations,
// workflow provenance) plus the dataset-annotation vocabulary, as plain
// term tables emitted to RDF, and a small closed shape-rule language for
// consistency checks.
//
// The test-description and system-configuration vocabularies have no
// published namespace; they are minted under the project base IRI. The
// provenance vocabulary reuses the W3C namespace for the core terms and
// puts the workflow-template extension in its own project namespace.

namespace testkg::vocab {

// IRI builders for the project namespaces.
inline std::string htd(std::string_view local) { return std::string(rdf::ns::htd) + std::string(local); }
inline std::string scm(std::string_view local) { return std::string(rdf::ns::scm) + std::string(local); }
inline std::string provx(std::string_view local) { return std::string(rdf::ns::provx) + std::string(local); }
inline std::string annot(std::string_view local) { return std::string(rdf::ns::annot) + std::string(local); }
inline std::string prov(std::string_view local) { return std::string(rdf::ns::prov) + std::string(local); }

struct VocabClass {
  std::string local_name;
  std::string label;
  std::string comment;  // optional
};

struct VocabProperty {
  std::string local_name;
  std::string domain;  // declared class local name or absolute IRI
  std::string range;   // declared class local name, datatype IRI, or absolute IRI
  std::string label;
};

struct VocabIndividual {
  std::string local_name;
  std::string class_name;  // declared class local name or absolute IRI
  std::string label;
};

struct Vocabulary {
  std::string namespace_iri;
  std::string preferred_prefix;
  std::vector<VocabClass> classes;
  std::vector<VocabProperty> properties;
  std::vector<VocabIndividual> individuals;
};

// ---------------------------------------------------------------------------
// Shape rules: a closed four-kind constraint language, enough for every
// completeness rule this toolkit checks. Not a full shapes standard.
// ---------------------------------------------------------------------------

enum class ConstraintKind { MinCount, MaxCount, ValueIn, DatatypeIs };
enum class Severity { Violation, Warning };

struct ShapeRule {
  std::string id;
  std::string target_class;  // absolute IRI; rule applies to nodes of this type
  ConstraintKind kind = ConstraintKind::MinCount;
  std::string property;  // absolute IRI
  std::size_t count = 0;                // MinCount / MaxCount
  std::vector<std::string> value_set;   // ValueIn (IRIs)
  std::string datatype;                 // DatatypeIs
  Severity severity = Severity::Violation;
  std::string message;
};

struct ShapeFinding {
  std::string rule_id;
  rdf::Term focus;
  Severity severity = Severity::Violation;
  std::string message;
};

inline const char* severity_name(Severity s) {
  return s == Severity::Violation ? "violation" : "warning";
}

inline ShapeRule min_count(std::string id, std::string target, std::string property,
                           std::size_t n, Severity sev, std::string message) {
  ShapeRule r;
  r.id = std::move(id);
  r.target_class = std::move(target);
  r.kind = ConstraintKind::MinCount;
  r.property = std::move(property);
  r.count = n;
  r.severity = sev;
  r.message = std::move(message);
  return r;
}

inline ShapeRule max_count(std::string id, std::string target, std::string property,
                           std::size_t n, Severity sev, std::string message) {
  ShapeRule r = min_count(std::move(id), std::move(target), std::move(property), n, sev,
                          std::move(message));
  r.kind = ConstraintKind::MaxCount;
  return r;
}

inline ShapeRule value_in(std::string id, std::string target, std::string property,
                          std::vector<std::string> values, Severity sev, std::string message) {
  ShapeRule r = min_count(std::move(id), std::move(target), std::move(property), 0, sev,
                          std::move(message));
  r.kind = ConstraintKind::ValueIn;
  r.value_set = std::move(values);
  return r;
}

inline ShapeRule datatype_is(std::string id, std::string target, std::string property,
                             std::string datatype, Severity sev, std::string message) {
  ShapeRule r = min_count(std::move(id), std::move(target), std::move(property), 0, sev,
                          std::move(message));
  r.kind = ConstraintKind::DatatypeIs;
  r.datatype = std::move(datatype);
  return r;
}

/// Evaluates every rule against every instance of its target class. One
/// finding per (rule, focus node) breach; warnings and violations share the
/// list and are told apart by severity.
inline std::vector<ShapeFinding> check_shapes(const store::Store& s,
                                              const std::vector<ShapeRule>& rules) {
  std::vector<ShapeFinding> findings;
  for (const auto& rule : rules) {
    if (rule.message.empty())
      throw Error(Errc::InvalidConfiguration, "shape rule '" + rule.id + "' has no message");
    store::TriplePattern focus_pattern{store::PatternSlot::variable("focus"),
                                       store::PatternSlot::ground(rdf::make_iri(rdf::rdf_type)),
                                       store::PatternSlot::ground(rdf::make_iri(rule.target_class))};
    for (const auto& binding : s.match(focus_pattern)) {
      const rdf::Term& focus = binding.at("focus");
      store::TriplePattern values{store::PatternSlot::ground(focus),
                                  store::PatternSlot::ground(rdf::make_iri(rule.property)),
                                  store::PatternSlot::variable("v")};
      auto matched = s.match(values);
      bool breach = false;
      switch (rule.kind) {
        case ConstraintKind::MinCount:
          breach = matched.size() < rule.count;
          break;
        case ConstraintKind::MaxCount:
          breach = matched.size() > rule.count;
          break;
        case ConstraintKind::ValueIn:
          for (const auto& m : matched) {
            const rdf::Term& v = m.at("v");
            if (!v.is_iri() || std::find(rule.value_set.begin(), rule.value_set.end(),
                                         v.value) == rule.value_set.end()) {
              breach = true;
              break;
            }
          }
          break;
        case ConstraintKind::DatatypeIs:
          for (const auto& m : matched) {
            const rdf::Term& v = m.at("v");
            if (!v.is_literal() || v.datatype != rule.datatype) {
              breach = true;
              break;
            }
          }
          break;
      }
      if (breach)
        findings.push_back(ShapeFinding{rule.id, focus, rule.severity, rule.message});
    }
  }
  return findings;
}

inline bool has_violation(const std::vector<ShapeFinding>& findings) {
  for (const auto& f : findings)
    if (f.severity == Severity::Violation) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Vocabulary definitions
// ---------------------------------------------------------------------------

/// Test-description viewpoint: test case, specification, experiment, and
/// the investigated object/system/function, kept separate from lab
/// infrastructure.
inline Vocabulary htd_vocabulary() {
  Vocabulary v;
  v.namespace_iri = rdf::ns::htd;
  v.preferred_prefix = "htd";
  v.classes = {
      {"ExperimentSpecification", "Experiment specification", ""},
      {"FunctionUnderTest", "Function under test", ""},
      {"ObjectUnderInvestigation", "Object under investigation", ""},
      {"PurposeOfInvestigation", "Purpose of investigation", ""},
      {"SystemUnderTest", "System under test", ""},
      {"TestCase", "Test case", ""},
      {"TestCriteria", "Test criteria", ""},
      {"TestSpecification", "Test specification", ""},
      {"TestSystem", "Test system", ""},
      {"Verdict", "Verdict", ""},
  };
  v.properties = {
      {"appliesCriteria", "TestCase", "TestCriteria", "applies criteria"},
      {"hasExperiment", "TestSpecification", "ExperimentSpecification", "has experiment"},
      {"hasSpecification", "TestCase", "TestSpecification", "has specification"},
      {"hasVerdict", "TestCase", "Verdict", "has verdict"},
      {"investigates", "TestCase", "ObjectUnderInvestigation", "investigates"},
      {"requiresPhenomenon", "TestSpecification", annot("Phenomenon"), "requires phenomenon"},
      {"usesSystemConfiguration", "TestCase", scm("SystemConfiguration"),
       "uses system configuration"},
      {"verdictOutcome", "Verdict", rdf::xsd::string_, "verdict outcome"},
      {"verdictReason", "Verdict", rdf::xsd::string_, "verdict reason"},
  };
  return v;
}

/// System-configuration viewpoint: topological, multi-domain graphs of
/// systems, connection points, and binary connections.
inline Vocabulary scm_vocabulary() {
  Vocabulary v;
  v.namespace_iri = rdf::ns::scm;
  v.preferred_prefix = "scm";
  v.classes = {
      {"Attribute", "Attribute", ""},
      {"Component", "Component kind", ""},
      {"Connection", "Connection", ""},
      {"ConnectionPoint", "Connection point", ""},
      {"Domain", "Domain", ""},
      {"System", "System", ""},
      {"SystemConfiguration", "System configuration", ""},
  };
  v.properties = {
      {"connects", "Connection", "ConnectionPoint", "connects"},
      {"hasAttribute", "System", "Attribute", "has attribute"},
      {"hasConnection", "SystemConfiguration", "Connection", "has connection"},
      {"hasConnectionPoint", "System", "ConnectionPoint", "has connection point"},
      {"hasSubsystem", "System", "System", "has subsystem"},
      {"hasSystem", "SystemConfiguration", "System", "has system"},
      {"hasType", "System", "Component", "has type"},
      {"inDomain", "ConnectionPoint", "Domain", "in domain"},
      {"role", "System", rdf::xsd::string_, "role"},
      {"testSetup", "SystemConfiguration", rdf::xsd::boolean_, "test setup"},
      {"unit", "Attribute", rdf::xsd::string_, "unit"},
      {"value", "Attribute", rdf::rdfs_Literal, "value"},
  };
  v.individuals = {
      {"ACPowerGrid", "Component", "AC power grid"},
      {"DCAmplifier", "Component", "DC amplifier"},
      {"ElectricalAC", "Domain", "Electrical AC"},
      {"ElectricalDC", "Domain", "Electrical DC"},
      {"GridSimulator", "Component", "Grid simulator"},
      {"ICT", "Domain", "ICT"},
      {"MeasurementSensor", "Component", "Measurement sensor"},
      {"PVInverter", "Component", "PV inverter"},
      {"PVSystem", "Component", "PV system"},
      {"RealTimeComputer", "Component", "Real-time computer"},
      {"Switchboard", "Component", "Switchboard"},
  };
  return v;
}

/// Core provenance terms under the W3C namespace: entities, activities,
/// agents, and the relations between them.
inline Vocabulary prov_vocabulary() {
  Vocabulary v;
  v.namespace_iri = rdf::ns::prov;
  v.preferred_prefix = "prov";
  v.classes = {
      {"Activity", "Activity", ""},
      {"Agent", "Agent", ""},
      {"Entity", "Entity", ""},
  };
  v.properties = {
      {"endedAtTime", "Activity", rdf::xsd::dateTime_, "ended at time"},
      {"startedAtTime", "Activity", rdf::xsd::dateTime_, "started at time"},
      {"used", "Activity", "Entity", "used"},
      {"wasAssociatedWith", "Activity", "Agent", "was associated with"},
      {"wasAttributedTo", "Entity", "Agent", "was attributed to"},
      {"wasDerivedFrom", "Entity", "Entity", "was derived from"},
      {"wasGeneratedBy", "Entity", "Activity", "was generated by"},
  };
  return v;
}

/// Workflow-template extension: prospective provenance (templates, planned
/// processes, variables) and the link from executed accounts back to them.
inline Vocabulary opmw_vocabulary() {
  Vocabulary v;
  v.namespace_iri = rdf::ns::provx;
  v.preferred_prefix = "provx";
  v.classes = {
      {"DataVariable", "Data variable", ""},
      {"ParameterVariable", "Parameter variable", ""},
      {"TemplateProcess", "Template process", ""},
      {"WorkflowExecutionAccount", "Workflow execution account", ""},
      {"WorkflowTemplate", "Workflow template", ""},
      {"WorkflowVariable", "Workflow variable", ""},
  };
  v.properties = {
      {"agentKind", prov("Agent"), rdf::xsd::string_, "agent kind"},
      {"consumes", "TemplateProcess", "WorkflowVariable", "consumes"},
      {"correspondsToTemplate", "WorkflowExecutionAccount", "WorkflowTemplate",
       "corresponds to template"},
      {"correspondsToTemplateProcess", prov("Activity"), "TemplateProcess",
       "corresponds to template process"},
      {"correspondsToVariable", prov("Entity"), "WorkflowVariable", "corresponds to variable"},
      {"hasProcess", "WorkflowTemplate", "TemplateProcess", "has process"},
      {"inAccount", prov("Activity"), "WorkflowExecutionAccount", "in account"},
      {"processIndex", "TemplateProcess", rdf::xsd::integer_, "process index"},
      {"produces", "TemplateProcess", "WorkflowVariable", "produces"},
  };
  return v;
}

/// Dataset-annotation vocabulary: the organization → dataset → log file →
/// measurement → phenomenon chain for published measurement artifacts.
inline Vocabulary annotation_vocabulary() {
  Vocabulary v;
  v.namespace_iri = rdf::ns::annot;
  v.preferred_prefix = "annot";
  v.classes = {
      {"Dataset", "Dataset", ""},
      {"LogFile", "Log file", ""},
      {"Measurement", "Measurement", ""},
      {"Organization", "Organization", ""},
      {"Phenomenon", "Phenomenon", ""},
      {"Unit", "Unit", ""},
  };
  v.properties = {
      {"containsLogFile", "Dataset", "LogFile", "contains log file"},
      {"filePath", "LogFile", rdf::xsd::string_, "file path"},
      {"hasTimestamp", "Measurement", rdf::xsd::dateTime_, "has timestamp"},
      {"hasUnit", "Measurement", "Unit", "has unit"},
      {"hasValue", "Measurement", rdf::xsd::decimal_, "has value"},
      {"owns", "Organization", "Dataset", "owns"},
      {"provides", "Organization", "Dataset", "provides"},
      {"recordsPhenomenon", "Measurement", "Phenomenon", "records phenomenon"},
      {"sha256", "LogFile", rdf::xsd::string_, "sha-256"},
      {"storesMeasurement", "LogFile", "Measurement", "stores measurement"},
  };
  v.individuals = {
      {"ActivePower", "Phenomenon", "Active power"},
      {"Current", "Phenomenon", "Current"},
      {"ReactivePower", "Phenomenon", "Reactive power"},
      {"Voltage", "Phenomenon", "Voltage"},
  };
  return v;
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

namespace detail {

inline std::string resolve_ref(const Vocabulary& v, const std::string& ref,
                               const std::set<std::string>& class_names, const char* what) {
  if (ref.find("://") != std::string::npos) return ref;  // cross-vocabulary or datatype IRI
  if (class_names.count(ref)) return v.namespace_iri + ref;
  throw Error(Errc::InconsistentVocabulary,
              std::string(what) + " '" + ref + "' names no declared class in " +
                  v.namespace_iri);
}

inline bool is_datatype_iri(const std::string& iri) {
  return iri.rfind(std::string(rdf::ns::xsd), 0) == 0 || iri == rdf::rdfs_Literal;
}

}  // namespace detail

/// Declaration graph: two triples per class (type, label) plus an optional
/// comment, four per property (type, domain, range, label), two per
/// individual (type, label).
inline rdf::Graph emit_vocabulary(const Vocabulary& v) {
  std::set<std::string> class_names;
  std::set<std::string> all_names;
  for (const auto& c : v.classes) {
    if (!all_names.insert(c.local_name).second)
      throw Error(Errc::InconsistentVocabulary, "duplicate local name: " + c.local_name);
    class_names.insert(c.local_name);
  }
  for (const auto& p : v.properties)
    if (!all_names.insert(p.local_name).second)
      throw Error(Errc::InconsistentVocabulary, "duplicate local name: " + p.local_name);
  for (const auto& i : v.individuals)
    if (!all_names.insert(i.local_name).second)
      throw Error(Errc::InconsistentVocabulary, "duplicate local name: " + i.local_name);

  rdf::Graph g;
  g.add_prefix("owl", rdf::ns::owl);
  g.add_prefix("rdf", rdf::ns::rdf);
  g.add_prefix("rdfs", rdf::ns::rdfs);
  g.add_prefix("xsd", rdf::ns::xsd);
  if (!v.preferred_prefix.empty()) g.add_prefix(v.preferred_prefix, v.namespace_iri);

  auto type = rdf::make_iri(rdf::rdf_type);
  auto label = rdf::make_iri(rdf::rdfs_label);
  for (const auto& c : v.classes) {
    auto iri = rdf::make_iri(v.namespace_iri + c.local_name);
    g.insert(iri, type, rdf::make_iri(rdf::owl_Class));
    g.insert(iri, label, rdf::make_literal(c.label));
    if (!c.comment.empty())
      g.insert(iri, rdf::make_iri(rdf::rdfs_comment), rdf::make_literal(c.comment));
  }
  for (const auto& p : v.properties) {
    auto iri = rdf::make_iri(v.namespace_iri + p.local_name);
    std::string domain = detail::resolve_ref(v, p.domain, class_names, "property domain");
    std::string range = detail::resolve_ref(v, p.range, class_names, "property range");
    bool datatype = detail::is_datatype_iri(range);
    g.insert(iri, type,
             rdf::make_iri(datatype ? rdf::owl_DatatypeProperty : rdf::owl_ObjectProperty));
    g.insert(iri, rdf::make_iri(rdf::rdfs_domain), rdf::make_iri(domain));
    g.insert(iri, rdf::make_iri(rdf::rdfs_range), rdf::make_iri(range));
    g.insert(iri, label, rdf::make_literal(p.label));
  }
  for (const auto& i : v.individuals) {
    auto iri = rdf::make_iri(v.namespace_iri + i.local_name);
    std::string cls = detail::resolve_ref(v, i.class_name, class_names, "individual class");
    g.insert(iri, type, rdf::make_iri(cls));
    g.insert(iri, label, rdf::make_literal(i.label));
  }
  return g;
}

/// Core provenance terms and the workflow extension merged into one graph,
/// the form shipped as vocab/provx.ttl.
inline rdf::Graph provenance_graph() {
  rdf::Graph g = emit_vocabulary(prov_vocabulary());
  rdf::Graph ext = emit_vocabulary(opmw_vocabulary());
  rdf::merge(g, ext);
  return g;
}

// ---------------------------------------------------------------------------
// Built-in shape rule sets
// ---------------------------------------------------------------------------

inline std::vector<ShapeRule> htd_shape_rules() {
  return {
      min_count("htd-testcase-config", htd("TestCase"), htd("usesSystemConfiguration"), 1,
                Severity::Warning, "test case is not linked to a system configuration"),
      min_count("htd-spec-phenomena", htd("TestSpecification"), htd("requiresPhenomenon"), 1,
                Severity::Warning, "test specification requires no phenomena"),
      min_count("htd-verdict-outcome-min", htd("Verdict"), htd("verdictOutcome"), 1,
                Severity::Violation, "verdict has no outcome"),
      max_count("htd-verdict-outcome-max", htd("Verdict"), htd("verdictOutcome"), 1,
                Severity::Violation, "verdict has more than one outcome"),
      datatype_is("htd-verdict-outcome-type", htd("Verdict"), htd("verdictOutcome"),
                  rdf::xsd::string_, Severity::Violation, "verdict outcome must be a string"),
  };
}

inline std::vector<ShapeRule> scm_shape_rules() {
  return {
      min_count("scm-connection-endpoints-min", scm("Connection"), scm("connects"), 2,
                Severity::Violation, "connection must reference two connection points"),
      max_count("scm-connection-endpoints-max", scm("Connection"), scm("connects"), 2,
                Severity::Violation, "connection must reference two connection points"),
      min_count("scm-point-domain-min", scm("ConnectionPoint"), scm("inDomain"), 1,
                Severity::Violation, "connection point lacks a domain"),
      max_count("scm-point-domain-max", scm("ConnectionPoint"), scm("inDomain"), 1,
                Severity::Violation, "connection point has more than one domain"),
      min_count("scm-system-type-min", scm("System"), scm("hasType"), 1, Severity::Violation,
                "system lacks a type"),
      max_count("scm-system-type-max", scm("System"), scm("hasType"), 1, Severity::Violation,
                "system has more than one type"),
      min_count("scm-system-points", scm("System"), scm("hasConnectionPoint"), 1,
                Severity::Warning, "system has no connection points"),
      min_count("scm-config-systems", scm("SystemConfiguration"), scm("hasSystem"), 1,
                Severity::Warning, "configuration contains no systems"),
      min_count("scm-attribute-value-min", scm("Attribute"), scm("value"), 1,
                Severity::Violation, "attribute has no value"),
      max_count("scm-attribute-value-max", scm("Attribute"), scm("value"), 1,
                Severity::Violation, "attribute has more than one value"),
  };
}

inline std::vector<ShapeRule> prov_shape_rules() {
  return {
      max_count("prov-generation-unique", prov("Entity"), prov("wasGeneratedBy"), 1,
                Severity::Violation, "entity is generated by more than one activity"),
      min_count("prov-association", prov("Activity"), prov("wasAssociatedWith"), 1,
                Severity::Violation, "activity has no associated agent"),
      datatype_is("prov-start-type", prov("Activity"), prov("startedAtTime"),
                  rdf::xsd::dateTime_, Severity::Violation,
                  "activity start time must be a dateTime"),
      datatype_is("prov-end-type", prov("Activity"), prov("endedAtTime"), rdf::xsd::dateTime_,
                  Severity::Violation, "activity end time must be a dateTime"),
      min_count("prov-start-present", prov("Activity"), prov("startedAtTime"), 1,
                Severity::Warning, "activity has no start time"),
      min_count("prov-end-present", prov("Activity"), prov("endedAtTime"), 1,
                Severity::Warning, "activity has no end time"),
  };
}

inline std::vector<ShapeRule> annotation_shape_rules() {
  return {
      min_count("annot-measurement-phenomenon", annot("Measurement"),
                annot("recordsPhenomenon"), 1, Severity::Violation,
                "measurement lacks phenomenon"),
      max_count("annot-measurement-phenomenon-single", annot("Measurement"),
                annot("recordsPhenomenon"), 1, Severity::Violation,
                "measurement records more than one phenomenon"),
      min_count("annot-measurement-unit", annot("Measurement"), annot("hasUnit"), 1,
                Severity::Violation, "measurement lacks a unit"),
      datatype_is("annot-measurement-value-type", annot("Measurement"), annot("hasValue"),
                  rdf::xsd::decimal_, Severity::Violation,
                  "measurement value must be a decimal"),
      min_count("annot-dataset-logs", annot("Dataset"), annot("containsLogFile"), 1,
                Severity::Warning, "dataset contains no log files"),
      min_count("annot-log-measurements", annot("LogFile"), annot("storesMeasurement"), 1,
                Severity::Warning, "log file stores no measurements"),
      min_count("annot-log-checksum", annot("LogFile"), annot("sha256"), 1, Severity::Warning,
                "log file has no checksum"),
  };
}

inline std::vector<ShapeRule> all_shape_rules() {
  std::vector<ShapeRule> rules;
  for (auto part : {htd_shape_rules(), scm_shape_rules(), prov_shape_rules(),
                    annotation_shape_rules()})
    rules.insert(rules.end(), part.begin(), part.end());
  return rules;
}

/// Ambient prefix bindings the CLI and fixtures use everywhere.
inline std::map<std::string, std::string> default_prefixes() {
  return {
      {"annot", std::string(rdf::ns::annot)}, {"htd", std::string(rdf::ns::htd)},
      {"owl", std::string(rdf::ns::owl)},     {"prov", std::string(rdf::ns::prov)},
      {"provx", std::string(rdf::ns::provx)}, {"rdf", std::string(rdf::ns::rdf)},
      {"rdfs", std::string(rdf::ns::rdfs)},   {"scm", std::string(rdf::ns::scm)},
      {"xsd", std::string(rdf::ns::xsd)},
  };
}

}  // namespace testkg::vocab
