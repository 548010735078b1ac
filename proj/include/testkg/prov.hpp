#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "testkg/errors.hpp"
#include "testkg/rdf.hpp"
#include "testkg/store.hpp"
#include "testkg/timeutil.hpp"
#include "testkg/vocab.hpp"

// Workflow provenance: templates describe how an experiment is intended to
// run (prospective), execution accounts record what actually happened
// (retrospective). Both export to RDF; lineage and reproducibility
// completeness are answered over a loaded store.

namespace testkg::prov {

struct TemplateProcess {
  std::string id;
  std::string label;
  std::vector<std::string> consumes;  // variable ids
  std::vector<std::string> produces;
};

enum class VariableKind { Data, Parameter };

struct WorkflowVariable {
  std::string id;
  VariableKind kind = VariableKind::Data;
  std::string label;
};

struct WorkflowTemplate {
  std::string id;
  std::vector<TemplateProcess> processes;  // must be topologically ordered
  std::vector<WorkflowVariable> variables;
};

struct Activity {
  std::string id;
  std::string template_process_id;  // optional
  std::string agent_id;
  std::string start_time;  // ISO-8601 with timezone
  std::string end_time;
  std::vector<std::string> used;       // entity ids
  std::vector<std::string> generated;  // entity ids
};

struct Entity {
  std::string id;
  std::string label;
  std::string variable_id;  // optional link to a template variable
  std::vector<std::string> derived_from;
};

enum class AgentKind { Person, Organization, SoftwareAgent };

struct Agent {
  std::string id;
  std::string label;
  AgentKind kind = AgentKind::Person;
};

struct ExecutionAccount {
  std::string id;
  std::string template_id;  // optional
  std::vector<Activity> activities;
  std::vector<Entity> entities;
  std::vector<Agent> agents;
};

inline const char* agent_kind_name(AgentKind k) {
  switch (k) {
    case AgentKind::Person: return "person";
    case AgentKind::Organization: return "organization";
    case AgentKind::SoftwareAgent: return "softwareAgent";
  }
  return "person";
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Every consumed/produced variable must be declared, and the process list
/// must be a valid topological order: nothing consumes a variable that is
/// first produced by a later process.
inline void validate_template(const WorkflowTemplate& t) {
  std::set<std::string> declared;
  for (const auto& v : t.variables)
    if (!declared.insert(v.id).second)
      throw Error(Errc::InvalidConfiguration,
                  "template variable '" + v.id + "' declared twice");

  std::set<std::string> produced_so_far;
  std::set<std::string> produced_total;
  for (const auto& p : t.processes)
    for (const auto& v : p.produces) produced_total.insert(v);

  for (const auto& p : t.processes) {
    for (const auto& v : p.consumes) {
      if (!declared.count(v))
        throw Error(Errc::DanglingReference,
                    "process '" + p.id + "' consumes undeclared variable '" + v + "'");
      if (produced_total.count(v) && !produced_so_far.count(v))
        throw Error(Errc::InvalidConfiguration,
                    "process '" + p.id + "' consumes variable '" + v +
                        "' produced by a later process");
    }
    for (const auto& v : p.produces) {
      if (!declared.count(v))
        throw Error(Errc::DanglingReference,
                    "process '" + p.id + "' produces undeclared variable '" + v + "'");
      produced_so_far.insert(v);
    }
  }
}

inline void validate_account(const ExecutionAccount& exec) {
  std::set<std::string> entity_ids, agent_ids;
  for (const auto& e : exec.entities) entity_ids.insert(e.id);
  for (const auto& a : exec.agents) agent_ids.insert(a.id);

  std::map<std::string, std::string> generated_by;
  for (const auto& act : exec.activities) {
    timeutil::Millis start = timeutil::parse_instant(act.start_time);
    timeutil::Millis end = timeutil::parse_instant(act.end_time);
    if (end < start)
      throw Error(Errc::InvalidTimestamp,
                  "activity '" + act.id + "' ends before it starts");
    if (!agent_ids.count(act.agent_id))
      throw Error(Errc::DanglingReference,
                  "activity '" + act.id + "' references unknown agent '" + act.agent_id + "'");
    for (const auto& e : act.used)
      if (!entity_ids.count(e))
        throw Error(Errc::DanglingReference,
                    "activity '" + act.id + "' uses undeclared entity '" + e + "'");
    for (const auto& e : act.generated) {
      if (!entity_ids.count(e))
        throw Error(Errc::DanglingReference,
                    "activity '" + act.id + "' generates undeclared entity '" + e + "'");
      auto [it, inserted] = generated_by.emplace(e, act.id);
      if (!inserted)
        throw Error(Errc::InvalidConfiguration,
                    "entity '" + e + "' is generated by both '" + it->second + "' and '" +
                        act.id + "'");
    }
  }
  for (const auto& e : exec.entities)
    for (const auto& d : e.derived_from)
      if (!entity_ids.count(d))
        throw Error(Errc::DanglingReference,
                    "entity '" + e.id + "' derives from undeclared entity '" + d + "'");
}

// ---------------------------------------------------------------------------
// RDF export
// ---------------------------------------------------------------------------

namespace detail {

/// Ids that already are absolute IRIs pass through, so accounts can point
/// at annotation-minted dataset and log nodes directly.
inline std::string mint(std::string_view base, std::string_view path, const std::string& id) {
  if (id.find("://") != std::string::npos) return id;
  return std::string(base) + std::string(path) + id;
}

}  // namespace detail

inline std::string template_iri(const WorkflowTemplate& t,
                                std::string_view base = rdf::ns::data_base) {
  return detail::mint(base, "template/", t.id);
}

/// Prospective provenance: the template, its variables, and its processes
/// with consumes/produces links and an explicit order index.
inline rdf::Graph to_template_rdf(const WorkflowTemplate& t,
                                  std::string_view base = rdf::ns::data_base) {
  validate_template(t);
  rdf::Graph g;
  g.add_prefix("provx", rdf::ns::provx);
  g.add_prefix("rdf", rdf::ns::rdf);
  g.add_prefix("rdfs", rdf::ns::rdfs);
  g.add_prefix("xsd", rdf::ns::xsd);

  auto type = rdf::make_iri(rdf::rdf_type);
  auto label = rdf::make_iri(rdf::rdfs_label);
  std::string tmpl_path = template_iri(t, base);
  auto tmpl = rdf::make_iri(tmpl_path);
  g.insert(tmpl, type, rdf::make_iri(vocab::provx("WorkflowTemplate")));
  g.insert(tmpl, label, rdf::make_literal(t.id));

  for (const auto& v : t.variables) {
    auto var = rdf::make_iri(tmpl_path + "/variable/" + v.id);
    g.insert(var, type,
             rdf::make_iri(vocab::provx(v.kind == VariableKind::Parameter
                                            ? "ParameterVariable"
                                            : "DataVariable")));
    g.insert(var, label, rdf::make_literal(v.label.empty() ? v.id : v.label));
  }
  int index = 1;
  for (const auto& p : t.processes) {
    auto proc = rdf::make_iri(tmpl_path + "/process/" + p.id);
    g.insert(tmpl, rdf::make_iri(vocab::provx("hasProcess")), proc);
    g.insert(proc, type, rdf::make_iri(vocab::provx("TemplateProcess")));
    g.insert(proc, label, rdf::make_literal(p.label.empty() ? p.id : p.label));
    g.insert(proc, rdf::make_iri(vocab::provx("processIndex")),
             rdf::make_literal(std::to_string(index++), rdf::xsd::integer_));
    for (const auto& v : p.consumes)
      g.insert(proc, rdf::make_iri(vocab::provx("consumes")),
               rdf::make_iri(tmpl_path + "/variable/" + v));
    for (const auto& v : p.produces)
      g.insert(proc, rdf::make_iri(vocab::provx("produces")),
               rdf::make_iri(tmpl_path + "/variable/" + v));
  }
  return g;
}

/// Retrospective provenance for one execution. When the template is given,
/// activities referencing template processes get correspondsToTemplateProcess
/// links and entities bound to variables get correspondsToVariable links.
inline rdf::Graph to_prov_rdf(const ExecutionAccount& exec,
                              const WorkflowTemplate* tmpl = nullptr,
                              std::string_view base = rdf::ns::data_base) {
  validate_account(exec);
  if (tmpl) {
    validate_template(*tmpl);
    if (!exec.template_id.empty() && exec.template_id != tmpl->id)
      throw Error(Errc::TemplateMismatch,
                  "account references template '" + exec.template_id + "', got '" + tmpl->id +
                      "'");
    std::set<std::string> process_ids;
    for (const auto& p : tmpl->processes) process_ids.insert(p.id);
    for (const auto& act : exec.activities)
      if (!act.template_process_id.empty() && !process_ids.count(act.template_process_id))
        throw Error(Errc::DanglingReference,
                    "activity '" + act.id + "' references unknown template process '" +
                        act.template_process_id + "'");
  }

  rdf::Graph g;
  g.add_prefix("prov", rdf::ns::prov);
  g.add_prefix("provx", rdf::ns::provx);
  g.add_prefix("rdf", rdf::ns::rdf);
  g.add_prefix("rdfs", rdf::ns::rdfs);
  g.add_prefix("xsd", rdf::ns::xsd);

  auto type = rdf::make_iri(rdf::rdf_type);
  auto label = rdf::make_iri(rdf::rdfs_label);
  auto account = rdf::make_iri(detail::mint(base, "account/", exec.id));
  g.insert(account, type, rdf::make_iri(vocab::provx("WorkflowExecutionAccount")));
  g.insert(account, label, rdf::make_literal(exec.id));

  std::string tmpl_path;
  if (!exec.template_id.empty()) {
    tmpl_path = detail::mint(base, "template/", exec.template_id);
    g.insert(account, rdf::make_iri(vocab::provx("correspondsToTemplate")),
             rdf::make_iri(tmpl_path));
  } else if (tmpl) {
    tmpl_path = template_iri(*tmpl, base);
  }

  for (const auto& agent : exec.agents) {
    auto a = rdf::make_iri(detail::mint(base, "agent/", agent.id));
    g.insert(a, type, rdf::make_iri(vocab::prov("Agent")));
    g.insert(a, label, rdf::make_literal(agent.label.empty() ? agent.id : agent.label));
    g.insert(a, rdf::make_iri(vocab::provx("agentKind")),
             rdf::make_literal(agent_kind_name(agent.kind)));
  }

  for (const auto& entity : exec.entities) {
    auto e = rdf::make_iri(detail::mint(base, "entity/", entity.id));
    g.insert(e, type, rdf::make_iri(vocab::prov("Entity")));
    if (!entity.label.empty()) g.insert(e, label, rdf::make_literal(entity.label));
    for (const auto& d : entity.derived_from)
      g.insert(e, rdf::make_iri(vocab::prov("wasDerivedFrom")),
               rdf::make_iri(detail::mint(base, "entity/", d)));
    if (!entity.variable_id.empty()) {
      if (tmpl_path.empty())
        throw Error(Errc::DanglingReference,
                    "entity '" + entity.id + "' is bound to variable '" + entity.variable_id +
                        "' but the account names no template");
      g.insert(e, rdf::make_iri(vocab::provx("correspondsToVariable")),
               rdf::make_iri(tmpl_path + "/variable/" + entity.variable_id));
    }
  }

  for (const auto& act : exec.activities) {
    auto a = rdf::make_iri(detail::mint(base, "activity/", act.id));
    g.insert(a, type, rdf::make_iri(vocab::prov("Activity")));
    g.insert(a, rdf::make_iri(vocab::provx("inAccount")), account);
    g.insert(a, rdf::make_iri(vocab::prov("wasAssociatedWith")),
             rdf::make_iri(detail::mint(base, "agent/", act.agent_id)));
    g.insert(a, rdf::make_iri(vocab::prov("startedAtTime")),
             rdf::make_literal(act.start_time, rdf::xsd::dateTime_));
    g.insert(a, rdf::make_iri(vocab::prov("endedAtTime")),
             rdf::make_literal(act.end_time, rdf::xsd::dateTime_));
    for (const auto& e : act.used)
      g.insert(a, rdf::make_iri(vocab::prov("used")),
               rdf::make_iri(detail::mint(base, "entity/", e)));
    for (const auto& e : act.generated)
      g.insert(rdf::make_iri(detail::mint(base, "entity/", e)),
               rdf::make_iri(vocab::prov("wasGeneratedBy")), a);
    if (!act.template_process_id.empty() && !tmpl_path.empty())
      g.insert(a, rdf::make_iri(vocab::provx("correspondsToTemplateProcess")),
               rdf::make_iri(tmpl_path + "/process/" + act.template_process_id));
  }
  return g;
}

// ---------------------------------------------------------------------------
// Lineage
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<rdf::Term> objects_of(const store::Store& s, const rdf::Term& subject,
                                         const std::string& predicate) {
  std::vector<rdf::Term> out;
  for (const auto& row :
       s.match(store::TriplePattern{store::PatternSlot::ground(subject),
                                    store::PatternSlot::ground(rdf::make_iri(predicate)),
                                    store::PatternSlot::variable("o")}))
    out.push_back(row.at("o"));
  return out;
}

inline std::vector<rdf::Term> subjects_of_type(const store::Store& s,
                                               const std::string& class_iri) {
  std::vector<rdf::Term> out;
  for (const auto& row : s.match(store::TriplePattern{
           store::PatternSlot::variable("s"),
           store::PatternSlot::ground(rdf::make_iri(rdf::rdf_type)),
           store::PatternSlot::ground(rdf::make_iri(class_iri))}))
    out.push_back(row.at("s"));
  return out;
}

}  // namespace detail

/// Entities the given entity transitively depends on, following
/// wasDerivedFrom directly and wasGeneratedBy composed with used. The start
/// entity is excluded; cycles terminate via the visited set.
inline std::set<std::string> upstream(const store::Store& s, const std::string& entity_iri) {
  std::set<std::string> visited;
  std::deque<std::string> frontier{entity_iri};
  visited.insert(entity_iri);
  std::set<std::string> result;

  while (!frontier.empty()) {
    std::string current = frontier.front();
    frontier.pop_front();
    auto node = rdf::make_iri(current);

    std::vector<std::string> next;
    for (const auto& d : detail::objects_of(s, node, vocab::prov("wasDerivedFrom")))
      if (d.is_iri()) next.push_back(d.value);
    for (const auto& gen : detail::objects_of(s, node, vocab::prov("wasGeneratedBy")))
      if (gen.is_iri())
        for (const auto& u : detail::objects_of(s, gen, vocab::prov("used")))
          if (u.is_iri()) next.push_back(u.value);

    for (const auto& n : next) {
      if (visited.insert(n).second) frontier.push_back(n);
      result.insert(n);
    }
  }
  result.erase(entity_iri);
  return result;
}

// ---------------------------------------------------------------------------
// Reproducibility completeness
// ---------------------------------------------------------------------------

struct CompletenessViolation {
  std::string rule;    // R1..R7 or an extra shape-rule id
  std::string focus;   // IRI or blank label of the failing node
  std::string message;
};

struct CompletenessReport {
  double score = 1.0;
  std::size_t total_instances = 0;
  std::size_t satisfied_instances = 0;
  std::vector<CompletenessViolation> violations;
  std::vector<std::string> warnings;
};

/// Evaluates the built-in reproducibility rules R1-R7 plus any extra shape
/// rules. The score is the fraction of satisfied rule instances, weighted
/// equally; an empty store scores 1.0 vacuously with a warning.
inline CompletenessReport check_completeness(const store::Store& s,
                                             const std::vector<vocab::ShapeRule>& extra = {}) {
  CompletenessReport report;
  auto instance = [&](bool ok, const std::string& rule, const rdf::Term& focus,
                      std::string message) {
    ++report.total_instances;
    if (ok)
      ++report.satisfied_instances;
    else
      report.violations.push_back(
          CompletenessViolation{rule, focus.value, std::move(message)});
  };
  auto has_object = [&](const rdf::Term& subject, const std::string& predicate) {
    return !detail::objects_of(s, subject, predicate).empty();
  };

  // R1: result entities (datasets, log files) record how they came to be.
  std::set<rdf::Term> results;
  for (const auto& t : detail::subjects_of_type(s, vocab::annot("Dataset"))) results.insert(t);
  for (const auto& t : detail::subjects_of_type(s, vocab::annot("LogFile"))) results.insert(t);
  for (const auto& node : results)
    instance(has_object(node, vocab::prov("wasGeneratedBy")), "R1", node,
             "result entity " + node.value + " has no wasGeneratedBy activity");

  // R2 + R3: every activity has an agent and a start/end time.
  auto activities = detail::subjects_of_type(s, vocab::prov("Activity"));
  for (const auto& act : activities) {
    instance(has_object(act, vocab::prov("wasAssociatedWith")), "R2", act,
             "activity " + act.value + " has no associated agent");
    bool timed = has_object(act, vocab::prov("startedAtTime")) &&
                 has_object(act, vocab::prov("endedAtTime"));
    instance(timed, "R3", act, "activity " + act.value + " lacks start or end time");
  }

  // R4 + R5: every execution account references a test specification and a
  // system configuration.
  auto accounts = detail::subjects_of_type(s, vocab::provx("WorkflowExecutionAccount"));
  auto typed = [&](const rdf::Term& node, const std::string& class_iri) {
    return s.contains(rdf::Triple{node, rdf::make_iri(rdf::rdf_type),
                                  rdf::make_iri(class_iri)});
  };
  for (const auto& acct : accounts) {
    bool has_spec = false;
    for (const auto& spec : detail::objects_of(s, acct, vocab::htd("hasSpecification")))
      if (typed(spec, vocab::htd("TestSpecification"))) has_spec = true;
    instance(has_spec, "R4", acct,
             "execution account " + acct.value + " references no test specification");

    bool has_cfg = false;
    for (const auto& cfg : detail::objects_of(s, acct, vocab::htd("usesSystemConfiguration")))
      if (typed(cfg, vocab::scm("SystemConfiguration"))) has_cfg = true;
    instance(has_cfg, "R5", acct,
             "execution account " + acct.value + " references no system configuration");
  }

  // R6: in template-linked accounts, every activity names its template
  // process.
  for (const auto& act : activities) {
    bool in_templated_account = false;
    for (const auto& acct : detail::objects_of(s, act, vocab::provx("inAccount")))
      if (has_object(acct, vocab::provx("correspondsToTemplate"))) in_templated_account = true;
    if (!in_templated_account) continue;
    instance(has_object(act, vocab::provx("correspondsToTemplateProcess")), "R6", act,
             "activity " + act.value + " matches no template process");
  }

  // R7: every phenomenon a test specification requires is recorded by some
  // measurement.
  for (const auto& spec : detail::subjects_of_type(s, vocab::htd("TestSpecification"))) {
    for (const auto& ph : detail::objects_of(s, spec, vocab::htd("requiresPhenomenon"))) {
      auto recorded = s.match(store::TriplePattern{
          store::PatternSlot::variable("m"),
          store::PatternSlot::ground(rdf::make_iri(vocab::annot("recordsPhenomenon"))),
          store::PatternSlot::ground(ph)});
      instance(!recorded.empty(), "R7", spec,
               "required phenomenon " + ph.value + " is never recorded by any measurement");
    }
  }

  // Extra profile rules ride on the shape engine; every (rule, focus) pair
  // is one instance.
  if (!extra.empty()) {
    auto findings = vocab::check_shapes(s, extra);
    std::set<std::pair<std::string, rdf::Term>> breached;
    for (const auto& f : findings) breached.insert({f.rule_id, f.focus});
    for (const auto& rule : extra) {
      for (const auto& node : detail::subjects_of_type(s, rule.target_class)) {
        bool ok = !breached.count({rule.id, node});
        instance(ok, rule.id, node, rule.message + " (" + node.value + ")");
      }
    }
  }

  // Derivation cycles do not break traversal but indicate annotation errors.
  {
    std::map<std::string, std::vector<std::string>> edges;
    for (const auto& e : detail::subjects_of_type(s, vocab::prov("Entity"))) {
      for (const auto& d : detail::objects_of(s, e, vocab::prov("wasDerivedFrom")))
        if (d.is_iri()) edges[e.value].push_back(d.value);
    }
    std::set<std::string> done, in_progress;
    bool cycle = false;
    std::vector<std::pair<std::string, std::size_t>> stack;
    for (const auto& [start, _] : edges) {
      if (done.count(start)) continue;
      stack.push_back({start, 0});
      in_progress.insert(start);
      while (!stack.empty() && !cycle) {
        auto& [node, next] = stack.back();
        auto it = edges.find(node);
        if (it == edges.end() || next >= it->second.size()) {
          in_progress.erase(node);
          done.insert(node);
          stack.pop_back();
          continue;
        }
        const std::string& target = it->second[next++];
        if (in_progress.count(target)) {
          cycle = true;
          break;
        }
        if (!done.count(target)) {
          in_progress.insert(target);
          stack.push_back({target, 0});
        }
      }
      stack.clear();
      in_progress.clear();
      if (cycle) break;
    }
    if (cycle) report.warnings.push_back("derivation graph contains a cycle");
  }

  if (report.total_instances == 0) {
    report.score = 1.0;
    report.warnings.push_back("no completeness targets in store");
  } else {
    report.score = static_cast<double>(report.satisfied_instances) /
                   static_cast<double>(report.total_instances);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Template / execution binding
// ---------------------------------------------------------------------------

struct BindingReport {
  std::vector<std::pair<std::string, std::string>> bound;  // (process id, activity id)
  std::vector<std::string> unbound_processes;
  std::vector<std::string> extra_activities;
};

/// Matches activities to template processes by template_process_id. The
/// first activity naming a process binds it; later activities naming the
/// same process, and activities naming none or an unknown one, are extra.
inline BindingReport bind_execution(const WorkflowTemplate& tmpl,
                                    const ExecutionAccount& exec) {
  if (exec.template_id != tmpl.id)
    throw Error(Errc::TemplateMismatch,
                "account is bound to template '" + exec.template_id + "', not '" + tmpl.id +
                    "'");
  BindingReport report;
  std::set<std::string> process_ids;
  for (const auto& p : tmpl.processes) process_ids.insert(p.id);

  std::map<std::string, std::string> bound_by;  // process -> activity
  for (const auto& act : exec.activities) {
    const std::string& ref = act.template_process_id;
    if (ref.empty() || !process_ids.count(ref) || bound_by.count(ref)) {
      report.extra_activities.push_back(act.id);
      continue;
    }
    bound_by[ref] = act.id;
  }
  for (const auto& p : tmpl.processes) {
    auto it = bound_by.find(p.id);
    if (it != bound_by.end())
      report.bound.emplace_back(p.id, it->second);
    else
      report.unbound_processes.push_back(p.id);
  }
  return report;
}

}  // namespace testkg::prov
