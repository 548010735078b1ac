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
#include "testkg/store.hpp"
#include "testkg/vocab.hpp"

// Multi-domain system-configuration graphs: systems with typed connection
// points joined by binary connections, each point in one domain (electrical
// AC/DC, ICT, ...). Configurations are authored as JSON (docs/scm-schema.md)
// and interchanged as Turtle.

namespace testkg::scm {

using AttributeValue = std::variant<std::string, double>;

struct Attribute {
  std::string name;
  AttributeValue value;
  std::string unit;  // optional, empty = unitless

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

struct ConnectionPointDef {
  std::string id;
  std::string domain;
  std::string label;  // optional

  friend bool operator==(const ConnectionPointDef&, const ConnectionPointDef&) = default;
};

struct SystemNode {
  std::string id;
  std::string system_type;  // absolute IRI
  std::string role;         // "", "SuT", "testEquipment", "infrastructure"
  std::vector<ConnectionPointDef> connection_points;
  std::vector<Attribute> attributes;

  friend bool operator==(const SystemNode&, const SystemNode&) = default;
};

struct Endpoint {
  std::string system;
  std::string point;

  auto operator<=>(const Endpoint&) const = default;
};

struct ConnectionEdge {
  std::string id;
  Endpoint a;
  Endpoint b;
  std::string domain;  // optional in input; must agree with both endpoints

  friend bool operator==(const ConnectionEdge&, const ConnectionEdge&) = default;
};

struct SystemConfiguration {
  std::string id;
  bool test_setup = false;
  std::vector<SystemNode> systems;
  std::vector<ConnectionEdge> connections;
  std::set<std::string> domains;  // derived: union of connection-point domains

  friend bool operator==(const SystemConfiguration&, const SystemConfiguration&) = default;
};

struct Finding {
  std::string code;
  std::string subject;
  std::string message;
  vocab::Severity severity = vocab::Severity::Violation;
};

namespace detail {

inline bool valid_id(std::string_view id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

inline std::string value_text(const AttributeValue& v) {
  if (std::holds_alternative<double>(v)) return numfmt::format_double(std::get<double>(v));
  return std::get<std::string>(v);
}

inline std::string last_segment(const std::string& iri) {
  auto pos = iri.find_last_of('/');
  return pos == std::string::npos ? iri : iri.substr(pos + 1);
}

}  // namespace detail

/// Sorts all member lists into the canonical order (by id / name) and
/// normalizes each connection's endpoint pair; recomputes the domain set.
/// Omitted connection domains are filled in from their endpoints when both
/// resolve and agree (explicit values stay put so validation can cross-check
/// them), which keeps JSON-authored and RDF-imported configurations equal.
/// All public entry points return canonical configurations.
inline void canonicalize(SystemConfiguration& cfg) {
  for (auto& sys : cfg.systems) {
    std::sort(sys.connection_points.begin(), sys.connection_points.end(),
              [](const auto& x, const auto& y) { return x.id < y.id; });
    std::sort(sys.attributes.begin(), sys.attributes.end(),
              [](const auto& x, const auto& y) { return x.name < y.name; });
  }
  std::sort(cfg.systems.begin(), cfg.systems.end(),
            [](const auto& x, const auto& y) { return x.id < y.id; });
  std::map<Endpoint, std::string> point_domain;
  for (const auto& sys : cfg.systems)
    for (const auto& cp : sys.connection_points)
      point_domain[Endpoint{sys.id, cp.id}] = cp.domain;
  for (auto& c : cfg.connections) {
    if (c.b < c.a) std::swap(c.a, c.b);
    if (c.domain.empty()) {
      auto a = point_domain.find(c.a);
      auto b = point_domain.find(c.b);
      if (a != point_domain.end() && b != point_domain.end() && a->second == b->second)
        c.domain = a->second;
    }
  }
  std::sort(cfg.connections.begin(), cfg.connections.end(),
            [](const auto& x, const auto& y) { return x.id < y.id; });
  cfg.domains.clear();
  for (const auto& sys : cfg.systems)
    for (const auto& cp : sys.connection_points)
      if (!cp.domain.empty()) cfg.domains.insert(cp.domain);
}

/// Structural checks. Problems are findings, not exceptions; severity
/// violation blocks RDF export, warnings do not. The result is sorted and
/// independent of input list ordering.
inline std::vector<Finding> validate_configuration(const SystemConfiguration& cfg) {
  using vocab::Severity;
  std::vector<Finding> findings;
  auto add = [&](std::string code, std::string subject, std::string message, Severity sev) {
    findings.push_back(Finding{std::move(code), std::move(subject), std::move(message), sev});
  };

  if (!detail::valid_id(cfg.id))
    add("invalid-id", cfg.id, "configuration id must match [A-Za-z0-9_-]+",
        Severity::Violation);

  std::set<std::string> system_ids;
  std::map<Endpoint, std::string> point_domain;
  for (const auto& sys : cfg.systems) {
    if (!detail::valid_id(sys.id))
      add("invalid-id", sys.id, "system id must match [A-Za-z0-9_-]+", Severity::Violation);
    if (!system_ids.insert(sys.id).second)
      add("duplicate-system-id", sys.id, "system id appears more than once",
          Severity::Violation);
    if (!rdf::detail::valid_iri(sys.system_type))
      add("invalid-type", sys.id, "system type must be an absolute IRI", Severity::Violation);
    if (!sys.role.empty() && sys.role != "SuT" && sys.role != "testEquipment" &&
        sys.role != "infrastructure")
      add("invalid-role", sys.id, "role must be SuT, testEquipment, or infrastructure",
          Severity::Violation);

    std::set<std::string> point_ids;
    for (const auto& cp : sys.connection_points) {
      std::string subject = sys.id + "." + cp.id;
      if (!detail::valid_id(cp.id))
        add("invalid-id", subject, "connection point id must match [A-Za-z0-9_-]+",
            Severity::Violation);
      if (!point_ids.insert(cp.id).second)
        add("duplicate-point-id", subject, "connection point id appears more than once",
            Severity::Violation);
      if (!detail::valid_id(cp.domain))
        add("missing-domain", subject, "connection point needs a domain identifier",
            Severity::Violation);
      point_domain[Endpoint{sys.id, cp.id}] = cp.domain;
    }

    std::set<std::string> attr_names;
    for (const auto& attr : sys.attributes) {
      if (!detail::valid_id(attr.name))
        add("invalid-id", sys.id + "." + attr.name, "attribute name must match [A-Za-z0-9_-]+",
            Severity::Violation);
      if (!attr_names.insert(attr.name).second)
        add("duplicate-attribute", sys.id + "." + attr.name,
            "attribute name appears more than once", Severity::Violation);
    }
  }

  std::set<std::string> connection_ids;
  std::set<std::string> connected_systems;
  for (const auto& conn : cfg.connections) {
    if (!detail::valid_id(conn.id))
      add("invalid-id", conn.id, "connection id must match [A-Za-z0-9_-]+",
          Severity::Violation);
    if (!connection_ids.insert(conn.id).second)
      add("duplicate-connection-id", conn.id, "connection id appears more than once",
          Severity::Violation);
    if (conn.a == conn.b)
      add("self-connection", conn.id, "connection endpoints must differ", Severity::Violation);

    bool resolved = true;
    for (const Endpoint* ep : {&conn.a, &conn.b}) {
      if (!point_domain.count(*ep)) {
        add("dangling-endpoint", conn.id,
            "endpoint " + ep->system + "." + ep->point + " does not exist",
            Severity::Violation);
        resolved = false;
      }
    }
    if (resolved) {
      const std::string& da = point_domain[conn.a];
      const std::string& db = point_domain[conn.b];
      if (da != db)
        add("domain-mismatch", conn.id,
            "endpoints are in different domains (" + da + " vs " + db + ")",
            Severity::Violation);
      else if (!conn.domain.empty() && conn.domain != da)
        add("domain-mismatch", conn.id,
            "connection domain " + conn.domain + " differs from endpoint domain " + da,
            Severity::Violation);
      connected_systems.insert(conn.a.system);
      connected_systems.insert(conn.b.system);
    }
  }

  bool has_sut = false;
  for (const auto& sys : cfg.systems) {
    if (sys.role == "SuT") has_sut = true;
    if (!cfg.connections.empty() && !connected_systems.count(sys.id))
      add("isolated-system", sys.id, "system has no connections", Severity::Warning);
  }
  if (cfg.test_setup && !has_sut)
    add("missing-sut", cfg.id, "test setup designates no system under test",
        Severity::Warning);

  std::sort(findings.begin(), findings.end(), [](const Finding& x, const Finding& y) {
    return std::tie(x.code, x.subject, x.message) < std::tie(y.code, y.subject, y.message);
  });
  return findings;
}

inline bool has_violation(const std::vector<Finding>& findings) {
  for (const auto& f : findings)
    if (f.severity == vocab::Severity::Violation) return true;
  return false;
}

// ---------------------------------------------------------------------------
// JSON input (docs/scm-schema.md)
// ---------------------------------------------------------------------------

/// Reads the authored JSON form. System types may be absolute IRIs or local
/// names resolved against the configuration vocabulary namespace.
inline SystemConfiguration read_configuration_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::SyntaxError, std::string("configuration is not valid JSON: ") + e.what());
  }

  auto require_string = [](const nlohmann::json& node, const char* key) {
    if (!node.contains(key) || !node[key].is_string())
      throw Error(Errc::InvalidConfiguration,
                  std::string("missing or non-string field '") + key + "'");
    return node[key].get<std::string>();
  };

  SystemConfiguration cfg;
  cfg.id = require_string(doc, "id");
  cfg.test_setup = doc.value("testSetup", false);

  for (const auto& s : doc.value("systems", nlohmann::json::array())) {
    SystemNode sys;
    sys.id = require_string(s, "id");
    std::string type = require_string(s, "type");
    sys.system_type = type.find("://") != std::string::npos ? type : vocab::scm(type);
    sys.role = s.value("role", std::string());
    for (const auto& p : s.value("connectionPoints", nlohmann::json::array())) {
      ConnectionPointDef cp;
      cp.id = require_string(p, "id");
      cp.domain = require_string(p, "domain");
      cp.label = p.value("label", std::string());
      sys.connection_points.push_back(std::move(cp));
    }
    for (const auto& a : s.value("attributes", nlohmann::json::array())) {
      Attribute attr;
      attr.name = require_string(a, "name");
      if (!a.contains("value"))
        throw Error(Errc::InvalidConfiguration, "attribute '" + attr.name + "' has no value");
      if (a["value"].is_number())
        attr.value = a["value"].get<double>();
      else if (a["value"].is_string())
        attr.value = a["value"].get<std::string>();
      else
        throw Error(Errc::InvalidConfiguration,
                    "attribute '" + attr.name + "' value must be a number or string");
      attr.unit = a.value("unit", std::string());
      sys.attributes.push_back(std::move(attr));
    }
    cfg.systems.push_back(std::move(sys));
  }

  auto parse_endpoint = [](const std::string& text_ref) {
    auto dot = text_ref.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == text_ref.size())
      throw Error(Errc::InvalidConfiguration,
                  "endpoint '" + text_ref + "' must be '<system>.<point>'");
    return Endpoint{text_ref.substr(0, dot), text_ref.substr(dot + 1)};
  };
  for (const auto& c : doc.value("connections", nlohmann::json::array())) {
    ConnectionEdge edge;
    edge.id = require_string(c, "id");
    edge.a = parse_endpoint(require_string(c, "from"));
    edge.b = parse_endpoint(require_string(c, "to"));
    edge.domain = c.value("domain", std::string());
    cfg.connections.push_back(std::move(edge));
  }

  canonicalize(cfg);
  return cfg;
}

// ---------------------------------------------------------------------------
// RDF export / import
// ---------------------------------------------------------------------------

/// Exports the configuration with the configuration vocabulary. Fails on
/// validation violations (warnings pass). IRIs are minted deterministically
/// under the base: config/<id>, .../system/<id>, .../cp/<id>, .../attr/<name>.
inline rdf::Graph to_rdf(const SystemConfiguration& cfg,
                         std::string_view base = rdf::ns::data_base) {
  auto findings = validate_configuration(cfg);
  if (has_violation(findings)) {
    for (const auto& f : findings)
      if (f.severity == vocab::Severity::Violation)
        throw Error(Errc::InvalidConfiguration,
                    f.code + " (" + f.subject + "): " + f.message);
  }

  rdf::Graph g;
  g.add_prefix("rdf", rdf::ns::rdf);
  g.add_prefix("rdfs", rdf::ns::rdfs);
  g.add_prefix("scm", rdf::ns::scm);
  g.add_prefix("xsd", rdf::ns::xsd);

  auto type = rdf::make_iri(rdf::rdf_type);
  auto label = rdf::make_iri(rdf::rdfs_label);
  std::string cfg_path = std::string(base) + "config/" + cfg.id;
  auto cfg_iri = rdf::make_iri(cfg_path);
  g.insert(cfg_iri, type, rdf::make_iri(vocab::scm("SystemConfiguration")));
  g.insert(cfg_iri, label, rdf::make_literal(cfg.id));
  if (cfg.test_setup)
    g.insert(cfg_iri, rdf::make_iri(vocab::scm("testSetup")),
             rdf::make_literal("true", rdf::xsd::boolean_));

  for (const auto& sys : cfg.systems) {
    std::string sys_path = cfg_path + "/system/" + sys.id;
    auto sys_iri = rdf::make_iri(sys_path);
    g.insert(cfg_iri, rdf::make_iri(vocab::scm("hasSystem")), sys_iri);
    g.insert(sys_iri, type, rdf::make_iri(vocab::scm("System")));
    g.insert(sys_iri, label, rdf::make_literal(sys.id));
    g.insert(sys_iri, rdf::make_iri(vocab::scm("hasType")), rdf::make_iri(sys.system_type));
    if (!sys.role.empty())
      g.insert(sys_iri, rdf::make_iri(vocab::scm("role")), rdf::make_literal(sys.role));

    for (const auto& cp : sys.connection_points) {
      auto cp_iri = rdf::make_iri(sys_path + "/cp/" + cp.id);
      g.insert(sys_iri, rdf::make_iri(vocab::scm("hasConnectionPoint")), cp_iri);
      g.insert(cp_iri, type, rdf::make_iri(vocab::scm("ConnectionPoint")));
      g.insert(cp_iri, rdf::make_iri(vocab::scm("inDomain")),
               rdf::make_iri(vocab::scm(cp.domain)));
      if (!cp.label.empty()) g.insert(cp_iri, label, rdf::make_literal(cp.label));
    }

    for (const auto& attr : sys.attributes) {
      auto attr_iri = rdf::make_iri(sys_path + "/attr/" + attr.name);
      g.insert(sys_iri, rdf::make_iri(vocab::scm("hasAttribute")), attr_iri);
      g.insert(attr_iri, type, rdf::make_iri(vocab::scm("Attribute")));
      g.insert(attr_iri, label, rdf::make_literal(attr.name));
      if (std::holds_alternative<double>(attr.value)) {
        std::string lexical = numfmt::format_double(std::get<double>(attr.value));
        bool exponent = lexical.find_first_of("eE") != std::string::npos;
        g.insert(attr_iri, rdf::make_iri(vocab::scm("value")),
                 rdf::make_literal(lexical, exponent ? rdf::xsd::double_ : rdf::xsd::decimal_));
      } else {
        g.insert(attr_iri, rdf::make_iri(vocab::scm("value")),
                 rdf::make_literal(std::get<std::string>(attr.value)));
      }
      if (!attr.unit.empty())
        g.insert(attr_iri, rdf::make_iri(vocab::scm("unit")), rdf::make_literal(attr.unit));
    }
  }

  for (const auto& conn : cfg.connections) {
    auto conn_iri = rdf::make_iri(cfg_path + "/connection/" + conn.id);
    g.insert(cfg_iri, rdf::make_iri(vocab::scm("hasConnection")), conn_iri);
    g.insert(conn_iri, type, rdf::make_iri(vocab::scm("Connection")));
    g.insert(conn_iri, label, rdf::make_literal(conn.id));
    for (const Endpoint* ep : {&conn.a, &conn.b})
      g.insert(conn_iri, rdf::make_iri(vocab::scm("connects")),
               rdf::make_iri(cfg_path + "/system/" + ep->system + "/cp/" + ep->point));
  }
  return g;
}

/// Inverse of to_rdf up to canonical ordering. The graph must hold exactly
/// one configuration node and pass the configuration shape rules.
inline SystemConfiguration from_rdf(const rdf::Graph& g) {
  if (g.empty()) throw Error(Errc::EmptyConfiguration, "graph holds no configuration node");

  store::Store s;
  s.load(g);
  auto shape_findings = vocab::check_shapes(s, vocab::scm_shape_rules());
  std::string failures;
  for (const auto& f : shape_findings)
    if (f.severity == vocab::Severity::Violation)
      failures += (failures.empty() ? "" : "; ") + f.rule_id + " at " + f.focus.value;
  if (!failures.empty())
    throw Error(Errc::ShapeViolation, "graph violates configuration shapes: " + failures);

  auto match_one = [&](const rdf::Term& subject, const std::string& pred)
      -> std::optional<rdf::Term> {
    auto rows = s.match(store::TriplePattern{store::PatternSlot::ground(subject),
                                             store::PatternSlot::ground(rdf::make_iri(pred)),
                                             store::PatternSlot::variable("v")});
    if (rows.empty()) return std::nullopt;
    return rows.front().at("v");
  };
  auto match_all = [&](const rdf::Term& subject, const std::string& pred) {
    std::vector<rdf::Term> out;
    for (const auto& row :
         s.match(store::TriplePattern{store::PatternSlot::ground(subject),
                                      store::PatternSlot::ground(rdf::make_iri(pred)),
                                      store::PatternSlot::variable("v")}))
      out.push_back(row.at("v"));
    return out;
  };

  auto config_nodes = s.match(store::TriplePattern{
      store::PatternSlot::variable("c"), store::PatternSlot::ground(rdf::make_iri(rdf::rdf_type)),
      store::PatternSlot::ground(rdf::make_iri(vocab::scm("SystemConfiguration")))});
  if (config_nodes.empty())
    throw Error(Errc::EmptyConfiguration, "graph holds no configuration node");
  if (config_nodes.size() > 1)
    throw Error(Errc::ShapeViolation, "graph holds more than one configuration node");
  rdf::Term cfg_iri = config_nodes.front().at("c");

  SystemConfiguration cfg;
  cfg.id = detail::last_segment(cfg_iri.value);
  if (auto ts = match_one(cfg_iri, vocab::scm("testSetup")))
    cfg.test_setup = ts->is_literal() && ts->value == "true";

  std::map<std::string, Endpoint> point_by_iri;
  for (const auto& sys_term : match_all(cfg_iri, vocab::scm("hasSystem"))) {
    SystemNode sys;
    sys.id = detail::last_segment(sys_term.value);
    if (auto t = match_one(sys_term, vocab::scm("hasType"))) sys.system_type = t->value;
    if (auto r = match_one(sys_term, vocab::scm("role"))) sys.role = r->value;

    for (const auto& cp_term : match_all(sys_term, vocab::scm("hasConnectionPoint"))) {
      ConnectionPointDef cp;
      cp.id = detail::last_segment(cp_term.value);
      if (auto d = match_one(cp_term, vocab::scm("inDomain"))) {
        std::string iri = d->value;
        std::string prefix(rdf::ns::scm);
        cp.domain = iri.rfind(prefix, 0) == 0 ? iri.substr(prefix.size())
                                              : detail::last_segment(iri);
      }
      if (auto l = match_one(cp_term, rdf::rdfs_label)) cp.label = l->value;
      point_by_iri[cp_term.value] = Endpoint{sys.id, cp.id};
      sys.connection_points.push_back(std::move(cp));
    }

    for (const auto& attr_term : match_all(sys_term, vocab::scm("hasAttribute"))) {
      Attribute attr;
      attr.name = detail::last_segment(attr_term.value);
      auto v = match_one(attr_term, vocab::scm("value"));
      if (!v || !v->is_literal())
        throw Error(Errc::ShapeViolation, "attribute " + attr_term.value + " has no value");
      if (v->datatype == rdf::xsd::decimal_ || v->datatype == rdf::xsd::double_ ||
          v->datatype == rdf::xsd::integer_) {
        auto num = numfmt::parse_double(v->value);
        if (!num)
          throw Error(Errc::ShapeViolation,
                      "attribute " + attr_term.value + " has a non-numeric lexical form");
        attr.value = *num;
      } else {
        attr.value = v->value;
      }
      if (auto u = match_one(attr_term, vocab::scm("unit"))) attr.unit = u->value;
      sys.attributes.push_back(std::move(attr));
    }
    cfg.systems.push_back(std::move(sys));
  }

  for (const auto& conn_term : match_all(cfg_iri, vocab::scm("hasConnection"))) {
    ConnectionEdge edge;
    edge.id = detail::last_segment(conn_term.value);
    auto targets = match_all(conn_term, vocab::scm("connects"));
    if (targets.size() != 2)
      throw Error(Errc::ShapeViolation,
                  "connection " + conn_term.value + " does not reference two points");
    std::vector<Endpoint> eps;
    for (const auto& t : targets) {
      auto it = point_by_iri.find(t.value);
      if (it == point_by_iri.end())
        throw Error(Errc::ShapeViolation,
                    "connection " + conn_term.value + " references unknown point " + t.value);
      eps.push_back(it->second);
    }
    edge.a = eps[0];
    edge.b = eps[1];
    // Edge domain is derived from its endpoints; emission never stores it.
    auto domain_of = [&](const Endpoint& ep) -> std::string {
      for (const auto& sys : cfg.systems)
        if (sys.id == ep.system)
          for (const auto& cp : sys.connection_points)
            if (cp.id == ep.point) return cp.domain;
      return {};
    };
    std::string da = domain_of(edge.a), db = domain_of(edge.b);
    if (da != db)
      throw Error(Errc::ShapeViolation,
                  "connection " + conn_term.value + " joins different domains");
    edge.domain = da;
    cfg.connections.push_back(std::move(edge));
  }

  canonicalize(cfg);
  return cfg;
}

// ---------------------------------------------------------------------------
// Diff
// ---------------------------------------------------------------------------

struct AttributeChange {
  std::string system_a;
  std::string system_b;
  std::string name;
  std::string value_a;  // empty when the attribute is absent on that side
  std::string value_b;

  friend bool operator==(const AttributeChange&, const AttributeChange&) = default;
};

struct DiffReport {
  std::vector<std::string> added_systems;    // ids present only in b
  std::vector<std::string> removed_systems;  // ids present only in a
  std::vector<AttributeChange> changed_attributes;
  std::vector<std::string> added_connections;
  std::vector<std::string> removed_connections;

  bool empty() const {
    return added_systems.empty() && removed_systems.empty() && changed_attributes.empty() &&
           added_connections.empty() && removed_connections.empty();
  }

  friend bool operator==(const DiffReport&, const DiffReport&) = default;
};

/// Compares two configurations. Systems match by (type, id); when ids
/// differ across labs, a type with exactly one candidate on each side still
/// matches (fuzzy); ambiguous candidates stay unmatched. Attribute values
/// are compared with their units.
inline DiffReport diff_configurations(const SystemConfiguration& a,
                                      const SystemConfiguration& b) {
  DiffReport report;
  std::vector<std::pair<const SystemNode*, const SystemNode*>> matched;
  std::vector<const SystemNode*> left_a, left_b;

  std::map<std::pair<std::string, std::string>, const SystemNode*> index_b;
  for (const auto& sys : b.systems) index_b[{sys.system_type, sys.id}] = &sys;
  std::set<const SystemNode*> used_b;
  for (const auto& sys : a.systems) {
    auto it = index_b.find({sys.system_type, sys.id});
    if (it != index_b.end()) {
      matched.emplace_back(&sys, it->second);
      used_b.insert(it->second);
    } else {
      left_a.push_back(&sys);
    }
  }
  for (const auto& sys : b.systems)
    if (!used_b.count(&sys)) left_b.push_back(&sys);

  // Fuzzy pass: unique type on both sides.
  std::map<std::string, std::vector<const SystemNode*>> by_type_a, by_type_b;
  for (const auto* sys : left_a) by_type_a[sys->system_type].push_back(sys);
  for (const auto* sys : left_b) by_type_b[sys->system_type].push_back(sys);
  std::set<const SystemNode*> fuzzy_used;
  for (const auto& [type, cands_a] : by_type_a) {
    auto it = by_type_b.find(type);
    if (it == by_type_b.end()) continue;
    if (cands_a.size() == 1 && it->second.size() == 1) {
      matched.emplace_back(cands_a.front(), it->second.front());
      fuzzy_used.insert(cands_a.front());
      fuzzy_used.insert(it->second.front());
    }
  }
  for (const auto* sys : left_a)
    if (!fuzzy_used.count(sys)) report.removed_systems.push_back(sys->id);
  for (const auto* sys : left_b)
    if (!fuzzy_used.count(sys)) report.added_systems.push_back(sys->id);

  auto with_unit = [](const Attribute& attr) {
    std::string text = detail::value_text(attr.value);
    if (!attr.unit.empty()) text += " " + attr.unit;
    return text;
  };
  for (const auto& [sa, sb] : matched) {
    std::map<std::string, const Attribute*> attrs_a, attrs_b;
    for (const auto& attr : sa->attributes) attrs_a[attr.name] = &attr;
    for (const auto& attr : sb->attributes) attrs_b[attr.name] = &attr;
    std::set<std::string> names;
    for (const auto& [n, _] : attrs_a) names.insert(n);
    for (const auto& [n, _] : attrs_b) names.insert(n);
    for (const auto& name : names) {
      auto ia = attrs_a.find(name);
      auto ib = attrs_b.find(name);
      std::string va = ia == attrs_a.end() ? "" : with_unit(*ia->second);
      std::string vb = ib == attrs_b.end() ? "" : with_unit(*ib->second);
      if (va != vb)
        report.changed_attributes.push_back(AttributeChange{sa->id, sb->id, name, va, vb});
    }
  }

  std::set<std::string> conn_a, conn_b;
  for (const auto& c : a.connections) conn_a.insert(c.id);
  for (const auto& c : b.connections) conn_b.insert(c.id);
  for (const auto& id : conn_a)
    if (!conn_b.count(id)) report.removed_connections.push_back(id);
  for (const auto& id : conn_b)
    if (!conn_a.count(id)) report.added_connections.push_back(id);

  std::sort(report.added_systems.begin(), report.added_systems.end());
  std::sort(report.removed_systems.begin(), report.removed_systems.end());
  std::sort(report.changed_attributes.begin(), report.changed_attributes.end(),
            [](const AttributeChange& x, const AttributeChange& y) {
              return std::tie(x.system_a, x.name) < std::tie(y.system_a, y.name);
            });
  return report;
}

}  // namespace testkg::scm
