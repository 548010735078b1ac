#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <compare>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "testkg/errors.hpp"

namespace testkg::rdf {

// ---------------------------------------------------------------------------
// Well-known namespaces. htd/scm/provx/annot are this project's draft
// vocabularies and live under one base IRI until they get a published home.
// ---------------------------------------------------------------------------
namespace ns {
inline constexpr std::string_view rdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view rdfs = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view owl = "http://www.w3.org/2002/07/owl#";
inline constexpr std::string_view xsd = "http://www.w3.org/2001/XMLSchema#";
inline constexpr std::string_view prov = "http://www.w3.org/ns/prov#";

inline constexpr std::string_view project_base = "https://w3id.org/testkg/";
inline constexpr std::string_view htd = "https://w3id.org/testkg/htd#";
inline constexpr std::string_view scm = "https://w3id.org/testkg/scm#";
inline constexpr std::string_view provx = "https://w3id.org/testkg/provx#";
inline constexpr std::string_view annot = "https://w3id.org/testkg/annot#";
inline constexpr std::string_view data_base = "https://w3id.org/testkg/data/";
}  // namespace ns

namespace xsd {
inline const std::string string_ = std::string(ns::xsd) + "string";
inline const std::string integer_ = std::string(ns::xsd) + "integer";
inline const std::string decimal_ = std::string(ns::xsd) + "decimal";
inline const std::string double_ = std::string(ns::xsd) + "double";
inline const std::string boolean_ = std::string(ns::xsd) + "boolean";
inline const std::string dateTime_ = std::string(ns::xsd) + "dateTime";
}  // namespace xsd

inline const std::string rdf_type = std::string(ns::rdf) + "type";
inline const std::string rdf_langString = std::string(ns::rdf) + "langString";
inline const std::string rdfs_label = std::string(ns::rdfs) + "label";
inline const std::string rdfs_comment = std::string(ns::rdfs) + "comment";
inline const std::string rdfs_domain = std::string(ns::rdfs) + "domain";
inline const std::string rdfs_range = std::string(ns::rdfs) + "range";
inline const std::string rdfs_Literal = std::string(ns::rdfs) + "Literal";
inline const std::string owl_Class = std::string(ns::owl) + "Class";
inline const std::string owl_ObjectProperty = std::string(ns::owl) + "ObjectProperty";
inline const std::string owl_DatatypeProperty = std::string(ns::owl) + "DatatypeProperty";

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

enum class TermKind { Iri, Blank, Literal };

/// One RDF term. IRIs keep the full text in `value`; blank nodes keep the
/// local label (no "_:" prefix); literals keep the lexical form plus a
/// datatype IRI and, for language-tagged strings, a BCP-47 tag. Literals
/// compare by (lexical, datatype, language) — no value-space coercion.
struct Term {
  TermKind kind = TermKind::Iri;
  std::string value;
  std::string datatype;
  std::string lang;

  auto operator<=>(const Term&) const = default;

  bool is_iri() const noexcept { return kind == TermKind::Iri; }
  bool is_blank() const noexcept { return kind == TermKind::Blank; }
  bool is_literal() const noexcept { return kind == TermKind::Literal; }
};

namespace detail {

inline bool is_control(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return u < 0x20 || u == 0x7f;
}

inline bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

/// Syntactic-lite IRI check: an absolute IRI has a scheme and contains no
/// whitespace, control characters, or characters that cannot appear raw in
/// an angle-bracketed serialization.
inline bool valid_iri(std::string_view text) {
  if (text.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(text[0]))) return false;
  std::size_t colon = std::string_view::npos;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (is_ws(c) || is_control(c)) return false;
    if (c == '<' || c == '>' || c == '"' || c == '{' || c == '}' || c == '|' ||
        c == '\\' || c == '^' || c == '`')
      return false;
    if (c == ':' && colon == std::string_view::npos) colon = i;
    if (colon == std::string_view::npos) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.'))
        return false;
    }
  }
  return colon != std::string_view::npos && colon > 0;
}

inline bool valid_blank_label(std::string_view label) {
  if (label.empty()) return false;
  return std::all_of(label.begin(), label.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

inline bool valid_language_tag(std::string_view tag) {
  if (tag.empty()) return false;
  bool first_part = true;
  std::size_t part_len = 0;
  for (char c : tag) {
    if (c == '-') {
      if (part_len == 0) return false;
      first_part = false;
      part_len = 0;
      continue;
    }
    bool ok = first_part ? std::isalpha(static_cast<unsigned char>(c)) != 0
                         : std::isalnum(static_cast<unsigned char>(c)) != 0;
    if (!ok) return false;
    ++part_len;
  }
  return part_len > 0;
}

}  // namespace detail

inline Term make_iri(std::string_view text) {
  if (!detail::valid_iri(text))
    throw Error(Errc::InvalidIri, "not an absolute IRI: '" + std::string(text) + "'");
  return Term{TermKind::Iri, std::string(text), {}, {}};
}

inline Term make_blank(std::string_view label) {
  if (!detail::valid_blank_label(label))
    throw Error(Errc::InvalidBlankLabel,
                "blank node label must match [A-Za-z0-9_]+: '" + std::string(label) + "'");
  return Term{TermKind::Blank, std::string(label), {}, {}};
}

inline Term make_literal(std::string_view lexical, std::string_view datatype = xsd::string_) {
  if (!detail::valid_iri(datatype))
    throw Error(Errc::InvalidLiteral, "literal datatype is not an absolute IRI");
  if (datatype == rdf_langString)
    throw Error(Errc::InvalidLiteral, "language-string literals need a language tag");
  return Term{TermKind::Literal, std::string(lexical), std::string(datatype), {}};
}

inline Term make_lang_literal(std::string_view lexical, std::string_view lang) {
  if (!detail::valid_language_tag(lang))
    throw Error(Errc::InvalidLiteral, "invalid language tag: '" + std::string(lang) + "'");
  std::string low(lang);
  std::transform(low.begin(), low.end(), low.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return Term{TermKind::Literal, std::string(lexical), rdf_langString, low};
}

// ---------------------------------------------------------------------------
// Triples and graphs
// ---------------------------------------------------------------------------

struct Triple {
  Term subject;
  Term predicate;
  Term object;

  auto operator<=>(const Triple&) const = default;
};

inline Triple make_triple(Term subject, Term predicate, Term object) {
  if (subject.is_literal())
    throw Error(Errc::InvalidTriple, "triple subject must not be a literal");
  if (!predicate.is_iri())
    throw Error(Errc::InvalidTriple, "triple predicate must be an IRI");
  return Triple{std::move(subject), std::move(predicate), std::move(object)};
}

/// A set of triples plus a prefix table. Insertion is set-semantic: adding a
/// triple that is already present leaves the graph unchanged.
class Graph {
 public:
  using TripleSet = std::set<Triple>;

  /// Returns true when the triple was newly added (size delta 1).
  bool insert(const Triple& t) {
    if (t.subject.is_literal())
      throw Error(Errc::InvalidTriple, "triple subject must not be a literal");
    if (!t.predicate.is_iri())
      throw Error(Errc::InvalidTriple, "triple predicate must be an IRI");
    return triples_.insert(t).second;
  }

  bool insert(Term s, Term p, Term o) {
    return insert(make_triple(std::move(s), std::move(p), std::move(o)));
  }

  bool contains(const Triple& t) const { return triples_.count(t) > 0; }
  std::size_t size() const noexcept { return triples_.size(); }
  bool empty() const noexcept { return triples_.empty(); }
  const TripleSet& triples() const noexcept { return triples_; }

  /// Registers (or re-binds) a prefix label. Later bindings win, mirroring
  /// repeated @prefix directives in a document.
  void add_prefix(std::string_view label, std::string_view iri) {
    if (!detail::valid_iri(iri))
      throw Error(Errc::InvalidIri, "namespace is not an absolute IRI: '" + std::string(iri) + "'");
    prefixes_[std::string(label)] = std::string(iri);
  }

  const std::map<std::string, std::string>& prefixes() const noexcept { return prefixes_; }

  /// Expands a prefixed name ("ex:s") to the full IRI text by concatenating
  /// the registered namespace and the local part.
  std::string expand(std::string_view prefixed_name) const {
    auto colon = prefixed_name.find(':');
    if (colon == std::string_view::npos)
      throw Error(Errc::UnknownPrefix, "not a prefixed name: '" + std::string(prefixed_name) + "'");
    std::string label(prefixed_name.substr(0, colon));
    auto it = prefixes_.find(label);
    if (it == prefixes_.end())
      throw Error(Errc::UnknownPrefix, "prefix not registered: '" + label + "'");
    return it->second + std::string(prefixed_name.substr(colon + 1));
  }

  /// Inverse of expand: finds the longest registered namespace that prefixes
  /// `iri` and yields a serializer-safe prefixed name, if one exists.
  std::optional<std::string> shrink(std::string_view iri) const {
    const std::string* best_ns = nullptr;
    const std::string* best_label = nullptr;
    for (const auto& [label, nsiri] : prefixes_) {
      if (iri.size() < nsiri.size() || iri.substr(0, nsiri.size()) != nsiri) continue;
      if (!valid_local_name(iri.substr(nsiri.size()))) continue;
      if (!best_ns || nsiri.size() > best_ns->size()) {
        best_ns = &nsiri;
        best_label = &label;
      }
    }
    if (!best_ns) return std::nullopt;
    return *best_label + ":" + std::string(iri.substr(best_ns->size()));
  }

  /// Local names we are willing to emit as part of a prefixed name. This is a
  /// conservative subset of Turtle's PN_LOCAL that our own parser accepts.
  static bool valid_local_name(std::string_view local) {
    if (local.empty()) return true;  // "ex:" is a valid prefixed name
    auto body = [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    };
    char first = local.front();
    if (!(std::isalnum(static_cast<unsigned char>(first)) || first == '_')) return false;
    if (!std::all_of(local.begin(), local.end(), body)) return false;
    return local.back() != '.';
  }

  auto operator<=>(const Graph&) const = default;

 private:
  TripleSet triples_;
  std::map<std::string, std::string> prefixes_;
};

/// Merge all triples and prefixes of `src` into `dst`; returns newly added count.
inline std::size_t merge(Graph& dst, const Graph& src) {
  std::size_t added = 0;
  for (const auto& [label, iri] : src.prefixes()) dst.add_prefix(label, iri);
  for (const auto& t : src.triples())
    if (dst.insert(t)) ++added;
  return added;
}

// ---------------------------------------------------------------------------
// Graph isomorphism up to blank-node relabeling
// ---------------------------------------------------------------------------

inline constexpr std::size_t kMaxIsoBlankNodes = 8;

namespace detail {

inline std::vector<std::string> blank_labels(const Graph& g) {
  std::set<std::string> labels;
  for (const auto& t : g.triples()) {
    if (t.subject.is_blank()) labels.insert(t.subject.value);
    if (t.object.is_blank()) labels.insert(t.object.value);
  }
  return {labels.begin(), labels.end()};
}

}  // namespace detail

/// Exact isomorphism test: true iff some bijection between the two graphs'
/// blank nodes makes the triple sets equal. Ground graphs compare as sets.
/// The search is factorial in the blank-node count, hence the hard bound.
inline bool isomorphic(const Graph& a, const Graph& b) {
  auto blanks_a = detail::blank_labels(a);
  auto blanks_b = detail::blank_labels(b);
  if (blanks_a.size() > kMaxIsoBlankNodes || blanks_b.size() > kMaxIsoBlankNodes)
    throw Error(Errc::TooManyBlankNodes,
                "isomorphism search is bounded to " + std::to_string(kMaxIsoBlankNodes) +
                    " blank nodes per graph");
  if (a.size() != b.size()) return false;
  if (blanks_a.size() != blanks_b.size()) return false;
  if (blanks_a.empty()) return a.triples() == b.triples();

  // Ground triples are fixed points of any relabeling; compare them first.
  std::set<Triple> ground_a, ground_b;
  std::vector<Triple> var_a;
  for (const auto& t : a.triples()) {
    if (t.subject.is_blank() || t.object.is_blank())
      var_a.push_back(t);
    else
      ground_a.insert(t);
  }
  std::set<Triple> var_b;
  for (const auto& t : b.triples()) {
    if (t.subject.is_blank() || t.object.is_blank())
      var_b.insert(t);
    else
      ground_b.insert(t);
  }
  if (ground_a != ground_b) return false;

  std::vector<std::size_t> perm(blanks_b.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::map<std::string, std::size_t> index_a;
  for (std::size_t i = 0; i < blanks_a.size(); ++i) index_a[blanks_a[i]] = i;

  do {
    auto rename = [&](const Term& t) -> Term {
      if (!t.is_blank()) return t;
      return Term{TermKind::Blank, blanks_b[perm[index_a.at(t.value)]], {}, {}};
    };
    std::set<Triple> mapped;
    for (const auto& t : var_a)
      mapped.insert(Triple{rename(t.subject), t.predicate, rename(t.object)});
    if (mapped == var_b) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

}  // namespace testkg::rdf
