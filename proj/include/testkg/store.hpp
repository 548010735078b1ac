#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "testkg/errors.hpp"
#include "testkg/rdf.hpp"

// Indexed in-memory triple store with a basic-graph-pattern SELECT engine.
// Terms are interned once; three orderings (SPO, POS, OSP) cover every
// ground/variable combination of a pattern with a range scan.

namespace testkg::store {

using rdf::Graph;
using rdf::Term;
using rdf::Triple;

using TermId = std::uint32_t;
using Binding = std::map<std::string, Term>;

namespace detail {

inline bool valid_variable_name(std::string_view name) {
  if (name.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

/// Prefix-free canonical text for a term, used for deterministic row
/// ordering and deduplication.
inline std::string canonical_term(const Term& t) {
  switch (t.kind) {
    case rdf::TermKind::Iri: return "<" + t.value + ">";
    case rdf::TermKind::Blank: return "_:" + t.value;
    case rdf::TermKind::Literal:
      if (!t.lang.empty()) return "\"" + t.value + "\"@" + t.lang;
      return "\"" + t.value + "\"^^<" + t.datatype + ">";
  }
  return {};
}

inline std::string canonical_row(const Binding& row) {
  std::string out;
  for (const auto& [var, term] : row) {
    out += "?";
    out += var;
    out += "=";
    out += canonical_term(term);
    out += " ";
  }
  return out;
}

inline std::optional<double> parse_number(const std::string& text) {
  if (text.empty()) return std::nullopt;
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) return std::nullopt;
  return v;
}

}  // namespace detail

/// One slot of a triple pattern: either a ground term or a named variable.
struct PatternSlot {
  bool is_var = false;
  Term term;
  std::string var;

  static PatternSlot ground(Term t) { return PatternSlot{false, std::move(t), {}}; }
  static PatternSlot variable(std::string_view name) {
    if (!detail::valid_variable_name(name))
      throw Error(Errc::MalformedQuery, "invalid variable name: '" + std::string(name) + "'");
    return PatternSlot{true, Term{}, std::string(name)};
  }
};

struct TriplePattern {
  PatternSlot subject;
  PatternSlot predicate;
  PatternSlot object;

  std::vector<std::string> variables() const {
    std::vector<std::string> out;
    for (const PatternSlot* s : {&subject, &predicate, &object})
      if (s->is_var) out.push_back(s->var);
    return out;
  }
};

enum class Comparator { Eq, Ne, Lt, Le, Gt, Ge, Regex };

struct Filter {
  std::string var;
  Comparator cmp = Comparator::Eq;
  Term operand;            // for Eq..Ge
  std::string regex_text;  // for Regex
};

struct SelectQuery {
  bool star = false;
  std::vector<std::string> projection;  // ignored when star
  std::vector<TriplePattern> patterns;
  std::vector<Filter> filters;
  bool distinct = false;
  std::optional<std::string> order_var;
  bool order_descending = false;
  std::optional<std::size_t> limit;
};

class Store {
 public:
  /// Adds every triple of the graph; returns the count of newly added
  /// triples. Prefixes are merged (later bindings win).
  std::size_t load(const Graph& g) {
    for (const auto& [label, iri] : g.prefixes()) prefixes_[label] = iri;
    std::size_t added = 0;
    for (const auto& t : g.triples())
      if (insert(t)) ++added;
    return added;
  }

  bool insert(const Triple& t) {
    Key k{intern(t.subject), intern(t.predicate), intern(t.object)};
    if (!spo_.insert(k).second) return false;
    pos_.insert({k[1], k[2], k[0]});
    osp_.insert({k[2], k[0], k[1]});
    return true;
  }

  std::size_t size() const noexcept { return spo_.size(); }

  bool contains(const Triple& t) const {
    auto s = lookup(t.subject), p = lookup(t.predicate), o = lookup(t.object);
    if (!s || !p || !o) return false;
    return spo_.count({*s, *p, *o}) > 0;
  }

  const std::map<std::string, std::string>& prefixes() const noexcept { return prefixes_; }
  void add_prefix(std::string_view label, std::string_view iri) {
    prefixes_[std::string(label)] = std::string(iri);
  }

  /// All matches of one pattern. One binding per matching triple; a fully
  /// ground pattern yields zero or one empty binding.
  std::vector<Binding> match(const TriplePattern& p) const {
    std::set<Binding> out;
    for_each_match(p, [&](const Triple& t) {
      Binding b;
      if (bind(p, t, b)) out.insert(std::move(b));
    });
    return {out.begin(), out.end()};
  }

  /// Evaluates a SELECT query: joins all patterns (reordered by estimated
  /// selectivity), applies filters, deduplicates when DISTINCT, orders, and
  /// truncates. The join result is independent of the pattern order given.
  std::vector<Binding> select(const SelectQuery& q) const {
    validate(q);

    std::vector<std::string> projection = q.star ? all_variables(q) : q.projection;

    // Most selective first: more ground slots, then smaller index range.
    std::vector<std::size_t> order(q.patterns.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<std::pair<int, std::size_t>> keys(q.patterns.size());
    for (std::size_t i = 0; i < q.patterns.size(); ++i)
      keys[i] = {count_vars(q.patterns[i]), estimate(q.patterns[i])};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return keys[a] < keys[b];
    });

    std::vector<Binding> rows{Binding{}};
    for (std::size_t idx : order) {
      std::vector<Binding> next;
      for (const auto& row : rows) {
        TriplePattern bound = substitute(q.patterns[idx], row);
        for_each_match(bound, [&](const Triple& t) {
          Binding extended = row;
          if (bind(bound, t, extended)) next.push_back(std::move(extended));
        });
      }
      rows = std::move(next);
      if (rows.empty()) break;
    }

    // Filters: a comparator over non-comparable values is filter-false for
    // that row, not an error.
    std::vector<std::regex> compiled(q.filters.size());
    for (std::size_t i = 0; i < q.filters.size(); ++i)
      if (q.filters[i].cmp == Comparator::Regex) {
        try {
          compiled[i] = std::regex(q.filters[i].regex_text);
        } catch (const std::regex_error& e) {
          throw Error(Errc::MalformedQuery, std::string("invalid regex: ") + e.what());
        }
      }
    std::vector<Binding> filtered;
    for (auto& row : rows) {
      bool keep = true;
      for (std::size_t i = 0; i < q.filters.size() && keep; ++i)
        keep = eval_filter(q.filters[i], compiled[i], row);
      if (keep) filtered.push_back(std::move(row));
    }

    // Project, then deduplicate if DISTINCT (first occurrence wins).
    std::vector<Binding> projected;
    projected.reserve(filtered.size());
    for (const auto& row : filtered) {
      Binding p;
      for (const auto& var : projection) {
        auto it = row.find(var);
        if (it != row.end()) p.emplace(it->first, it->second);
      }
      projected.push_back(std::move(p));
    }
    if (q.distinct) {
      std::set<std::string> seen;
      std::vector<Binding> unique;
      for (auto& row : projected)
        if (seen.insert(detail::canonical_row(row)).second) unique.push_back(std::move(row));
      projected = std::move(unique);
    }

    if (q.order_var) {
      const std::string& var = *q.order_var;
      bool desc = q.order_descending;
      std::stable_sort(projected.begin(), projected.end(),
                       [&](const Binding& a, const Binding& b) {
                         int c = compare_terms(a.find(var), a.end(), b.find(var), b.end());
                         if (c != 0) return desc ? c > 0 : c < 0;
                         return detail::canonical_row(a) < detail::canonical_row(b);
                       });
    }

    if (q.limit && projected.size() > *q.limit) projected.resize(*q.limit);
    return projected;
  }

  /// Enumerations through each index, re-assembled as triples. All three
  /// must agree after any sequence of loads.
  std::vector<Triple> triples_via_spo() const { return collect(spo_, 0, 1, 2); }
  std::vector<Triple> triples_via_pos() const { return collect(pos_, 2, 0, 1); }
  std::vector<Triple> triples_via_osp() const { return collect(osp_, 1, 2, 0); }

  const Term& term(TermId id) const { return terms_[id]; }
  std::size_t interned_terms() const noexcept { return terms_.size(); }

 private:
  using Key = std::array<TermId, 3>;

  TermId intern(const Term& t) {
    auto it = ids_.find(t);
    if (it != ids_.end()) return it->second;
    TermId id = static_cast<TermId>(terms_.size());
    terms_.push_back(t);
    ids_.emplace(t, id);
    return id;
  }

  std::optional<TermId> lookup(const Term& t) const {
    auto it = ids_.find(t);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  static int count_vars(const TriplePattern& p) {
    return (p.subject.is_var ? 1 : 0) + (p.predicate.is_var ? 1 : 0) + (p.object.is_var ? 1 : 0);
  }

  std::size_t estimate(const TriplePattern& p) const {
    std::size_t n = 0;
    for_each_match(p, [&](const Triple&) { ++n; });
    return n;
  }

  static TriplePattern substitute(const TriplePattern& p, const Binding& row) {
    auto sub = [&](const PatternSlot& s) {
      if (!s.is_var) return s;
      auto it = row.find(s.var);
      if (it == row.end()) return s;
      return PatternSlot::ground(it->second);
    };
    return TriplePattern{sub(p.subject), sub(p.predicate), sub(p.object)};
  }

  static bool bind(const TriplePattern& p, const Triple& t, Binding& row) {
    auto one = [&](const PatternSlot& s, const Term& value) {
      if (!s.is_var) return true;
      auto [it, inserted] = row.emplace(s.var, value);
      return inserted || it->second == value;  // repeated variable must agree
    };
    return one(p.subject, t.subject) && one(p.predicate, t.predicate) && one(p.object, t.object);
  }

  template <typename Fn>
  void for_each_match(const TriplePattern& p, Fn&& fn) const {
    std::optional<TermId> s, pr, o;
    if (!p.subject.is_var) {
      s = lookup(p.subject.term);
      if (!s) return;
    }
    if (!p.predicate.is_var) {
      pr = lookup(p.predicate.term);
      if (!pr) return;
    }
    if (!p.object.is_var) {
      o = lookup(p.object.term);
      if (!o) return;
    }

    auto emit = [&](const Key& spo) {
      fn(Triple{terms_[spo[0]], terms_[spo[1]], terms_[spo[2]]});
    };

    if (s && pr && o) {
      if (spo_.count({*s, *pr, *o})) emit({*s, *pr, *o});
    } else if (s && pr) {
      scan(spo_, {*s, *pr}, [&](const Key& k) { emit(k); });
    } else if (s && o) {
      scan(osp_, {*o, *s}, [&](const Key& k) { emit({k[1], k[2], k[0]}); });
    } else if (pr && o) {
      scan(pos_, {*pr, *o}, [&](const Key& k) { emit({k[2], k[0], k[1]}); });
    } else if (s) {
      scan(spo_, {*s}, [&](const Key& k) { emit(k); });
    } else if (pr) {
      scan(pos_, {*pr}, [&](const Key& k) { emit({k[2], k[0], k[1]}); });
    } else if (o) {
      scan(osp_, {*o}, [&](const Key& k) { emit({k[1], k[2], k[0]}); });
    } else {
      for (const Key& k : spo_) emit(k);
    }
  }

  template <typename Fn>
  static void scan(const std::set<Key>& index, std::vector<TermId> prefix, Fn&& fn) {
    Key low{0, 0, 0};
    for (std::size_t i = 0; i < prefix.size(); ++i) low[i] = prefix[i];
    for (auto it = index.lower_bound(low); it != index.end(); ++it) {
      bool match = true;
      for (std::size_t i = 0; i < prefix.size(); ++i)
        if ((*it)[i] != prefix[i]) {
          match = false;
          break;
        }
      if (!match) break;
      fn(*it);
    }
  }

  template <typename Set>
  std::vector<Triple> collect(const Set& index, int si, int pi, int oi) const {
    std::vector<Triple> out;
    out.reserve(index.size());
    for (const Key& k : index)
      out.push_back(Triple{terms_[k[si]], terms_[k[pi]], terms_[k[oi]]});
    std::sort(out.begin(), out.end());
    return out;
  }

  static void validate(const SelectQuery& q) {
    if (q.patterns.empty())
      throw Error(Errc::MalformedQuery, "query has no triple patterns");
    std::set<std::string> pattern_vars;
    for (const auto& p : q.patterns)
      for (const auto& v : p.variables()) pattern_vars.insert(v);
    if (!q.star) {
      if (q.projection.empty())
        throw Error(Errc::MalformedQuery, "empty projection");
      for (const auto& v : q.projection)
        if (!pattern_vars.count(v))
          throw Error(Errc::MalformedQuery, "projected variable ?" + v + " not bound by any pattern");
    }
    for (const auto& f : q.filters)
      if (!pattern_vars.count(f.var))
        throw Error(Errc::MalformedQuery, "filtered variable ?" + f.var + " not bound by any pattern");
    if (q.order_var && !pattern_vars.count(*q.order_var))
      throw Error(Errc::MalformedQuery, "ordering variable ?" + *q.order_var + " not bound by any pattern");
  }

  static std::vector<std::string> all_variables(const SelectQuery& q) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& p : q.patterns)
      for (const auto& v : p.variables())
        if (seen.insert(v).second) out.push_back(v);
    return out;
  }

  static bool eval_filter(const Filter& f, const std::regex& re, const Binding& row) {
    auto it = row.find(f.var);
    if (it == row.end()) return false;
    const Term& v = it->second;
    switch (f.cmp) {
      case Comparator::Eq: return v == f.operand;
      case Comparator::Ne: return v != f.operand;
      case Comparator::Regex: {
        if (v.is_blank()) return false;
        return std::regex_search(v.value, re);
      }
      default: break;
    }
    // Order comparators: numeric when both literals parse as numbers,
    // else lexical when both are literals; anything else is filter-false.
    if (!v.is_literal() || !f.operand.is_literal()) return false;
    int c;
    auto lhs = detail::parse_number(v.value);
    auto rhs = detail::parse_number(f.operand.value);
    if (lhs && rhs)
      c = *lhs < *rhs ? -1 : (*lhs > *rhs ? 1 : 0);
    else
      c = v.value.compare(f.operand.value) < 0 ? -1 : (v.value == f.operand.value ? 0 : 1);
    switch (f.cmp) {
      case Comparator::Lt: return c < 0;
      case Comparator::Le: return c <= 0;
      case Comparator::Gt: return c > 0;
      case Comparator::Ge: return c >= 0;
      default: return false;
    }
  }

  static int compare_terms(Binding::const_iterator a, Binding::const_iterator a_end,
                           Binding::const_iterator b, Binding::const_iterator b_end) {
    bool ha = a != a_end, hb = b != b_end;
    if (!ha || !hb) return ha == hb ? 0 : (ha ? 1 : -1);
    const Term& ta = a->second;
    const Term& tb = b->second;
    if (ta.is_literal() && tb.is_literal()) {
      auto na = detail::parse_number(ta.value);
      auto nb = detail::parse_number(tb.value);
      if (na && nb && *na != *nb) return *na < *nb ? -1 : 1;
    }
    std::string ca = detail::canonical_term(ta), cb = detail::canonical_term(tb);
    return ca < cb ? -1 : (ca == cb ? 0 : 1);
  }

  std::vector<Term> terms_;
  std::map<Term, TermId> ids_;
  std::set<Key> spo_, pos_, osp_;
  std::map<std::string, std::string> prefixes_;
};

}  // namespace testkg::store
