#pragma once

#include <cctype>
#include <map>
#include <string>
#include <string_view>

#include "testkg/errors.hpp"
#include "testkg/rdf.hpp"
#include "testkg/store.hpp"

// Text form of the SELECT subset. Grammar (see docs/query-grammar.md):
//
//   query    := prefix* "SELECT" "DISTINCT"? ( "*" | var+ )
//               "WHERE"? "{" ( block | filter )* "}" order? limit?
//   prefix   := "PREFIX" PNAME ":" IRIREF
//   block    := subject pol ( ";" pol )* ";"? "."?
//   pol      := predicate object ( "," object )*
//   filter   := "FILTER" "(" ( var op term | "REGEX" "(" var "," string ")" ) ")"
//   order    := "ORDER" "BY" ( var | "ASC" "(" var ")" | "DESC" "(" var ")" )
//   limit    := "LIMIT" integer
//
// Keywords are case-insensitive. OPTIONAL, UNION, MINUS, GRAPH, SERVICE,
// BIND, VALUES, OFFSET, sub-selects, property paths, and blank nodes in
// patterns are rejected as unsupported.

namespace testkg::query {

using store::Comparator;
using store::Filter;
using store::PatternSlot;
using store::SelectQuery;
using store::TriplePattern;

namespace detail {

enum class Tok {
  End, Var, IriRef, PName, String, Integer, Decimal, Double, Boolean,
  KeywordA, Word, LBrace, RBrace, LParen, RParen, Dot, Comma, Semicolon,
  Star, Eq, Ne, Lt, Le, Gt, Ge, DCaret, LangTag
};

struct Token {
  Tok kind = Tok::End;
  std::string text;  // word / var name / iri / lexical value / language tag
  std::string aux;   // local part of a prefixed name
  int line = 1;
  int column = 1;
};

inline std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_trivia();
    Token t;
    t.line = line_;
    t.column = column_;
    if (pos_ >= text_.size()) return t;

    char c = text_[pos_];
    switch (c) {
      case '{': advance(); t.kind = Tok::LBrace; return t;
      case '}': advance(); t.kind = Tok::RBrace; return t;
      case '(': advance(); t.kind = Tok::LParen; return t;
      case ')': advance(); t.kind = Tok::RParen; return t;
      case ',': advance(); t.kind = Tok::Comma; return t;
      case ';': advance(); t.kind = Tok::Semicolon; return t;
      case '*': advance(); t.kind = Tok::Star; return t;
      case '=': advance(); t.kind = Tok::Eq; return t;
      case '/':
      case '|':
        throw Error(Errc::Unsupported, "property paths are not supported", here());
      default: break;
    }

    if (c == '.') {
      if (pos_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))
        return lex_number(t);
      advance();
      t.kind = Tok::Dot;
      return t;
    }
    if (c == '!') {
      advance();
      if (!eat('=')) throw Error(Errc::MalformedQuery, "expected '=' after '!'", here());
      t.kind = Tok::Ne;
      return t;
    }
    if (c == '^') {
      advance();
      if (!eat('^'))
        throw Error(Errc::Unsupported, "property paths are not supported", here());
      t.kind = Tok::DCaret;
      return t;
    }
    if (c == '<') return lex_less(t);
    if (c == '>') {
      advance();
      t.kind = eat('=') ? Tok::Ge : Tok::Gt;
      return t;
    }
    if (c == '?') {
      advance();
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        t.text += text_[pos_];
        advance();
      }
      if (t.text.empty()) throw Error(Errc::MalformedQuery, "empty variable name", here());
      t.kind = Tok::Var;
      return t;
    }
    if (c == '@') {
      advance();
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '-')) {
        t.text += text_[pos_];
        advance();
      }
      if (t.text.empty()) throw Error(Errc::MalformedQuery, "empty language tag", here());
      t.kind = Tok::LangTag;
      return t;
    }
    if (c == '"') return lex_string(t);
    if (c == '\'')
      throw Error(Errc::Unsupported, "single-quoted strings are not supported", here());
    if (c == '_')
      throw Error(Errc::Unsupported, "blank nodes in query patterns are not supported", here());
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-') return lex_number(t);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == ':') return lex_word(t);

    throw Error(Errc::MalformedQuery, std::string("unexpected character '") + c + "'", here());
  }

 private:
  Position here() const { return Position{line_, column_}; }

  void advance() {
    if (pos_ < text_.size()) {
      if (text_[pos_] == '\n') {
        ++line_;
        column_ = 1;
      } else {
        ++column_;
      }
      ++pos_;
    }
  }

  bool eat(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      advance();
      return true;
    }
    return false;
  }

  void skip_trivia() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        break;
      }
    }
  }

  Token lex_less(Token t) {
    advance();  // '<'
    if (eat('=')) {
      t.kind = Tok::Le;
      return t;
    }
    // An IRI begins with a scheme letter and closes with '>' before any
    // whitespace; anything else is the comparison operator.
    std::size_t probe = pos_;
    bool iri = pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]));
    if (iri) {
      iri = false;
      while (probe < text_.size()) {
        char c = text_[probe];
        if (c == '>') {
          iri = true;
          break;
        }
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') break;
        ++probe;
      }
    }
    if (!iri) {
      t.kind = Tok::Lt;
      return t;
    }
    while (text_[pos_] != '>') {
      t.text += text_[pos_];
      advance();
    }
    advance();  // '>'
    t.kind = Tok::IriRef;
    return t;
  }

  Token lex_string(Token t) {
    advance();  // opening quote
    while (true) {
      if (pos_ >= text_.size())
        throw Error(Errc::MalformedQuery, "unterminated string", here());
      char c = text_[pos_];
      if (c == '"') {
        advance();
        break;
      }
      if (c == '\n')
        throw Error(Errc::MalformedQuery, "newline in string", here());
      if (c == '\\') {
        advance();
        if (pos_ >= text_.size())
          throw Error(Errc::MalformedQuery, "unterminated escape", here());
        char e = text_[pos_];
        advance();
        switch (e) {
          case 't': t.text += '\t'; break;
          case 'n': t.text += '\n'; break;
          case 'r': t.text += '\r'; break;
          case 'b': t.text += '\b'; break;
          case 'f': t.text += '\f'; break;
          case '"': t.text += '"'; break;
          case '\'': t.text += '\''; break;
          case '\\': t.text += '\\'; break;
          default:
            throw Error(Errc::MalformedQuery, std::string("unknown escape '\\") + e + "'", here());
        }
        continue;
      }
      t.text += c;
      advance();
    }
    t.kind = Tok::String;
    return t;
  }

  Token lex_number(Token t) {
    bool saw_dot = false, saw_exp = false, saw_digit = false;
    if (text_[pos_] == '+' || text_[pos_] == '-') {
      t.text += text_[pos_];
      advance();
    }
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        saw_digit = true;
        t.text += c;
        advance();
      } else if (c == '.' && !saw_dot && !saw_exp) {
        if (pos_ + 1 >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) break;
        saw_dot = true;
        t.text += c;
        advance();
      } else if ((c == 'e' || c == 'E') && saw_digit && !saw_exp) {
        saw_exp = true;
        t.text += c;
        advance();
        if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
          t.text += text_[pos_];
          advance();
        }
      } else {
        break;
      }
    }
    if (!saw_digit) throw Error(Errc::MalformedQuery, "malformed number", here());
    t.kind = saw_exp ? Tok::Double : (saw_dot ? Tok::Decimal : Tok::Integer);
    return t;
  }

  Token lex_word(Token t) {
    std::string word;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ':' || c == '.') {
        word += c;
        advance();
      } else {
        break;
      }
    }
    // Trailing dots are statement terminators, not part of a name.
    while (!word.empty() && word.back() == '.') {
      word.pop_back();
      --pos_;
      --column_;
    }
    auto colon = word.find(':');
    if (colon != std::string::npos) {
      t.kind = Tok::PName;
      t.text = word.substr(0, colon);
      t.aux = word.substr(colon + 1);
      return t;
    }
    if (word == "a") {
      t.kind = Tok::KeywordA;
      return t;
    }
    if (word == "true" || word == "false") {
      t.kind = Tok::Boolean;
      t.text = word;
      return t;
    }
    t.kind = Tok::Word;
    t.text = word;
    return t;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

class Parser {
 public:
  Parser(std::string_view text, const std::map<std::string, std::string>& base_prefixes)
      : lexer_(text), prefixes_(base_prefixes) {
    shift();
  }

  SelectQuery parse() {
    while (is_word("PREFIX")) parse_prefix();

    if (is_word("CONSTRUCT") || is_word("ASK") || is_word("DESCRIBE"))
      throw Error(Errc::Unsupported, upper(tok_.text) + " queries are not supported", at());
    if (!is_word("SELECT"))
      throw Error(Errc::MalformedQuery, "expected SELECT", at());
    shift();

    SelectQuery q;
    if (is_word("DISTINCT")) {
      q.distinct = true;
      shift();
    }
    if (tok_.kind == Tok::Star) {
      q.star = true;
      shift();
    } else {
      while (tok_.kind == Tok::Var) {
        q.projection.push_back(tok_.text);
        shift();
      }
      if (q.projection.empty())
        throw Error(Errc::MalformedQuery, "expected '*' or at least one variable", at());
    }

    if (is_word("FROM"))
      throw Error(Errc::Unsupported, "FROM is not supported", at());
    if (is_word("WHERE")) shift();
    expect(Tok::LBrace, "'{'");

    while (tok_.kind != Tok::RBrace) {
      if (tok_.kind == Tok::End)
        throw Error(Errc::MalformedQuery, "unterminated group pattern", at());
      if (tok_.kind == Tok::Word) {
        std::string kw = upper(tok_.text);
        if (kw == "FILTER") {
          shift();
          q.filters.push_back(parse_filter());
          continue;
        }
        if (kw == "OPTIONAL" || kw == "UNION" || kw == "MINUS" || kw == "GRAPH" ||
            kw == "SERVICE" || kw == "BIND" || kw == "VALUES" || kw == "SELECT" ||
            kw == "EXISTS" || kw == "NOT")
          throw Error(Errc::Unsupported, kw + " is not supported", at());
        throw Error(Errc::MalformedQuery, "unexpected '" + tok_.text + "' in group pattern", at());
      }
      if (tok_.kind == Tok::LBrace)
        throw Error(Errc::Unsupported, "nested group patterns are not supported", at());
      parse_block(q);
    }
    shift();  // '}'

    if (is_word("ORDER")) {
      shift();
      if (!is_word("BY")) throw Error(Errc::MalformedQuery, "expected BY after ORDER", at());
      shift();
      if (is_word("ASC") || is_word("DESC")) {
        q.order_descending = upper(tok_.text) == "DESC";
        shift();
        expect(Tok::LParen, "'('");
        if (tok_.kind != Tok::Var) throw Error(Errc::MalformedQuery, "expected variable", at());
        q.order_var = tok_.text;
        shift();
        expect(Tok::RParen, "')'");
      } else if (tok_.kind == Tok::Var) {
        q.order_var = tok_.text;
        shift();
      } else {
        throw Error(Errc::MalformedQuery, "expected variable after ORDER BY", at());
      }
    }
    if (is_word("LIMIT")) {
      shift();
      if (tok_.kind != Tok::Integer || tok_.text.front() == '-')
        throw Error(Errc::MalformedQuery, "LIMIT needs a non-negative integer", at());
      q.limit = static_cast<std::size_t>(std::stoull(tok_.text));
      shift();
    }
    if (is_word("OFFSET"))
      throw Error(Errc::Unsupported, "OFFSET is not supported", at());
    if (tok_.kind != Tok::End)
      throw Error(Errc::MalformedQuery, "trailing input after query", at());
    return q;
  }

 private:
  void shift() { tok_ = lexer_.next(); }

  Position at() const { return Position{tok_.line, tok_.column}; }

  bool is_word(std::string_view kw) const {
    return tok_.kind == Tok::Word && upper(tok_.text) == upper(std::string(kw));
  }

  void expect(Tok kind, const char* what) {
    if (tok_.kind != kind)
      throw Error(Errc::MalformedQuery, std::string("expected ") + what, at());
    shift();
  }

  void parse_prefix() {
    shift();  // PREFIX
    if (tok_.kind != Tok::PName || !tok_.aux.empty())
      throw Error(Errc::MalformedQuery, "expected 'label:' after PREFIX", at());
    std::string label = tok_.text;
    shift();
    if (tok_.kind != Tok::IriRef)
      throw Error(Errc::MalformedQuery, "expected IRI in PREFIX declaration", at());
    prefixes_[label] = tok_.text;
    shift();
  }

  rdf::Term expand_pname() {
    auto it = prefixes_.find(tok_.text);
    if (it == prefixes_.end())
      throw Error(Errc::UnknownPrefix, "unknown prefix '" + tok_.text + ":'", at());
    rdf::Term t = rdf::make_iri(it->second + tok_.aux);
    shift();
    return t;
  }

  PatternSlot parse_subject() {
    if (tok_.kind == Tok::Var) {
      PatternSlot s = PatternSlot::variable(tok_.text);
      shift();
      return s;
    }
    if (tok_.kind == Tok::IriRef) {
      PatternSlot s = PatternSlot::ground(rdf::make_iri(tok_.text));
      shift();
      return s;
    }
    if (tok_.kind == Tok::PName) return PatternSlot::ground(expand_pname());
    throw Error(Errc::MalformedQuery, "expected subject (variable or IRI)", at());
  }

  PatternSlot parse_predicate() {
    if (tok_.kind == Tok::KeywordA) {
      shift();
      return PatternSlot::ground(rdf::make_iri(rdf::rdf_type));
    }
    return parse_subject();
  }

  PatternSlot parse_object() {
    if (tok_.kind == Tok::Var) {
      PatternSlot s = PatternSlot::variable(tok_.text);
      shift();
      return s;
    }
    return PatternSlot::ground(parse_ground_term());
  }

  rdf::Term parse_ground_term() {
    switch (tok_.kind) {
      case Tok::IriRef: {
        rdf::Term t = rdf::make_iri(tok_.text);
        shift();
        return t;
      }
      case Tok::PName:
        return expand_pname();
      case Tok::Integer: {
        rdf::Term t = rdf::make_literal(tok_.text, rdf::xsd::integer_);
        shift();
        return t;
      }
      case Tok::Decimal: {
        rdf::Term t = rdf::make_literal(tok_.text, rdf::xsd::decimal_);
        shift();
        return t;
      }
      case Tok::Double: {
        rdf::Term t = rdf::make_literal(tok_.text, rdf::xsd::double_);
        shift();
        return t;
      }
      case Tok::Boolean: {
        rdf::Term t = rdf::make_literal(tok_.text, rdf::xsd::boolean_);
        shift();
        return t;
      }
      case Tok::String: {
        std::string lexical = tok_.text;
        shift();
        if (tok_.kind == Tok::LangTag) {
          rdf::Term t = rdf::make_lang_literal(lexical, tok_.text);
          shift();
          return t;
        }
        if (tok_.kind == Tok::DCaret) {
          shift();
          rdf::Term dt;
          if (tok_.kind == Tok::IriRef) {
            dt = rdf::make_iri(tok_.text);
            shift();
          } else if (tok_.kind == Tok::PName) {
            dt = expand_pname();
          } else {
            throw Error(Errc::MalformedQuery, "expected datatype IRI after '^^'", at());
          }
          return rdf::make_literal(lexical, dt.value);
        }
        return rdf::make_literal(lexical);
      }
      default:
        throw Error(Errc::MalformedQuery, "expected a term", at());
    }
  }

  void parse_block(SelectQuery& q) {
    PatternSlot subject = parse_subject();
    while (true) {
      PatternSlot predicate = parse_predicate();
      while (true) {
        q.patterns.push_back(TriplePattern{subject, predicate, parse_object()});
        if (tok_.kind == Tok::Comma) {
          shift();
          continue;
        }
        break;
      }
      if (tok_.kind == Tok::Semicolon) {
        shift();
        if (tok_.kind == Tok::Dot || tok_.kind == Tok::RBrace) break;  // trailing ';'
        continue;
      }
      break;
    }
    if (tok_.kind == Tok::Dot) shift();  // final '.' optional before '}'
  }

  Filter parse_filter() {
    expect(Tok::LParen, "'(' after FILTER");
    Filter f;
    if (is_word("REGEX")) {
      shift();
      expect(Tok::LParen, "'(' after REGEX");
      if (tok_.kind != Tok::Var) throw Error(Errc::MalformedQuery, "expected variable in REGEX", at());
      f.var = tok_.text;
      shift();
      expect(Tok::Comma, "','");
      if (tok_.kind != Tok::String)
        throw Error(Errc::MalformedQuery, "expected pattern string in REGEX", at());
      f.cmp = Comparator::Regex;
      f.regex_text = tok_.text;
      shift();
      expect(Tok::RParen, "')'");
      expect(Tok::RParen, "')'");
      return f;
    }
    if (tok_.kind != Tok::Var)
      throw Error(Errc::MalformedQuery, "expected variable in FILTER", at());
    f.var = tok_.text;
    shift();
    switch (tok_.kind) {
      case Tok::Eq: f.cmp = Comparator::Eq; break;
      case Tok::Ne: f.cmp = Comparator::Ne; break;
      case Tok::Lt: f.cmp = Comparator::Lt; break;
      case Tok::Le: f.cmp = Comparator::Le; break;
      case Tok::Gt: f.cmp = Comparator::Gt; break;
      case Tok::Ge: f.cmp = Comparator::Ge; break;
      default:
        throw Error(Errc::MalformedQuery, "expected comparison operator in FILTER", at());
    }
    shift();
    if (tok_.kind == Tok::Var)
      throw Error(Errc::Unsupported, "variable operands in FILTER are not supported", at());
    f.operand = parse_ground_term();
    expect(Tok::RParen, "')'");
    return f;
  }

  Lexer lexer_;
  Token tok_;
  std::map<std::string, std::string> prefixes_;
};

}  // namespace detail

/// Parses the query text. `prefixes` provides ambient namespace bindings
/// (typically the store's); in-query PREFIX declarations override them.
inline SelectQuery parse_query(std::string_view text,
                               const std::map<std::string, std::string>& prefixes = {}) {
  detail::Parser parser(text, prefixes);
  return parser.parse();
}

}  // namespace testkg::query
