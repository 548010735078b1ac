#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "testkg/errors.hpp"
#include "testkg/rdf.hpp"

// Reader and writer for the Turtle subset used by the annotation documents:
// @prefix/@base, prefixed names, <IRI>s, the `a` keyword, quoted literals
// with ^^datatype or @lang, integer/decimal/double/boolean shorthands,
// `;`/`,` lists, labeled and anonymous blank nodes. Collections and quoted
// triples are rejected as unsupported.

namespace testkg::turtle {

using rdf::Graph;
using rdf::Term;
using rdf::Triple;

struct Diagnostic {
  int line = 1;
  int column = 1;
  std::string message;
};

struct TurtleDocument {
  std::string source_text;
  Graph graph;
  std::vector<Diagnostic> diagnostics;

  bool ok() const noexcept { return diagnostics.empty(); }
};

namespace detail {

enum class Tok {
  End,
  Dot,
  Semicolon,
  Comma,
  LBracket,
  RBracket,
  LParen,
  PrefixDecl,
  BaseDecl,
  IriRef,
  PName,   // text = prefix label, aux = local part
  Blank,   // text = label
  String,  // text = unescaped value
  Integer,
  Decimal,
  Double,
  Boolean,
  KeywordA,
  DCaret,
  LangTag,
};

struct Token {
  Tok kind;
  std::string text;
  std::string aux;
  int line = 1;
  int column = 1;
};

inline void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp <= 0x7f) {
    out.push_back(static_cast<char>(cp));
  } else if (cp <= 0x7ff) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp <= 0xffff) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {
    // Tolerate a UTF-8 byte-order mark on input.
    if (text_.size() >= 3 && static_cast<unsigned char>(text_[0]) == 0xef &&
        static_cast<unsigned char>(text_[1]) == 0xbb &&
        static_cast<unsigned char>(text_[2]) == 0xbf)
      pos_ = 3;
  }

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_ws_and_comments();
      Token t = next();
      bool end = t.kind == Tok::End;
      out.push_back(std::move(t));
      if (end) break;
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, int line, int col, Errc code = Errc::SyntaxError) {
    throw Error(code, msg, Position{line, col});
  }

  bool eof() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }
  char advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_ws_and_comments() {
    while (!eof()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (!eof() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }

  static bool name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  }
  static bool local_body(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  }

  Token tok(Tok kind, std::string text = {}, std::string aux = {}) {
    return Token{kind, std::move(text), std::move(aux), tok_line_, tok_col_};
  }

  Token next() {
    tok_line_ = line_;
    tok_col_ = col_;
    if (eof()) return tok(Tok::End);
    char c = peek();

    switch (c) {
      case '.':
        if (std::isdigit(static_cast<unsigned char>(peek(1)))) return lex_number();
        advance();
        return tok(Tok::Dot);
      case ';': advance(); return tok(Tok::Semicolon);
      case ',': advance(); return tok(Tok::Comma);
      case '[': advance(); return tok(Tok::LBracket);
      case ']': advance(); return tok(Tok::RBracket);
      case '(': advance(); return tok(Tok::LParen);
      case ')':
        fail("unexpected ')'", tok_line_, tok_col_);
      case '<':
        if (peek(1) == '<')
          fail("quoted triples are not supported", tok_line_, tok_col_, Errc::Unsupported);
        return lex_iriref();
      case '"': return lex_string();
      case '@': return lex_at();
      case '^':
        advance();
        if (peek() != '^') fail("expected '^^'", tok_line_, tok_col_);
        advance();
        return tok(Tok::DCaret);
      case '_':
        if (peek(1) == ':') return lex_blank();
        break;
      default: break;
    }

    if (c == '+' || c == '-' || std::isdigit(static_cast<unsigned char>(c))) return lex_number();
    if (name_start(c) || c == ':') return lex_word();
    fail(std::string("unexpected character '") + c + "'", tok_line_, tok_col_);
  }

  Token lex_iriref() {
    advance();  // '<'
    std::string value;
    while (!eof() && peek() != '>') {
      char c = advance();
      if (c == '\\') {
        char e = eof() ? '\0' : advance();
        if (e == 'u' || e == 'U') {
          value += decode_ucs(e == 'u' ? 4 : 8);
        } else {
          fail("invalid escape in IRI", tok_line_, tok_col_);
        }
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r')
        fail("whitespace inside IRI reference", tok_line_, tok_col_);
      value.push_back(c);
    }
    if (eof()) fail("unterminated IRI reference", tok_line_, tok_col_);
    advance();  // '>'
    return tok(Tok::IriRef, std::move(value));
  }

  std::string decode_ucs(int digits) {
    std::uint32_t cp = 0;
    for (int i = 0; i < digits; ++i) {
      if (eof()) fail("truncated \\u escape", tok_line_, tok_col_);
      char h = advance();
      cp <<= 4;
      if (h >= '0' && h <= '9')
        cp |= static_cast<std::uint32_t>(h - '0');
      else if (h >= 'a' && h <= 'f')
        cp |= static_cast<std::uint32_t>(h - 'a' + 10);
      else if (h >= 'A' && h <= 'F')
        cp |= static_cast<std::uint32_t>(h - 'A' + 10);
      else
        fail("invalid hex digit in \\u escape", tok_line_, tok_col_);
    }
    std::string out;
    append_utf8(out, cp);
    return out;
  }

  Token lex_string() {
    advance();  // opening quote
    if (peek() == '"' && peek(1) == '"')
      fail("long string literals are not supported", tok_line_, tok_col_, Errc::Unsupported);
    std::string value;
    for (;;) {
      if (eof()) fail("unterminated string literal", tok_line_, tok_col_);
      char c = advance();
      if (c == '"') break;
      if (c == '\n') fail("newline inside string literal", tok_line_, tok_col_);
      if (c == '\\') {
        if (eof()) fail("unterminated escape", tok_line_, tok_col_);
        char e = advance();
        switch (e) {
          case 't': value.push_back('\t'); break;
          case 'b': value.push_back('\b'); break;
          case 'n': value.push_back('\n'); break;
          case 'r': value.push_back('\r'); break;
          case 'f': value.push_back('\f'); break;
          case '"': value.push_back('"'); break;
          case '\'': value.push_back('\''); break;
          case '\\': value.push_back('\\'); break;
          case 'u': value += decode_ucs(4); break;
          case 'U': value += decode_ucs(8); break;
          default: fail(std::string("unknown escape '\\") + e + "'", tok_line_, tok_col_);
        }
        continue;
      }
      value.push_back(c);
    }
    return tok(Tok::String, std::move(value));
  }

  Token lex_at() {
    advance();  // '@'
    std::string word;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-'))
      word.push_back(advance());
    if (word == "prefix") return tok(Tok::PrefixDecl);
    if (word == "base") return tok(Tok::BaseDecl);
    if (rdf::detail::valid_language_tag(word)) return tok(Tok::LangTag, std::move(word));
    fail("invalid language tag or directive '@" + word + "'", tok_line_, tok_col_);
  }

  Token lex_blank() {
    advance();  // '_'
    advance();  // ':'
    std::string label;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
      label.push_back(advance());
    if (label.empty()) fail("empty blank node label", tok_line_, tok_col_);
    return tok(Tok::Blank, std::move(label));
  }

  Token lex_number() {
    std::string text;
    if (peek() == '+' || peek() == '-') text.push_back(advance());
    bool digits_before = false, has_dot = false, has_exp = false;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      text.push_back(advance());
      digits_before = true;
    }
    // A dot is part of the number only when digits follow; otherwise it is
    // the statement terminator ("1." is the integer 1 followed by ".").
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      has_dot = true;
      text.push_back(advance());
      while (std::isdigit(static_cast<unsigned char>(peek()))) text.push_back(advance());
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (std::isdigit(static_cast<unsigned char>(peek(1))) ||
         ((peek(1) == '+' || peek(1) == '-') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
      has_exp = true;
      text.push_back(advance());
      if (peek() == '+' || peek() == '-') text.push_back(advance());
      while (std::isdigit(static_cast<unsigned char>(peek()))) text.push_back(advance());
    }
    if (!digits_before && !has_dot) fail("malformed number", tok_line_, tok_col_);
    if (has_exp) return tok(Tok::Double, std::move(text));
    if (has_dot) return tok(Tok::Decimal, std::move(text));
    return tok(Tok::Integer, std::move(text));
  }

  // Bare words: the `a` keyword, booleans, and prefixed names.
  Token lex_word() {
    std::string word;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                      peek() == '-' || peek() == '.')) {
      if (peek() == '.' && !local_body(peek(1))) break;  // trailing dot terminates
      word.push_back(advance());
    }
    if (peek() == ':') {
      advance();
      std::string local;
      while (!eof() && local_body(peek())) {
        if (peek() == '.' && !local_body(peek(1))) break;
        local.push_back(advance());
      }
      return tok(Tok::PName, std::move(word), std::move(local));
    }
    if (word == "a") return tok(Tok::KeywordA);
    if (word == "true" || word == "false") return tok(Tok::Boolean, std::move(word));
    fail("unexpected token '" + word + "'", tok_line_, tok_col_);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  int tok_line_ = 1, tok_col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {
    for (const auto& t : tokens_)
      if (t.kind == Tok::Blank) used_labels_.insert(t.text);
  }

  Graph run() {
    while (!at(Tok::End)) {
      if (at(Tok::PrefixDecl)) {
        parse_prefix();
      } else if (at(Tok::BaseDecl)) {
        parse_base();
      } else {
        parse_statement();
      }
    }
    return std::move(graph_);
  }

 private:
  const Token& cur() const { return tokens_[idx_]; }
  bool at(Tok k) const { return cur().kind == k; }
  Position pos() const { return Position{cur().line, cur().column}; }
  const Token& take() { return tokens_[idx_++]; }

  [[noreturn]] void fail(const std::string& msg, Errc code = Errc::SyntaxError) {
    throw Error(code, msg, pos());
  }

  void expect(Tok k, const char* what) {
    if (!at(k)) fail(std::string("expected ") + what);
    take();
  }

  void parse_prefix() {
    take();  // @prefix
    if (!at(Tok::PName) || !cur().aux.empty()) fail("expected prefix label ending in ':'");
    std::string label = take().text;
    if (!at(Tok::IriRef)) fail("expected namespace IRI");
    std::string iri = resolve_iri(take());
    graph_.add_prefix(label, iri);
    expect(Tok::Dot, "'.' after @prefix directive");
  }

  void parse_base() {
    take();  // @base
    if (!at(Tok::IriRef)) fail("expected base IRI");
    base_ = resolve_iri(take());
    expect(Tok::Dot, "'.' after @base directive");
  }

  std::string resolve_iri(const Token& t) {
    std::string text = t.text;
    // Minimal base resolution: a reference without a scheme is appended to
    // the current base. Our own serializer only ever emits absolute IRIs.
    if (!rdf::detail::valid_iri(text) && !base_.empty()) text = base_ + text;
    try {
      rdf::make_iri(text);
    } catch (const Error& e) {
      throw Error(Errc::SyntaxError, e.what(), Position{t.line, t.column});
    }
    return text;
  }

  Term parse_iri_term(const Token& t) {
    if (t.kind == Tok::IriRef) return rdf::make_iri(resolve_iri(t));
    // PName
    auto it = graph_.prefixes().find(t.text);
    if (it == graph_.prefixes().end())
      throw Error(Errc::UnknownPrefix, "prefix not registered: '" + t.text + "'",
                  Position{t.line, t.column});
    std::string iri = it->second + t.aux;
    try {
      return rdf::make_iri(iri);
    } catch (const Error& e) {
      throw Error(Errc::SyntaxError, e.what(), Position{t.line, t.column});
    }
  }

  Term fresh_blank() {
    for (;;) {
      std::string label = "anon" + std::to_string(next_anon_++);
      if (!used_labels_.count(label)) return rdf::make_blank(label);
    }
  }

  void parse_statement() {
    if (at(Tok::LBracket)) {
      // `[ p o ] .` is a complete statement; more predicates may follow.
      Term node = parse_blank_property_list();
      if (!at(Tok::Dot)) parse_predicate_object_list(node);
      expect(Tok::Dot, "'.' at end of statement");
      return;
    }
    Term subject = parse_subject();
    parse_predicate_object_list(subject);
    expect(Tok::Dot, "'.' at end of statement");
  }

  Term parse_subject() {
    if (at(Tok::IriRef) || at(Tok::PName)) return parse_iri_term(take());
    if (at(Tok::Blank)) return rdf::make_blank(take().text);
    if (at(Tok::LBracket)) return parse_blank_property_list();
    if (at(Tok::LParen)) fail("collections are not supported", Errc::Unsupported);
    fail("expected subject (IRI or blank node)");
  }

  Term parse_blank_property_list() {
    take();  // '['
    Term node = fresh_blank();
    if (!at(Tok::RBracket)) parse_predicate_object_list(node);
    expect(Tok::RBracket, "']'");
    return node;
  }

  void parse_predicate_object_list(const Term& subject) {
    for (;;) {
      Term predicate = parse_verb();
      for (;;) {
        Term object = parse_object();
        graph_.insert(subject, predicate, object);
        if (!at(Tok::Comma)) break;
        take();
      }
      if (!at(Tok::Semicolon)) break;
      while (at(Tok::Semicolon)) take();
      if (at(Tok::Dot) || at(Tok::RBracket)) break;  // trailing ';'
    }
  }

  Term parse_verb() {
    if (at(Tok::KeywordA)) {
      take();
      return rdf::make_iri(rdf::rdf_type);
    }
    if (at(Tok::IriRef) || at(Tok::PName)) return parse_iri_term(take());
    fail("expected predicate (IRI or 'a')");
  }

  Term parse_object() {
    switch (cur().kind) {
      case Tok::IriRef:
      case Tok::PName:
        return parse_iri_term(take());
      case Tok::Blank:
        return rdf::make_blank(take().text);
      case Tok::LBracket:
        return parse_blank_property_list();
      case Tok::LParen:
        fail("collections are not supported", Errc::Unsupported);
      case Tok::String: {
        std::string lexical = take().text;
        if (at(Tok::DCaret)) {
          take();
          if (!at(Tok::IriRef) && !at(Tok::PName)) fail("expected datatype IRI after '^^'");
          Term dt = parse_iri_term(take());
          return rdf::make_literal(lexical, dt.value);
        }
        if (at(Tok::LangTag)) return rdf::make_lang_literal(lexical, take().text);
        return rdf::make_literal(lexical);
      }
      case Tok::Integer:
        return rdf::make_literal(take().text, rdf::xsd::integer_);
      case Tok::Decimal:
        return rdf::make_literal(take().text, rdf::xsd::decimal_);
      case Tok::Double:
        return rdf::make_literal(take().text, rdf::xsd::double_);
      case Tok::Boolean:
        return rdf::make_literal(take().text, rdf::xsd::boolean_);
      default:
        fail("expected object term");
    }
  }

  std::vector<Token> tokens_;
  std::size_t idx_ = 0;
  Graph graph_;
  std::string base_;
  std::set<std::string> used_labels_;
  int next_anon_ = 0;
};

}  // namespace detail

/// Parses a Turtle document; throws Error (SyntaxError/UnknownPrefix/
/// Unsupported) with a 1-based line/column position on failure.
inline Graph parse_turtle(std::string_view text) {
  detail::Lexer lexer(text);
  detail::Parser parser(lexer.run());
  return parser.run();
}

/// Non-throwing wrapper that captures the failure as a diagnostic.
inline TurtleDocument parse_turtle_document(std::string_view text) {
  TurtleDocument doc;
  doc.source_text = std::string(text);
  try {
    doc.graph = parse_turtle(text);
  } catch (const Error& e) {
    Diagnostic d;
    d.message = e.what();
    if (e.position()) {
      d.line = e.position()->line;
      d.column = e.position()->column;
    }
    doc.diagnostics.push_back(std::move(d));
  }
  return doc;
}

namespace detail {

inline std::string escape_literal(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (rdf::detail::is_control(c)) {
          static const char* hex = "0123456789ABCDEF";
          unsigned char u = static_cast<unsigned char>(c);
          out += "\\u00";
          out.push_back(hex[u >> 4]);
          out.push_back(hex[u & 0xf]);
        } else {
          out.push_back(c);
        }
    }
  }
  return out;
}

inline std::string serialize_iri(const Graph& g, std::string_view iri) {
  if (auto short_form = g.shrink(iri)) return *short_form;
  return "<" + std::string(iri) + ">";
}

inline std::string serialize_term(const Graph& g, const Term& t) {
  switch (t.kind) {
    case rdf::TermKind::Iri:
      return serialize_iri(g, t.value);
    case rdf::TermKind::Blank:
      return "_:" + t.value;
    case rdf::TermKind::Literal: {
      std::string out = "\"" + escape_literal(t.value) + "\"";
      if (!t.lang.empty()) return out + "@" + t.lang;
      if (t.datatype != rdf::xsd::string_) out += "^^" + serialize_iri(g, t.datatype);
      return out;
    }
  }
  return {};
}

}  // namespace detail

/// Deterministic writer: prefixes sorted by label, one block per subject
/// (sorted by serialized form), predicates grouped with ';', objects with
/// ','. Never invents prefixes and never emits @base. Output is byte-stable
/// for a given graph.
inline std::string serialize_turtle(const Graph& g) {
  std::ostringstream out;
  for (const auto& [label, iri] : g.prefixes())
    out << "@prefix " << label << ": <" << iri << "> .\n";

  // subject -> predicate -> objects, all keyed by serialized form
  std::map<std::string, std::map<std::string, std::set<std::string>>> blocks;
  for (const auto& t : g.triples()) {
    std::string pred = t.predicate.value == rdf::rdf_type
                           ? "a"
                           : detail::serialize_term(g, t.predicate);
    blocks[detail::serialize_term(g, t.subject)][pred].insert(
        detail::serialize_term(g, t.object));
  }

  if (!g.prefixes().empty() && !blocks.empty()) out << "\n";

  for (const auto& [subject, preds] : blocks) {
    out << subject;
    bool first_pred = true;
    for (const auto& [pred, objects] : preds) {
      out << (first_pred ? " " : " ;\n    ") << pred << " ";
      first_pred = false;
      bool first_obj = true;
      for (const auto& obj : objects) {
        if (!first_obj) out << ", ";
        first_obj = false;
        out << obj;
      }
    }
    out << " .\n";
  }
  return out.str();
}

}  // namespace testkg::turtle
