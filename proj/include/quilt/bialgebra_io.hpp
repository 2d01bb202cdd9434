/**
 * Strict reader for Lie bialgebra description files.
 *
 * The format is a small TOML-like dialect:
 *
 *     # the ax+b bialgebra
 *     dim = 2
 *     basis = ["x", "y"]
 *
 *     [bracket]
 *     "x,y" = "y"              # [x, y] = y
 *
 *     [cobracket]
 *     "y" = "x^y"              # δ(y) = x ∧ y
 *
 * Values are rational linear combinations: terms like `y`, `-2*x`, `1/2*x^y`,
 * joined by `+`/`-`; `0` denotes the zero combination.  Bracket values
 * combine basis labels; cobracket values combine wedges `a^b` (a reversed
 * wedge contributes with the opposite sign).  Omitted entries are zero.
 * Every violation is reported with its line and column.
 */
#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "quilt/error.hpp"
#include "quilt/liealg.hpp"
#include "quilt/rational.hpp"

namespace quilt {
namespace detail {

inline bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

struct Token {
  enum class Kind { number, ident, star, plus, minus, wedge, end };
  Kind kind = Kind::end;
  std::string text;
  int col = 0;  // 1-based column in the source line
};

/// Tokens of a combination string embedded in a line at the given column.
inline std::vector<Token> combination_tokens(const std::string& file, int line,
                                             const std::string& s, int col0) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    int col = col0 + static_cast<int>(i);
    if (c == ' ' || c == '\t') {
      ++i;
      continue;
    }
    if (c >= '0' && c <= '9') {
      std::size_t j = i;
      while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
      if (j < s.size() && s[j] == '/') {
        ++j;
        if (j >= s.size() || s[j] < '0' || s[j] > '9')
          throw ParseError(file, line, col0 + static_cast<int>(j),
                           "expected digits after '/' in a rational");
        while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
      }
      out.push_back({Token::Kind::number, s.substr(i, j - i), col});
      i = j;
    } else if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < s.size() && is_ident_char(s[j])) ++j;
      out.push_back({Token::Kind::ident, s.substr(i, j - i), col});
      i = j;
    } else if (c == '*') {
      out.push_back({Token::Kind::star, "*", col});
      ++i;
    } else if (c == '+') {
      out.push_back({Token::Kind::plus, "+", col});
      ++i;
    } else if (c == '-') {
      out.push_back({Token::Kind::minus, "-", col});
      ++i;
    } else if (c == '^') {
      out.push_back({Token::Kind::wedge, "^", col});
      ++i;
    } else {
      throw ParseError(file, line, col,
                       std::string("unexpected character '") + c + "' in a combination");
    }
  }
  out.push_back({Token::Kind::end, "", col0 + static_cast<int>(s.size())});
  return out;
}

struct ComboTerm {
  Rat coeff;
  int a = -1;  // basis index
  int b = -1;  // second index for wedges, -1 for plain terms
};

/// Parse `[sign] term {(+|-) term}` where term = [rat '*'] atom and atom is a
/// label (wedges=false) or label^label (wedges=true).  `0` alone is allowed.
inline std::vector<ComboTerm> parse_combination(const std::string& file, int line,
                                                const std::string& s, int col0,
                                                const LieAlgebra& basis_of, bool wedges) {
  std::vector<Token> toks = combination_tokens(file, line, s, col0);
  std::size_t p = 0;
  auto peek = [&]() -> const Token& { return toks[p]; };
  auto take = [&]() -> const Token& { return toks[p++]; };
  if (toks.size() == 2 && toks[0].kind == Token::Kind::number && toks[0].text == "0")
    return {};
  std::vector<ComboTerm> out;
  bool first = true;
  while (true) {
    Rat sign = 1;
    if (peek().kind == Token::Kind::plus || peek().kind == Token::Kind::minus) {
      sign = peek().kind == Token::Kind::minus ? -1 : 1;
      take();
    } else if (!first) {
      throw ParseError(file, line, peek().col, "expected '+' or '-' between terms");
    }
    first = false;
    Rat coeff = sign;
    if (peek().kind == Token::Kind::number) {
      coeff = sign * rat_from_string(take().text);
      if (peek().kind != Token::Kind::star)
        throw ParseError(file, line, peek().col, "expected '*' after a coefficient");
      take();
    }
    if (peek().kind != Token::Kind::ident)
      throw ParseError(file, line, peek().col, "expected a basis label");
    Token la = take();
    int ia;
    try {
      ia = basis_of.index_of(la.text);
    } catch (const Error&) {
      throw ParseError(file, line, la.col, "unknown basis label '" + la.text + "'");
    }
    ComboTerm t{coeff, ia, -1};
    if (wedges) {
      if (peek().kind != Token::Kind::wedge)
        throw ParseError(file, line, peek().col, "cobracket terms must be wedges a^b");
      take();
      if (peek().kind != Token::Kind::ident)
        throw ParseError(file, line, peek().col, "expected a basis label after '^'");
      Token lb = take();
      try {
        t.b = basis_of.index_of(lb.text);
      } catch (const Error&) {
        throw ParseError(file, line, lb.col, "unknown basis label '" + lb.text + "'");
      }
      if (t.b == t.a)
        throw ParseError(file, line, lb.col, "wedge of a label with itself is zero");
    } else if (peek().kind == Token::Kind::wedge) {
      throw ParseError(file, line, peek().col, "wedges are only allowed in the cobracket");
    }
    out.push_back(t);
    if (peek().kind == Token::Kind::end) break;
  }
  return out;
}

/// A quoted string starting at s[i] == '"'; returns (content, index past the
/// closing quote).  Escapes are not supported; labels and combinations never
/// need them.
inline std::pair<std::string, std::size_t> quoted(const std::string& file, int line,
                                                  const std::string& s, std::size_t i) {
  std::size_t j = s.find('"', i + 1);
  if (j == std::string::npos)
    throw ParseError(file, line, static_cast<int>(i) + 1, "unterminated string");
  return {s.substr(i + 1, j - i - 1), j + 1};
}

inline std::size_t skip_ws(const std::string& s, std::size_t i) {
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return i;
}

}  // namespace detail

/// Parse a bialgebra description.  Structural errors carry line/column; the
/// result is shape-validated but its Jacobi/cocycle conditions are not yet
/// checked (see validate_bialgebra).
inline LieBialgebra bialgebra_from_text(const std::string& text, const std::string& file) {
  using detail::quoted;
  using detail::skip_ws;
  enum class Section { top, bracket, cobracket };
  Section section = Section::top;
  bool seen_bracket = false, seen_cobracket = false;
  int dim = -1;
  std::vector<std::string> basis;
  // Raw entries, kept until the basis is known to exist.
  struct Entry {
    int line;
    std::string key, value;
    int key_col, value_col;
  };
  std::vector<Entry> bracket_entries, cobracket_entries;

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    // Strip comments (no escapes; '#' inside quotes stays).
    std::string s;
    bool quote = false;
    for (char c : raw) {
      if (c == '"') quote = !quote;
      if (c == '#' && !quote) break;
      s.push_back(c);
    }
    std::size_t i = skip_ws(s, 0);
    if (i == s.size()) continue;
    if (s[i] == '[') {
      std::size_t j = s.find(']', i);
      if (j == std::string::npos)
        throw ParseError(file, line, static_cast<int>(i) + 1, "unterminated section header");
      std::string name = s.substr(i + 1, j - i - 1);
      if (std::size_t g = skip_ws(s, j + 1); g != s.size())
        throw ParseError(file, line, static_cast<int>(g) + 1,
                         "unexpected text after a section header");
      if (name == "bracket") {
        if (seen_bracket)
          throw ParseError(file, line, static_cast<int>(i) + 1, "duplicate [bracket] section");
        seen_bracket = true;
        section = Section::bracket;
      } else if (name == "cobracket") {
        if (seen_cobracket)
          throw ParseError(file, line, static_cast<int>(i) + 1,
                           "duplicate [cobracket] section");
        seen_cobracket = true;
        section = Section::cobracket;
      } else {
        throw ParseError(file, line, static_cast<int>(i) + 1,
                         "unknown section '" + name + "' (expected bracket or cobracket)");
      }
      continue;
    }
    if (section == Section::top) {
      if (s[i] == '"')
        throw ParseError(file, line, static_cast<int>(i) + 1,
                         "entries must appear inside a [bracket] or [cobracket] section");
      // dim = N  |  basis = ["a", "b"]
      std::size_t j = i;
      while (j < s.size() && detail::is_ident_char(s[j])) ++j;
      std::string key = s.substr(i, j - i);
      std::size_t k = skip_ws(s, j);
      if (k >= s.size() || s[k] != '=')
        throw ParseError(file, line, static_cast<int>(k) + 1, "expected '='");
      k = skip_ws(s, k + 1);
      if (key == "dim") {
        if (dim >= 0) throw ParseError(file, line, static_cast<int>(i) + 1, "duplicate dim");
        std::size_t e = k;
        while (e < s.size() && s[e] >= '0' && s[e] <= '9') ++e;
        if (e == k || skip_ws(s, e) != s.size())
          throw ParseError(file, line, static_cast<int>(k) + 1,
                           "dim must be a nonnegative integer");
        dim = std::stoi(s.substr(k, e - k));
      } else if (key == "basis") {
        if (!basis.empty())
          throw ParseError(file, line, static_cast<int>(i) + 1, "duplicate basis");
        if (k >= s.size() || s[k] != '[')
          throw ParseError(file, line, static_cast<int>(k) + 1, "expected '['");
        std::size_t p = skip_ws(s, k + 1);
        bool closed = false;
        while (p < s.size()) {
          if (s[p] == ']') {
            closed = true;
            ++p;
            break;
          }
          if (s[p] != '"')
            throw ParseError(file, line, static_cast<int>(p) + 1, "expected a quoted label");
          auto [label, next] = quoted(file, line, s, p);
          if (label.empty() || !detail::is_ident_start(label[0]))
            throw ParseError(file, line, static_cast<int>(p) + 2,
                             "labels must start with a letter or underscore");
          for (char c : label)
            if (!detail::is_ident_char(c))
              throw ParseError(file, line, static_cast<int>(p) + 2,
                               "label '" + label + "' contains an invalid character");
          basis.push_back(label);
          p = skip_ws(s, next);
          if (p < s.size() && s[p] == ',') p = skip_ws(s, p + 1);
        }
        if (!closed)
          throw ParseError(file, line, static_cast<int>(k) + 1, "unterminated basis list");
        if (std::size_t g = skip_ws(s, p); g != s.size())
          throw ParseError(file, line, static_cast<int>(g) + 1,
                           "unexpected text after the basis list");
        if (basis.empty())
          throw ParseError(file, line, static_cast<int>(k) + 1, "basis must be nonempty");
      } else {
        throw ParseError(file, line, static_cast<int>(i) + 1,
                         "unknown key '" + key + "' (expected dim or basis)");
      }
      continue;
    }
    // Section body: "key" = "value"
    if (s[i] != '"')
      throw ParseError(file, line, static_cast<int>(i) + 1, "expected a quoted key");
    auto [key, after_key] = quoted(file, line, s, i);
    std::size_t eq = skip_ws(s, after_key);
    if (eq >= s.size() || s[eq] != '=')
      throw ParseError(file, line, static_cast<int>(eq) + 1, "expected '='");
    std::size_t vq = skip_ws(s, eq + 1);
    if (vq >= s.size() || s[vq] != '"')
      throw ParseError(file, line, static_cast<int>(vq) + 1, "expected a quoted value");
    auto [value, after_value] = quoted(file, line, s, vq);
    if (std::size_t g = skip_ws(s, after_value); g != s.size())
      throw ParseError(file, line, static_cast<int>(g) + 1,
                       "unexpected text after the value");
    Entry e{line, key, value, static_cast<int>(i) + 2, static_cast<int>(vq) + 2};
    (section == Section::bracket ? bracket_entries : cobracket_entries).push_back(e);
  }
  if (dim < 0) throw ParseError(file, line, 1, "missing dim");
  if (basis.empty()) throw ParseError(file, line, 1, "missing basis");
  if (static_cast<int>(basis.size()) != dim)
    throw ParseError(file, line, 1,
                     "basis has " + std::to_string(basis.size()) + " labels but dim = " +
                         std::to_string(dim));

  LieBialgebra b;
  b.h = abelian_lie_algebra(basis);
  validate_lie_algebra(b.h);  // catches duplicate labels
  b.d.assign(dim, {});
  std::vector<std::vector<bool>> have(dim, std::vector<bool>(dim, false));
  for (const auto& e : bracket_entries) {
    std::size_t comma = e.key.find(',');
    if (comma == std::string::npos)
      throw ParseError(file, e.line, e.key_col, "bracket keys look like \"a,b\"");
    auto trim = [](std::string t) {
      std::size_t b0 = t.find_first_not_of(" \t");
      std::size_t b1 = t.find_last_not_of(" \t");
      return b0 == std::string::npos ? std::string() : t.substr(b0, b1 - b0 + 1);
    };
    std::string la = trim(e.key.substr(0, comma));
    std::string lb = trim(e.key.substr(comma + 1));
    int ia, ib;
    try {
      ia = b.h.index_of(la);
      ib = b.h.index_of(lb);
    } catch (const Error&) {
      throw ParseError(file, e.line, e.key_col, "unknown basis label in key '" + e.key + "'");
    }
    if (ia == ib)
      throw ParseError(file, e.line, e.key_col, "bracket of a label with itself is zero");
    if (have[ia][ib])
      throw ParseError(file, e.line, e.key_col,
                       "bracket (" + la + ", " + lb + ") given twice (possibly reversed)");
    have[ia][ib] = have[ib][ia] = true;
    SparseVec v;
    for (const auto& t :
         detail::parse_combination(file, e.line, e.value, e.value_col, b.h, false))
      v[t.a] += t.coeff;
    for (auto it = v.begin(); it != v.end();)
      it = it->second == 0 ? v.erase(it) : std::next(it);
    b.h.c[ia][ib] = v;
    b.h.c[ib][ia] = scaled(v, Rat(-1));
  }
  std::vector<bool> have_d(dim, false);
  for (const auto& e : cobracket_entries) {
    int ii;
    try {
      ii = b.h.index_of(e.key);
    } catch (const Error&) {
      throw ParseError(file, e.line, e.key_col, "unknown basis label '" + e.key + "'");
    }
    if (have_d[ii])
      throw ParseError(file, e.line, e.key_col, "cobracket of '" + e.key + "' given twice");
    have_d[ii] = true;
    for (const auto& t :
         detail::parse_combination(file, e.line, e.value, e.value_col, b.h, true)) {
      int j = t.a, k = t.b;
      Rat cc = t.coeff;
      if (j > k) {
        std::swap(j, k);
        cc = -cc;
      }
      b.d[ii][{j, k}] += cc;
    }
    for (auto it = b.d[ii].begin(); it != b.d[ii].end();)
      it = it->second == 0 ? b.d[ii].erase(it) : std::next(it);
  }
  validate_bialgebra_shape(b);
  return b;
}

/// Semantic validation: Jacobi for the bracket, then the cocycle condition
/// through the double.
inline void validate_bialgebra(const LieBialgebra& b) {
  validate_bialgebra_shape(b);
  if (auto w = check_jacobi(b.h))
    throw Error(ErrorKind::verification,
                "bracket violates Jacobi at (" + b.h.basis[w->i] + ", " + b.h.basis[w->j] +
                    ", " + b.h.basis[w->k] + ")");
  drinfeld_double(b);  // throws on a cocycle violation
}

inline LieBialgebra load_bialgebra(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io_parse, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  LieBialgebra b = bialgebra_from_text(buf.str(), path);
  validate_bialgebra(b);
  return b;
}

}  // namespace quilt
