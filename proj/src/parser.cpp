#include "casimir/parser.hpp"

#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "casimir/algebra.hpp"
#include "casimir/base.hpp"
#include "casimir/poly.hpp"
#include "casimir/scalar_expr.hpp"

namespace casimir {

namespace {

struct Tok {
  enum Kind { Int, Ident, Punct, End };
  Kind kind;
  std::string text;
  int line, col;
};

bool ident_start(char c) { return std::isalpha((unsigned char)c) || c == '_'; }
bool ident_char(char c) { return std::isalnum((unsigned char)c) || c == '_'; }

std::vector<Tok> lex(const std::string& src, int line0) {
  std::vector<Tok> out;
  int line = line0, col = 1;
  size_t i = 0;
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++col;
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') {
        ++i;
        ++col;
      }
      continue;
    }
    int tc = col;
    if (std::isdigit((unsigned char)c)) {
      size_t j = i;
      while (j < src.size() && std::isdigit((unsigned char)src[j])) ++j;
      out.push_back({Tok::Int, src.substr(i, j - i), line, tc});
      col += (int)(j - i);
      i = j;
      continue;
    }
    if (ident_start(c)) {
      size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      out.push_back({Tok::Ident, src.substr(i, j - i), line, tc});
      col += (int)(j - i);
      i = j;
      continue;
    }
    if (c == '!') {
      if (i + 1 < src.size() && src[i + 1] == '=') {
        out.push_back({Tok::Punct, "!=", line, tc});
        i += 2;
        col += 2;
        continue;
      }
      throw ParseError("unexpected character '!'", line, tc);
    }
    static const std::string punct = "+-*/^()[],=>";
    if (punct.find(c) != std::string::npos) {
      out.push_back({Tok::Punct, std::string(1, c), line, tc});
      ++i;
      ++col;
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line, tc);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

Rational int_value(const Tok& t) { return Rational(t.text, 10); }

/// Recursive-descent expression parser over a lexed token stream.
/// Grammar (loosest to tightest): sum, product, unary minus, power, atom.
struct ExprParser {
  const std::vector<Tok>& ts;
  size_t pos;
  const std::vector<std::string>& params;
  int n;
  bool coords;  // whether e1..en / x1..xn are in scope

  const Tok& peek() const { return ts[pos]; }
  bool at_punct(const char* p) const {
    return peek().kind == Tok::Punct && peek().text == p;
  }
  Tok take() { return ts[pos++]; }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, peek().line, peek().col);
  }
  void expect_punct(const char* p, const std::string& what) {
    if (!at_punct(p)) fail(what);
    take();
  }

  SEp expr() {
    SEp a = term();
    while (at_punct("+") || at_punct("-")) {
      bool plus = take().text == "+";
      SEp b = term();
      a = plus ? se_add2(a, b) : se_sub(a, b);
    }
    return a;
  }

  SEp term() {
    SEp a = factor();
    while (at_punct("*") || at_punct("/")) {
      bool mul = take().text == "*";
      SEp b = factor();
      a = mul ? se_mul2(a, b) : se_div(a, b);
    }
    return a;
  }

  SEp factor() {
    if (at_punct("-")) {
      take();
      return se_neg(factor());
    }
    return power();
  }

  SEp power() {
    SEp base = atom();
    if (!at_punct("^")) return base;
    take();
    if (peek().kind == Tok::Int) return se_pow(base, int_value(take()));
    if (at_punct("-")) {
      take();
      if (peek().kind != Tok::Int) fail("expected an integer after '^-'");
      return se_pow(base, -int_value(take()));
    }
    if (at_punct("(")) {
      take();
      SEp e = expr();
      expect_punct(")", "expected ')'");
      // A constant exponent is an exact power; anything else is shorthand
      // for exp(<exponent>*ln(<base>)).
      if (e->kind == SK::Const) return se_pow(base, e->val);
      return se_exp(se_mul2(e, se_ln(base)));
    }
    fail("exponent must be an integer or a parenthesized expression");
  }

  SEp atom() {
    const Tok t = peek();
    if (t.kind == Tok::Int) {
      take();
      return se_const(int_value(t));
    }
    if (at_punct("(")) {
      take();
      SEp e = expr();
      expect_punct(")", "expected ')'");
      return e;
    }
    if (t.kind == Tok::Ident) {
      take();
      if (t.text == "exp" || t.text == "ln" || t.text == "atan" ||
          t.text == "arctan") {
        expect_punct("(", "expected '(' after function name");
        SEp arg = expr();
        expect_punct(")", "expected ')'");
        if (t.text == "exp") return se_exp(arg);
        if (t.text == "ln") return se_ln(arg);
        return se_atan(arg);
      }
      for (size_t i = 0; i < params.size(); ++i)
        if (params[i] == t.text) return se_param((int)i);
      if (coords && t.text.size() > 1 && (t.text[0] == 'e' || t.text[0] == 'x')) {
        bool digits = true;
        for (size_t i = 1; i < t.text.size(); ++i)
          if (!std::isdigit((unsigned char)t.text[i])) digits = false;
        if (digits && t.text.size() <= 8) {
          long k = std::stol(t.text.substr(1));
          if (k >= 1 && k <= n) return se_var((int)k - 1);
        }
      }
      throw UnknownSymbol(t.text, t.line, t.col);
    }
    fail("expected a number, name, or '('");
  }
};

std::string strip_comment(std::string line) {
  size_t h = line.find('#');
  if (h != std::string::npos) line.erase(h);
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ' ||
                           line.back() == '\t'))
    line.pop_back();
  return line;
}

bool reserved_name(const std::string& s) {
  if (s == "exp" || s == "ln" || s == "atan" || s == "arctan" ||
      s == "algebra" || s == "dim" || s == "params" || s == "assume")
    return true;
  size_t skip = 0;
  if (s.size() > 1 && (s[0] == 'e' || s[0] == 'x'))
    skip = 1;
  else if (s.size() > 2 && s[0] == 't' && s[1] == 'h')
    skip = 2;
  else
    return false;
  for (size_t i = skip; i < s.size(); ++i)
    if (!std::isdigit((unsigned char)s[i])) return false;
  return true;
}

bool valid_id(const std::string& s) {
  static const std::string extra = "._+()=-";
  for (char c : s)
    if (!std::isalnum((unsigned char)c) && extra.find(c) == std::string::npos)
      return false;
  return !s.empty();
}

long small_int(const Tok& t, int line, const std::string& what) {
  if (t.text.size() > 7) throw SemanticError(what + " out of range", line);
  return std::stol(t.text);
}

}  // namespace

StructureConstants parse_algebra_file(const std::string& text) {
  std::vector<std::string> lines;
  {
    size_t start = 0;
    while (start <= text.size()) {
      size_t nl = text.find('\n', start);
      if (nl == std::string::npos) {
        if (start < text.size()) lines.push_back(text.substr(start));
        break;
      }
      lines.push_back(text.substr(start, nl - start));
      start = nl + 1;
    }
  }

  std::string id;
  int n = 0;
  bool seen_algebra = false, seen_dim = false, seen_params = false;
  std::vector<std::string> params;
  std::optional<StructureConstants> sc;
  std::set<std::pair<int, int>> declared;
  std::vector<std::pair<int, Rational>> pins;

  auto ensure_sc = [&]() -> StructureConstants& {
    if (!sc) sc.emplace(id, n, params);
    return *sc;
  };

  for (int ln = 1; ln <= (int)lines.size(); ++ln) {
    std::string raw = strip_comment(lines[ln - 1]);
    size_t first = raw.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    int col1 = (int)first + 1;
    size_t wend = raw.find_first_of(" \t", first);
    std::string word =
        raw.substr(first, wend == std::string::npos ? std::string::npos
                                                    : wend - first);

    if (!seen_algebra) {
      if (word != "algebra")
        throw ParseError("expected `algebra <id>` on the first line", ln, col1);
      size_t rs = raw.find_first_not_of(" \t", first + 7);
      if (rs == std::string::npos)
        throw ParseError("expected an algebra id", ln, col1 + 7);
      std::string rest = raw.substr(rs);
      if (rest.find_first_of(" \t") != std::string::npos)
        throw ParseError("algebra id must be a single token", ln, (int)rs + 1);
      if (!valid_id(rest))
        throw ParseError("invalid character in algebra id", ln, (int)rs + 1);
      id = rest;
      seen_algebra = true;
      continue;
    }

    if (!seen_dim) {
      if (word != "dim")
        throw ParseError("expected `dim <n>` after the algebra id", ln, col1);
      auto ts = lex(raw, ln);
      if (ts[1].kind != Tok::Int)
        throw ParseError("expected an integer dimension", ln, ts[1].col);
      long v = small_int(ts[1], ln, "dimension");
      if (ts[2].kind != Tok::End)
        throw ParseError("unexpected input after the dimension", ln, ts[2].col);
      if (v < 1 || v > 1000)
        throw SemanticError("dimension must be between 1 and 1000", ln);
      n = (int)v;
      seen_dim = true;
      continue;
    }

    if (word == "algebra" || word == "dim")
      throw ParseError("duplicate `" + word + "` line", ln, col1);

    if (word == "params") {
      if (seen_params) throw SemanticError("duplicate `params` line", ln);
      if (sc)
        throw SemanticError("`params` must precede assume and bracket lines",
                            ln);
      auto ts = lex(raw, ln);
      size_t p = 1;
      if (ts[p].kind == Tok::End)
        throw ParseError("expected at least one parameter name", ln, ts[p].col);
      for (; ts[p].kind != Tok::End; ++p) {
        if (ts[p].kind != Tok::Ident)
          throw ParseError("expected a parameter name", ln, ts[p].col);
        const std::string& name = ts[p].text;
        if (reserved_name(name))
          throw SemanticError("parameter name '" + name + "' is reserved", ln);
        for (const auto& prev : params)
          if (prev == name)
            throw SemanticError("parameter '" + name + "' declared twice", ln);
        params.push_back(name);
      }
      seen_params = true;
      continue;
    }

    if (word == "assume") {
      StructureConstants& S = ensure_sc();
      auto ts = lex(raw, ln);
      ExprParser ep{ts, 1, params, n, false};
      SEp e;
      try {
        e = ep.expr();
      } catch (const UnknownSymbol& u) {
        throw SemanticError(
            std::string(u.what()) + " in assumption (parameters only)", ln);
      }
      if (!(ep.peek().kind == Tok::Punct &&
            (ep.peek().text == "!=" || ep.peek().text == "=" ||
             ep.peek().text == ">")))
        ep.fail("expected `!=`, `=`, or `>` after the assumption polynomial");
      std::string op = ep.take().text;
      if (!(ep.peek().kind == Tok::Int && ep.peek().text == "0"))
        ep.fail("assumptions compare against literal 0");
      ep.take();
      if (ep.peek().kind != Tok::End) ep.fail("unexpected input after `0`");

      if (op == "=") {
        std::set<int> used;
        se_leaf_indices(e, SK::Param, used);
        SEp d = used.size() == 1 ? se_diff(e, SK::Param, *used.begin())
                                 : nullptr;
        SEp c0 = used.size() == 1
                     ? se_subst(e, SK::Param, *used.begin(), se_int(0))
                     : nullptr;
        if (used.size() != 1 || d->kind != SK::Const || c0->kind != SK::Const)
          throw SemanticError(
              "`= 0` assumptions must be linear in a single parameter", ln);
        pins.emplace_back(*used.begin(), -c0->val / d->val);
      } else {
        auto rf = se_to_ratfunc(e, (int)params.size(), n);
        if (!rf || !rf->is_polynomial())
          throw SemanticError(
              "assumption must be a polynomial in the parameters", ln);
        Poly poly = rf->num() * (Rational(1) / rf->den().constant_value());
        S.assumptions().add(poly, op == ">" ? AssumeKind::Positive
                                            : AssumeKind::Nonzero);
      }
      continue;
    }

    if (raw[first] == '[') {
      StructureConstants& S = ensure_sc();
      auto ts = lex(raw, ln);
      size_t p = 0;
      auto expect = [&](const char* t, const std::string& what) {
        if (!(ts[p].kind == Tok::Punct && ts[p].text == t))
          throw ParseError(what, ln, ts[p].col);
        ++p;
      };
      auto index = [&]() {
        if (ts[p].kind != Tok::Int)
          throw ParseError("expected a basis index", ln, ts[p].col);
        return small_int(ts[p++], ln, "bracket index");
      };
      expect("[", "expected '['");
      long i1 = index();
      expect(",", "expected ','");
      long j1 = index();
      expect("]", "expected ']'");
      expect("=", "expected '=' after the bracket");
      if (i1 < 1 || i1 > n || j1 < 1 || j1 > n)
        throw SemanticError("bracket index out of range 1.." +
                                std::to_string(n),
                            ln);
      if (i1 == j1)
        throw SemanticError("diagonal bracket [i,i] is identically zero", ln);

      ExprParser ep{ts, p, params, n, true};
      SEp F;
      try {
        F = ep.expr();
      } catch (const UnknownSymbol& u) {
        throw SemanticError(std::string(u.what()) +
                                " (declare parameters with `params`)",
                            ln);
      }
      if (ep.peek().kind != Tok::End)
        ep.fail("unexpected input after the bracket right side");

      int i = (int)i1 - 1, j = (int)j1 - 1;
      bool flip = i > j;
      if (flip) std::swap(i, j);
      if (!declared.insert({i, j}).second)
        throw SemanticError("bracket [" + std::to_string(i + 1) + "," +
                                std::to_string(j + 1) + "] declared twice",
                            ln);

      int np = (int)params.size();
      std::vector<RatFunc> coeffs(n, RatFunc::zero(np + n));
      std::vector<SEp> rebuilt;
      bool any = false;
      for (int k = 0; k < n; ++k) {
        SEp ck = se_diff(F, SK::Var, k);
        if (se_uses(ck, SK::Var))
          throw SemanticError(
              "bracket right side must be linear in e1..e" + std::to_string(n),
              ln);
        if (se_is_zero(ck)) continue;
        auto rf = se_to_ratfunc(ck, np, n);
        if (!rf)
          throw SemanticError("coefficient of e" + std::to_string(k + 1) +
                                  " is not a rational function of the "
                                  "parameters",
                              ln);
        coeffs[k] = flip ? -*rf : *rf;
        rebuilt.push_back(se_mul2(ck, se_var(k)));
        any = true;
      }
      SEp linear_part = rebuilt.empty() ? se_int(0) : se_add(rebuilt);
      if (!se_is_zero(se_sub(F, linear_part)))
        throw SemanticError(
            "bracket right side must be a homogeneous linear combination of "
            "e1..e" +
                std::to_string(n),
            ln);
      if (any) S.set_bracket(i, j, coeffs);
      continue;
    }

    throw ParseError("expected `params`, `assume`, or a bracket line", ln,
                     col1);
  }

  if (!seen_algebra) throw ParseError("expected `algebra <id>`", 1, 1);
  if (!seen_dim)
    throw ParseError("missing `dim <n>` line", (int)lines.size() + 1, 1);
  ensure_sc();
  for (const auto& [pi, value] : pins) sc->substitute_param(pi, value);
  return std::move(*sc);
}

std::string serialize_algebra(const StructureConstants& sc) {
  int np = sc.nparams();
  NameCtx names{sc.param_names(), "e", "th", {}};
  std::string out = "algebra " + sc.id() + "\n";
  out += "dim " + std::to_string(sc.n()) + "\n";
  if (np > 0) {
    out += "params";
    for (const auto& name : sc.param_names()) out += " " + name;
    out += "\n";
  }
  for (const auto& a : sc.assumptions().items()) {
    out += "assume " + se_text(poly_to_se(a.poly, np), names);
    out += a.kind == AssumeKind::Nonzero
               ? " != 0"
               : (a.kind == AssumeKind::Positive ? " > 0" : " = 0");
    out += "\n";
  }
  for (const auto& [ij, coeffs] : sc.brackets()) {
    std::string rhs;
    for (int k = 0; k < sc.n(); ++k) {
      if (coeffs[k].is_zero()) continue;
      std::string t =
          se_text(se_mul2(ratfunc_to_se(coeffs[k], np), se_var(k)), names);
      if (rhs.empty())
        rhs = t;
      else if (t[0] == '-')
        rhs += " - " + t.substr(1);
      else
        rhs += " + " + t;
    }
    if (rhs.empty()) continue;
    out += "[" + std::to_string(ij.first + 1) + "," +
           std::to_string(ij.second + 1) + "] = " + rhs + "\n";
  }
  return out;
}

SEp parse_invariant_expr(const std::string& text, int n,
                         const std::vector<std::string>& params) {
  auto ts = lex(text, 1);
  ExprParser ep{ts, 0, params, n, true};
  SEp e = ep.expr();
  if (ep.peek().kind != Tok::End) ep.fail("unexpected input");
  return e;
}

}  // namespace casimir
