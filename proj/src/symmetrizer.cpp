#include "casimir/symmetrizer.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "casimir/base.hpp"

namespace casimir {

namespace {

// Splits a commutative scalar into its rational part and the remainder.
std::pair<Rational, SEp> coeff_split(const SEp& c) {
  if (c->kind == SK::Const) return {c->val, se_int(1)};
  if (c->kind == SK::Mul && c->ch[0]->kind == SK::Const) {
    std::vector<SEp> rest(c->ch.begin() + 1, c->ch.end());
    return {c->ch[0]->val, se_mul(std::move(rest))};
  }
  return {rat(1), c};
}

Rational factorial(size_t r) {
  Rational f(1);
  for (size_t i = 2; i <= r; ++i) f *= Rational(static_cast<long>(i));
  return f;
}

}  // namespace

NCPolynomial nc_make(std::vector<NCTerm> terms) {
  NCPolynomial p;
  for (auto& term : terms) {
    if (se_is_zero(term.coeff)) continue;
    bool merged = false;
    for (auto& have : p.terms) {
      if (have.word == term.word) {
        have.coeff = se_add2(have.coeff, term.coeff);
        merged = true;
        break;
      }
    }
    if (!merged) p.terms.push_back(std::move(term));
  }
  std::erase_if(p.terms, [](const NCTerm& t) { return se_is_zero(t.coeff); });
  return p;
}

NCPolynomial nc_add(const NCPolynomial& a, const NCPolynomial& b) {
  std::vector<NCTerm> all = a.terms;
  all.insert(all.end(), b.terms.begin(), b.terms.end());
  return nc_make(std::move(all));
}

NCPolynomial nc_scale(const SEp& c, const NCPolynomial& p) {
  std::vector<NCTerm> out;
  for (const auto& term : p.terms) out.push_back({se_mul2(c, term.coeff), term.word});
  return nc_make(std::move(out));
}

bool nc_equal(const NCPolynomial& a, const NCPolynomial& b) {
  return nc_add(a, nc_scale(se_int(-1), b)).zero();
}

SEp nc_collapse(const NCPolynomial& p) {
  std::vector<SEp> terms;
  for (const auto& term : p.terms) {
    std::vector<SEp> fs{term.coeff};
    for (int i : term.word) fs.push_back(se_var(i));
    terms.push_back(se_mul(std::move(fs)));
  }
  return se_add(std::move(terms));
}

NCPolynomial symmetrize_monomial(const std::vector<int>& word) {
  if (word.empty()) throw Error("cannot symmetrize an empty monomial");
  std::vector<int> w = word;
  std::sort(w.begin(), w.end());
  // Each distinct arrangement absorbs one copy of the word's letter
  // stabilizer, so it carries (product of letter multiplicities!)/r!.
  Rational stab(1);
  for (size_t i = 0; i < w.size();) {
    size_t j = i;
    while (j < w.size() && w[j] == w[i]) ++j;
    stab *= factorial(j - i);
    i = j;
  }
  Rational coeff = stab / factorial(w.size());
  std::vector<NCTerm> out;
  do {
    out.push_back({se_const(coeff), w});
  } while (std::next_permutation(w.begin(), w.end()));
  return nc_make(std::move(out));
}

NCPolynomial nc_symmetrize(const NCPolynomial& p) {
  NCPolynomial out;
  for (const auto& term : p.terms) {
    if (term.word.empty()) {
      out = nc_add(out, nc_make({term}));
      continue;
    }
    out = nc_add(out, nc_scale(term.coeff, symmetrize_monomial(term.word)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string word_str(const std::vector<int>& w, const NameCtx& names, bool latex) {
  std::string s;
  for (size_t i = 0; i < w.size();) {
    size_t j = i;
    while (j < w.size() && w[j] == w[i]) ++j;
    if (i && !latex) s += "*";
    if (latex)
      s += names.var_prefix + "_{" + std::to_string(w[i] + 1) + "}";
    else
      s += names.var_prefix + std::to_string(w[i] + 1);
    if (j - i > 1) {
      s += latex ? "^{" + std::to_string(j - i) + "}" : "^" + std::to_string(j - i);
    }
    i = j;
  }
  return s;
}

std::string nc_render(const NCPolynomial& p, const NameCtx& names, bool latex) {
  if (p.terms.empty()) return "0";

  // Group terms whose words are reorderings of one another and whose
  // coefficients agree; each group prints as one c*(w1 + ... + wk) piece.
  struct Group {
    std::vector<int> key;
    SEp coeff;
    std::vector<const std::vector<int>*> words;
  };
  std::vector<Group> groups;
  for (const auto& term : p.terms) {
    std::vector<int> key = term.word;
    std::sort(key.begin(), key.end());
    bool placed = false;
    for (auto& g : groups) {
      if (g.key == key && se_equal(g.coeff, term.coeff)) {
        g.words.push_back(&term.word);
        placed = true;
        break;
      }
    }
    if (!placed) groups.push_back({std::move(key), term.coeff, {&term.word}});
  }

  std::string out;
  bool first = true;
  for (const auto& g : groups) {
    auto [r, rest] = coeff_split(g.coeff);
    bool neg = r < 0;
    SEp mag = se_mul2(se_const(neg ? -r : r), rest);
    std::string coeff_txt;
    if (!se_is_one(mag)) {
      coeff_txt = latex ? se_latex(mag, names) : se_text(mag, names);
      if (mag->kind == SK::Add) coeff_txt = "(" + coeff_txt + ")";
    }
    std::string body;
    for (size_t i = 0; i < g.words.size(); ++i) {
      if (i) body += latex ? "+" : " + ";
      std::string ws = word_str(*g.words[i], names, latex);
      body += ws.empty() ? "1" : ws;
    }
    std::string piece;
    if (g.words.size() > 1) {
      // A lone unsigned unit group needs no parentheses of its own; the
      // printing context supplies them when it binds tighter than addition.
      if (groups.size() == 1 && coeff_txt.empty() && !neg) return body;
      body = "(" + body + ")";
      piece = coeff_txt.empty() ? body : coeff_txt + (latex ? "" : "*") + body;
    } else if (coeff_txt.empty()) {
      piece = body;
    } else if (body == "1") {
      piece = coeff_txt;
    } else {
      piece = coeff_txt + (latex ? "" : "*") + body;
    }
    if (first)
      out += (neg ? "-" : "") + piece;
    else
      out += (latex ? (neg ? "-" : "+") : (neg ? " - " : " + ")) + piece;
    first = false;
  }
  return out;
}

}  // namespace

std::string nc_text(const NCPolynomial& p, const NameCtx& names) {
  return nc_render(p, names, false);
}

std::string nc_latex(const NCPolynomial& p, const NameCtx& names) {
  return nc_render(p, names, true);
}

// ---------------------------------------------------------------------------
// Symmetrization of a full invariant expression

namespace {

// Does some monomial touch two or more distinct basis symbols?
bool has_mixed_monomial(const SEp& poly) {
  SEp ex = se_expand(poly);
  std::vector<SEp> terms = ex->kind == SK::Add ? ex->ch : std::vector<SEp>{ex};
  for (const auto& t : terms) {
    std::set<int> vars;
    se_leaf_indices(t, SK::Var, vars);
    if (vars.size() >= 2) return true;
  }
  return false;
}

// One expanded monomial: commutative scalar times a word of basis symbols.
NCTerm monomial_to_term(const SEp& t) {
  std::vector<SEp> factors = t->kind == SK::Mul ? t->ch : std::vector<SEp>{t};
  std::vector<SEp> coeff;
  std::vector<int> word;
  for (const auto& f : factors) {
    if (f->kind == SK::Var) {
      word.push_back(f->idx);
    } else if (f->kind == SK::Pow && f->ch[0]->kind == SK::Var) {
      long k = f->val.get_num().get_si();
      for (long i = 0; i < k; ++i) word.push_back(f->ch[0]->idx);
    } else {
      coeff.push_back(f);
    }
  }
  return {se_mul(std::move(coeff)), std::move(word)};
}

NCPolynomial poly_to_nc(const SEp& expanded) {
  std::vector<SEp> terms =
      expanded->kind == SK::Add ? expanded->ch : std::vector<SEp>{expanded};
  std::vector<NCTerm> out;
  for (const auto& t : terms) out.push_back(monomial_to_term(t));
  return nc_make(std::move(out));
}

struct SymBuilder {
  std::vector<SymBlock> blocks;

  SEp emit(const SEp& poly, bool formal) {
    blocks.push_back({poly, nc_symmetrize(poly_to_nc(se_expand(poly))), formal});
    return se_slot(static_cast<int>(blocks.size()) - 1);
  }

  SEp process(const SEp& e, bool formal) {
    if (se_is_polynomial(e))
      return has_mixed_monomial(e) ? emit(e, formal) : e;
    switch (e->kind) {
      case SK::Add: {
        std::vector<SEp> cs;
        for (const auto& c : e->ch) cs.push_back(process(c, formal));
        return se_add(std::move(cs));
      }
      case SK::Mul: {
        // The positive polynomial factors form one monomial block; negative
        // powers stay behind as a commutative denominator.
        std::vector<SEp> polys, out;
        for (const auto& f : e->ch) {
          if (se_is_polynomial(f))
            polys.push_back(f);
          else
            out.push_back(process_factor(f, formal));
        }
        if (!polys.empty()) {
          SEp prod = se_mul(std::move(polys));
          if (has_mixed_monomial(prod)) {
            out.push_back(emit(prod, formal));
          } else {
            std::vector<SEp> back =
                prod->kind == SK::Mul ? prod->ch : std::vector<SEp>{prod};
            out.insert(out.end(), back.begin(), back.end());
          }
        }
        return se_mul(std::move(out));
      }
      default:
        return process_factor(e, formal);
    }
  }

  SEp process_factor(const SEp& f, bool formal) {
    switch (f->kind) {
      case SK::Pow:
        // Negative powers are formal commutative denominators and are never
        // reordered; fractional powers make their base a formal argument.
        if (f->val < 0) return f;
        return se_pow(process(f->ch[0], formal || f->val.get_den() != 1), f->val);
      case SK::Exp:
        return se_exp(process(f->ch[0], true));
      case SK::Ln:
        return se_ln(process(f->ch[0], true));
      case SK::Atan:
        return se_atan(process(f->ch[0], true));
      case SK::Add:
      case SK::Mul:
        return process(f, formal);
      default:
        return f;
    }
  }
};

// The shared scalar of a single-orbit polynomial (every word a reordering
// of the same multiset, every coefficient equal); 1 otherwise. Pulling it
// out lets the orbit print with the scalar as an ordinary factor, as in
// (e2*e3 + e3*e2)/(2*e1).
Rational nc_content(const NCPolynomial& p) {
  if (p.terms.empty()) return rat(1);
  std::vector<int> key = p.terms[0].word;
  std::sort(key.begin(), key.end());
  for (const auto& term : p.terms) {
    std::vector<int> k = term.word;
    std::sort(k.begin(), k.end());
    if (k != key || !se_equal(term.coeff, p.terms[0].coeff)) return rat(1);
  }
  Rational r = coeff_split(p.terms[0].coeff).first;
  return r == 0 ? rat(1) : r;
}

}  // namespace

bool SymmetrizedInvariant::formal() const {
  return std::any_of(blocks.begin(), blocks.end(),
                     [](const SymBlock& b) { return b.formal; });
}

SymmetrizedInvariant symmetrize(const SEp& f) {
  if (se_uses(f, SK::Slot)) throw Error("expression already contains operator slots");
  SymBuilder b;
  SEp shape = b.process(f, false);
  return {shape, std::move(b.blocks)};
}

SEp sym_collapse(const SymmetrizedInvariant& s) {
  SEp e = s.shape;
  for (size_t k = 0; k < s.blocks.size(); ++k)
    e = se_subst(e, SK::Slot, static_cast<int>(k), s.blocks[k].source);
  return e;
}

namespace {

std::string sym_render(const SymmetrizedInvariant& s, NameCtx names, bool latex) {
  names.slot_text.assign(s.blocks.size(), "");
  SEp display = s.shape;
  for (size_t k = 0; k < s.blocks.size(); ++k) {
    // Pull the rational content out of the block so the slot body keeps
    // integer leading coefficients and the content prints as an ordinary
    // scalar factor, e.g. (e2*e3 + e3*e2)/(2*e1).
    Rational c = nc_content(s.blocks[k].sym);
    NCPolynomial body = nc_scale(se_const(Rational(1) / c), s.blocks[k].sym);
    names.slot_text[k] = nc_render(body, names, latex);
    int idx = static_cast<int>(k);
    display = se_subst(display, SK::Slot, idx,
                       se_mul2(se_const(c), se_slot(idx)));
  }
  return latex ? se_latex(display, names) : se_text(display, names);
}

}  // namespace

std::string sym_text(const SymmetrizedInvariant& s, NameCtx names) {
  return sym_render(s, std::move(names), false);
}

std::string sym_latex(const SymmetrizedInvariant& s, NameCtx names) {
  return sym_render(s, std::move(names), true);
}

}  // namespace casimir
