#include "casimir/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "casimir/parser.hpp"

namespace casimir {

namespace {

std::string lower(std::string s) {
  for (char& c : s)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

Rational parse_rational(const std::string& text, const std::string& where) {
  try {
    Rational q(trim(text), 10);
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    throw Error("bad rational '" + trim(text) + "' in " + where);
  }
}

int param_index(const StructureConstants& sc, const std::string& name,
                const std::string& where) {
  const auto& names = sc.param_names();
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end())
    throw Error("unknown parameter '" + name + "' in " + where);
  return static_cast<int>(it - names.begin());
}

/// Parses the `#! key value` metadata lines of one catalog file. The body
/// lines were already consumed by parse_algebra_file (which sees the
/// directives as ordinary comments).
AlgebraEntry parse_entry(const std::string& text) {
  AlgebraEntry e;
  e.sc = parse_algebra_file(text);
  e.id = e.sc.id();

  auto current = [&]() -> EntryBranch& {
    if (e.branches.empty()) e.branches.emplace_back();
    return e.branches.back();
  };
  auto last_invariant = [&](const std::string& key) -> CatalogInvariant& {
    if (e.branches.empty() || e.branches.back().invariants.empty())
      throw Error("'" + key + "' directive with no preceding invariant in '" +
                  e.id + "'");
    return e.branches.back().invariants.back();
  };

  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    line = trim(line);
    if (line.rfind("#!", 0) != 0) continue;
    std::string rest = trim(line.substr(2));
    size_t sp = rest.find(' ');
    std::string key = rest.substr(0, sp);
    std::string value = sp == std::string::npos ? "" : trim(rest.substr(sp));
    if (key == "provenance") {
      auto p = provenance_from_name(value);
      if (!p) throw Error("unknown provenance '" + value + "' in '" + e.id + "'");
      e.provenance = *p;
    } else if (key == "note") {
      e.notes.push_back(value);
    } else if (key == "branch") {
      size_t eq = value.find('=');
      if (eq == std::string::npos)
        throw Error("branch directive needs '<param> = <value>' in '" + e.id + "'");
      std::string name = trim(value.substr(0, eq));
      Rational v = parse_rational(value.substr(eq + 1), "'" + e.id + "'");
      param_index(e.sc, name, "'" + e.id + "'");  // validate early
      EntryBranch br;
      br.pin = {name, v};
      br.condition = name + " = " + rat_str(v);
      e.branches.push_back(std::move(br));
    } else if (key == "na") {
      current().n_a = std::stoi(value);
    } else if (key == "invariant") {
      CatalogInvariant inv;
      inv.expr = parse_invariant_expr(value, e.sc.n(), e.sc.param_names());
      current().invariants.push_back(std::move(inv));
    } else if (key == "sym") {
      last_invariant(key).sym = value;
    } else if (key == "variant") {
      last_invariant(key).variants.push_back(value);
    } else if (key == "finding") {
      current().findings.push_back(value);
    } else {
      throw Error("unknown catalog directive '" + key + "' in '" + e.id + "'");
    }
  }
  if (e.branches.empty())
    throw Error("catalog entry '" + e.id + "' declares no invariant count");
  if (e.branches.front().pin)
    throw Error("catalog entry '" + e.id + "' has no generic branch");
  return e;
}

}  // namespace

std::string provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Table1:
      return "table1";
    case Provenance::Table2:
      return "table2";
    case Provenance::Example:
      return "example";
    case Provenance::Generated:
      return "generated";
  }
  throw Error("bad provenance value");
}

std::optional<Provenance> provenance_from_name(const std::string& name) {
  if (name == "table1") return Provenance::Table1;
  if (name == "table2") return Provenance::Table2;
  if (name == "example") return Provenance::Example;
  if (name == "generated") return Provenance::Generated;
  return std::nullopt;
}

std::vector<SEp> AlgebraEntry::invariant_exprs(int branch) const {
  std::vector<SEp> out;
  for (const auto& inv : branches.at(branch).invariants) out.push_back(inv.expr);
  return out;
}

StructureConstants AlgebraEntry::branch_sc(int branch) const {
  StructureConstants out = sc;
  const auto& br = branches.at(branch);
  if (br.pin)
    out.substitute_param(param_index(out, br.pin->first, "'" + id + "'"),
                         br.pin->second);
  return out;
}

std::string catalog_dir() {
  if (const char* env = std::getenv("CASIMIR_CATALOG_DIR"); env && *env)
    return env;
  return CASIMIR_CATALOG_DIR;
}

std::vector<std::string> catalog_ids() {
  std::istringstream in(read_file(catalog_dir() + "/index.txt"));
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

AlgebraEntry load_entry(const std::string& id) {
  std::string want = lower(trim(id));
  for (const auto& known : catalog_ids()) {
    if (lower(known) != want) continue;
    AlgebraEntry e = parse_entry(read_file(catalog_dir() + "/" + lower(known) + ".alg"));
    if (e.id != known)
      throw Error("catalog file for '" + known + "' declares id '" + e.id + "'");
    return e;
  }
  throw UnknownId(id);
}

std::vector<std::string> list_entries(const EntryFilter& filter) {
  std::vector<std::string> out;
  for (const auto& id : catalog_ids()) {
    AlgebraEntry e = load_entry(id);
    if (filter.dimension && e.sc.n() != *filter.dimension) continue;
    if (filter.provenance && e.provenance != *filter.provenance) continue;
    out.push_back(id);
  }
  return out;
}

AlgebraEntry generate_n_n1(int n) {
  if (n < 3) throw Error("n_{n,1} needs n >= 3");
  StructureConstants sc("n" + std::to_string(n) + ".1", n);
  for (int j = 2; j <= n - 1; ++j) {
    std::vector<RatFunc> coeffs(n, RatFunc::zero(n));
    coeffs[j - 2] = RatFunc::constant(n, 1);
    sc.set_bracket(j - 1, n - 1, std::move(coeffs));
  }

  AlgebraEntry e;
  e.id = sc.id();
  e.provenance = Provenance::Generated;
  e.sc = std::move(sc);

  EntryBranch br;
  br.n_a = n - 2;
  br.invariants.push_back({se_var(0), "", {}});
  // For each degree k, the terms e1^(j-2) e2^(k-j) e_j merge at j = 1
  // (where the e1 factors cancel) and j = 2 into plain powers of e2, so
  // every invariant is polynomial.
  for (int k = 3; k <= n - 1; ++k) {
    std::vector<SEp> terms;
    for (int j = 1; j <= k; ++j) {
      Rational fact = 1;
      for (int m = 2; m <= k - j; ++m) fact *= m;
      Rational c = ((k - j) % 2 ? -1 : 1) / fact;
      std::vector<SEp> f{se_const(c)};
      if (j <= 2) {
        f.push_back(se_pow(se_var(1), k - 1));
      } else {
        if (j > 3) f.push_back(se_pow(se_var(0), j - 2));
        if (j == 3) f.push_back(se_var(0));
        if (k - j > 0) f.push_back(se_pow(se_var(1), k - j));
        f.push_back(se_var(j - 1));
      }
      terms.push_back(se_mul(std::move(f)));
    }
    br.invariants.push_back({se_add(std::move(terms)), "", {}});
  }
  e.branches.push_back(std::move(br));
  return e;
}

std::string serialize_entry(const AlgebraEntry& e) {
  std::ostringstream out;
  out << serialize_algebra(e.sc);
  out << "#! provenance " << provenance_name(e.provenance) << "\n";
  for (const auto& n : e.notes) out << "#! note " << n << "\n";
  NameCtx names{e.sc.param_names(), "x", "th", {}};
  for (const auto& br : e.branches) {
    if (br.pin)
      out << "#! branch " << br.pin->first << " = " << rat_str(br.pin->second)
          << "\n";
    out << "#! na " << br.n_a << "\n";
    for (const auto& inv : br.invariants) {
      out << "#! invariant " << se_text(inv.expr, names) << "\n";
      if (!inv.sym.empty()) out << "#! sym " << inv.sym << "\n";
      for (const auto& v : inv.variants) out << "#! variant " << v << "\n";
    }
    for (const auto& f : br.findings) out << "#! finding " << f << "\n";
  }
  return out.str();
}

}  // namespace casimir
