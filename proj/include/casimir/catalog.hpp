#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "casimir/algebra.hpp"
#include "casimir/base.hpp"
#include "casimir/scalar_expr.hpp"

namespace casimir {

struct UnknownId : Error {
  std::string id;
  explicit UnknownId(const std::string& id_)
      : Error("no catalog entry named '" + id_ + "'"), id(id_) {}
};

/// Which classification table an entry was compiled from. Example marks a
/// basis variant used in a worked computation rather than a table row;
/// Generated marks entries built by generate_n_n1.
enum class Provenance { Table1, Table2, Example, Generated };

std::string provenance_name(Provenance p);
std::optional<Provenance> provenance_from_name(const std::string& name);

/// One stored invariant: the commutative expression every numeric check
/// uses, an optional frozen operator rendering (for presentations that
/// order non-commuting symbols), and any differing source-table spellings
/// kept verbatim for the record.
struct CatalogInvariant {
  SEp expr;
  std::string sym;  // "" when symmetrization is trivial or not shown
  std::vector<std::string> variants;  // empty when the source prints `expr`
};

/// Invariants under one parameter regime. branches[0] is always the
/// generic regime (no pin); later branches pin a single parameter to the
/// exceptional value where the invariant count jumps.
struct EntryBranch {
  std::string condition;  // "" for generic, else e.g. "a = -1"
  std::optional<std::pair<std::string, Rational>> pin;
  int n_a = 0;
  std::vector<CatalogInvariant> invariants;
  std::vector<std::string> findings;  // recorded source discrepancies
};

struct AlgebraEntry {
  std::string id;
  Provenance provenance = Provenance::Table1;
  StructureConstants sc;
  std::vector<EntryBranch> branches;
  std::vector<std::string> notes;

  const EntryBranch& generic() const { return branches.front(); }
  int n_a() const { return branches.front().n_a; }
  std::vector<SEp> invariant_exprs(int branch = 0) const;
  /// Structure constants with the branch pin applied.
  StructureConstants branch_sc(int branch) const;
};

/// Directory the catalog is read from: the CASIMIR_CATALOG_DIR environment
/// variable when set, else the build-time default.
std::string catalog_dir();

/// All ids, in classification-table order.
std::vector<std::string> catalog_ids();

/// Loads one entry by id (case-insensitive). Throws UnknownId.
AlgebraEntry load_entry(const std::string& id);

struct EntryFilter {
  std::optional<int> dimension;
  std::optional<Provenance> provenance;
};

/// Ids of matching entries, in catalog order.
std::vector<std::string> list_entries(const EntryFilter& filter = {});

/// The nilpotent algebra n_{n,1}: [e_j, e_n] = e_{j-1} for j = 2..n-1.
/// Carries its closed-form invariants: e1 and, for each k = 3..n-1,
/// sum over j = 1..k of (-1)^(k-j)/(k-j)! * e1^(j-2) * e2^(k-j) * e_j.
/// Requires n >= 3.
AlgebraEntry generate_n_n1(int n);

/// Canonical file form: serialize_algebra body, then metadata directives.
/// load_entry . serialize_entry is the identity on catalog files.
std::string serialize_entry(const AlgebraEntry& e);

}  // namespace casimir
