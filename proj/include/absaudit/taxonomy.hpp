#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absaudit/abstraction.hpp"
#include "absaudit/audit.hpp"

namespace absaudit {

enum class Layer { Structural, Distributional };

enum class StructuralType {
  Identity,
  NodePermutation,
  NodeCoarsening,
  EdgeCoarsening,
  NodeEmbedding,
  EdgeEmbedding,
  NodeDropping,
  EdgeDropping,
  CausalReversal,
  CausalSplitting,
  AbstractionReversal,
};

enum class DistributionalType {
  IdentityOrPermutation,
  Coarsening,
  Embedding,
  OutcomeDropping,
  OutcomeSplitting,
  AbstractionReversal,
};

/// Column order of the two tables.
const std::vector<StructuralType>& all_structural_types();
const std::vector<DistributionalType>& all_distributional_types();

std::string_view to_string(StructuralType t);
std::string_view to_string(DistributionalType t);
std::string_view to_string(Layer l);
std::optional<StructuralType> structural_type_from_string(std::string_view s);
std::optional<DistributionalType> distributional_type_from_string(std::string_view s);

/// Lowercase file stem used for committed witness fixtures, e.g. "node-coarsening".
std::string slug(StructuralType t);
std::string slug(DistributionalType t);

/// Table cells: allowed, disallowed, not applicable.
enum class Cell { Allowed, Disallowed, NotApplicable };

std::string_view symbol(Cell c);  // "✓", "×", "-"
std::optional<Cell> cell_from_symbol(std::string_view s);

struct PropertyMatrix {
  Layer layer = Layer::Structural;
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  std::vector<std::vector<Cell>> cells;  // cells[row][col]

  std::size_t size() const { return rows.size() * cols.size(); }
  friend bool operator==(const PropertyMatrix&, const PropertyMatrix&) = default;
};

/// Row labels of the two tables, in order.
const std::vector<std::string>& structural_properties();
const std::vector<std::string>& distributional_properties();

/// Fixed chain fixture mirroring the table pictogram of the type. Models are
/// binary chains over A, B, C (micro) and A', B', C' (macro); distributional
/// witnesses are single-variable models X and X'.
Abstraction canonical_witness(StructuralType t);
Abstraction canonical_witness(DistributionalType t);

/// Column of table cells for one abstraction under the table conventions:
/// function properties presuppose a total, deterministic, micro-to-macro map.
std::vector<Cell> structural_column(const Abstraction& a, const EnumerationLimits& limits = {});
std::vector<Cell> distributional_column(const Abstraction& a);

PropertyMatrix structural_matrix(const EnumerationLimits& limits = {});
PropertyMatrix distributional_matrix();

struct CellMismatch {
  std::string row;
  std::string col;
  Cell computed;
  Cell expected;
};

struct MatrixDiff {
  std::size_t matching = 0;
  std::size_t total = 0;
  std::vector<CellMismatch> mismatches;
  std::vector<std::string> shape_errors;  // row or column labels that differ

  bool identical() const { return mismatches.empty() && shape_errors.empty() && matching == total; }
};

MatrixDiff diff_matrices(const PropertyMatrix& computed, const PropertyMatrix& expected);

struct DetectedTypes {
  std::vector<StructuralType> structural;
  std::vector<DistributionalType> distributional;
};

/// Every type whose defining predicate holds; several may hold at once.
DetectedTypes detect_types(const Abstraction& a, const EnumerationLimits& limits = {});

/// A macro label paired with a micro label: trailing primes removed.
std::string strip_primes(std::string_view label);

}  // namespace absaudit
