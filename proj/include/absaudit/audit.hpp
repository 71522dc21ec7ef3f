#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absaudit/abstraction.hpp"
#include "absaudit/limits.hpp"

namespace absaudit {

enum class Verdict { False, True, NotApplicable };

constexpr Verdict verdict(bool b) { return b ? Verdict::True : Verdict::False; }
std::string_view to_string(Verdict v);

/// Three-valued conjunction: any False gives False, otherwise any
/// NotApplicable gives NotApplicable.
Verdict conjunction(std::initializer_list<Verdict> vs);

struct NodeMapAudit {
  Verdict functional = Verdict::NotApplicable;
  Verdict surjective = Verdict::NotApplicable;
  Verdict injective = Verdict::NotApplicable;
  Verdict bijective = Verdict::NotApplicable;
};

struct FunctorAudit {
  Verdict functorial = Verdict::NotApplicable;
  Verdict full = Verdict::NotApplicable;
  Verdict faithful = Verdict::NotApplicable;
  Verdict fully_faithful = Verdict::NotApplicable;
  std::vector<std::string> notes;  // first reasons for each failed check
};

struct OutcomeVerdicts {
  Verdict functional = Verdict::NotApplicable;
  Verdict surjective = Verdict::NotApplicable;
  Verdict injective = Verdict::NotApplicable;
  Verdict bijective = Verdict::NotApplicable;
  Verdict deterministic = Verdict::NotApplicable;
  Verdict micro_to_macro = Verdict::NotApplicable;

  friend bool operator==(const OutcomeVerdicts&, const OutcomeVerdicts&) = default;
};

struct OutcomeAudit {
  OutcomeVerdicts overall;
  /// Per target variable, by name; empty for a global outcome map.
  std::vector<std::pair<std::string, OutcomeVerdicts>> per_variable;
};

struct Modalities {
  Verdict structural_deterministic = Verdict::NotApplicable;
  Verdict structural_micro_to_macro = Verdict::NotApplicable;
};

struct StructuralVerdicts {
  Verdict functionality = Verdict::NotApplicable;
  Verdict surjectivity = Verdict::NotApplicable;
  Verdict injectivity = Verdict::NotApplicable;
  Verdict bijectivity = Verdict::NotApplicable;
  Verdict functoriality = Verdict::NotApplicable;
  Verdict fullness = Verdict::NotApplicable;
  Verdict faithfulness = Verdict::NotApplicable;
  Verdict full_faithfulness = Verdict::NotApplicable;
  Verdict determinism = Verdict::NotApplicable;
  Verdict micro_to_macro = Verdict::NotApplicable;

  friend bool operator==(const StructuralVerdicts&, const StructuralVerdicts&) = default;
};

struct DistributionalVerdicts {
  Verdict functionality = Verdict::NotApplicable;
  Verdict surjectivity = Verdict::NotApplicable;
  Verdict injectivity = Verdict::NotApplicable;
  Verdict bijectivity = Verdict::NotApplicable;
  Verdict determinism = Verdict::NotApplicable;
  Verdict micro_to_macro = Verdict::NotApplicable;

  friend bool operator==(const DistributionalVerdicts&, const DistributionalVerdicts&) = default;
};

struct DerivedFlags {
  Verdict perfect_node_invertibility = Verdict::NotApplicable;
  Verdict set_node_invertibility = Verdict::NotApplicable;
  Verdict perfect_edge_invertibility = Verdict::NotApplicable;
  Verdict set_edge_invertibility = Verdict::NotApplicable;

  friend bool operator==(const DerivedFlags&, const DerivedFlags&) = default;
};

struct PropertyProfile {
  StructuralVerdicts structural;
  DistributionalVerdicts distributional;
  std::vector<std::pair<std::string, OutcomeVerdicts>> distributional_breakdown;
  DerivedFlags derived;
  std::vector<std::string> notes;

  friend bool operator==(const PropertyProfile&, const PropertyProfile&) = default;
};

/// Named views in a fixed order, for printing and lookup.
std::vector<std::pair<std::string_view, Verdict>> named(const StructuralVerdicts& v);
std::vector<std::pair<std::string_view, Verdict>> named(const DistributionalVerdicts& v);
std::vector<std::pair<std::string_view, Verdict>> named(const OutcomeVerdicts& v);
std::vector<std::pair<std::string_view, Verdict>> named(const DerivedFlags& v);

/// Node-level properties, evaluated over the relevant set. Injectivity is
/// not applicable when some relevant row is stochastic.
NodeMapAudit audit_node_map(const Abstraction& a);

/// Functor properties of the edge map. All four verdicts are not applicable
/// without an edge map or with a stochastic relevant row. Fullness and
/// faithfulness presuppose functoriality and are counted over the union of
/// hom-sets that land on each pair of image nodes, identities included.
FunctorAudit audit_functor(const Abstraction& a, const EnumerationLimits& limits = {});

/// Audit of one outcome matrix.
OutcomeVerdicts audit_outcome_matrix(const Matrix& m, Direction direction);

/// Distributional layer; not applicable throughout when it is absent.
OutcomeAudit audit_outcome_map(const Abstraction& a);

Modalities audit_modalities(const Abstraction& a);

DerivedFlags derive_invertibility(const PropertyProfile& profile);

/// Full profile. Throws InvalidArgument when the abstraction does not
/// validate.
PropertyProfile audit(const Abstraction& a, const EnumerationLimits& limits = {});

}  // namespace absaudit
