#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "absaudit/abstraction.hpp"
#include "absaudit/scm.hpp"
#include "absaudit/taxonomy.hpp"

namespace absaudit {

/// First non-comment line of every document.
inline constexpr std::string_view kFormatHeader = "absaudit-format 1";

/// Model document (.scm). Throws ParseError with the offending line and
/// column on syntax errors, unresolved names and defective tables.
Scm parse_model(std::string_view text);
/// Canonical form: declaration order, aligned columns, every mechanism row,
/// nonzero distribution rows only, shortest round-trip probabilities.
std::string emit_model(const Scm& scm);

struct AbstractionRefs {
  std::string source;
  std::string target;
};

/// Reads only the `source` and `target` lines of an abstraction document.
AbstractionRefs read_abstraction_refs(std::string_view text);

/// Abstraction document (.abs), resolved against the two models.
Abstraction parse_abstraction(std::string_view text, std::shared_ptr<const Scm> source,
                              std::shared_ptr<const Scm> target);
std::string emit_abstraction(const Abstraction& a);

/// Distribution document (.dist) over variables of `scm`.
Distribution parse_distribution(std::string_view text, const Scm& scm);
std::string emit_distribution(const Distribution& dist);

/// Property table document (.tbl).
PropertyMatrix parse_matrix(std::string_view text);
std::string emit_matrix(const PropertyMatrix& m);

/// Graphviz text. Causal edges are solid; abstraction arrows are dotted and
/// point from the source model to the target model, with the micro model
/// drawn on top.
std::string emit_dot(const Scm& scm);
std::string emit_dot(const Abstraction& a);

/// Shortest text that parses back to the same double.
std::string format_probability(double p);

}  // namespace absaudit
