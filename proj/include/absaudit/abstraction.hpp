#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "absaudit/free_category.hpp"
#include "absaudit/matrix.hpp"
#include "absaudit/report.hpp"
#include "absaudit/scm.hpp"

namespace absaudit {

/// Which way the map points relative to the levels of description. The map
/// itself always goes from `Abstraction::source` to `Abstraction::target`.
enum class Direction { MicroToMacro, MacroToMicro };

using EdgeMap = std::map<Morphism, Morphism>;

/// Structural layer. `node_map` is source nodes x target nodes and
/// row-stochastic; an all-zero row leaves the node outside the relevant set,
/// a one-hot row is a deterministic assignment. The optional edge map sends
/// morphisms between mapped source nodes to morphisms of the target graph.
struct StructuralMap {
  Matrix node_map;
  std::optional<EdgeMap> edge_map;

  friend bool operator==(const StructuralMap&, const StructuralMap&) = default;
};

/// alpha_{X'}: outcomes of the source block (the preimage of `target`) to
/// outcomes of the target variable.
struct VariableOutcomeMap {
  std::size_t target = 0;
  std::vector<std::size_t> block;  // source variable indices, ascending
  Matrix matrix;

  friend bool operator==(const VariableOutcomeMap&, const VariableOutcomeMap&) = default;
};

enum class Granularity { PerVariable, Global };

/// Distributional layer: either one map per target variable or a single map
/// between the joint outcome spaces.
struct OutcomeMap {
  Granularity granularity = Granularity::PerVariable;
  std::vector<VariableOutcomeMap> per_variable;  // ordered by target index
  Matrix global;

  friend bool operator==(const OutcomeMap&, const OutcomeMap&) = default;
};

struct Abstraction {
  std::shared_ptr<const Scm> source;
  std::shared_ptr<const Scm> target;
  std::string source_ref;
  std::string target_ref;
  Direction direction = Direction::MicroToMacro;
  StructuralMap structural;
  std::optional<OutcomeMap> outcomes;
};

bool operator==(const Abstraction& a, const Abstraction& b);

/// Reports every defect across both layers. Edge-map entries whose endpoints
/// disagree with the node map are warnings: they are legal input that simply
/// fails functoriality.
ValidationReport validate_abstraction(const Abstraction& a);

/// Source nodes with a nonzero node-map row.
std::vector<std::size_t> relevant_set(const Abstraction& a);

/// Source nodes whose one-hot row selects `target_var`. Throws when any
/// relevant row is stochastic.
std::vector<std::size_t> preimage(const Abstraction& a, std::size_t target_var);
std::vector<std::size_t> preimage(const Abstraction& a, const std::string& target_var);

/// Product domain of the listed variables (sorted into declaration order).
/// Labels of multi-variable blocks are comma-joined tuples.
FiniteDomain block_domain(const Scm& scm, std::vector<std::size_t> nodes);
FiniteDomain block_domain(const Scm& scm, const std::vector<std::string>& nodes);

struct PushOptions {
  bool renormalize = false;  // rescale after pushing through a partial map
};

/// out(y) = sum_x dist(x) m(x, y). A matrix with all-zero rows is refused
/// unless `options.renormalize` is set.
Distribution pushforward(const Distribution& dist, const Matrix& m, std::vector<Variable> target_scope,
                         PushOptions options = {});

/// Kernel from joint outcomes of `source_scope` to joint outcomes of
/// `target_scope` induced by the distributional layer.
struct OutcomeKernel {
  std::vector<std::size_t> source_scope;
  std::vector<std::size_t> target_scope;
  Matrix matrix;
};
OutcomeKernel joint_outcome_kernel(const Abstraction& a, const EnumerationLimits& limits = {});

/// Pushes a distribution over the source model's variables through the
/// distributional layer.
Distribution push_distribution(const Abstraction& a, const Distribution& source_dist, PushOptions options = {},
                               const EnumerationLimits& limits = {});

/// Identity abstraction of a model onto itself, with identity edge and
/// per-variable outcome maps.
Abstraction identity_abstraction(std::shared_ptr<const Scm> scm, const EnumerationLimits& limits = {});

/// second after first.
Abstraction compose_abstractions(const Abstraction& first, const Abstraction& second,
                                 const EnumerationLimits& limits = {});

}  // namespace absaudit
