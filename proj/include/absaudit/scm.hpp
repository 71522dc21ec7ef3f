#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absaudit/limits.hpp"
#include "absaudit/matrix.hpp"
#include "absaudit/report.hpp"

namespace absaudit {

/// Ordered, non-empty list of distinct value labels. The order is canonical:
/// it fixes the indexing of kernels and joint tables.
class FiniteDomain {
 public:
  FiniteDomain() = default;
  /// Throws InvalidArgument on an empty list or a duplicate label.
  explicit FiniteDomain(std::vector<std::string> values);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  const std::vector<std::string>& values() const noexcept { return values_; }
  const std::string& label(std::size_t i) const { return values_.at(i); }
  std::optional<std::size_t> index_of(const std::string& label) const;

  friend bool operator==(const FiniteDomain&, const FiniteDomain&) = default;

 private:
  std::vector<std::string> values_;
};

struct Variable {
  std::string name;
  FiniteDomain domain;

  friend bool operator==(const Variable&, const Variable&) = default;
};

struct ExogenousVariable {
  std::string name;
  FiniteDomain domain;
  std::size_t attached = 0;  // index of the endogenous variable it feeds

  friend bool operator==(const ExogenousVariable&, const ExogenousVariable&) = default;
};

/// Structural function of one endogenous variable as a total table. Row index
/// is row-major over (values of `parents` in order, value of the attached
/// exogenous variable); the entry is an index into the variable's domain.
struct Mechanism {
  std::vector<std::size_t> parents;
  std::vector<std::size_t> table;

  friend bool operator==(const Mechanism&, const Mechanism&) = default;
};

/// Finite semi-Markovian structural causal model. Variables are indexed by
/// declaration order; `mechanisms[i]` computes `endogenous[i]`.
/// `exogenous_dist` is one joint table, row-major over `exogenous`, so
/// dependent exogenous variables are representable.
struct Scm {
  std::string name;
  std::vector<Variable> endogenous;
  std::vector<ExogenousVariable> exogenous;
  std::vector<double> exogenous_dist;
  std::vector<Mechanism> mechanisms;

  std::optional<std::size_t> find_endogenous(const std::string& id) const;
  std::optional<std::size_t> find_exogenous(const std::string& id) const;
  /// Index of the exogenous variable attached to endogenous variable i.
  std::optional<std::size_t> exogenous_for(std::size_t i) const;

  friend bool operator==(const Scm&, const Scm&) = default;
};

/// Directed acyclic graph over named nodes. Edges are kept sorted and unique.
class Dag {
 public:
  Dag() = default;
  /// Throws InvalidArgument on out-of-range endpoints or a directed cycle.
  Dag(std::vector<std::string> nodes, std::vector<std::pair<std::size_t, std::size_t>> edges);

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<std::string>& nodes() const noexcept { return nodes_; }
  const std::string& name(std::size_t i) const { return nodes_.at(i); }
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const noexcept { return edges_; }
  const std::vector<std::size_t>& successors(std::size_t u) const { return successors_.at(u); }
  bool has_edge(std::size_t u, std::size_t v) const;
  std::optional<std::size_t> index_of(const std::string& name) const;

  friend bool operator==(const Dag& a, const Dag& b) { return a.nodes_ == b.nodes_ && a.edges_ == b.edges_; }

 private:
  std::vector<std::string> nodes_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<std::vector<std::size_t>> successors_;
};

/// do(X = x): endogenous variable id -> value label.
struct Intervention {
  std::map<std::string, std::string> assignments;
};

/// Probability table over a scope of variables, row-major in scope order.
struct Distribution {
  std::vector<Variable> scope;
  std::vector<double> table;

  std::vector<std::size_t> shape() const;
  double total() const;
  /// Probability of a joint assignment given as value indices in scope order.
  double at(std::span<const std::size_t> values) const;
};

/// Row-major index helpers shared by every joint table.
std::size_t encode_index(std::span<const std::size_t> values, std::span<const std::size_t> shape);
std::vector<std::size_t> decode_index(std::size_t index, std::span<const std::size_t> shape);
/// Product of the sizes, or SIZE_MAX on overflow.
std::size_t product_size(std::span<const std::size_t> shape);

/// Checks assumptions (a)-(f) plus normalization and totality. Defects are
/// reported, never thrown.
ValidationReport validate_scm(const Scm& scm);

/// Topological order of the endogenous variables (smallest index first among
/// ready nodes). Requires an acyclic parent relation.
std::vector<std::size_t> topological_order(const Scm& scm);

Dag underlying_graph(const Scm& scm);

/// Replaces each assigned variable's mechanism by the constant function and
/// clears its parents. The exogenous variable stays attached but is ignored.
Scm intervene(const Scm& scm, const Intervention& iota);

/// Pushforward of P(U) onto all endogenous variables by exhaustive
/// enumeration of the joint exogenous states.
Distribution joint_distribution(const Scm& scm, const EnumerationLimits& limits = {});

/// Sums out every variable not in `subset`. The result keeps the scope order
/// of `dist`.
Distribution marginal(const Distribution& dist, const std::vector<std::string>& subset);

/// Markov kernel of one mechanism: rows are joint parent values (row-major
/// over the parent list), columns the variable's domain. Refuses when the
/// variable's exogenous parent is not independent of the other exogenous
/// variables.
Matrix mechanism_kernel(const Scm& scm, const std::string& var, const EnumerationLimits& limits = {});

}  // namespace absaudit
