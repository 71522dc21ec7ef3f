#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <vector>

#include "absaudit/limits.hpp"
#include "absaudit/scm.hpp"

namespace absaudit {

/// A morphism of the free category on a Dag: a directed path given by its node
/// sequence. A one-node sequence is the identity on that node.
struct Morphism {
  std::vector<std::size_t> nodes;

  std::size_t source() const { return nodes.front(); }
  std::size_t target() const { return nodes.back(); }
  bool is_identity() const { return nodes.size() == 1; }

  static Morphism identity(std::size_t node) { return Morphism{{node}}; }

  friend auto operator<=>(const Morphism&, const Morphism&) = default;
  friend bool operator==(const Morphism&, const Morphism&) = default;
};

struct HomSet {
  std::size_t source = 0;
  std::size_t target = 0;
  std::vector<Morphism> morphisms;  // lexicographic by node sequence
};

/// True when consecutive nodes are joined by edges of `dag`.
bool is_path(const Dag& dag, const Morphism& m);

/// All directed paths from u to v (the identity when u == v). Throws
/// CapacityError when more than `limits.max_morphisms` paths exist.
HomSet hom_set(const Dag& dag, std::size_t u, std::size_t v, const EnumerationLimits& limits = {});

/// Path concatenation. Throws InvalidArgument when target(p) != source(q).
Morphism compose(const Morphism& p, const Morphism& q);

enum class HomomorphismMode {
  Strict,      // every edge goes to an edge
  PathValued,  // every edge goes to a path, identities allowed
};

/// Whether `node_map` (total on dag_a's nodes) sends edges of dag_a to edges
/// (strict) or to morphisms (path-valued) of dag_b.
bool is_graph_homomorphism(const std::vector<std::size_t>& node_map, const Dag& dag_a, const Dag& dag_b,
                           HomomorphismMode mode = HomomorphismMode::Strict);

/// Exponential path notation: S^T^C for the path S -> T -> C, S^S for id_S.
std::string to_exponential(const Dag& dag, const Morphism& m);
/// Inverse of to_exponential; throws InvalidArgument on unknown nodes or a
/// sequence that is not a path.
Morphism parse_exponential(const Dag& dag, const std::string& text);

}  // namespace absaudit
