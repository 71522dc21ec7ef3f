#include "absaudit/free_category.hpp"

#include <algorithm>

#include "absaudit/error.hpp"

namespace absaudit {

bool is_path(const Dag& dag, const Morphism& m) {
  if (m.nodes.empty()) return false;
  for (auto n : m.nodes)
    if (n >= dag.size()) return false;
  for (std::size_t i = 0; i + 1 < m.nodes.size(); ++i)
    if (!dag.has_edge(m.nodes[i], m.nodes[i + 1])) return false;
  return true;
}

namespace {

// Nodes from which `target` is reachable (including itself).
std::vector<bool> co_reachable(const Dag& dag, std::size_t target) {
  std::vector<bool> reach(dag.size(), false);
  reach[target] = true;
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto [u, v] : dag.edges())
      if (reach[v] && !reach[u]) {
        reach[u] = true;
        changed = true;
      }
  }
  return reach;
}

void extend(const Dag& dag, std::size_t target, const std::vector<bool>& reach, std::vector<std::size_t>& path,
            std::vector<Morphism>& out, std::size_t cap) {
  auto u = path.back();
  if (u == target) {
    if (out.size() >= cap) throw CapacityError("hom-set exceeds cap of " + std::to_string(cap) + " morphisms");
    out.push_back(Morphism{path});
    return;
  }
  for (auto v : dag.successors(u)) {
    if (!reach[v]) continue;
    path.push_back(v);
    extend(dag, target, reach, path, out, cap);
    path.pop_back();
  }
}

}  // namespace

HomSet hom_set(const Dag& dag, std::size_t u, std::size_t v, const EnumerationLimits& limits) {
  if (u >= dag.size() || v >= dag.size()) throw InvalidArgument("hom-set endpoint out of range");
  HomSet hs{u, v, {}};
  auto reach = co_reachable(dag, v);
  if (reach[u]) {
    std::vector<std::size_t> path{u};
    extend(dag, v, reach, path, hs.morphisms, limits.max_morphisms);
  }
  std::sort(hs.morphisms.begin(), hs.morphisms.end());
  return hs;
}

Morphism compose(const Morphism& p, const Morphism& q) {
  if (p.nodes.empty() || q.nodes.empty() || p.target() != q.source())
    throw InvalidArgument("cannot compose: endpoint mismatch");
  Morphism r = p;
  r.nodes.insert(r.nodes.end(), q.nodes.begin() + 1, q.nodes.end());
  return r;
}

bool is_graph_homomorphism(const std::vector<std::size_t>& node_map, const Dag& dag_a, const Dag& dag_b,
                           HomomorphismMode mode) {
  if (node_map.size() != dag_a.size()) throw InvalidArgument("node map is not total on the source graph");
  for (auto t : node_map)
    if (t >= dag_b.size()) throw InvalidArgument("node map value out of range");
  for (auto [u, v] : dag_a.edges()) {
    auto fu = node_map[u];
    auto fv = node_map[v];
    if (mode == HomomorphismMode::Strict) {
      if (!dag_b.has_edge(fu, fv)) return false;
    } else if (fu != fv && !co_reachable(dag_b, fv)[fu]) {
      return false;
    }
  }
  return true;
}

std::string to_exponential(const Dag& dag, const Morphism& m) {
  if (m.is_identity()) return dag.name(m.source()) + "^" + dag.name(m.source());
  std::string out;
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    if (i) out += '^';
    out += dag.name(m.nodes[i]);
  }
  return out;
}

Morphism parse_exponential(const Dag& dag, const std::string& text) {
  std::vector<std::size_t> nodes;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find('^', start);
    auto part = text.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
    // tolerate the braces of the typeset form S^{T^C}
    part.erase(std::remove_if(part.begin(), part.end(), [](char c) { return c == '{' || c == '}'; }), part.end());
    if (part.empty()) throw InvalidArgument("malformed path notation '" + text + "'");
    auto idx = dag.index_of(part);
    if (!idx) throw InvalidArgument("unknown node '" + part + "' in path '" + text + "'");
    nodes.push_back(*idx);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (nodes.size() < 2) throw InvalidArgument("malformed path notation '" + text + "'");
  if (nodes.size() == 2 && nodes[0] == nodes[1]) return Morphism::identity(nodes[0]);
  Morphism m{std::move(nodes)};
  if (!is_path(dag, m)) throw InvalidArgument("'" + text + "' is not a directed path");
  return m;
}

}  // namespace absaudit
