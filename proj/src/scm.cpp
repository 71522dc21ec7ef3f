#include "absaudit/scm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

#include "absaudit/error.hpp"

namespace absaudit {

FiniteDomain::FiniteDomain(std::vector<std::string> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidArgument("finite domain must not be empty");
  std::set<std::string> seen;
  for (const auto& v : values_) {
    if (!seen.insert(v).second) throw InvalidArgument("duplicate domain value '" + v + "'");
  }
}

std::optional<std::size_t> FiniteDomain::index_of(const std::string& label) const {
  auto it = std::find(values_.begin(), values_.end(), label);
  if (it == values_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - values_.begin());
}

std::optional<std::size_t> Scm::find_endogenous(const std::string& id) const {
  for (std::size_t i = 0; i < endogenous.size(); ++i)
    if (endogenous[i].name == id) return i;
  return std::nullopt;
}

std::optional<std::size_t> Scm::find_exogenous(const std::string& id) const {
  for (std::size_t i = 0; i < exogenous.size(); ++i)
    if (exogenous[i].name == id) return i;
  return std::nullopt;
}

std::optional<std::size_t> Scm::exogenous_for(std::size_t i) const {
  for (std::size_t k = 0; k < exogenous.size(); ++k)
    if (exogenous[k].attached == i) return k;
  return std::nullopt;
}

// --- Dag ---------------------------------------------------------------------

namespace {

bool has_cycle(std::size_t n, const std::vector<std::vector<std::size_t>>& succ) {
  std::vector<std::size_t> indegree(n, 0);
  for (const auto& s : succ)
    for (auto v : s) ++indegree[v];
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.push_back(i);
  std::size_t seen = 0;
  while (!ready.empty()) {
    auto u = ready.back();
    ready.pop_back();
    ++seen;
    for (auto v : succ[u])
      if (--indegree[v] == 0) ready.push_back(v);
  }
  return seen != n;
}

}  // namespace

Dag::Dag(std::vector<std::string> nodes, std::vector<std::pair<std::size_t, std::size_t>> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), successors_(nodes_.size()) {
  for (auto [u, v] : edges_) {
    if (u >= nodes_.size() || v >= nodes_.size()) throw InvalidArgument("edge endpoint out of range");
    if (u == v) throw InvalidArgument("self-loop on " + nodes_[u]);
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  for (auto [u, v] : edges_) successors_[u].push_back(v);
  if (has_cycle(nodes_.size(), successors_)) throw InvalidArgument("graph has a directed cycle");
}

bool Dag::has_edge(std::size_t u, std::size_t v) const {
  return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(u, v));
}

std::optional<std::size_t> Dag::index_of(const std::string& name) const {
  auto it = std::find(nodes_.begin(), nodes_.end(), name);
  if (it == nodes_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - nodes_.begin());
}

// --- index helpers -----------------------------------------------------------

std::size_t product_size(std::span<const std::size_t> shape) {
  std::size_t n = 1;
  for (auto s : shape) {
    if (s != 0 && n > std::numeric_limits<std::size_t>::max() / s) return std::numeric_limits<std::size_t>::max();
    n *= s;
  }
  return n;
}

std::size_t encode_index(std::span<const std::size_t> values, std::span<const std::size_t> shape) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < shape.size(); ++i) idx = idx * shape[i] + values[i];
  return idx;
}

std::vector<std::size_t> decode_index(std::size_t index, std::span<const std::size_t> shape) {
  std::vector<std::size_t> values(shape.size());
  for (std::size_t i = shape.size(); i-- > 0;) {
    values[i] = index % shape[i];
    index /= shape[i];
  }
  return values;
}

std::vector<std::size_t> Distribution::shape() const {
  std::vector<std::size_t> s;
  s.reserve(scope.size());
  for (const auto& v : scope) s.push_back(v.domain.size());
  return s;
}

double Distribution::total() const {
  double t = 0.0;
  for (double p : table) t += p;
  return t;
}

double Distribution::at(std::span<const std::size_t> values) const {
  auto s = shape();
  return table.at(encode_index(values, s));
}

// --- validation --------------------------------------------------------------

namespace {

std::vector<std::size_t> exogenous_shape(const Scm& scm) {
  std::vector<std::size_t> s;
  for (const auto& u : scm.exogenous) s.push_back(u.domain.size());
  return s;
}

std::vector<std::size_t> endogenous_shape(const Scm& scm) {
  std::vector<std::size_t> s;
  for (const auto& x : scm.endogenous) s.push_back(x.domain.size());
  return s;
}

bool parents_acyclic(const Scm& scm) {
  std::vector<std::vector<std::size_t>> succ(scm.endogenous.size());
  for (std::size_t i = 0; i < scm.mechanisms.size() && i < scm.endogenous.size(); ++i)
    for (auto p : scm.mechanisms[i].parents)
      if (p < scm.endogenous.size()) succ[p].push_back(i);
  return !has_cycle(scm.endogenous.size(), succ);
}

void require_valid(const Scm& scm) {
  auto report = validate_scm(scm);
  if (report.has_errors()) throw InvalidArgument("model does not validate: " + report.defects.front().message);
}

std::size_t exogenous_state_count(const Scm& scm, const EnumerationLimits& limits) {
  auto shape = exogenous_shape(scm);
  std::size_t n = product_size(shape);
  if (n > limits.max_states)
    throw CapacityError("joint exogenous state space (" + std::to_string(n) + ") exceeds cap " +
                        std::to_string(limits.max_states));
  return n;
}

}  // namespace

ValidationReport validate_scm(const Scm& scm) {
  ValidationReport report;
  const std::size_t n = scm.endogenous.size();

  if (n == 0) report.error("(a) model has no endogenous variables");

  std::set<std::string> names;
  for (const auto& x : scm.endogenous) {
    if (x.domain.empty()) report.error("(b) endogenous variable " + x.name + " has an empty domain");
    if (!names.insert(x.name).second) report.error("duplicate variable name " + x.name);
  }
  for (const auto& u : scm.exogenous) {
    if (u.domain.empty()) report.error("exogenous variable " + u.name + " has an empty domain");
    if (!names.insert(u.name).second) report.error("duplicate variable name " + u.name);
  }

  if (scm.exogenous.size() != n)
    report.error("(c) expected one exogenous variable per endogenous variable (" + std::to_string(n) +
                 " endogenous, " + std::to_string(scm.exogenous.size()) + " exogenous)");
  std::vector<std::size_t> attached_count(n, 0);
  for (const auto& u : scm.exogenous) {
    if (u.attached >= n)
      report.error("(c) exogenous variable " + u.name + " is attached to no endogenous variable");
    else
      ++attached_count[u.attached];
  }
  for (std::size_t i = 0; i < n; ++i)
    if (attached_count[i] != 1)
      report.error("(c) endogenous variable " + scm.endogenous[i].name + " has " +
                   std::to_string(attached_count[i]) + " exogenous variables");

  if (scm.mechanisms.size() != n) {
    report.error("(e) expected " + std::to_string(n) + " mechanisms, found " + std::to_string(scm.mechanisms.size()));
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& m = scm.mechanisms[i];
      const auto& x = scm.endogenous[i];
      bool parents_ok = true;
      std::set<std::size_t> seen;
      std::vector<std::size_t> rows_shape;
      for (auto p : m.parents) {
        if (p >= n) {
          report.error("(e) mechanism of " + x.name + " references an unknown parent");
          parents_ok = false;
          continue;
        }
        if (p == i) report.error("(f) " + x.name + " is its own parent: cycle detected");
        if (!seen.insert(p).second) report.error("(e) mechanism of " + x.name + " lists a parent twice");
        rows_shape.push_back(scm.endogenous[p].domain.size());
      }
      auto u = scm.exogenous_for(i);
      if (!parents_ok || !u || attached_count[i] != 1) continue;
      rows_shape.push_back(scm.exogenous[*u].domain.size());
      std::size_t expected = product_size(rows_shape);
      if (m.table.size() != expected) {
        report.error("(e) mechanism of " + x.name + " is not total: " + std::to_string(m.table.size()) +
                     " of " + std::to_string(expected) + " rows defined");
        continue;
      }
      for (auto v : m.table) {
        if (v >= x.domain.size()) {
          report.error("(e) mechanism of " + x.name + " yields a value outside its domain");
          break;
        }
      }
    }
    if (!parents_acyclic(scm)) report.error("(f) cycle detected in the parent relation");
  }

  auto shape = exogenous_shape(scm);
  std::size_t states = product_size(shape);
  if (scm.exogenous_dist.size() != states) {
    report.error("exogenous distribution has " + std::to_string(scm.exogenous_dist.size()) + " entries, expected " +
                 std::to_string(states));
  } else {
    double total = 0.0;
    bool negative = false;
    for (double p : scm.exogenous_dist) {
      if (!(p >= 0.0)) negative = true;
      total += p;
    }
    if (negative) report.error("exogenous distribution has a negative entry");
    if (!(std::abs(total - 1.0) <= kTolerance)) {
      std::ostringstream os;
      os << "exogenous distribution not normalized (sum " << total << ")";
      report.error(os.str());
    }
  }
  return report;
}

std::vector<std::size_t> topological_order(const Scm& scm) {
  const std::size_t n = scm.endogenous.size();
  std::vector<std::vector<std::size_t>> succ(n);
  std::vector<std::size_t> indegree(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (auto p : scm.mechanisms.at(i).parents) {
      succ.at(p).push_back(i);
      ++indegree[i];
    }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.push(i);
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    auto u = ready.top();
    ready.pop();
    order.push_back(u);
    for (auto v : succ[u])
      if (--indegree[v] == 0) ready.push(v);
  }
  if (order.size() != n) throw InvalidArgument("cycle detected in the parent relation");
  return order;
}

Dag underlying_graph(const Scm& scm) {
  require_valid(scm);
  std::vector<std::string> nodes;
  for (const auto& x : scm.endogenous) nodes.push_back(x.name);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < scm.mechanisms.size(); ++i)
    for (auto p : scm.mechanisms[i].parents) edges.emplace_back(p, i);
  return Dag(std::move(nodes), std::move(edges));
}

Scm intervene(const Scm& scm, const Intervention& iota) {
  require_valid(scm);
  Scm out = scm;
  for (const auto& [id, label] : iota.assignments) {
    auto i = scm.find_endogenous(id);
    if (!i) throw InvalidArgument("unknown variable '" + id + "' in intervention");
    auto value = scm.endogenous[*i].domain.index_of(label);
    if (!value) throw InvalidArgument("value '" + label + "' is outside the domain of " + id);
    auto u = *scm.exogenous_for(*i);
    auto& m = out.mechanisms[*i];
    m.parents.clear();
    m.table.assign(scm.exogenous[u].domain.size(), *value);
  }
  return out;
}

Distribution joint_distribution(const Scm& scm, const EnumerationLimits& limits) {
  require_valid(scm);
  const auto exo_shape = exogenous_shape(scm);
  const auto endo_shape = endogenous_shape(scm);
  const std::size_t exo_states = exogenous_state_count(scm, limits);
  const std::size_t endo_states = product_size(endo_shape);
  if (endo_states > limits.max_states)
    throw CapacityError("joint endogenous state space exceeds cap " + std::to_string(limits.max_states));

  const auto order = topological_order(scm);
  std::vector<std::size_t> exo_of(scm.endogenous.size());
  for (std::size_t i = 0; i < scm.endogenous.size(); ++i) exo_of[i] = *scm.exogenous_for(i);

  Distribution dist;
  dist.scope = scm.endogenous;
  dist.table.assign(endo_states, 0.0);

  std::vector<std::size_t> x(scm.endogenous.size());
  for (std::size_t s = 0; s < exo_states; ++s) {
    double p = scm.exogenous_dist[s];
    if (p == 0.0) continue;
    auto u = decode_index(s, exo_shape);
    for (auto i : order) {
      const auto& m = scm.mechanisms[i];
      std::size_t row = 0;
      for (auto par : m.parents) row = row * endo_shape[par] + x[par];
      row = row * exo_shape[exo_of[i]] + u[exo_of[i]];
      x[i] = m.table[row];
    }
    dist.table[encode_index(x, endo_shape)] += p;
  }
  return dist;
}

Distribution marginal(const Distribution& dist, const std::vector<std::string>& subset) {
  std::vector<bool> keep(dist.scope.size(), false);
  for (const auto& id : subset) {
    auto it = std::find_if(dist.scope.begin(), dist.scope.end(), [&](const Variable& v) { return v.name == id; });
    if (it == dist.scope.end()) throw InvalidArgument("unknown variable '" + id + "' in marginal");
    keep[static_cast<std::size_t>(it - dist.scope.begin())] = true;
  }
  Distribution out;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < dist.scope.size(); ++i)
    if (keep[i]) {
      kept.push_back(i);
      out.scope.push_back(dist.scope[i]);
    }
  const auto in_shape = dist.shape();
  const auto out_shape = out.shape();
  out.table.assign(product_size(out_shape), 0.0);
  std::vector<std::size_t> sub(kept.size());
  for (std::size_t s = 0; s < dist.table.size(); ++s) {
    if (dist.table[s] == 0.0) continue;
    auto full = decode_index(s, in_shape);
    for (std::size_t k = 0; k < kept.size(); ++k) sub[k] = full[kept[k]];
    out.table[encode_index(sub, out_shape)] += dist.table[s];
  }
  return out;
}

Matrix mechanism_kernel(const Scm& scm, const std::string& var, const EnumerationLimits& limits) {
  require_valid(scm);
  auto i = scm.find_endogenous(var);
  if (!i) throw InvalidArgument("unknown variable '" + var + "'");
  const std::size_t ui = *scm.exogenous_for(*i);
  const auto exo_shape = exogenous_shape(scm);
  const std::size_t states = exogenous_state_count(scm, limits);

  // P(U) must factor as P(U_i) * P(U_rest).
  std::vector<std::size_t> rest_shape;
  for (std::size_t k = 0; k < exo_shape.size(); ++k)
    if (k != ui) rest_shape.push_back(exo_shape[k]);
  std::vector<double> p_ui(exo_shape[ui], 0.0);
  std::vector<double> p_rest(product_size(rest_shape), 0.0);
  std::vector<std::size_t> rest_values(rest_shape.size());
  auto rest_index = [&](const std::vector<std::size_t>& u) {
    std::size_t r = 0;
    for (std::size_t k = 0; k < u.size(); ++k)
      if (k != ui) rest_values[r++] = u[k];
    return encode_index(rest_values, rest_shape);
  };
  for (std::size_t s = 0; s < states; ++s) {
    auto u = decode_index(s, exo_shape);
    p_ui[u[ui]] += scm.exogenous_dist[s];
    p_rest[rest_index(u)] += scm.exogenous_dist[s];
  }
  for (std::size_t s = 0; s < states; ++s) {
    auto u = decode_index(s, exo_shape);
    if (std::abs(scm.exogenous_dist[s] - p_ui[u[ui]] * p_rest[rest_index(u)]) > kTolerance)
      throw InvalidArgument("kernel undefined under exogenous dependence: " + scm.exogenous[ui].name +
                            " is not independent of the other exogenous variables");
  }

  const auto& m = scm.mechanisms[*i];
  std::vector<std::size_t> parent_shape;
  for (auto p : m.parents) parent_shape.push_back(scm.endogenous[p].domain.size());
  const std::size_t rows = product_size(parent_shape);
  const std::size_t usize = exo_shape[ui];
  Matrix kernel(rows, scm.endogenous[*i].domain.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t u = 0; u < usize; ++u) kernel(r, m.table[r * usize + u]) += p_ui[u];
  return kernel;
}

}  // namespace absaudit
