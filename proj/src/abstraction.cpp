#include "absaudit/abstraction.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "absaudit/error.hpp"

namespace absaudit {

bool operator==(const Abstraction& a, const Abstraction& b) {
  auto same_model = [](const std::shared_ptr<const Scm>& x, const std::shared_ptr<const Scm>& y) {
    if (x == y) return true;
    return x && y && *x == *y;
  };
  return same_model(a.source, b.source) && same_model(a.target, b.target) && a.source_ref == b.source_ref &&
         a.target_ref == b.target_ref && a.direction == b.direction && a.structural == b.structural &&
         a.outcomes == b.outcomes;
}

namespace {

std::vector<std::size_t> shape_of(const Scm& scm, const std::vector<std::size_t>& vars) {
  std::vector<std::size_t> s;
  for (auto v : vars) s.push_back(scm.endogenous.at(v).domain.size());
  return s;
}

std::vector<std::size_t> all_variables(const Scm& scm) {
  std::vector<std::size_t> v(scm.endogenous.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
  return v;
}

void check_stochastic(const Matrix& m, const std::string& what, ValidationReport& report) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    bool bad_entry = false;
    for (double v : m.row(r))
      if (!(v >= 0.0 && v <= 1.0 + kTolerance)) bad_entry = true;
    if (bad_entry) {
      report.error(what + " row " + std::to_string(r) + " has an entry outside [0, 1]");
      continue;
    }
    if (m.row_is_zero(r)) continue;
    double s = m.row_sum(r);
    if (std::abs(s - 1.0) > kTolerance) {
      std::ostringstream os;
      os << what << " row " << r << " sums to " << s << ": normalization defect";
      report.error(os.str());
    }
  }
}

}  // namespace

std::vector<std::size_t> relevant_set(const Abstraction& a) {
  std::vector<std::size_t> r;
  for (std::size_t i = 0; i < a.structural.node_map.rows(); ++i)
    if (!a.structural.node_map.row_is_zero(i)) r.push_back(i);
  return r;
}

std::vector<std::size_t> preimage(const Abstraction& a, std::size_t target_var) {
  const auto& m = a.structural.node_map;
  if (target_var >= m.cols()) throw InvalidArgument("target variable out of range");
  std::vector<std::size_t> out;
  for (auto r : relevant_set(a)) {
    auto c = m.one_hot_column(r);
    if (!c) throw InvalidArgument("preimage undefined for stochastic structural map");
    if (*c == target_var) out.push_back(r);
  }
  return out;
}

std::vector<std::size_t> preimage(const Abstraction& a, const std::string& target_var) {
  auto idx = a.target->find_endogenous(target_var);
  if (!idx) throw InvalidArgument("unknown target variable '" + target_var + "'");
  return preimage(a, *idx);
}

FiniteDomain block_domain(const Scm& scm, std::vector<std::size_t> nodes) {
  if (nodes.empty()) throw InvalidArgument("block domain of an empty variable set");
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  for (auto n : nodes)
    if (n >= scm.endogenous.size()) throw InvalidArgument("variable index out of range");
  if (nodes.size() == 1) return scm.endogenous[nodes[0]].domain;
  const auto shape = shape_of(scm, nodes);
  const std::size_t n = product_size(shape);
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    auto values = decode_index(s, shape);
    std::string label;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (k) label += ',';
      label += scm.endogenous[nodes[k]].domain.label(values[k]);
    }
    labels.push_back(std::move(label));
  }
  return FiniteDomain(std::move(labels));
}

FiniteDomain block_domain(const Scm& scm, const std::vector<std::string>& nodes) {
  std::vector<std::size_t> idx;
  for (const auto& n : nodes) {
    auto i = scm.find_endogenous(n);
    if (!i) throw InvalidArgument("unknown variable '" + n + "'");
    idx.push_back(*i);
  }
  return block_domain(scm, std::move(idx));
}

ValidationReport validate_abstraction(const Abstraction& a) {
  ValidationReport report;
  if (!a.source || !a.target) {
    report.error("abstraction references a missing model");
    return report;
  }
  for (bool is_source : {true, false}) {
    const auto& scm = is_source ? *a.source : *a.target;
    if (validate_scm(scm).has_errors()) report.error(std::string(is_source ? "source" : "target") + " model does not validate");
  }
  if (!report.clean()) return report;

  const Scm& src = *a.source;
  const Scm& tgt = *a.target;
  const auto& nm = a.structural.node_map;
  if (nm.rows() != src.endogenous.size() || nm.cols() != tgt.endogenous.size()) {
    report.error("node map shape does not match the models");
    return report;
  }
  check_stochastic(nm, "node map", report);

  const auto relevant = relevant_set(a);
  bool deterministic = true;
  for (auto r : relevant)
    if (!nm.one_hot_column(r)) deterministic = false;

  if (a.structural.edge_map) {
    const Dag gs = underlying_graph(src);
    const Dag gt = underlying_graph(tgt);
    if (!deterministic) report.error("edge map requires deterministic node rows on the relevant set");
    std::set<std::size_t> rel(relevant.begin(), relevant.end());
    for (const auto& [from, to] : *a.structural.edge_map) {
      if (!is_path(gs, from)) {
        report.error("edge map key is not a path of the source graph");
        continue;
      }
      if (!is_path(gt, to)) {
        report.error("edge map value for " + to_exponential(gs, from) + " is not a path of the target graph");
        continue;
      }
      if (!rel.count(from.source()) || !rel.count(from.target())) {
        report.error("edge map entry " + to_exponential(gs, from) + " is not between mapped nodes");
        continue;
      }
      if (!deterministic) continue;
      auto fs = nm.one_hot_column(from.source());
      auto ft = nm.one_hot_column(from.target());
      if (*fs != to.source() || *ft != to.target())
        report.warning("edge map entry " + to_exponential(gs, from) + " -> " + to_exponential(gt, to) +
                       " has endpoints that disagree with the node map: endpoint defect");
    }
  }

  if (a.outcomes) {
    const auto& om = *a.outcomes;
    if (om.granularity == Granularity::Global) {
      auto rows = product_size(shape_of(src, all_variables(src)));
      auto cols = product_size(shape_of(tgt, all_variables(tgt)));
      if (om.global.rows() != rows || om.global.cols() != cols)
        report.error("global outcome map shape does not match the joint outcome spaces");
      else
        check_stochastic(om.global, "global outcome map", report);
    } else {
      std::set<std::size_t> seen;
      for (const auto& vm : om.per_variable) {
        if (vm.target >= tgt.endogenous.size()) {
          report.error("outcome map for an unknown target variable");
          continue;
        }
        const auto& name = tgt.endogenous[vm.target].name;
        if (!seen.insert(vm.target).second) report.error("duplicate outcome map for " + name);
        if (!deterministic) {
          report.error("per-variable outcome map for " + name + " needs a deterministic node map");
          continue;
        }
        auto pre = preimage(a, vm.target);
        if (pre.empty()) {
          report.error("outcome map for " + name + " but no source variable maps to it");
          continue;
        }
        if (vm.block != pre) {
          report.error("outcome map block for " + name + " does not equal its preimage under the node map");
          continue;
        }
        auto rows = product_size(shape_of(src, vm.block));
        if (vm.matrix.rows() != rows || vm.matrix.cols() != tgt.endogenous[vm.target].domain.size()) {
          report.error("outcome map for " + name + " has the wrong shape");
          continue;
        }
        check_stochastic(vm.matrix, "outcome map for " + name, report);
      }
    }
  }
  return report;
}

Distribution pushforward(const Distribution& dist, const Matrix& m, std::vector<Variable> target_scope,
                         PushOptions options) {
  if (dist.table.size() != m.rows()) throw InvalidArgument("distribution does not match the matrix rows");
  std::vector<std::size_t> tshape;
  for (const auto& v : target_scope) tshape.push_back(v.domain.size());
  if (product_size(tshape) != m.cols()) throw InvalidArgument("target scope does not match the matrix columns");
  if (!m.is_total() && !options.renormalize)
    throw InvalidArgument("partial map: renormalization required (no image for some outcomes)");

  Distribution out;
  out.scope = std::move(target_scope);
  out.table.assign(m.cols(), 0.0);
  for (std::size_t x = 0; x < m.rows(); ++x) {
    double p = dist.table[x];
    if (p == 0.0) continue;
    for (std::size_t y = 0; y < m.cols(); ++y) out.table[y] += p * m(x, y);
  }
  if (options.renormalize) {
    double total = out.total();
    if (total <= 0.0) throw InvalidArgument("no probability mass survives the partial map");
    for (auto& p : out.table) p /= total;
  }
  return out;
}

OutcomeKernel joint_outcome_kernel(const Abstraction& a, const EnumerationLimits& limits) {
  if (!a.outcomes) throw InvalidArgument("abstraction has no distributional layer");
  const Scm& src = *a.source;
  const Scm& tgt = *a.target;
  const auto& om = *a.outcomes;
  if (om.granularity == Granularity::Global)
    return {all_variables(src), all_variables(tgt), om.global};

  OutcomeKernel k;
  for (const auto& vm : om.per_variable) {
    k.target_scope.push_back(vm.target);
    k.source_scope.insert(k.source_scope.end(), vm.block.begin(), vm.block.end());
  }
  std::sort(k.source_scope.begin(), k.source_scope.end());

  const auto sshape = shape_of(src, k.source_scope);
  const auto tshape = shape_of(tgt, k.target_scope);
  const std::size_t rows = product_size(sshape);
  const std::size_t cols = product_size(tshape);
  if (rows > limits.max_states || cols > limits.max_states || rows * cols > limits.max_states)
    throw CapacityError("joint outcome kernel exceeds the enumeration cap");

  std::vector<std::size_t> position(src.endogenous.size());
  for (std::size_t i = 0; i < k.source_scope.size(); ++i) position[k.source_scope[i]] = i;

  k.matrix = Matrix(rows, cols);
  std::vector<std::size_t> block_rows(om.per_variable.size());
  for (std::size_t r = 0; r < rows; ++r) {
    auto values = decode_index(r, sshape);
    for (std::size_t b = 0; b < om.per_variable.size(); ++b) {
      const auto& vm = om.per_variable[b];
      std::vector<std::size_t> bv;
      for (auto v : vm.block) bv.push_back(values[position[v]]);
      block_rows[b] = encode_index(bv, shape_of(src, vm.block));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      auto tv = decode_index(c, tshape);
      double p = 1.0;
      for (std::size_t b = 0; b < om.per_variable.size() && p != 0.0; ++b)
        p *= om.per_variable[b].matrix(block_rows[b], tv[b]);
      k.matrix(r, c) = p;
    }
  }
  return k;
}

Distribution push_distribution(const Abstraction& a, const Distribution& source_dist, PushOptions options,
                               const EnumerationLimits& limits) {
  auto k = joint_outcome_kernel(a, limits);
  std::vector<std::string> names;
  for (auto v : k.source_scope) names.push_back(a.source->endogenous[v].name);
  auto restricted = marginal(source_dist, names);
  if (restricted.scope.size() != names.size()) throw InvalidArgument("distribution scope mismatch");
  for (std::size_t i = 0; i < names.size(); ++i)
    if (restricted.scope[i].name != names[i] || !(restricted.scope[i].domain == a.source->endogenous[k.source_scope[i]].domain))
      throw InvalidArgument("distribution scope does not follow the source model");
  std::vector<Variable> tscope;
  for (auto v : k.target_scope) tscope.push_back(a.target->endogenous[v]);
  return pushforward(restricted, k.matrix, std::move(tscope), options);
}

Abstraction identity_abstraction(std::shared_ptr<const Scm> scm, const EnumerationLimits& limits) {
  Abstraction a;
  a.source = scm;
  a.target = scm;
  a.source_ref = a.target_ref = scm->name;
  const std::size_t n = scm->endogenous.size();
  a.structural.node_map = Matrix::identity(n);
  const Dag g = underlying_graph(*scm);
  EdgeMap em;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      for (const auto& m : hom_set(g, u, v, limits).morphisms) em.emplace(m, m);
  a.structural.edge_map = std::move(em);
  OutcomeMap om;
  for (std::size_t i = 0; i < n; ++i)
    om.per_variable.push_back({i, {i}, Matrix::identity(scm->endogenous[i].domain.size())});
  a.outcomes = std::move(om);
  return a;
}

Abstraction compose_abstractions(const Abstraction& first, const Abstraction& second,
                                 const EnumerationLimits& limits) {
  if (!first.target || !second.source || !(*first.target == *second.source))
    throw InvalidArgument("cannot compose: target of the first abstraction is not the source of the second");
  if (first.direction != second.direction) throw InvalidArgument("cannot compose abstractions of opposite directions");

  Abstraction out;
  out.source = first.source;
  out.target = second.target;
  out.source_ref = first.source_ref;
  out.target_ref = second.target_ref;
  out.direction = first.direction;
  out.structural.node_map = multiply(first.structural.node_map, second.structural.node_map);

  if (first.structural.edge_map && second.structural.edge_map) {
    EdgeMap em;
    for (const auto& [p, q] : *first.structural.edge_map) {
      auto it = second.structural.edge_map->find(q);
      if (it != second.structural.edge_map->end()) em.emplace(p, it->second);
    }
    out.structural.edge_map = std::move(em);
  }

  if (first.outcomes && second.outcomes) {
    const auto& o1 = *first.outcomes;
    const auto& o2 = *second.outcomes;
    if (o1.granularity != o2.granularity) throw InvalidArgument("cannot compose: outcome map granularity mismatch");
    OutcomeMap om;
    om.granularity = o1.granularity;
    if (o1.granularity == Granularity::Global) {
      om.global = multiply(o1.global, o2.global);
    } else {
      const Scm& mid = *first.target;
      const Scm& src = *first.source;
      std::map<std::size_t, const VariableOutcomeMap*> first_maps;
      for (const auto& vm : o1.per_variable) first_maps[vm.target] = &vm;
      for (const auto& vm2 : o2.per_variable) {
        // Nothing in the source maps onto this target: the composite leaves it unmapped.
        if (std::none_of(vm2.block.begin(), vm2.block.end(), [&](auto y) { return first_maps.count(y) > 0; }))
          continue;
        // Kernel from the union of the first-stage blocks to the mid block of vm2.
        std::vector<std::size_t> union_block;
        for (auto y : vm2.block) {
          auto it = first_maps.find(y);
          if (it == first_maps.end())
            throw InvalidArgument("cannot compose: no outcome map for intermediate variable " + mid.endogenous[y].name);
          union_block.insert(union_block.end(), it->second->block.begin(), it->second->block.end());
        }
        std::sort(union_block.begin(), union_block.end());
        const auto ushape = shape_of(src, union_block);
        const auto mshape = shape_of(mid, vm2.block);
        const std::size_t rows = product_size(ushape);
        const std::size_t mids = product_size(mshape);
        if (rows > limits.max_states || mids > limits.max_states)
          throw CapacityError("composed outcome block exceeds the enumeration cap");
        std::vector<std::size_t> position(src.endogenous.size());
        for (std::size_t i = 0; i < union_block.size(); ++i) position[union_block[i]] = i;
        Matrix stage(rows, mids);
        for (std::size_t r = 0; r < rows; ++r) {
          auto values = decode_index(r, ushape);
          for (std::size_t c = 0; c < mids; ++c) {
            auto mv = decode_index(c, mshape);
            double p = 1.0;
            for (std::size_t b = 0; b < vm2.block.size() && p != 0.0; ++b) {
              const auto* vm1 = first_maps.at(vm2.block[b]);
              std::vector<std::size_t> bv;
              for (auto v : vm1->block) bv.push_back(values[position[v]]);
              p *= vm1->matrix(encode_index(bv, shape_of(src, vm1->block)), mv[b]);
            }
            stage(r, c) = p;
          }
        }
        om.per_variable.push_back({vm2.target, union_block, multiply(stage, vm2.matrix)});
      }
    }
    out.outcomes = std::move(om);
  }
  return out;
}

}  // namespace absaudit
