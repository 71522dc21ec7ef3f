#include "absaudit/random.hpp"

#include <algorithm>
#include <numeric>

#include "absaudit/free_category.hpp"

namespace absaudit {

namespace {

bool coin(std::mt19937& rng, double p) { return std::bernoulli_distribution(p)(rng); }

std::size_t uniform(std::mt19937& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

std::vector<double> random_simplex(std::mt19937& rng, std::size_t n) {
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& x : w) {
    x = static_cast<double>(uniform(rng, 1, 9));
    total += x;
  }
  for (auto& x : w) x /= total;
  return w;
}

FiniteDomain numeric_domain(std::size_t n) {
  std::vector<std::string> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(std::to_string(i));
  return FiniteDomain(std::move(v));
}

// Row-stochastic row over `cols` columns: zero, stochastic or one-hot.
void fill_row(std::mt19937& rng, Matrix& m, std::size_t r, double zero, double stochastic) {
  if (coin(rng, zero)) return;
  if (m.cols() >= 2 && coin(rng, stochastic)) {
    std::size_t a = uniform(rng, 0, m.cols() - 1);
    std::size_t b = uniform(rng, 0, m.cols() - 2);
    if (b >= a) ++b;
    const double w = static_cast<double>(uniform(rng, 1, 3)) / 4.0;
    m(r, a) = w;
    m(r, b) = 1.0 - w;
    return;
  }
  m(r, uniform(rng, 0, m.cols() - 1)) = 1.0;
}

}  // namespace

Dag random_dag(std::mt19937& rng, std::size_t n, double edge_probability) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng, edge_probability)) edges.emplace_back(order[i], order[j]);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("N" + std::to_string(i));
  return Dag(std::move(names), std::move(edges));
}

std::shared_ptr<Scm> random_scm(std::mt19937& rng, const RandomModelOptions& options) {
  const std::size_t n = uniform(rng, options.min_variables, options.max_variables);
  const Dag g = random_dag(rng, n, options.edge_probability);
  auto scm = std::make_shared<Scm>();
  scm->name = "random";
  for (std::size_t i = 0; i < n; ++i)
    scm->endogenous.push_back({"X" + std::to_string(i), numeric_domain(uniform(rng, 2, options.max_domain))});
  for (std::size_t i = 0; i < n; ++i)
    scm->exogenous.push_back({"U" + std::to_string(i), numeric_domain(uniform(rng, 2, options.max_domain)), i});
  scm->mechanisms.resize(n);
  for (auto [u, v] : g.edges()) scm->mechanisms[v].parents.push_back(u);
  for (std::size_t i = 0; i < n; ++i) {
    auto& m = scm->mechanisms[i];
    std::sort(m.parents.begin(), m.parents.end());
    std::vector<std::size_t> shape;
    for (auto p : m.parents) shape.push_back(scm->endogenous[p].domain.size());
    shape.push_back(scm->exogenous[i].domain.size());
    m.table.resize(product_size(shape));
    for (auto& x : m.table) x = uniform(rng, 0, scm->endogenous[i].domain.size() - 1);
  }
  std::vector<std::size_t> shape;
  for (const auto& u : scm->exogenous) shape.push_back(u.domain.size());
  const std::size_t states = product_size(shape);
  if (options.independent_exogenous) {
    std::vector<std::vector<double>> marginals;
    for (const auto& u : scm->exogenous) marginals.push_back(random_simplex(rng, u.domain.size()));
    scm->exogenous_dist.assign(states, 1.0);
    for (std::size_t s = 0; s < states; ++s) {
      auto values = decode_index(s, shape);
      for (std::size_t k = 0; k < values.size(); ++k) scm->exogenous_dist[s] *= marginals[k][values[k]];
    }
  } else {
    scm->exogenous_dist = random_simplex(rng, states);
  }
  return scm;
}

Intervention random_intervention(std::mt19937& rng, const Scm& scm) {
  Intervention iota;
  const std::size_t count = std::min<std::size_t>(scm.endogenous.size(), uniform(rng, 1, 2));
  std::vector<std::size_t> vars(scm.endogenous.size());
  std::iota(vars.begin(), vars.end(), 0);
  std::shuffle(vars.begin(), vars.end(), rng);
  for (std::size_t k = 0; k < count; ++k) {
    const auto& v = scm.endogenous[vars[k]];
    iota.assignments[v.name] = v.domain.label(uniform(rng, 0, v.domain.size() - 1));
  }
  return iota;
}

Abstraction random_abstraction(std::mt19937& rng, const RandomAbstractionOptions& options) {
  Abstraction a;
  auto source = random_scm(rng, options.models);
  auto target = random_scm(rng, options.models);
  target->name = "random-target";
  for (std::size_t i = 0; i < target->endogenous.size(); ++i) target->endogenous[i].name = "Y" + std::to_string(i);
  for (std::size_t i = 0; i < target->exogenous.size(); ++i) target->exogenous[i].name = "V" + std::to_string(i);
  a.source = source;
  a.target = target;
  a.source_ref = "source.scm";
  a.target_ref = "target.scm";
  a.direction = coin(rng, options.reversed) ? Direction::MacroToMicro : Direction::MicroToMacro;

  const std::size_t ns = source->endogenous.size();
  const std::size_t nt = target->endogenous.size();
  Matrix nm(ns, nt);
  for (std::size_t r = 0; r < ns; ++r) fill_row(rng, nm, r, options.unmapped_row, options.stochastic_row);
  a.structural.node_map = nm;
  const bool deterministic = nm.is_deterministic();

  if (deterministic && coin(rng, options.with_edge_map)) {
    const Dag gs = underlying_graph(*source);
    const Dag gt = underlying_graph(*target);
    const auto relevant = relevant_set(a);
    std::vector<std::optional<std::size_t>> f(ns);
    for (auto r : relevant) f[r] = nm.one_hot_column(r);
    auto pick = [&](std::size_t x, std::size_t y) -> std::optional<Morphism> {
      auto h = hom_set(gt, x, y).morphisms;
      if (h.empty()) return std::nullopt;
      return h[uniform(rng, 0, h.size() - 1)];
    };
    // Images of single edges inside R, then extended to paths by composition.
    std::map<std::pair<std::size_t, std::size_t>, std::optional<Morphism>> edge_image;
    for (auto [u, v] : gs.edges())
      if (f[u] && f[v]) edge_image[{u, v}] = pick(*f[u], *f[v]);
    EdgeMap em;
    for (auto u : relevant)
      for (auto v : relevant)
        for (const auto& p : hom_set(gs, u, v).morphisms) {
          std::optional<Morphism> img = Morphism::identity(*f[u]);
          bool inside = true;
          for (std::size_t k = 0; k + 1 < p.nodes.size() && img; ++k) {
            auto it = edge_image.find({p.nodes[k], p.nodes[k + 1]});
            if (it == edge_image.end()) {
              inside = false;
              break;
            }
            img = it->second ? std::optional<Morphism>(compose(*img, *it->second)) : std::nullopt;
          }
          if (!inside) img = pick(*f[u], *f[v]);
          if (img) em.emplace(p, *img);
        }
    if (!em.empty() && coin(rng, options.perturb_edge_map)) {
      auto it = std::next(em.begin(), static_cast<long>(uniform(rng, 0, em.size() - 1)));
      const Morphism key = it->first;
      if (coin(rng, 0.5)) {
        em.erase(it);
      } else if (auto alt = pick(*f[key.source()], *f[key.target()])) {
        it->second = *alt;
      }
    }
    a.structural.edge_map = std::move(em);
  }

  OutcomeMap om;
  if (deterministic && !coin(rng, options.global_outcomes)) {
    om.granularity = Granularity::PerVariable;
    for (std::size_t t = 0; t < nt; ++t) {
      auto pre = preimage(a, t);
      if (pre.empty()) continue;
      std::vector<std::size_t> shape;
      for (auto s : pre) shape.push_back(source->endogenous[s].domain.size());
      Matrix m(product_size(shape), target->endogenous[t].domain.size());
      for (std::size_t r = 0; r < m.rows(); ++r)
        fill_row(rng, m, r, options.zero_outcome_row, options.stochastic_outcome_row);
      om.per_variable.push_back({t, pre, std::move(m)});
    }
  } else {
    om.granularity = Granularity::Global;
    std::vector<std::size_t> sshape, tshape;
    for (const auto& v : source->endogenous) sshape.push_back(v.domain.size());
    for (const auto& v : target->endogenous) tshape.push_back(v.domain.size());
    Matrix m(product_size(sshape), product_size(tshape));
    for (std::size_t r = 0; r < m.rows(); ++r) fill_row(rng, m, r, options.zero_outcome_row, options.stochastic_outcome_row);
    om.global = std::move(m);
  }
  // An empty per-variable map has no text form; it reads back as no map.
  if (om.granularity == Granularity::Global || !om.per_variable.empty()) a.outcomes = std::move(om);
  return a;
}

}  // namespace absaudit
