#include "absaudit/audit.hpp"

#include <map>
#include <set>

#include "absaudit/error.hpp"

namespace absaudit {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::True:
      return "true";
    case Verdict::False:
      return "false";
    case Verdict::NotApplicable:
      return "not_applicable";
  }
  return "not_applicable";
}

Verdict conjunction(std::initializer_list<Verdict> vs) {
  bool na = false;
  for (auto v : vs) {
    if (v == Verdict::False) return Verdict::False;
    if (v == Verdict::NotApplicable) na = true;
  }
  return na ? Verdict::NotApplicable : Verdict::True;
}

std::vector<std::pair<std::string_view, Verdict>> named(const StructuralVerdicts& v) {
  return {{"functionality", v.functionality},       {"surjectivity", v.surjectivity},
          {"injectivity", v.injectivity},           {"bijectivity", v.bijectivity},
          {"functoriality", v.functoriality},       {"fullness", v.fullness},
          {"faithfulness", v.faithfulness},         {"full_faithfulness", v.full_faithfulness},
          {"determinism", v.determinism},           {"micro_to_macro", v.micro_to_macro}};
}

std::vector<std::pair<std::string_view, Verdict>> named(const DistributionalVerdicts& v) {
  return {{"functionality", v.functionality}, {"surjectivity", v.surjectivity},
          {"injectivity", v.injectivity},     {"bijectivity", v.bijectivity},
          {"determinism", v.determinism},     {"micro_to_macro", v.micro_to_macro}};
}

std::vector<std::pair<std::string_view, Verdict>> named(const OutcomeVerdicts& v) {
  return {{"functional", v.functional}, {"surjective", v.surjective},       {"injective", v.injective},
          {"bijective", v.bijective},   {"deterministic", v.deterministic}, {"micro_to_macro", v.micro_to_macro}};
}

std::vector<std::pair<std::string_view, Verdict>> named(const DerivedFlags& v) {
  return {{"perfect_node_invertibility", v.perfect_node_invertibility},
          {"set_node_invertibility", v.set_node_invertibility},
          {"perfect_edge_invertibility", v.perfect_edge_invertibility},
          {"set_edge_invertibility", v.set_edge_invertibility}};
}

namespace {

// Shared by both layers: rows are elements, columns their possible images.
struct MapShape {
  Verdict functional;
  Verdict surjective;
  Verdict injective;
  bool deterministic;
};

MapShape audit_matrix(const Matrix& m) {
  bool total = true;
  bool deterministic = true;
  std::vector<bool> hit(m.cols(), false);
  std::set<std::size_t> images;
  bool distinct = true;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (m.row_is_zero(r)) {
      total = false;
      continue;
    }
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (m(r, c) > 0.0) hit[c] = true;
    auto col = m.one_hot_column(r);
    if (!col) {
      deterministic = false;
      continue;
    }
    if (!images.insert(*col).second) distinct = false;
  }
  bool surjective = true;
  for (bool h : hit) surjective = surjective && h;
  return {verdict(total), verdict(surjective), deterministic ? verdict(distinct) : Verdict::NotApplicable,
          deterministic};
}

}  // namespace

NodeMapAudit audit_node_map(const Abstraction& a) {
  auto s = audit_matrix(a.structural.node_map);
  return {s.functional, s.surjective, s.injective, conjunction({s.surjective, s.injective})};
}

FunctorAudit audit_functor(const Abstraction& a, const EnumerationLimits& limits) {
  FunctorAudit out;
  if (!a.structural.edge_map) {
    out.notes.push_back("no edge map: functor properties not applicable");
    return out;
  }
  const auto& nm = a.structural.node_map;
  const auto relevant = relevant_set(a);
  std::map<std::size_t, std::size_t> f;
  for (auto r : relevant) {
    auto c = nm.one_hot_column(r);
    if (!c) {
      out.notes.push_back("stochastic node map: functor properties not applicable");
      return out;
    }
    f[r] = *c;
  }
  const auto& em = *a.structural.edge_map;
  const Dag gs = underlying_graph(*a.source);
  const Dag gt = underlying_graph(*a.target);
  auto show_s = [&](const Morphism& m) { return to_exponential(gs, m); };
  auto show_t = [&](const Morphism& m) { return to_exponential(gt, m); };

  std::map<std::pair<std::size_t, std::size_t>, std::vector<Morphism>> homs;
  for (auto u : relevant)
    for (auto v : relevant) homs[{u, v}] = hom_set(gs, u, v, limits).morphisms;

  bool functorial = true;
  auto fail = [&](std::string why) {
    if (functorial) out.notes.push_back("not functorial: " + why);
    functorial = false;
  };

  for (const auto& [key, paths] : homs) {
    for (const auto& p : paths) {
      auto it = em.find(p);
      if (it == em.end()) {
        fail(show_s(p) + " has no image");
        continue;
      }
      const Morphism& img = it->second;
      if (img.source() != f[p.source()] || img.target() != f[p.target()])
        fail(show_s(p) + " -> " + show_t(img) + " does not respect endpoints");
      if (p.is_identity() && !img.is_identity()) fail(show_s(p) + " is an identity but " + show_t(img) + " is not");
    }
  }

  if (functorial) {
    for (auto u : relevant)
      for (auto v : relevant)
        for (auto w : relevant)
          for (const auto& p : homs[{u, v}])
            for (const auto& q : homs[{v, w}]) {
              const Morphism lhs = em.at(compose(p, q));
              const Morphism rhs = compose(em.at(p), em.at(q));
              if (lhs != rhs) fail("composite " + show_s(compose(p, q)) + " is not preserved");
            }
  }
  out.functorial = verdict(functorial);

  // Union of images over all source pairs landing on each target pair.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Morphism>> landing;
  for (const auto& [key, paths] : homs)
    for (const auto& p : paths) landing[{f[key.first], f[key.second]}].push_back(em.count(p) ? em.at(p) : p);

  bool full = functorial;
  bool faithful = functorial;
  if (functorial) {
    std::set<std::size_t> image;
    for (const auto& [s, t] : f) image.insert(t);
    for (auto x : image)
      for (auto y : image) {
        const auto& images = landing[{x, y}];
        std::set<Morphism> distinct(images.begin(), images.end());
        if (distinct.size() != images.size() && faithful) {
          faithful = false;
          out.notes.push_back("not faithful: several morphisms land on hom(" + gt.name(x) + ", " + gt.name(y) + ")" +
                              " with a shared image");
        }
        for (const auto& target : hom_set(gt, x, y, limits).morphisms)
          if (!distinct.count(target) && full) {
            full = false;
            out.notes.push_back("not full: " + show_t(target) + " is not the image of any morphism");
          }
      }
  }
  out.full = verdict(full);
  out.faithful = verdict(faithful);
  out.fully_faithful = verdict(full && faithful);
  return out;
}

OutcomeVerdicts audit_outcome_matrix(const Matrix& m, Direction direction) {
  auto s = audit_matrix(m);
  OutcomeVerdicts v;
  v.functional = s.functional;
  v.surjective = s.surjective;
  v.injective = s.injective;
  v.bijective = conjunction({s.surjective, s.injective});
  v.deterministic = verdict(s.deterministic);
  v.micro_to_macro = verdict(direction == Direction::MicroToMacro);
  return v;
}

OutcomeAudit audit_outcome_map(const Abstraction& a) {
  OutcomeAudit out;
  out.overall.micro_to_macro = verdict(a.direction == Direction::MicroToMacro);
  if (!a.outcomes) return out;
  const auto& om = *a.outcomes;
  if (om.granularity == Granularity::Global) {
    out.overall = audit_outcome_matrix(om.global, a.direction);
    return out;
  }
  if (om.per_variable.empty()) return out;
  OutcomeVerdicts all{Verdict::True, Verdict::True, Verdict::True, Verdict::True, Verdict::True,
                      verdict(a.direction == Direction::MicroToMacro)};
  for (const auto& vm : om.per_variable) {
    auto v = audit_outcome_matrix(vm.matrix, a.direction);
    out.per_variable.emplace_back(a.target->endogenous.at(vm.target).name, v);
    all.functional = conjunction({all.functional, v.functional});
    all.surjective = conjunction({all.surjective, v.surjective});
    all.injective = conjunction({all.injective, v.injective});
    all.bijective = conjunction({all.bijective, v.bijective});
    all.deterministic = conjunction({all.deterministic, v.deterministic});
  }
  out.overall = all;
  return out;
}

Modalities audit_modalities(const Abstraction& a) {
  return {verdict(a.structural.node_map.is_deterministic()), verdict(a.direction == Direction::MicroToMacro)};
}

DerivedFlags derive_invertibility(const PropertyProfile& profile) {
  return {profile.structural.bijectivity, profile.structural.surjectivity, profile.structural.full_faithfulness,
          profile.structural.fullness};
}

PropertyProfile audit(const Abstraction& a, const EnumerationLimits& limits) {
  auto report = validate_abstraction(a);
  if (report.has_errors()) {
    std::string first;
    for (const auto& d : report.defects)
      if (d.severity == Severity::Error) {
        first = d.message;
        break;
      }
    throw InvalidArgument("abstraction does not validate: " + first);
  }
  PropertyProfile p;
  for (const auto& d : report.defects) p.notes.push_back("warning: " + d.message);

  auto nodes = audit_node_map(a);
  auto functor = audit_functor(a, limits);
  auto modal = audit_modalities(a);
  p.structural = {nodes.functional,  nodes.surjective, nodes.injective,          nodes.bijective,
                  functor.functorial, functor.full,    functor.faithful,         functor.fully_faithful,
                  modal.structural_deterministic,      modal.structural_micro_to_macro};
  p.notes.insert(p.notes.end(), functor.notes.begin(), functor.notes.end());

  auto outcomes = audit_outcome_map(a);
  const auto& o = outcomes.overall;
  p.distributional = {o.functional, o.surjective, o.injective, o.bijective, o.deterministic, o.micro_to_macro};
  p.distributional_breakdown = std::move(outcomes.per_variable);
  p.derived = derive_invertibility(p);
  return p;
}

}  // namespace absaudit
