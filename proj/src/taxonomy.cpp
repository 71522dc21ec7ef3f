#include "absaudit/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <utility>

#include "absaudit/error.hpp"

namespace absaudit {

namespace {

constexpr std::pair<StructuralType, std::string_view> kStructuralNames[] = {
    {StructuralType::Identity, "Identity"},
    {StructuralType::NodePermutation, "NodePermutation"},
    {StructuralType::NodeCoarsening, "NodeCoarsening"},
    {StructuralType::EdgeCoarsening, "EdgeCoarsening"},
    {StructuralType::NodeEmbedding, "NodeEmbedding"},
    {StructuralType::EdgeEmbedding, "EdgeEmbedding"},
    {StructuralType::NodeDropping, "NodeDropping"},
    {StructuralType::EdgeDropping, "EdgeDropping"},
    {StructuralType::CausalReversal, "CausalReversal"},
    {StructuralType::CausalSplitting, "CausalSplitting"},
    {StructuralType::AbstractionReversal, "AbstractionReversal"},
};

constexpr std::pair<DistributionalType, std::string_view> kDistributionalNames[] = {
    {DistributionalType::IdentityOrPermutation, "IdentityOrPermutation"},
    {DistributionalType::Coarsening, "Coarsening"},
    {DistributionalType::Embedding, "Embedding"},
    {DistributionalType::OutcomeDropping, "OutcomeDropping"},
    {DistributionalType::OutcomeSplitting, "OutcomeSplitting"},
    {DistributionalType::AbstractionReversal, "AbstractionReversal"},
};

// CamelCase -> kebab-case.
std::string kebab(std::string_view name) {
  std::string out;
  for (char c : name) {
    if (std::isupper(static_cast<unsigned char>(c))) {
      if (!out.empty()) out += '-';
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      out += c;
    }
  }
  return out;
}

// Binary model over `vars` with X = OR(parents) XOR U_X; roots get a fair
// exogenous bit, every other variable a 0.1 noise bit, all independent.
std::shared_ptr<const Scm> binary_model(std::string name, const std::vector<std::string>& vars,
                                        const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  auto scm = std::make_shared<Scm>();
  scm->name = std::move(name);
  const FiniteDomain bit({"0", "1"});
  for (const auto& v : vars) scm->endogenous.push_back({v, bit});
  for (std::size_t i = 0; i < vars.size(); ++i) scm->exogenous.push_back({"U_" + vars[i], bit, i});
  std::vector<double> noise;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    Mechanism m;
    for (auto [p, c] : edges)
      if (c == i) m.parents.push_back(p);
    std::sort(m.parents.begin(), m.parents.end());
    const std::size_t rows = std::size_t{1} << (m.parents.size() + 1);
    for (std::size_t r = 0; r < rows; ++r) {
      // Row-major: the exogenous bit is the last (fastest) coordinate.
      const std::size_t u = r & 1;
      const std::size_t any_parent = (r >> 1) != 0 ? 1 : 0;
      m.table.push_back(any_parent ^ u);
    }
    noise.push_back(m.parents.empty() ? 0.5 : 0.1);
    scm->mechanisms.push_back(std::move(m));
  }
  const std::vector<std::size_t> shape(vars.size(), 2);
  const std::size_t states = product_size(shape);
  scm->exogenous_dist.assign(states, 1.0);
  for (std::size_t s = 0; s < states; ++s) {
    auto values = decode_index(s, shape);
    for (std::size_t i = 0; i < vars.size(); ++i) scm->exogenous_dist[s] *= values[i] ? noise[i] : 1.0 - noise[i];
    // Keeps the committed fixtures readable (0.045 rather than 0.045000000000000005).
    scm->exogenous_dist[s] = std::round(scm->exogenous_dist[s] * 1e12) / 1e12;
  }
  return scm;
}

// One variable with the given labels, X = U_X, U_X uniform.
std::shared_ptr<const Scm> outcome_model(std::string name, std::string var, std::vector<std::string> labels) {
  auto scm = std::make_shared<Scm>();
  scm->name = std::move(name);
  FiniteDomain d(labels);
  scm->endogenous.push_back({var, d});
  scm->exogenous.push_back({"U_" + strip_primes(var), d, 0});
  Mechanism m;
  for (std::size_t i = 0; i < labels.size(); ++i) m.table.push_back(i);
  scm->mechanisms.push_back(std::move(m));
  scm->exogenous_dist.assign(labels.size(), 1.0 / static_cast<double>(labels.size()));
  return scm;
}

struct StructuralSpec {
  std::vector<std::string> micro;
  std::vector<std::pair<std::size_t, std::size_t>> micro_edges;
  std::vector<std::string> macro;
  std::vector<std::pair<std::size_t, std::size_t>> macro_edges;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;  // per micro node
  std::optional<std::vector<std::pair<std::string, std::string>>> edges;
  Direction direction = Direction::MicroToMacro;
};

Abstraction build(const std::string& stem, const StructuralSpec& s) {
  Abstraction a;
  a.source = binary_model(stem + "-source", s.micro, s.micro_edges);
  a.target = binary_model(stem + "-target", s.macro, s.macro_edges);
  a.source_ref = stem + ".source.scm";
  a.target_ref = stem + ".target.scm";
  a.direction = s.direction;
  a.structural.node_map = Matrix(s.micro.size(), s.macro.size());
  for (std::size_t r = 0; r < s.rows.size(); ++r)
    for (auto [c, w] : s.rows[r]) a.structural.node_map(r, c) = w;
  if (s.edges) {
    const Dag gs = underlying_graph(*a.source);
    const Dag gt = underlying_graph(*a.target);
    EdgeMap em;
    for (const auto& [from, to] : *s.edges) em.emplace(parse_exponential(gs, from), parse_exponential(gt, to));
    a.structural.edge_map = std::move(em);
  }
  return a;
}

using Edges = std::vector<std::pair<std::string, std::string>>;

Abstraction build_outcome(const std::string& stem, std::vector<std::string> from, std::vector<std::string> to,
                          const std::vector<std::vector<double>>& rows, Direction direction) {
  Abstraction a;
  const bool reversed = direction == Direction::MacroToMicro;
  a.source = outcome_model(stem + "-source", reversed ? "X'" : "X", std::move(from));
  a.target = outcome_model(stem + "-target", reversed ? "X" : "X'", std::move(to));
  a.source_ref = stem + ".source.scm";
  a.target_ref = stem + ".target.scm";
  a.direction = direction;
  a.structural.node_map = Matrix::identity(1);
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  OutcomeMap om;
  om.per_variable.push_back({0, {0}, std::move(m)});
  a.outcomes = std::move(om);
  return a;
}

Cell to_cell(Verdict v) {
  switch (v) {
    case Verdict::True:
      return Cell::Allowed;
    case Verdict::False:
      return Cell::Disallowed;
    case Verdict::NotApplicable:
      return Cell::NotApplicable;
  }
  return Cell::NotApplicable;
}

bool label_matched(const Abstraction& a) {
  const auto& m = a.structural.node_map;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto c = m.one_hot_column(r);
    if (!c) return false;
    if (strip_primes(a.source->endogenous[r].name) != strip_primes(a.target->endogenous[*c].name)) return false;
  }
  return true;
}

}  // namespace

const std::vector<StructuralType>& all_structural_types() {
  static const std::vector<StructuralType> types = [] {
    std::vector<StructuralType> v;
    for (const auto& [t, n] : kStructuralNames) v.push_back(t);
    return v;
  }();
  return types;
}

const std::vector<DistributionalType>& all_distributional_types() {
  static const std::vector<DistributionalType> types = [] {
    std::vector<DistributionalType> v;
    for (const auto& [t, n] : kDistributionalNames) v.push_back(t);
    return v;
  }();
  return types;
}

std::string_view to_string(StructuralType t) {
  for (const auto& [k, n] : kStructuralNames)
    if (k == t) return n;
  return "?";
}

std::string_view to_string(DistributionalType t) {
  for (const auto& [k, n] : kDistributionalNames)
    if (k == t) return n;
  return "?";
}

std::string_view to_string(Layer l) { return l == Layer::Structural ? "structural" : "distributional"; }

std::optional<StructuralType> structural_type_from_string(std::string_view s) {
  for (const auto& [k, n] : kStructuralNames)
    if (n == s) return k;
  return std::nullopt;
}

std::optional<DistributionalType> distributional_type_from_string(std::string_view s) {
  for (const auto& [k, n] : kDistributionalNames)
    if (n == s) return k;
  return std::nullopt;
}

std::string slug(StructuralType t) { return kebab(to_string(t)); }
std::string slug(DistributionalType t) { return kebab(to_string(t)); }

std::string_view symbol(Cell c) {
  switch (c) {
    case Cell::Allowed:
      return "✓";
    case Cell::Disallowed:
      return "×";
    case Cell::NotApplicable:
      return "-";
  }
  return "-";
}

std::optional<Cell> cell_from_symbol(std::string_view s) {
  if (s == "✓") return Cell::Allowed;
  if (s == "×") return Cell::Disallowed;
  if (s == "-") return Cell::NotApplicable;
  return std::nullopt;
}

const std::vector<std::string>& structural_properties() {
  static const std::vector<std::string> rows = {
      "Functionality", "Surjectivity", "Injectivity",       "Bijectivity",    "Functoriality",
      "Fullness",      "Faithfulness", "FullyFaithfulness", "NonDeterminism", "MacroToMicro"};
  return rows;
}

const std::vector<std::string>& distributional_properties() {
  static const std::vector<std::string> rows = {"Functionality", "Surjectivity",   "Injectivity",
                                                "Bijectivity",   "NonDeterminism", "MacroToMicro"};
  return rows;
}

std::string strip_primes(std::string_view label) {
  while (!label.empty() && label.back() == '\'') label.remove_suffix(1);
  return std::string(label);
}

Abstraction canonical_witness(StructuralType t) {
  const std::vector<std::string> ab = {"A", "B"}, abc = {"A", "B", "C"};
  const std::vector<std::string> ab_ = {"A'", "B'"}, abc_ = {"A'", "B'", "C'"};
  const std::vector<std::pair<std::size_t, std::size_t>> e01 = {{0, 1}}, chain = {{0, 1}, {1, 2}};
  const std::string stem = slug(t);
  StructuralSpec s;
  switch (t) {
    case StructuralType::Identity:
      s = {ab, e01, ab_, e01, {{{0, 1.0}}, {{1, 1.0}}}, Edges{{"A^A", "A'^A'"}, {"B^B", "B'^B'"}, {"A^B", "A'^B'"}}};
      break;
    case StructuralType::NodePermutation:
      s = {ab, e01, ab_, e01, {{{1, 1.0}}, {{0, 1.0}}}, Edges{{"A^A", "B'^B'"}, {"B^B", "A'^A'"}}};
      break;
    case StructuralType::NodeCoarsening:
      s = {abc, chain, ab_, e01, {{{0, 1.0}}, {{1, 1.0}}, {{1, 1.0}}},
           Edges{{"A^A", "A'^A'"},
                 {"B^B", "B'^B'"},
                 {"C^C", "B'^B'"},
                 {"A^B", "A'^B'"},
                 {"B^C", "B'^B'"},
                 {"A^B^C", "A'^B'"}}};
      break;
    case StructuralType::EdgeCoarsening:
      s = {abc, {{0, 1}, {1, 2}, {0, 2}}, abc_, chain, {{{0, 1.0}}, {{1, 1.0}}, {{2, 1.0}}},
           Edges{{"A^A", "A'^A'"},
                 {"B^B", "B'^B'"},
                 {"C^C", "C'^C'"},
                 {"A^B", "A'^B'"},
                 {"B^C", "B'^C'"},
                 {"A^C", "A'^B'^C'"},
                 {"A^B^C", "A'^B'^C'"}}};
      break;
    case StructuralType::NodeEmbedding:
      s = {{"B", "C"}, e01, abc_, chain, {{{1, 1.0}}, {{2, 1.0}}},
           Edges{{"B^B", "B'^B'"}, {"C^C", "C'^C'"}, {"B^C", "B'^C'"}}};
      break;
    case StructuralType::EdgeEmbedding:
      s = {abc, chain, abc_, {{0, 1}, {1, 2}, {0, 2}}, {{{0, 1.0}}, {{1, 1.0}}, {{2, 1.0}}},
           Edges{{"A^A", "A'^A'"},
                 {"B^B", "B'^B'"},
                 {"C^C", "C'^C'"},
                 {"A^B", "A'^B'"},
                 {"B^C", "B'^C'"},
                 {"A^B^C", "A'^B'^C'"}}};
      break;
    case StructuralType::NodeDropping:
      s = {abc, chain, {"A'", "C'"}, e01, {{{0, 1.0}}, {}, {{1, 1.0}}},
           Edges{{"A^A", "A'^A'"}, {"C^C", "C'^C'"}, {"A^B^C", "A'^C'"}}};
      break;
    case StructuralType::EdgeDropping:
      s = {abc, chain, abc_, {{1, 2}}, {{{0, 1.0}}, {{1, 1.0}}, {{2, 1.0}}},
           Edges{{"A^A", "A'^A'"}, {"B^B", "B'^B'"}, {"C^C", "C'^C'"}, {"B^C", "B'^C'"}}};
      break;
    case StructuralType::CausalReversal:
      s = {ab, e01, ab_, {{1, 0}}, {{{0, 1.0}}, {{1, 1.0}}}, Edges{{"A^A", "A'^A'"}, {"B^B", "B'^B'"}}};
      break;
    case StructuralType::CausalSplitting:
      s = {ab, e01, ab_, e01, {{{0, 0.5}, {1, 0.5}}, {{1, 1.0}}}, std::nullopt};
      break;
    case StructuralType::AbstractionReversal:
      s = {ab_, e01, ab, e01, {{{0, 1.0}}, {{1, 1.0}}},
           Edges{{"A'^A'", "A^A"}, {"B'^B'", "B^B"}, {"A'^B'", "A^B"}}, Direction::MacroToMicro};
      break;
  }
  return build(stem, s);
}

Abstraction canonical_witness(DistributionalType t) {
  const std::string stem = "dist-" + slug(t);
  const Direction up = Direction::MicroToMacro;
  switch (t) {
    case DistributionalType::IdentityOrPermutation:
      return build_outcome(stem, {"0", "1"}, {"0", "1"}, {{0, 1}, {1, 0}}, up);
    case DistributionalType::Coarsening:
      return build_outcome(stem, {"0", "1", "2"}, {"0", "1"}, {{1, 0}, {0, 1}, {0, 1}}, up);
    case DistributionalType::Embedding:
      return build_outcome(stem, {"0", "1"}, {"0", "1", "2"}, {{0, 1, 0}, {0, 0, 1}}, up);
    case DistributionalType::OutcomeDropping:
      return build_outcome(stem, {"0", "1", "2"}, {"0", "1"}, {{0, 0}, {1, 0}, {0, 1}}, up);
    case DistributionalType::OutcomeSplitting:
      return build_outcome(stem, {"0", "1"}, {"0", "1"}, {{0.5, 0.5}, {0, 1}}, up);
    case DistributionalType::AbstractionReversal:
      return build_outcome(stem, {"0", "1"}, {"0", "1"}, {{1, 0}, {0, 1}}, Direction::MacroToMicro);
  }
  throw InvalidArgument("unknown distributional type");
}

std::vector<Cell> structural_column(const Abstraction& a, const EnumerationLimits& limits) {
  const auto p = audit(a, limits);
  const auto& s = p.structural;
  const bool reversed = s.micro_to_macro == Verdict::False;
  const bool stochastic = s.determinism == Verdict::False;
  const Verdict function_rows[] = {s.functionality, s.surjectivity,  s.injectivity,  s.bijectivity,
                                   s.functoriality, s.fullness,      s.faithfulness, s.full_faithfulness};
  std::vector<Cell> col;
  for (auto v : function_rows) {
    if (reversed)
      col.push_back(Cell::NotApplicable);
    else if (stochastic || s.functionality != Verdict::True)
      col.push_back(Cell::Disallowed);
    else
      col.push_back(to_cell(v));
  }
  col.push_back(stochastic ? Cell::Allowed : Cell::NotApplicable);
  col.push_back(reversed ? Cell::Allowed : Cell::NotApplicable);
  return col;
}

std::vector<Cell> distributional_column(const Abstraction& a) {
  const auto p = audit(a);
  const auto& d = p.distributional;
  const bool reversed = d.micro_to_macro == Verdict::False;
  const bool stochastic = d.determinism == Verdict::False;
  const Verdict function_rows[] = {d.functionality, d.surjectivity, d.injectivity, d.bijectivity};
  std::vector<Cell> col;
  for (auto v : function_rows) {
    if (reversed || stochastic || d.functionality != Verdict::True)
      col.push_back(Cell::Disallowed);
    else
      col.push_back(to_cell(v));
  }
  col.push_back(stochastic ? Cell::Allowed : Cell::NotApplicable);
  col.push_back(reversed ? Cell::Allowed : Cell::NotApplicable);
  return col;
}

PropertyMatrix structural_matrix(const EnumerationLimits& limits) {
  PropertyMatrix m;
  m.layer = Layer::Structural;
  m.rows = structural_properties();
  m.cells.assign(m.rows.size(), {});
  for (auto t : all_structural_types()) {
    m.cols.emplace_back(to_string(t));
    auto col = structural_column(canonical_witness(t), limits);
    for (std::size_t r = 0; r < col.size(); ++r) m.cells[r].push_back(col[r]);
  }
  return m;
}

PropertyMatrix distributional_matrix() {
  PropertyMatrix m;
  m.layer = Layer::Distributional;
  m.rows = distributional_properties();
  m.cells.assign(m.rows.size(), {});
  for (auto t : all_distributional_types()) {
    m.cols.emplace_back(to_string(t));
    auto col = distributional_column(canonical_witness(t));
    for (std::size_t r = 0; r < col.size(); ++r) m.cells[r].push_back(col[r]);
  }
  return m;
}

MatrixDiff diff_matrices(const PropertyMatrix& computed, const PropertyMatrix& expected) {
  MatrixDiff d;
  d.total = expected.size();
  if (computed.layer != expected.layer) d.shape_errors.push_back("layers differ");
  if (computed.rows != expected.rows) d.shape_errors.push_back("row labels differ");
  if (computed.cols != expected.cols) d.shape_errors.push_back("column labels differ");
  if (!d.shape_errors.empty()) return d;
  for (std::size_t r = 0; r < expected.rows.size(); ++r)
    for (std::size_t c = 0; c < expected.cols.size(); ++c) {
      const Cell got = computed.cells.at(r).at(c);
      const Cell want = expected.cells.at(r).at(c);
      if (got == want)
        ++d.matching;
      else
        d.mismatches.push_back({expected.rows[r], expected.cols[c], got, want});
    }
  return d;
}

DetectedTypes detect_types(const Abstraction& a, const EnumerationLimits& limits) {
  DetectedTypes out;
  const auto p = audit(a, limits);
  const auto& s = p.structural;
  const auto T = Verdict::True;
  const auto F = Verdict::False;
  const bool up = s.micro_to_macro == T;
  const bool det = s.determinism == T;
  const bool functional = s.functionality == T;
  const bool bijective_total = det && functional && s.bijectivity == T;

  if (up) {
    if (bijective_total && label_matched(a) &&
        (!a.structural.edge_map || s.full_faithfulness == T))
      out.structural.push_back(StructuralType::Identity);
    if (bijective_total && !label_matched(a)) out.structural.push_back(StructuralType::NodePermutation);
    if (det && functional && s.surjectivity == T && s.injectivity == F)
      out.structural.push_back(StructuralType::NodeCoarsening);
    if (bijective_total && s.functoriality == T && s.faithfulness == F)
      out.structural.push_back(StructuralType::EdgeCoarsening);
    if (det && functional && s.injectivity == T && s.surjectivity == F)
      out.structural.push_back(StructuralType::NodeEmbedding);
    if (bijective_total && s.functoriality == T && s.fullness == F)
      out.structural.push_back(StructuralType::EdgeEmbedding);
    if (!functional) out.structural.push_back(StructuralType::NodeDropping);

    if (det) {
      // Look for micro causal links whose images are unlinked or linked backwards.
      const Dag gs = underlying_graph(*a.source);
      const Dag gt = underlying_graph(*a.target);
      const auto relevant = relevant_set(a);
      bool dropped = false;
      bool reversed_link = false;
      for (auto u : relevant)
        for (auto v : relevant) {
          if (u == v || hom_set(gs, u, v, limits).morphisms.empty()) continue;
          const auto fu = *a.structural.node_map.one_hot_column(u);
          const auto fv = *a.structural.node_map.one_hot_column(v);
          if (fu == fv) continue;
          const bool forward = !hom_set(gt, fu, fv, limits).morphisms.empty();
          const bool backward = !hom_set(gt, fv, fu, limits).morphisms.empty();
          if (!forward && !backward) dropped = true;
          if (!forward && backward) reversed_link = true;
        }
      if (dropped) out.structural.push_back(StructuralType::EdgeDropping);
      if (reversed_link) out.structural.push_back(StructuralType::CausalReversal);
    }
    if (!det) out.structural.push_back(StructuralType::CausalSplitting);
  } else {
    out.structural.push_back(StructuralType::AbstractionReversal);
  }

  if (a.outcomes) {
    const auto& d = p.distributional;
    if (d.micro_to_macro == T) {
      const bool odet = d.determinism == T;
      const bool ofun = d.functionality == T;
      if (odet && ofun && d.bijectivity == T) out.distributional.push_back(DistributionalType::IdentityOrPermutation);
      if (odet && ofun && d.surjectivity == T && d.injectivity == F)
        out.distributional.push_back(DistributionalType::Coarsening);
      if (odet && ofun && d.injectivity == T && d.surjectivity == F)
        out.distributional.push_back(DistributionalType::Embedding);
      if (!ofun) out.distributional.push_back(DistributionalType::OutcomeDropping);
      if (!odet) out.distributional.push_back(DistributionalType::OutcomeSplitting);
    } else {
      out.distributional.push_back(DistributionalType::AbstractionReversal);
    }
  }
  return out;
}

}  // namespace absaudit
