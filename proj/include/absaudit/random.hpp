#pragma once

#include <memory>
#include <random>

#include "absaudit/abstraction.hpp"
#include "absaudit/scm.hpp"

namespace absaudit {

struct RandomModelOptions {
  std::size_t min_variables = 1;
  std::size_t max_variables = 4;
  std::size_t max_domain = 2;   // domains have 2..max_domain values
  double edge_probability = 0.5;
  bool independent_exogenous = true;  // otherwise P(U) is an arbitrary joint table
};

/// Random DAG on n nodes; edges only go from lower to higher index, then the
/// node labels are shuffled.
Dag random_dag(std::mt19937& rng, std::size_t n, double edge_probability);

std::shared_ptr<Scm> random_scm(std::mt19937& rng, const RandomModelOptions& options = {});

/// Random intervention on 1..2 variables of `scm`.
Intervention random_intervention(std::mt19937& rng, const Scm& scm);

struct RandomAbstractionOptions {
  RandomModelOptions models{1, 4, 3, 0.5, true};
  double unmapped_row = 0.15;
  double stochastic_row = 0.1;
  double with_edge_map = 0.8;
  double perturb_edge_map = 0.3;
  double zero_outcome_row = 0.1;
  double stochastic_outcome_row = 0.15;
  double global_outcomes = 0.2;
  double reversed = 0.1;
};

/// Random well-formed abstraction between two random models. Edge maps are
/// built functorially from edge images and then sometimes perturbed, so
/// both verdicts occur often.
Abstraction random_abstraction(std::mt19937& rng, const RandomAbstractionOptions& options = {});

}  // namespace absaudit
