#pragma once

#include "cpmes/loop.hpp"

namespace cpmes {

/// Constrained EI over the unevaluated lattice; incumbent is the best
/// feasible observation, and until one exists the score is the joint
/// feasibility probability alone.
OptimizationTrace run_cei(const LoopConfig& cfg, const Evaluator& evaluator);

/// Constrained max-value entropy search over the lattice (no Pareto stage).
OptimizationTrace run_cmes(const LoopConfig& cfg, const Evaluator& evaluator);

/// Multi-acquisition ensemble: NSGA-II over the (UCB, EI, PI) feasibility
/// weighted triple, then a uniform random pick of `batch_size` distinct
/// front designs.
OptimizationTrace run_mace(const LoopConfig& cfg, const Evaluator& evaluator, int batch_size);

/// Uniform random search over unevaluated lattice designs.
OptimizationTrace run_random(const LoopConfig& cfg, const Evaluator& evaluator);

/// Uniform draw of up to `count` distinct designs from a candidate pool;
/// MACE's front-selection rule.
std::vector<DesignPoint> uniform_pick(std::vector<DesignPoint> pool, int count, Rng& rng);

} // namespace cpmes
