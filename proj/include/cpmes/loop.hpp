#pragma once

#include "cpmes/acquisition.hpp"
#include "cpmes/common.hpp"
#include "cpmes/gp.hpp"
#include "cpmes/pareto.hpp"
#include "cpmes/record.hpp"

#include <optional>
#include <string>

namespace cpmes {

struct ProblemConfig {
    int n_baseline = 5;   // |N_b|
    int max_added = 3;    // N_a upper bound
    double min_return = 0.0;
    int budget = 20;      // post-prior evaluations
    int batch_size = 1;
    std::uint64_t seed = 1;

    void validate() const;
};

enum class EvalMode { synthetic, marl };

struct LoopConfig {
    ProblemConfig problem;
    EvalMode mode = EvalMode::synthetic;
    DesignLattice lattice;
    BetaSchedule schedule;
    Nsga2Config nsga;
    HyperFitConfig hyper;

    int max_value_samples = 10;
    int mes_grid_subset = 512; // marl mode only; synthetic uses the full lattice

    // Observation noise, raw target units: exact tables vs stochastic returns.
    double noise_variance_synthetic = 1e-6;
    double noise_std_fraction_marl = 1e-2; // times the target std

    KernelSpec objective_kernel;
    KernelSpec ir_kernel;
    KernelSpec phi_kernel;
    double phi_threshold = 0.5; // latent level treated as "feasible" for the indicator surrogate

    std::optional<DesignPoint> probe_design; // per-iteration surrogate PoF is logged here
    std::optional<std::string> snapshot_dir;

    static LoopConfig defaults(EvalMode mode, ProblemConfig problem);
};

/// The N_b + 2 fitted surrogates of one outer iteration.
struct SurrogateSet {
    FittedGP objective;
    std::vector<FittedGP> ir;
    FittedGP phi;
};

SurrogateSet fit_surrogates(const LoopConfig& cfg, const OptimizationTrace& trace, int t);

/// Constraint posteriors at a design in slack form (feasible iff latent >= 0):
/// the N_b IR posteriors followed by the shifted indicator posterior.
std::vector<GPPosterior> constraint_posteriors(const LoopConfig& cfg, const SurrogateSet& s, const DesignPoint& x);

/// Bound-corner designs plus seeded random designs (synthetic mode), or ten
/// seeded random designs (MARL mode), evaluated and recorded.
OptimizationTrace initialize_priors(const LoopConfig& cfg, const Evaluator& evaluator);

/// The three cheap objectives: UCB of the principal objective surrogate, UCB
/// of the indicator surrogate, and the product of baseline IR feasibility
/// probabilities. All maximized.
MultiObjectiveFn build_mo_objectives(const SurrogateSet& s, int t, const BetaSchedule& schedule);

/// Top-batch designs from the front by descending entropy score, skipping
/// anything already evaluated; falls back to the highest-variance unevaluated
/// lattice design when the whole front is exhausted.
std::vector<DesignPoint> select_next(const ParetoFront& front, const SurrogateSet& s,
                                     const MaxValueSamples& maxima, int batch_size, const LoopConfig& cfg,
                                     const OptimizationTrace& trace, bool* used_fallback = nullptr);

/// Full outer loop: priors, then fit / front / select / evaluate rounds until
/// the budget is consumed. Bit-reproducible for a fixed config and evaluator.
OptimizationTrace run_cpmes(const LoopConfig& cfg, const Evaluator& evaluator);

/// Resume a partial run; equivalent to the uninterrupted run because every
/// per-iteration random stream is derived from (seed, iteration).
OptimizationTrace run_cpmes(const LoopConfig& cfg, const Evaluator& evaluator, OptimizationTrace partial);

} // namespace cpmes
