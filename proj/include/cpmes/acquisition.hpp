#pragma once

#include "cpmes/common.hpp"
#include "cpmes/gp.hpp"

#include <optional>
#include <span>

namespace cpmes {

/// Exploration factor beta(t) = 2 log(dim pi^2 t^2 / (6 delta)).
struct BetaSchedule {
    double delta = 0.1;      // confidence parameter, in (0, 1]
    int input_dimension = 2; // |alpha| + |N_a|

    void validate() const;
    double beta(int t) const; // t >= 1
};

double ucb(const GPPosterior& post, double beta);

/// Closed-form EI for maximization; max(mean - incumbent, 0) when the
/// variance is zero.
double expected_improvement(const GPPosterior& post, double incumbent);

double probability_of_improvement(const GPPosterior& post, double incumbent);

/// EI times the joint probability of feasibility. Constraint posteriors are
/// passed in slack form (feasible iff latent >= 0). Without a feasible
/// incumbent the score falls back to the feasibility product alone.
double constrained_ei(const GPPosterior& objective, std::span<const GPPosterior> constraints,
                      std::optional<double> incumbent);

struct MaxValueSamples {
    std::vector<double> samples;
    std::size_t count() const { return samples.size(); }
};

/// Samples of the posterior global maximum over a candidate grid via a
/// Gumbel approximation fitted to the pointwise posterior CDFs.
MaxValueSamples sample_max_values(const FittedGP& gp, std::span<const DesignPoint> grid, int count, Rng& rng);

/// Max-value entropy score averaged over the sampled maxima:
/// gamma phi(gamma) / (2 Phi(gamma)) - log Phi(gamma), gamma = (y* - mu)/sigma.
double mes_score(const GPPosterior& post, const MaxValueSamples& maxima);

/// MES information gain on the objective weighted by the joint probability
/// of feasibility of the constraint posteriors (slack form, threshold 0).
double cmes_score(const GPPosterior& objective, std::span<const GPPosterior> constraints,
                  const MaxValueSamples& maxima);

/// Multi-acquisition triple (UCB, EI, PI), each weighted by the joint
/// feasibility probability. Without a feasible incumbent the EI and PI slots
/// carry the feasibility product alone so the triple stays informative.
std::array<double, 3> mace_score(const GPPosterior& objective, std::span<const GPPosterior> constraints,
                                 double beta, std::optional<double> incumbent);

} // namespace cpmes
