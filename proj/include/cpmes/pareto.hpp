#pragma once

#include "cpmes/common.hpp"

#include <functional>
#include <span>

namespace cpmes {

/// A design scored on the cheap multi-objective problem; all objectives are
/// maximized.
struct ScoredDesign {
    DesignPoint design;
    std::vector<double> objectives;
};

struct ParetoFront {
    std::vector<ScoredDesign> members;
    bool empty() const { return members.empty(); }
    std::size_t size() const { return members.size(); }
};

/// a dominates b: >= on all objectives and > on at least one.
bool dominates(std::span<const double> a, std::span<const double> b);

/// Fast non-dominated sort; fronts ordered by rank, each individual in
/// exactly one front (indices into the population).
std::vector<std::vector<int>> non_dominated_sort(const std::vector<ScoredDesign>& population);

/// NSGA-II crowding distances for one front: boundary points per objective
/// get +inf, interior points the normalized cuboid side-length sums.
/// Objectives with zero spread contribute nothing.
std::vector<double> crowding_distance(const std::vector<ScoredDesign>& front);

struct Nsga2Config {
    int population = 100;
    int generations = 50;
    double crossover_prob = 0.9;
    double sbx_eta = 15.0;           // simulated-binary crossover index for alpha
    double mutation_prob = 0.2;      // per gene
    double alpha_mutation_sigma = 0.1;
    std::uint64_t seed = 0;
    bool snap_to_lattice = true;     // keep alpha on the lattice grid; off = continuous alpha
    bool exhaustive = false;         // swap the evolutionary search for full enumeration
};

using MultiObjectiveFn = std::function<std::vector<double>(const DesignPoint&)>;

/// Front 0 of the final population, deduplicated by design and pruned of any
/// member dominated by another design evaluated during the run. Bit
/// reproducible for a fixed seed and deterministic evaluate.
ParetoFront nsga2(const MultiObjectiveFn& evaluate, const DesignLattice& lattice, const Nsga2Config& config);

/// Exact non-dominated set of the whole lattice.
ParetoFront exhaustive_front(const MultiObjectiveFn& evaluate, const DesignLattice& lattice);

} // namespace cpmes
