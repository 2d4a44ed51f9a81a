#pragma once

#include "cpmes/common.hpp"
#include "cpmes/record.hpp"

#include <nlohmann/json_fwd.hpp>

namespace cpmes {

struct SyntheticConfig {
    int n_baseline = 5;
    int max_added = 3;
    int alpha_grid_size = 101;

    // Smooth-random-field shape. Low frequencies keep the tables learnable
    // by a GP surrogate; amplitudes put regrets in the hundreds-to-thousands.
    int field_components = 8;
    double field_max_frequency = 1.4;
    double objective_offset = 1500.0;
    double objective_scale = 900.0;

    double feasible_fraction_target = 0.17; // of the whole lattice
    double phi_pass_fraction = 0.45;        // among designs with n_added > 0
    double ir_correlation = 0.35;           // weight of each agent's own field
};

/// Ground-truth tables over the design lattice with a known constrained
/// optimum; evaluation is a constant-time lookup.
struct SyntheticInstance {
    DesignLattice lattice;
    std::uint64_t seed = 0;
    int n_baseline = 0;

    std::vector<double> objective;              // per lattice index
    std::vector<std::vector<double>> ir_slack;  // [lattice index][baseline agent]
    std::vector<int> phi;                       // per lattice index
    std::size_t optimum_index = 0;
    double optimum_value = 0.0;
    double max_objective = 0.0; // over the whole lattice; regret sentinel

    bool feasible_at(std::size_t index) const;
    std::size_t feasible_count() const;

    EvaluationRecord evaluate(const DesignPoint& design) const;
    Evaluator evaluator() const;

    nlohmann::json to_json() const;
    static SyntheticInstance from_json(const nlohmann::json& j);
};

SyntheticInstance generate_synthetic(std::uint64_t seed, const SyntheticConfig& cfg = {});

} // namespace cpmes
