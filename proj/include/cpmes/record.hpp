#pragma once

#include "cpmes/common.hpp"

#include <nlohmann/json_fwd.hpp>

#include <functional>
#include <optional>
#include <span>

namespace cpmes {

/// Outcome of one expensive contract evaluation.
struct EvaluationRecord {
    DesignPoint design;
    double principal_objective = 0.0;
    std::vector<double> ir_slack_baseline; // one slack per baseline agent
    int feasibility_indicator = 1;         // recruited-agent IR, {0, 1}
    bool feasible = true;                  // all slacks >= 0 and indicator == 1

    /// Builds a record enforcing the consistency rules: a design with no
    /// recruited agents is vacuously indicator-feasible, and `feasible` is
    /// derived, never supplied.
    static EvaluationRecord make(const DesignPoint& design, double principal_objective,
                                 std::vector<double> ir_slack_baseline, int feasibility_indicator);

    double min_slack() const;
};

using Evaluator = std::function<EvaluationRecord(const DesignPoint&)>;

/// Bookkeeping for one outer-loop round.
struct IterationInfo {
    int iteration = 0;                      // 1-based
    std::vector<std::size_t> record_indices;
    bool fallback = false;                  // variance fallback was used
    std::vector<double> probe_pof;          // per-baseline surrogate PoF at the probe design
};

struct OptimizationTrace {
    std::string method;
    std::uint64_t seed = 0;
    int n_baseline = 0;
    std::size_t n_priors = 0;

    std::vector<EvaluationRecord> records;
    std::vector<std::optional<double>> best_feasible_so_far; // parallel to records
    std::vector<IterationInfo> iterations;

    void append(EvaluationRecord rec);
    bool evaluated(const DesignPoint& d) const;
    std::size_t post_prior_count() const { return records.size() - n_priors; }

    /// Best feasible principal objective among the first `count` records.
    std::optional<double> best_feasible_upto(std::size_t count) const;
    std::optional<double> best_feasible() const { return best_feasible_upto(records.size()); }

    std::string to_csv() const;
    nlohmann::json to_json() const;
    static OptimizationTrace from_json(const nlohmann::json& j);
};

/// |best feasible objective within each budget checkpoint - true optimum|.
/// Budgets count post-prior evaluations; when no feasible design has been
/// seen at a checkpoint the sentinel value is reported instead.
std::vector<double> regret_at_budgets(const OptimizationTrace& trace, double true_optimum,
                                      std::span<const int> budgets, double sentinel);

} // namespace cpmes
