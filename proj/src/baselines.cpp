#include "cpmes/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace cpmes {

std::vector<DesignPoint> uniform_pick(std::vector<DesignPoint> pool, int count, Rng& rng) {
    rng.shuffle(pool);
    if (static_cast<int>(pool.size()) > count) pool.resize(static_cast<std::size_t>(count));
    return pool;
}

namespace {

std::vector<DesignPoint> unevaluated(const LoopConfig& cfg, const OptimizationTrace& trace) {
    std::vector<DesignPoint> out;
    for (std::size_t i = 0; i < cfg.lattice.size(); ++i) {
        DesignPoint d = cfg.lattice.at(i);
        if (!trace.evaluated(d)) out.push_back(d);
    }
    return out;
}

/// Deterministic argmax with the shared (lower alpha, lower n_added) tie rule.
std::vector<DesignPoint> top_by_score(std::vector<std::pair<DesignPoint, double>> scored, int count) {
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return design_less(a.first, b.first);
    });
    std::vector<DesignPoint> out;
    for (const auto& [d, s] : scored) {
        if (static_cast<int>(out.size()) >= count) break;
        out.push_back(d);
    }
    return out;
}

// Surrogates are null for strategies that never look at them.
using Selector = std::function<std::vector<DesignPoint>(const SurrogateSet*, const OptimizationTrace&, int t,
                                                        int batch)>;

OptimizationTrace run_lattice_strategy(const LoopConfig& cfg, const Evaluator& evaluator,
                                       const std::string& method, bool needs_surrogates,
                                       const Selector& select) {
    cfg.problem.validate();
    OptimizationTrace trace = initialize_priors(cfg, evaluator);
    trace.method = method;

    int remaining = cfg.problem.budget;
    int t = 1;
    while (remaining > 0) {
        std::optional<SurrogateSet> surr;
        if (needs_surrogates) surr = fit_surrogates(cfg, trace, t);
        auto batch = select(surr ? &*surr : nullptr, trace, t, std::min(cfg.problem.batch_size, remaining));
        if (batch.empty()) break;

        IterationInfo info;
        info.iteration = t;
        for (const auto& d : batch) {
            info.record_indices.push_back(trace.records.size());
            trace.append(evaluator(d));
        }
        remaining -= static_cast<int>(batch.size());
        trace.iterations.push_back(std::move(info));
        ++t;
    }
    return trace;
}

} // namespace

OptimizationTrace run_cei(const LoopConfig& cfg, const Evaluator& evaluator) {
    Selector select = [&cfg](const SurrogateSet* surr, const OptimizationTrace& trace, int, int batch) {
        auto incumbent = trace.best_feasible();
        std::vector<std::pair<DesignPoint, double>> scored;
        for (const auto& d : unevaluated(cfg, trace)) {
            auto cons = constraint_posteriors(cfg, *surr, d);
            scored.emplace_back(d, constrained_ei(surr->objective.predict(d), cons, incumbent));
        }
        if (scored.empty()) return std::vector<DesignPoint>{};
        double best = std::max_element(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
                          return a.second < b.second;
                      })->second;
        if (best <= 0.0) {
            // degenerate scoring; fall back to pure feasibility maximization
            for (auto& [d, s] : scored) {
                auto cons = constraint_posteriors(cfg, *surr, d);
                s = 1.0;
                for (const auto& c : cons) s *= probability_of_feasibility(c, 0.0);
            }
        }
        return top_by_score(std::move(scored), batch);
    };
    return run_lattice_strategy(cfg, evaluator, "cei", true, select);
}

OptimizationTrace run_cmes(const LoopConfig& cfg, const Evaluator& evaluator) {
    Selector select = [&cfg](const SurrogateSet* surr, const OptimizationTrace& trace, int t, int batch) {
        Rng mes_rng = Rng::derive(cfg.problem.seed, 0x4d4553u, static_cast<std::uint64_t>(t));
        auto grid = cfg.lattice.all();
        MaxValueSamples maxima = sample_max_values(surr->objective, grid, cfg.max_value_samples, mes_rng);
        std::vector<std::pair<DesignPoint, double>> scored;
        for (const auto& d : unevaluated(cfg, trace)) {
            auto cons = constraint_posteriors(cfg, *surr, d);
            scored.emplace_back(d, cmes_score(surr->objective.predict(d), cons, maxima));
        }
        return top_by_score(std::move(scored), batch);
    };
    return run_lattice_strategy(cfg, evaluator, "cmes", true, select);
}

OptimizationTrace run_mace(const LoopConfig& cfg, const Evaluator& evaluator, int batch_size) {
    if (batch_size < 1) throw std::invalid_argument("run_mace: batch_size must be >= 1");
    LoopConfig local = cfg;
    local.problem.batch_size = batch_size;

    Selector select = [&local](const SurrogateSet* surr, const OptimizationTrace& trace, int t, int batch) {
        double beta = local.schedule.beta(t);
        auto incumbent = trace.best_feasible();
        MultiObjectiveFn triple = [&](const DesignPoint& d) {
            auto cons = constraint_posteriors(local, *surr, d);
            auto m = mace_score(surr->objective.predict(d), cons, beta, incumbent);
            return std::vector<double>{m[0], m[1], m[2]};
        };

        Nsga2Config nsga = local.nsga;
        nsga.seed = Rng::derive(local.problem.seed, 0x4d4e5347u, static_cast<std::uint64_t>(t)).next_u64();
        ParetoFront front = nsga2(triple, local.lattice, nsga);

        std::vector<DesignPoint> pool;
        for (const auto& m : front.members)
            if (!trace.evaluated(m.design)) pool.push_back(m.design);

        if (pool.empty()) {
            // exhausted front: highest-variance unevaluated design
            std::vector<std::pair<DesignPoint, double>> scored;
            for (const auto& d : unevaluated(local, trace))
                scored.emplace_back(d, surr->objective.predict(d).variance);
            return top_by_score(std::move(scored), batch);
        }

        Rng rng = Rng::derive(local.problem.seed, 0x4d414345u, static_cast<std::uint64_t>(t));
        return uniform_pick(std::move(pool), batch, rng);
    };
    return run_lattice_strategy(local, evaluator, "mace", true, select);
}

OptimizationTrace run_random(const LoopConfig& cfg, const Evaluator& evaluator) {
    Selector select = [&cfg](const SurrogateSet*, const OptimizationTrace& trace, int t, int batch) {
        Rng rng = Rng::derive(cfg.problem.seed, 0x524e44u, static_cast<std::uint64_t>(t));
        return uniform_pick(unevaluated(cfg, trace), batch, rng);
    };
    return run_lattice_strategy(cfg, evaluator, "random", false, select);
}

} // namespace cpmes
