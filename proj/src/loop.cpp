#include "cpmes/loop.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

namespace cpmes {

namespace stream {
constexpr std::uint64_t priors = 0x7052494fu;
constexpr std::uint64_t nsga = 0x4e534741u;
constexpr std::uint64_t mes = 0x4d4553u;
constexpr std::uint64_t mes_grid = 0x4d475244u;
constexpr std::uint64_t hyper = 0x48595045u;
} // namespace stream

void ProblemConfig::validate() const {
    if (n_baseline < 1) throw std::invalid_argument("n_baseline must be >= 1");
    if (max_added < 0) throw std::invalid_argument("max_added must be >= 0");
    if (budget < 1) throw std::invalid_argument("budget must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
}

LoopConfig LoopConfig::defaults(EvalMode mode, ProblemConfig problem) {
    problem.validate();
    LoopConfig cfg;
    cfg.problem = problem;
    cfg.mode = mode;
    cfg.lattice = DesignLattice::regular(101, problem.max_added);
    cfg.schedule = BetaSchedule{0.1, 2};
    cfg.nsga.seed = problem.seed;
    cfg.hyper.seed = problem.seed;

    cfg.objective_kernel = KernelSpec{KernelKind::se_product, {0.2, 0.4}, 1.0, 1.0};
    cfg.ir_kernel = cfg.objective_kernel;
    cfg.phi_kernel = KernelSpec{KernelKind::matern_product_constant, {0.2, 0.4}, 1.0, 1.0};
    return cfg;
}

namespace {

double dataset_noise(const LoopConfig& cfg, const std::vector<double>& targets) {
    if (cfg.mode == EvalMode::synthetic) return cfg.noise_variance_synthetic;
    double mean = 0.0;
    for (double t : targets) mean += t;
    mean /= std::max<std::size_t>(targets.size(), 1);
    double var = 0.0;
    for (double t : targets) var += (t - mean) * (t - mean);
    var /= std::max<std::size_t>(targets.size(), 1);
    double sd = std::sqrt(var);
    if (sd <= 0.0) sd = 1.0;
    double noise_sd = cfg.noise_std_fraction_marl * sd;
    return noise_sd * noise_sd;
}

FittedGP fit_one(const LoopConfig& cfg, const KernelSpec& base, const std::vector<DesignPoint>& points,
                 const std::vector<double>& targets, std::uint64_t hyper_index) {
    Dataset data;
    data.points = points;
    data.targets = targets;
    data.noise_variance = dataset_noise(cfg, targets);

    DesignSpace space{cfg.lattice.alpha_values.front(), cfg.lattice.alpha_values.back(), cfg.lattice.max_added};
    FitOptions opts{true};

    KernelSpec spec = base;
    if (cfg.hyper.enabled) {
        HyperFitConfig h = cfg.hyper;
        h.seed = Rng::derive(cfg.problem.seed, stream::hyper, hyper_index).next_u64();
        spec = fit_lengthscales(data, base, space, h, opts);
    }
    return FittedGP::fit(std::move(data), spec, space, opts);
}

} // namespace

SurrogateSet fit_surrogates(const LoopConfig& cfg, const OptimizationTrace& trace, int t) {
    if (trace.records.empty()) throw std::invalid_argument("fit_surrogates: empty trace");
    const int nb = cfg.problem.n_baseline;

    std::vector<DesignPoint> points;
    std::vector<double> g_targets, phi_targets;
    std::vector<std::vector<double>> ir_targets(static_cast<std::size_t>(nb));
    for (const auto& r : trace.records) {
        points.push_back(r.design);
        g_targets.push_back(r.principal_objective);
        phi_targets.push_back(static_cast<double>(r.feasibility_indicator));
        if (static_cast<int>(r.ir_slack_baseline.size()) != nb)
            throw std::invalid_argument("fit_surrogates: record slack count mismatch");
        for (int j = 0; j < nb; ++j)
            ir_targets[static_cast<std::size_t>(j)].push_back(r.ir_slack_baseline[static_cast<std::size_t>(j)]);
    }

    const std::uint64_t base_index = static_cast<std::uint64_t>(t) * (static_cast<std::uint64_t>(nb) + 2);
    SurrogateSet s{fit_one(cfg, cfg.objective_kernel, points, g_targets, base_index),
                   {},
                   fit_one(cfg, cfg.phi_kernel, points, phi_targets, base_index + 1)};
    s.ir.reserve(static_cast<std::size_t>(nb));
    for (int j = 0; j < nb; ++j)
        s.ir.push_back(fit_one(cfg, cfg.ir_kernel, points, ir_targets[static_cast<std::size_t>(j)],
                               base_index + 2 + static_cast<std::uint64_t>(j)));
    return s;
}

std::vector<GPPosterior> constraint_posteriors(const LoopConfig& cfg, const SurrogateSet& s,
                                               const DesignPoint& x) {
    std::vector<GPPosterior> out;
    out.reserve(s.ir.size() + 1);
    for (const auto& gp : s.ir) out.push_back(gp.predict(x));
    GPPosterior phi = s.phi.predict(x);
    out.push_back(GPPosterior{phi.mean - cfg.phi_threshold, phi.variance}); // slack form
    return out;
}

OptimizationTrace initialize_priors(const LoopConfig& cfg, const Evaluator& evaluator) {
    cfg.problem.validate();
    OptimizationTrace trace;
    trace.method = "cpmes";
    trace.seed = cfg.problem.seed;
    trace.n_baseline = cfg.problem.n_baseline;

    Rng rng = Rng::derive(cfg.problem.seed, stream::priors);
    std::vector<DesignPoint> designs;
    auto add_unique_random = [&](std::size_t want) {
        while (designs.size() < want) {
            DesignPoint d = cfg.lattice.at(static_cast<std::size_t>(rng.uniform_int(cfg.lattice.size())));
            if (std::find(designs.begin(), designs.end(), d) == designs.end()) designs.push_back(d);
        }
    };

    if (cfg.mode == EvalMode::synthetic) {
        designs.push_back(DesignPoint{cfg.lattice.alpha_values.front(), 0});
        designs.push_back(DesignPoint{cfg.lattice.alpha_values.back(), cfg.lattice.max_added});
        add_unique_random(5);
    } else {
        add_unique_random(10);
    }

    for (const auto& d : designs) {
        try {
            trace.append(evaluator(d));
        } catch (const std::exception& e) {
            throw EvaluationError(std::string("prior evaluation failed at (alpha=") + format_double(d.alpha) +
                                  ", n_added=" + std::to_string(d.n_added) + "): " + e.what());
        }
    }
    trace.n_priors = trace.records.size();
    return trace;
}

MultiObjectiveFn build_mo_objectives(const SurrogateSet& s, int t, const BetaSchedule& schedule) {
    double beta = schedule.beta(t);
    const SurrogateSet* sp = &s;
    return [sp, beta](const DesignPoint& x) -> std::vector<double> {
        double af_g = ucb(sp->objective.predict(x), beta);
        double af_phi = ucb(sp->phi.predict(x), beta);
        double pof = 1.0;
        for (const auto& gp : sp->ir) pof *= probability_of_feasibility(gp.predict(x), 0.0);
        return {af_g, af_phi, pof};
    };
}

std::vector<DesignPoint> select_next(const ParetoFront& front, const SurrogateSet& s,
                                     const MaxValueSamples& maxima, int batch_size, const LoopConfig& cfg,
                                     const OptimizationTrace& trace, bool* used_fallback) {
    if (front.empty()) throw std::invalid_argument("select_next: empty Pareto front");
    if (batch_size < 1) throw std::invalid_argument("select_next: batch_size must be >= 1");
    if (used_fallback) *used_fallback = false;

    struct Scored {
        DesignPoint design;
        double score;
    };
    std::vector<Scored> candidates;
    for (const auto& m : front.members) {
        if (trace.evaluated(m.design)) continue;
        bool dup = false;
        for (const auto& c : candidates)
            if (c.design == m.design) {
                dup = true;
                break;
            }
        if (dup) continue;
        auto cons = constraint_posteriors(cfg, s, m.design);
        double score = cmes_score(s.objective.predict(m.design), cons, maxima);
        candidates.push_back({m.design, score});
    }

    if (!candidates.empty()) {
        std::stable_sort(candidates.begin(), candidates.end(), [](const Scored& a, const Scored& b) {
            if (a.score != b.score) return a.score > b.score;
            return design_less(a.design, b.design);
        });
        std::vector<DesignPoint> out;
        for (const auto& c : candidates) {
            if (static_cast<int>(out.size()) >= batch_size) break;
            out.push_back(c.design);
        }
        return out;
    }

    // Whole front already evaluated: exploration fallback over the lattice.
    if (used_fallback) *used_fallback = true;
    std::vector<Scored> rest;
    for (std::size_t i = 0; i < cfg.lattice.size(); ++i) {
        DesignPoint d = cfg.lattice.at(i);
        if (trace.evaluated(d)) continue;
        rest.push_back({d, s.objective.predict(d).variance});
    }
    std::stable_sort(rest.begin(), rest.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return design_less(a.design, b.design);
    });
    std::vector<DesignPoint> out;
    for (const auto& c : rest) {
        if (static_cast<int>(out.size()) >= batch_size) break;
        out.push_back(c.design);
    }
    return out;
}

namespace {

void snapshot_trace(const LoopConfig& cfg, const OptimizationTrace& trace) {
    if (!cfg.snapshot_dir) return;
    std::filesystem::create_directories(*cfg.snapshot_dir);
    std::filesystem::path p = std::filesystem::path(*cfg.snapshot_dir) /
                              (trace.method + "_seed" + std::to_string(trace.seed) + ".json");
    std::ofstream out(p);
    out << trace.to_json().dump(2) << '\n';
}

std::vector<DesignPoint> mes_grid(const LoopConfig& cfg, int t) {
    if (cfg.mode == EvalMode::synthetic || static_cast<std::size_t>(cfg.mes_grid_subset) >= cfg.lattice.size())
        return cfg.lattice.all();
    Rng rng = Rng::derive(cfg.problem.seed, stream::mes_grid, static_cast<std::uint64_t>(t));
    std::vector<std::size_t> idx(cfg.lattice.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    rng.shuffle(idx);
    std::vector<DesignPoint> grid;
    grid.reserve(static_cast<std::size_t>(cfg.mes_grid_subset));
    for (int i = 0; i < cfg.mes_grid_subset; ++i) grid.push_back(cfg.lattice.at(idx[static_cast<std::size_t>(i)]));
    return grid;
}

} // namespace

OptimizationTrace run_cpmes(const LoopConfig& cfg, const Evaluator& evaluator) {
    return run_cpmes(cfg, evaluator, initialize_priors(cfg, evaluator));
}

OptimizationTrace run_cpmes(const LoopConfig& cfg, const Evaluator& evaluator, OptimizationTrace trace) {
    cfg.problem.validate();
    trace.method = "cpmes";

    int remaining = cfg.problem.budget - static_cast<int>(trace.post_prior_count());
    int t = static_cast<int>(trace.iterations.size()) + 1;

    while (remaining > 0) {
        SurrogateSet surr = fit_surrogates(cfg, trace, t);
        MultiObjectiveFn objectives = build_mo_objectives(surr, t, cfg.schedule);

        Nsga2Config nsga = cfg.nsga;
        nsga.seed = Rng::derive(cfg.problem.seed, stream::nsga, static_cast<std::uint64_t>(t)).next_u64();
        ParetoFront front = nsga2(objectives, cfg.lattice, nsga);

        Rng mes_rng = Rng::derive(cfg.problem.seed, stream::mes, static_cast<std::uint64_t>(t));
        auto grid = mes_grid(cfg, t);
        MaxValueSamples maxima = sample_max_values(surr.objective, grid, cfg.max_value_samples, mes_rng);

        bool fallback = false;
        auto batch = select_next(front, surr, maxima, std::min(cfg.problem.batch_size, remaining), cfg, trace,
                                 &fallback);
        if (batch.empty()) break; // lattice exhausted

        IterationInfo info;
        info.iteration = t;
        info.fallback = fallback;
        if (cfg.probe_design) {
            for (const auto& gp : surr.ir)
                info.probe_pof.push_back(probability_of_feasibility(gp.predict(*cfg.probe_design), 0.0));
        }

        for (const auto& d : batch) {
            info.record_indices.push_back(trace.records.size());
            try {
                trace.append(evaluator(d));
            } catch (const std::exception& e) {
                trace.iterations.push_back(std::move(info));
                snapshot_trace(cfg, trace);
                throw EvaluationError(std::string("evaluation failed at iteration ") + std::to_string(t) +
                                      " (alpha=" + format_double(d.alpha) +
                                      ", n_added=" + std::to_string(d.n_added) + "): " + e.what());
            }
        }
        remaining -= static_cast<int>(batch.size());
        trace.iterations.push_back(std::move(info));
        snapshot_trace(cfg, trace);
        ++t;
    }
    return trace;
}

} // namespace cpmes
