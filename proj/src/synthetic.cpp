#include "cpmes/synthetic.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace cpmes {

namespace {

// Random Fourier mixture over the unit square; smooth and seeded.
struct FourierField {
    std::vector<double> amp, fa, fn, phase;

    static FourierField sample(Rng& rng, int components, double max_frequency) {
        FourierField f;
        for (int m = 0; m < components; ++m) {
            f.amp.push_back(rng.normal() / std::sqrt(static_cast<double>(components)));
            f.fa.push_back(rng.uniform(0.25, max_frequency));
            f.fn.push_back(rng.uniform(0.25, max_frequency));
            f.phase.push_back(rng.uniform(0.0, 6.283185307179586));
        }
        return f;
    }

    double operator()(double a, double n) const {
        double v = 0.0;
        for (std::size_t m = 0; m < amp.size(); ++m)
            v += amp[m] * std::cos(6.283185307179586 * (fa[m] * a + fn[m] * n) + phase[m]);
        return v;
    }
};

std::vector<double> field_on_lattice(const FourierField& f, const DesignLattice& lat) {
    std::vector<double> out(lat.size());
    for (std::size_t i = 0; i < lat.size(); ++i) {
        DesignPoint d = lat.at(i);
        double nn = lat.max_added > 0 ? static_cast<double>(d.n_added) / lat.max_added : 0.0;
        out[i] = f(d.alpha, nn);
    }
    return out;
}

} // namespace

bool SyntheticInstance::feasible_at(std::size_t index) const {
    if (phi[index] != 1) return false;
    for (double s : ir_slack[index])
        if (s < 0.0) return false;
    return true;
}

std::size_t SyntheticInstance::feasible_count() const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < lattice.size(); ++i)
        if (feasible_at(i)) ++c;
    return c;
}

EvaluationRecord SyntheticInstance::evaluate(const DesignPoint& design) const {
    std::size_t i = lattice.index_of(design); // throws off-lattice
    return EvaluationRecord::make(design, objective[i], ir_slack[i], phi[i]);
}

Evaluator SyntheticInstance::evaluator() const {
    return [this](const DesignPoint& d) { return evaluate(d); };
}

SyntheticInstance generate_synthetic(std::uint64_t seed, const SyntheticConfig& cfg) {
    if (cfg.n_baseline < 1) throw std::invalid_argument("n_baseline must be >= 1");

    for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
        Rng rng = Rng::derive(seed, 0x53594eu, attempt);

        SyntheticInstance inst;
        inst.lattice = DesignLattice::regular(cfg.alpha_grid_size, cfg.max_added);
        inst.seed = seed;
        inst.n_baseline = cfg.n_baseline;
        const std::size_t n = inst.lattice.size();

        auto g_field = FourierField::sample(rng, cfg.field_components, cfg.field_max_frequency);
        inst.objective = field_on_lattice(g_field, inst.lattice);
        for (double& v : inst.objective) v = cfg.objective_offset + cfg.objective_scale * v;

        // IR slacks: one shared field plus a per-agent component, offset below.
        auto common = field_on_lattice(FourierField::sample(rng, cfg.field_components, cfg.field_max_frequency),
                                       inst.lattice);
        std::vector<std::vector<double>> own(static_cast<std::size_t>(cfg.n_baseline));
        for (auto& o : own)
            o = field_on_lattice(FourierField::sample(rng, cfg.field_components, cfg.field_max_frequency),
                                 inst.lattice);

        // Recruited-agent feasibility: thresholded field, vacuous at n_added = 0.
        auto phi_field = field_on_lattice(FourierField::sample(rng, cfg.field_components, cfg.field_max_frequency),
                                          inst.lattice);
        std::vector<double> phi_vals;
        for (std::size_t i = 0; i < n; ++i)
            if (inst.lattice.at(i).n_added > 0) phi_vals.push_back(phi_field[i]);
        inst.phi.assign(n, 1);
        if (!phi_vals.empty()) {
            std::sort(phi_vals.begin(), phi_vals.end());
            double cut_rank = (1.0 - cfg.phi_pass_fraction) * static_cast<double>(phi_vals.size() - 1);
            double threshold = phi_vals[static_cast<std::size_t>(cut_rank)];
            for (std::size_t i = 0; i < n; ++i)
                if (inst.lattice.at(i).n_added > 0) inst.phi[i] = phi_field[i] >= threshold ? 1 : 0;
        }

        auto slack_at = [&](std::size_t i, int j, double offset) {
            return common[i] + cfg.ir_correlation * own[static_cast<std::size_t>(j)][i] - offset;
        };
        auto feasible_fraction = [&](double offset) {
            std::size_t c = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (inst.phi[i] != 1) continue;
                bool ok = true;
                for (int j = 0; j < cfg.n_baseline && ok; ++j) ok = slack_at(i, j, offset) >= 0.0;
                if (ok) ++c;
            }
            return static_cast<double>(c) / static_cast<double>(n);
        };

        // The feasible fraction is monotone in the shared offset; bisect it
        // onto the target so every seed is comparably constrained.
        double lo = -4.0, hi = 4.0;
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            if (feasible_fraction(mid) > cfg.feasible_fraction_target)
                lo = mid;
            else
                hi = mid;
        }
        double offset = lo; // fraction(lo) >= target > fraction(hi)

        inst.ir_slack.assign(n, std::vector<double>(static_cast<std::size_t>(cfg.n_baseline)));
        for (std::size_t i = 0; i < n; ++i)
            for (int j = 0; j < cfg.n_baseline; ++j)
                inst.ir_slack[i][static_cast<std::size_t>(j)] = slack_at(i, j, offset);

        bool any_feasible = false;
        double best = -std::numeric_limits<double>::infinity();
        inst.max_objective = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            inst.max_objective = std::max(inst.max_objective, inst.objective[i]);
            if (inst.feasible_at(i) && inst.objective[i] > best) {
                best = inst.objective[i];
                inst.optimum_index = i;
                inst.optimum_value = best;
                any_feasible = true;
            }
        }
        if (any_feasible) return inst;
        // degenerate draw; retry with the next sub-seed
    }
    throw EvaluationError("synthetic instance generation failed: no feasible design in 100 attempts");
}

nlohmann::json SyntheticInstance::to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["n_baseline"] = n_baseline;
    j["lattice"] = {{"alpha_values", lattice.alpha_values}, {"max_added", lattice.max_added}};
    j["objective"] = objective;
    j["ir_slack"] = ir_slack;
    j["phi"] = phi;
    j["optimum_index"] = optimum_index;
    j["optimum_value"] = optimum_value;
    j["max_objective"] = max_objective;
    return j;
}

SyntheticInstance SyntheticInstance::from_json(const nlohmann::json& j) {
    SyntheticInstance inst;
    inst.seed = j.at("seed").get<std::uint64_t>();
    inst.n_baseline = j.at("n_baseline").get<int>();
    inst.lattice.alpha_values = j.at("lattice").at("alpha_values").get<std::vector<double>>();
    inst.lattice.max_added = j.at("lattice").at("max_added").get<int>();
    inst.objective = j.at("objective").get<std::vector<double>>();
    inst.ir_slack = j.at("ir_slack").get<std::vector<std::vector<double>>>();
    inst.phi = j.at("phi").get<std::vector<int>>();
    inst.optimum_index = j.at("optimum_index").get<std::size_t>();
    inst.optimum_value = j.at("optimum_value").get<double>();
    inst.max_objective = j.at("max_objective").get<double>();
    return inst;
}

} // namespace cpmes
