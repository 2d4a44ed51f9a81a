#include "cpmes/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

namespace cpmes {

bool dominates(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dominance: objective count mismatch");
    bool strictly_better = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return false;
        if (a[i] > b[i]) strictly_better = true;
    }
    return strictly_better;
}

std::vector<std::vector<int>> non_dominated_sort(const std::vector<ScoredDesign>& population) {
    const int n = static_cast<int>(population.size());
    if (n == 0) throw std::invalid_argument("non_dominated_sort: empty population");

    std::vector<std::vector<int>> dominated_by(static_cast<std::size_t>(n));
    std::vector<int> domination_count(static_cast<std::size_t>(n), 0);
    std::vector<std::vector<int>> fronts(1);

    for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
            if (p == q) continue;
            if (dominates(population[static_cast<std::size_t>(p)].objectives,
                          population[static_cast<std::size_t>(q)].objectives))
                dominated_by[static_cast<std::size_t>(p)].push_back(q);
            else if (dominates(population[static_cast<std::size_t>(q)].objectives,
                               population[static_cast<std::size_t>(p)].objectives))
                ++domination_count[static_cast<std::size_t>(p)];
        }
        if (domination_count[static_cast<std::size_t>(p)] == 0) fronts[0].push_back(p);
    }

    std::size_t i = 0;
    while (!fronts[i].empty()) {
        std::vector<int> next;
        for (int p : fronts[i]) {
            for (int q : dominated_by[static_cast<std::size_t>(p)]) {
                if (--domination_count[static_cast<std::size_t>(q)] == 0) next.push_back(q);
            }
        }
        ++i;
        fronts.push_back(std::move(next));
    }
    fronts.pop_back(); // last front is always empty
    return fronts;
}

std::vector<double> crowding_distance(const std::vector<ScoredDesign>& front) {
    const std::size_t n = front.size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, 0.0);
    if (n == 0) return dist;
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), inf);
        return dist;
    }
    const std::size_t m = front[0].objectives.size();
    std::vector<std::size_t> order(n);
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t j = 0; j < n; ++j) order[j] = j;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return front[a].objectives[k] < front[b].objectives[k];
        });
        double span = front[order.back()].objectives[k] - front[order.front()].objectives[k];
        dist[order.front()] = inf;
        dist[order.back()] = inf;
        if (span <= 0.0) continue; // no spread in this objective
        for (std::size_t j = 1; j + 1 < n; ++j) {
            if (dist[order[j]] == inf) continue;
            dist[order[j]] += (front[order[j + 1]].objectives[k] - front[order[j - 1]].objectives[k]) / span;
        }
    }
    return dist;
}

namespace {

struct Genome {
    double alpha;
    int n_added;
};

struct Individual {
    Genome genome;
    DesignPoint design;
    std::vector<double> objectives;
    int rank = 0;
    double crowding = 0.0;
};

void check_finite(const std::vector<double>& objs, const DesignPoint& d) {
    for (double v : objs)
        if (!std::isfinite(v))
            throw EvaluationError("non-finite objective value at design (alpha=" + format_double(d.alpha) +
                                  ", n_added=" + std::to_string(d.n_added) + ")");
}

} // namespace

ParetoFront exhaustive_front(const MultiObjectiveFn& evaluate, const DesignLattice& lattice) {
    std::vector<ScoredDesign> all;
    all.reserve(lattice.size());
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        DesignPoint d = lattice.at(i);
        auto objs = evaluate(d);
        check_finite(objs, d);
        all.push_back({d, std::move(objs)});
    }
    auto fronts = non_dominated_sort(all);
    ParetoFront out;
    for (int idx : fronts[0]) out.members.push_back(all[static_cast<std::size_t>(idx)]);
    return out;
}

ParetoFront nsga2(const MultiObjectiveFn& evaluate, const DesignLattice& lattice, const Nsga2Config& config) {
    if (lattice.size() == 0) throw std::invalid_argument("nsga2: empty lattice");
    if (config.exhaustive) return exhaustive_front(evaluate, lattice);
    if (config.population < 2 || config.generations < 1)
        throw std::invalid_argument("nsga2: population must be >= 2 and generations >= 1");

    Rng rng = Rng::derive(config.seed, 0x6e736761u);

    // Evaluations are memoized per design; the archive also backs the final
    // dominance filter so no returned member is dominated by anything seen.
    std::map<std::pair<double, int>, std::vector<double>> archive;
    auto score = [&](const DesignPoint& d) -> const std::vector<double>& {
        auto key = std::make_pair(d.alpha, d.n_added);
        auto it = archive.find(key);
        if (it == archive.end()) {
            auto objs = evaluate(d);
            check_finite(objs, d);
            it = archive.emplace(key, std::move(objs)).first;
        }
        return it->second;
    };

    auto to_design = [&](const Genome& g) -> DesignPoint {
        if (config.snap_to_lattice) return lattice.snap(g.alpha, g.n_added);
        double a = std::clamp(g.alpha, lattice.alpha_values.front(), lattice.alpha_values.back());
        return DesignPoint{a, std::clamp(g.n_added, 0, lattice.max_added)};
    };

    auto make_individual = [&](const Genome& g) {
        Individual ind;
        ind.genome = g;
        ind.design = to_design(g);
        ind.objectives = score(ind.design);
        return ind;
    };

    const int pop_size = config.population;
    std::vector<Individual> pop;
    pop.reserve(static_cast<std::size_t>(pop_size));
    for (int i = 0; i < pop_size; ++i) {
        std::size_t idx = static_cast<std::size_t>(rng.uniform_int(lattice.size()));
        DesignPoint d = lattice.at(idx);
        pop.push_back(make_individual({d.alpha, d.n_added}));
    }

    auto assign_rank_crowding = [&](std::vector<Individual>& v) {
        std::vector<ScoredDesign> scored(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) scored[i] = {v[i].design, v[i].objectives};
        auto fronts = non_dominated_sort(scored);
        for (std::size_t r = 0; r < fronts.size(); ++r) {
            std::vector<ScoredDesign> f;
            for (int idx : fronts[r]) f.push_back(scored[static_cast<std::size_t>(idx)]);
            auto cd = crowding_distance(f);
            for (std::size_t j = 0; j < fronts[r].size(); ++j) {
                v[static_cast<std::size_t>(fronts[r][j])].rank = static_cast<int>(r);
                v[static_cast<std::size_t>(fronts[r][j])].crowding = cd[j];
            }
        }
        return fronts;
    };

    assign_rank_crowding(pop);

    auto tournament = [&](const std::vector<Individual>& v) -> const Individual& {
        const Individual& a = v[static_cast<std::size_t>(rng.uniform_int(v.size()))];
        const Individual& b = v[static_cast<std::size_t>(rng.uniform_int(v.size()))];
        if (a.rank != b.rank) return a.rank < b.rank ? a : b;
        return a.crowding >= b.crowding ? a : b;
    };

    const double alpha_lo = lattice.alpha_values.front();
    const double alpha_hi = lattice.alpha_values.back();

    auto sbx = [&](double p1, double p2) -> std::pair<double, double> {
        if (std::abs(p1 - p2) < 1e-14) return {p1, p2};
        double u = rng.uniform();
        double beta;
        if (u <= 0.5)
            beta = std::pow(2.0 * u, 1.0 / (config.sbx_eta + 1.0));
        else
            beta = std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (config.sbx_eta + 1.0));
        double c1 = 0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2);
        double c2 = 0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2);
        return {std::clamp(c1, alpha_lo, alpha_hi), std::clamp(c2, alpha_lo, alpha_hi)};
    };

    auto mutate = [&](Genome& g) {
        if (rng.uniform() < config.mutation_prob) {
            g.alpha = std::clamp(g.alpha + config.alpha_mutation_sigma * rng.normal(), alpha_lo, alpha_hi);
        }
        if (rng.uniform() < config.mutation_prob) {
            g.n_added = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(lattice.max_added) + 1));
        }
    };

    for (int gen = 0; gen < config.generations; ++gen) {
        std::vector<Individual> offspring;
        offspring.reserve(static_cast<std::size_t>(pop_size));
        while (static_cast<int>(offspring.size()) < pop_size) {
            Genome g1 = tournament(pop).genome;
            Genome g2 = tournament(pop).genome;
            if (rng.uniform() < config.crossover_prob) {
                auto [a1, a2] = sbx(g1.alpha, g2.alpha);
                g1.alpha = a1;
                g2.alpha = a2;
                if (rng.uniform() < 0.5) std::swap(g1.n_added, g2.n_added);
            }
            mutate(g1);
            mutate(g2);
            offspring.push_back(make_individual(g1));
            if (static_cast<int>(offspring.size()) < pop_size) offspring.push_back(make_individual(g2));
        }

        std::vector<Individual> merged = pop;
        merged.insert(merged.end(), offspring.begin(), offspring.end());
        auto fronts = assign_rank_crowding(merged);

        std::vector<Individual> next;
        next.reserve(static_cast<std::size_t>(pop_size));
        for (const auto& front : fronts) {
            if (static_cast<int>(next.size() + front.size()) <= pop_size) {
                for (int idx : front) next.push_back(merged[static_cast<std::size_t>(idx)]);
            } else {
                std::vector<int> rest(front.begin(), front.end());
                std::stable_sort(rest.begin(), rest.end(), [&](int a, int b) {
                    return merged[static_cast<std::size_t>(a)].crowding > merged[static_cast<std::size_t>(b)].crowding;
                });
                for (int idx : rest) {
                    if (static_cast<int>(next.size()) >= pop_size) break;
                    next.push_back(merged[static_cast<std::size_t>(idx)]);
                }
            }
            if (static_cast<int>(next.size()) >= pop_size) break;
        }
        pop = std::move(next);
    }

    // Front 0 of the final population, deduplicated by design (first by
    // genome order wins), then pruned against the evaluation archive.
    std::vector<ScoredDesign> scored(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) scored[i] = {pop[i].design, pop[i].objectives};
    auto fronts = non_dominated_sort(scored);

    ParetoFront out;
    for (int idx : fronts[0]) {
        const auto& cand = scored[static_cast<std::size_t>(idx)];
        bool dup = false;
        for (const auto& m : out.members)
            if (m.design == cand.design) {
                dup = true;
                break;
            }
        if (dup) continue;
        bool beaten = false;
        for (const auto& [key, objs] : archive) {
            if (key.first == cand.design.alpha && key.second == cand.design.n_added) continue;
            if (dominates(objs, cand.objectives)) {
                beaten = true;
                break;
            }
        }
        if (!beaten) out.members.push_back(cand);
    }
    return out;
}

} // namespace cpmes
