#include "cpmes/record.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <sstream>

namespace cpmes {

EvaluationRecord EvaluationRecord::make(const DesignPoint& design, double principal_objective,
                                        std::vector<double> ir_slack_baseline, int feasibility_indicator) {
    if (feasibility_indicator != 0 && feasibility_indicator != 1)
        throw std::invalid_argument("feasibility_indicator must be 0 or 1");
    EvaluationRecord rec;
    rec.design = design;
    rec.principal_objective = principal_objective;
    rec.ir_slack_baseline = std::move(ir_slack_baseline);
    rec.feasibility_indicator = design.n_added == 0 ? 1 : feasibility_indicator;
    rec.feasible = rec.feasibility_indicator == 1 && rec.min_slack() >= 0.0;
    return rec;
}

double EvaluationRecord::min_slack() const {
    double m = std::numeric_limits<double>::infinity();
    for (double s : ir_slack_baseline) m = std::min(m, s);
    return m;
}

void OptimizationTrace::append(EvaluationRecord rec) {
    std::optional<double> best = records.empty() ? std::nullopt : best_feasible_so_far.back();
    if (rec.feasible && (!best || rec.principal_objective > *best)) best = rec.principal_objective;
    records.push_back(std::move(rec));
    best_feasible_so_far.push_back(best);
}

bool OptimizationTrace::evaluated(const DesignPoint& d) const {
    return std::any_of(records.begin(), records.end(),
                       [&](const EvaluationRecord& r) { return r.design == d; });
}

std::optional<double> OptimizationTrace::best_feasible_upto(std::size_t count) const {
    if (count == 0 || records.empty()) return std::nullopt;
    return best_feasible_so_far[std::min(count, records.size()) - 1];
}

std::string OptimizationTrace::to_csv() const {
    std::ostringstream os;
    os << "index,iteration,is_prior,alpha,n_added,objective";
    for (int j = 0; j < n_baseline; ++j) os << ",ir_slack_" << j;
    os << ",phi,feasible,best_feasible\n";

    std::vector<int> iter_of(records.size(), 0);
    for (const auto& it : iterations)
        for (std::size_t idx : it.record_indices)
            if (idx < records.size()) iter_of[idx] = it.iteration;

    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        os << i << ',' << iter_of[i] << ',' << (i < n_priors ? 1 : 0) << ',' << format_double(r.design.alpha)
           << ',' << r.design.n_added << ',' << format_double(r.principal_objective);
        for (int j = 0; j < n_baseline; ++j)
            os << ',' << format_double(j < static_cast<int>(r.ir_slack_baseline.size())
                                           ? r.ir_slack_baseline[static_cast<std::size_t>(j)]
                                           : 0.0);
        os << ',' << r.feasibility_indicator << ',' << (r.feasible ? 1 : 0) << ',';
        if (best_feasible_so_far[i]) os << format_double(*best_feasible_so_far[i]);
        os << '\n';
    }
    return os.str();
}

nlohmann::json OptimizationTrace::to_json() const {
    nlohmann::json j;
    j["method"] = method;
    j["seed"] = seed;
    j["n_baseline"] = n_baseline;
    j["n_priors"] = n_priors;
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : records) {
        recs.push_back({{"alpha", r.design.alpha},
                        {"n_added", r.design.n_added},
                        {"objective", r.principal_objective},
                        {"ir_slack", r.ir_slack_baseline},
                        {"phi", r.feasibility_indicator},
                        {"feasible", r.feasible}});
    }
    j["records"] = std::move(recs);
    nlohmann::json iters = nlohmann::json::array();
    for (const auto& it : iterations) {
        iters.push_back({{"iteration", it.iteration},
                         {"record_indices", it.record_indices},
                         {"fallback", it.fallback},
                         {"probe_pof", it.probe_pof}});
    }
    j["iterations"] = std::move(iters);
    return j;
}

OptimizationTrace OptimizationTrace::from_json(const nlohmann::json& j) {
    OptimizationTrace t;
    t.method = j.at("method").get<std::string>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.n_baseline = j.at("n_baseline").get<int>();
    t.n_priors = j.at("n_priors").get<std::size_t>();
    for (const auto& r : j.at("records")) {
        t.append(EvaluationRecord::make({r.at("alpha").get<double>(), r.at("n_added").get<int>()},
                                        r.at("objective").get<double>(),
                                        r.at("ir_slack").get<std::vector<double>>(), r.at("phi").get<int>()));
    }
    for (const auto& it : j.at("iterations")) {
        IterationInfo info;
        info.iteration = it.at("iteration").get<int>();
        info.record_indices = it.at("record_indices").get<std::vector<std::size_t>>();
        info.fallback = it.at("fallback").get<bool>();
        info.probe_pof = it.at("probe_pof").get<std::vector<double>>();
        t.iterations.push_back(std::move(info));
    }
    return t;
}

std::vector<double> regret_at_budgets(const OptimizationTrace& trace, double true_optimum,
                                      std::span<const int> budgets, double sentinel) {
    std::vector<double> out;
    out.reserve(budgets.size());
    for (int b : budgets) {
        if (b < 0) throw std::invalid_argument("budget checkpoints must be >= 0");
        std::size_t count = trace.n_priors + static_cast<std::size_t>(b);
        auto best = trace.best_feasible_upto(count);
        out.push_back(best ? std::abs(*best - true_optimum) : sentinel);
    }
    return out;
}

} // namespace cpmes
