#include "cpmes/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cpmes {

void BetaSchedule::validate() const {
    if (!(delta > 0.0) || delta > 1.0) throw std::invalid_argument("delta must be in (0, 1]");
    if (input_dimension < 1) throw std::invalid_argument("input_dimension must be >= 1");
}

double BetaSchedule::beta(int t) const {
    validate();
    if (t < 1) throw std::invalid_argument("beta schedule is defined for t >= 1");
    const double pi2 = 9.8696044010893586188344909998762;
    return 2.0 * std::log(static_cast<double>(input_dimension) * pi2 * static_cast<double>(t) *
                          static_cast<double>(t) / (6.0 * delta));
}

double ucb(const GPPosterior& post, double beta) {
    if (beta < 0.0) throw std::invalid_argument("beta must be >= 0");
    return post.mean + std::sqrt(beta) * std::sqrt(std::max(post.variance, 0.0));
}

double expected_improvement(const GPPosterior& post, double incumbent) {
    double sigma = std::sqrt(std::max(post.variance, 0.0));
    double delta = post.mean - incumbent;
    if (sigma == 0.0) return std::max(delta, 0.0);
    double z = delta / sigma;
    return delta * normal_cdf(z) + sigma * normal_pdf(z);
}

double probability_of_improvement(const GPPosterior& post, double incumbent) {
    double sigma = std::sqrt(std::max(post.variance, 0.0));
    if (sigma == 0.0) return post.mean > incumbent ? 1.0 : 0.0;
    return normal_cdf((post.mean - incumbent) / sigma);
}

namespace {

double joint_feasibility(std::span<const GPPosterior> constraints) {
    double w = 1.0;
    for (const auto& c : constraints) w *= probability_of_feasibility(c, 0.0);
    return w;
}

} // namespace

double constrained_ei(const GPPosterior& objective, std::span<const GPPosterior> constraints,
                      std::optional<double> incumbent) {
    double w = joint_feasibility(constraints);
    if (!incumbent.has_value()) return w;
    return expected_improvement(objective, *incumbent) * w;
}

MaxValueSamples sample_max_values(const FittedGP& gp, std::span<const DesignPoint> grid, int count, Rng& rng) {
    if (grid.empty()) throw std::invalid_argument("sample_max_values: candidate grid is empty");
    if (count < 1) throw std::invalid_argument("sample_max_values: count must be >= 1");

    const std::size_t n = grid.size();
    std::vector<double> mu(n), sd(n);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    double max_mu = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        GPPosterior p = gp.predict(grid[i]);
        mu[i] = p.mean;
        sd[i] = std::sqrt(std::max(p.variance, 0.0));
        lo = std::min(lo, p.mean - 8.0 * sd[i]);
        hi = std::max(hi, p.mean + 8.0 * sd[i]);
        max_mu = std::max(max_mu, p.mean);
    }
    lo = std::min(lo, max_mu); // CDF of the max is 0 below max_mu when any sd is 0
    hi = std::max(hi, max_mu + 1e-12);

    // CDF of the grid maximum under pointwise independence.
    auto cdf = [&](double y) {
        double p = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (sd[i] == 0.0) {
                if (y < mu[i]) return 0.0;
            } else {
                p *= normal_cdf((y - mu[i]) / sd[i]);
            }
            if (p == 0.0) return 0.0;
        }
        return p;
    };

    auto quantile = [&](double target) {
        double a = lo, b = hi;
        for (int it = 0; it < 200 && b - a > 1e-12 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
            double m = 0.5 * (a + b);
            if (cdf(m) < target)
                a = m;
            else
                b = m;
        }
        return 0.5 * (a + b);
    };

    // Gumbel percentile matching at the quartiles and the median.
    double q25 = quantile(0.25);
    double q50 = quantile(0.50);
    double q75 = quantile(0.75);
    const double denom = std::log(std::log(4.0 / 3.0)) - std::log(std::log(4.0));
    double gumbel_b = (q25 - q75) / denom;
    if (!(gumbel_b > 0.0)) gumbel_b = 0.0; // degenerate (fully observed) grid
    double gumbel_a = q50 + gumbel_b * std::log(std::log(2.0));

    MaxValueSamples out;
    out.samples.resize(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        double u = rng.uniform_pos();
        double y = gumbel_a - gumbel_b * std::log(-std::log(u));
        // The sampled maximum can never fall below the best posterior mean;
        // without this floor, near-observed points see a conditioning level
        // far beneath their own mean and the entropy term explodes.
        out.samples[static_cast<std::size_t>(k)] = std::max(y, max_mu);
    }
    return out;
}

namespace {

// Entropy reduction of a Gaussian truncated above at gamma standard units.
double mes_term(double gamma) {
    double cdf = normal_cdf(gamma);
    if (cdf <= 0.0) return std::numeric_limits<double>::infinity();
    double v = gamma * normal_pdf(gamma) / (2.0 * cdf) - std::log(cdf);
    return std::max(v, 0.0);
}

} // namespace

double mes_score(const GPPosterior& post, const MaxValueSamples& maxima) {
    if (maxima.samples.empty()) throw std::invalid_argument("mes_score: no max-value samples");
    if (post.variance <= 0.0) return 0.0;
    double sigma = std::sqrt(post.variance);
    double acc = 0.0;
    for (double ystar : maxima.samples) acc += mes_term((ystar - post.mean) / sigma);
    return acc / static_cast<double>(maxima.samples.size());
}

double cmes_score(const GPPosterior& objective, std::span<const GPPosterior> constraints,
                  const MaxValueSamples& maxima) {
    return mes_score(objective, maxima) * joint_feasibility(constraints);
}

std::array<double, 3> mace_score(const GPPosterior& objective, std::span<const GPPosterior> constraints,
                                 double beta, std::optional<double> incumbent) {
    double w = joint_feasibility(constraints);
    double u = ucb(objective, beta) * w;
    if (!incumbent.has_value()) return {u, w, w};
    return {u, expected_improvement(objective, *incumbent) * w,
            probability_of_improvement(objective, *incumbent) * w};
}

} // namespace cpmes
