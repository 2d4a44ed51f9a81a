#pragma once

#include "cpmes/common.hpp"

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include <optional>

namespace cpmes {

enum class KernelKind {
    se_product,              // product of two squared-exponential factors
    matern_product_constant, // product of two Matern(5/2) factors and a constant factor
};

struct KernelSpec {
    KernelKind kind = KernelKind::se_product;
    std::array<double, 2> lengthscales{1.0, 1.0};
    double signal_variance = 1.0;
    double constant_value = 1.0; // used by matern_product_constant only

    void validate() const; // throws std::invalid_argument
};

/// Min-max normalization of designs onto the unit square before any kernel
/// evaluation: alpha is already in [0,1], n_added is divided by its maximum.
struct DesignSpace {
    double alpha_min = 0.0;
    double alpha_max = 1.0;
    int max_added = 3;

    std::array<double, 2> normalize(const DesignPoint& d) const {
        double a = (alpha_max > alpha_min) ? (d.alpha - alpha_min) / (alpha_max - alpha_min) : 0.0;
        double n = max_added > 0 ? static_cast<double>(d.n_added) / max_added : 0.0;
        return {a, n};
    }
};

struct Dataset {
    std::vector<DesignPoint> points;
    std::vector<double> targets;
    double noise_variance = 0.0;

    std::size_t size() const { return points.size(); }
    void add(const DesignPoint& p, double y) {
        points.push_back(p);
        targets.push_back(y);
    }
    void validate() const; // throws std::invalid_argument
};

struct GPPosterior {
    double mean = 0.0;
    double variance = 0.0;
};

double kernel_eval(const KernelSpec& spec, const std::array<double, 2>& x, const std::array<double, 2>& y);
double kernel_eval(const KernelSpec& spec, const DesignPoint& x, const DesignPoint& y, const DesignSpace& space);

struct FitOptions {
    /// Center (and scale to unit variance, when the sample std is positive)
    /// the targets internally; predictions are mapped back exactly, so the
    /// observable posterior is unchanged up to the implied prior.
    bool standardize_targets = false;
};

/// Exact zero-prior-mean GP regression over the design space. Immutable
/// after construction; safe to share across threads for prediction.
class FittedGP {
public:
    static FittedGP fit(Dataset data, KernelSpec spec, DesignSpace space, FitOptions opts = {});

    GPPosterior predict(const DesignPoint& x) const;
    /// Prior (no-data) variance at x in target units.
    double prior_variance(const DesignPoint& x) const;

    const Dataset& data() const { return data_; }
    const KernelSpec& kernel() const { return spec_; }
    const DesignSpace& space() const { return space_; }
    double jitter_used() const { return jitter_; }
    double log_marginal_likelihood() const { return lml_; }

    nlohmann::json to_json() const;
    static FittedGP from_json(const nlohmann::json& j);

private:
    FittedGP() = default;

    Dataset data_;
    KernelSpec spec_;
    DesignSpace space_;
    FitOptions opts_;
    double offset_ = 0.0;
    double scale_ = 1.0;
    double jitter_ = 0.0;
    double lml_ = 0.0;
    Eigen::MatrixXd xnorm_;   // n x 2 normalized inputs
    Eigen::MatrixXd chol_;    // lower Cholesky of K + (noise + jitter) I
    Eigen::VectorXd weights_; // (K + noise I)^-1 y_std
};

/// Pr(latent >= threshold) under a Gaussian posterior; degenerates to an
/// indicator when the variance is zero.
double probability_of_feasibility(const GPPosterior& post, double threshold);
double probability_of_feasibility(const FittedGP& gp, const DesignPoint& x, double threshold);

struct HyperFitConfig {
    bool enabled = true;
    int restarts = 8;
    double log_lengthscale_min = -2.9957322735539909; // log 0.05
    double log_lengthscale_max = 1.6094379124341003;  // log 5
    std::uint64_t seed = 0;
};

double log_marginal_likelihood(const Dataset& data, const KernelSpec& spec, const DesignSpace& space,
                               FitOptions opts = {});

/// Maximize the log marginal likelihood over the two log-lengthscales by
/// multi-start compass search; all other kernel fields stay at `base`.
KernelSpec fit_lengthscales(const Dataset& data, KernelSpec base, const DesignSpace& space,
                            const HyperFitConfig& cfg, FitOptions opts = {});

} // namespace cpmes
