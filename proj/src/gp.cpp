#include "cpmes/gp.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cpmes {

void KernelSpec::validate() const {
    for (double ls : lengthscales)
        if (!(ls > 0.0)) throw std::invalid_argument("kernel lengthscales must be strictly positive");
    if (!(signal_variance > 0.0)) throw std::invalid_argument("signal_variance must be strictly positive");
    if (kind == KernelKind::matern_product_constant && !(constant_value > 0.0))
        throw std::invalid_argument("constant_value must be strictly positive");
}

void Dataset::validate() const {
    if (points.size() != targets.size())
        throw std::invalid_argument("dataset points/targets length mismatch");
    if (noise_variance < 0.0) throw std::invalid_argument("noise_variance must be >= 0");
    if (noise_variance == 0.0) {
        for (std::size_t i = 0; i < points.size(); ++i)
            for (std::size_t j = i + 1; j < points.size(); ++j)
                if (points[i] == points[j])
                    throw std::invalid_argument("duplicate design points with zero noise would make the kernel matrix singular");
    }
}

namespace {

inline double matern52(double r) {
    // r is |dx| / lengthscale
    const double s = 2.2360679774997896964091736687747 * r; // sqrt(5) r
    return (1.0 + s + s * s / 3.0) * std::exp(-s);
}

} // namespace

double kernel_eval(const KernelSpec& spec, const std::array<double, 2>& x, const std::array<double, 2>& y) {
    spec.validate();
    switch (spec.kind) {
    case KernelKind::se_product: {
        double e = 0.0;
        for (int d = 0; d < 2; ++d) {
            double z = (x[d] - y[d]) / spec.lengthscales[d];
            e += z * z;
        }
        return spec.signal_variance * std::exp(-0.5 * e);
    }
    case KernelKind::matern_product_constant: {
        double k = spec.signal_variance * spec.constant_value;
        for (int d = 0; d < 2; ++d)
            k *= matern52(std::abs(x[d] - y[d]) / spec.lengthscales[d]);
        return k;
    }
    }
    throw std::invalid_argument("unknown kernel kind");
}

double kernel_eval(const KernelSpec& spec, const DesignPoint& x, const DesignPoint& y, const DesignSpace& space) {
    return kernel_eval(spec, space.normalize(x), space.normalize(y));
}

namespace {

Eigen::MatrixXd normalized_inputs(const Dataset& data, const DesignSpace& space) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(data.size()), 2);
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto z = space.normalize(data.points[i]);
        X(static_cast<Eigen::Index>(i), 0) = z[0];
        X(static_cast<Eigen::Index>(i), 1) = z[1];
    }
    return X;
}

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& X) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            double k = kernel_eval(spec, {X(i, 0), X(i, 1)}, {X(j, 0), X(j, 1)});
            K(i, j) = k;
            K(j, i) = k;
        }
    }
    return K;
}

struct CholResult {
    Eigen::MatrixXd L;
    double jitter = 0.0;
};

// Jitter ladder: 0, then 1e-10 escalating x10 up to 1e-6.
CholResult robust_cholesky(const Eigen::MatrixXd& K, double noise) {
    const Eigen::Index n = K.rows();
    Eigen::MatrixXd A = K;
    A.diagonal().array() += noise;
    double jitter = 0.0;
    for (;;) {
        Eigen::MatrixXd B = A;
        B.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(B);
        if (llt.info() == Eigen::Success) return {llt.matrixL(), jitter};
        if (jitter == 0.0)
            jitter = 1e-10;
        else if (jitter < 1e-6)
            jitter = std::min(jitter * 10.0, 1e-6);
        else
            throw NumericalError("kernel matrix not positive definite after jitter escalation (n=" +
                                 std::to_string(n) + ")");
    }
}

} // namespace

FittedGP FittedGP::fit(Dataset data, KernelSpec spec, DesignSpace space, FitOptions opts) {
    data.validate();
    spec.validate();
    FittedGP gp;
    gp.data_ = std::move(data);
    gp.spec_ = spec;
    gp.space_ = space;
    gp.opts_ = opts;

    const std::size_t n = gp.data_.size();
    if (n == 0) {
        gp.lml_ = 0.0;
        return gp; // prior-only model
    }

    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) y(static_cast<Eigen::Index>(i)) = gp.data_.targets[i];

    if (opts.standardize_targets) {
        gp.offset_ = y.mean();
        double var = (y.array() - gp.offset_).square().sum() / static_cast<double>(n);
        gp.scale_ = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
    Eigen::VectorXd ys = (y.array() - gp.offset_) / gp.scale_;

    gp.xnorm_ = normalized_inputs(gp.data_, space);
    Eigen::MatrixXd K = gram(spec, gp.xnorm_);
    // noise_variance is in raw target units; the factorization works in
    // standardized units
    auto chol = robust_cholesky(K, gp.data_.noise_variance / (gp.scale_ * gp.scale_));
    gp.chol_ = std::move(chol.L);
    gp.jitter_ = chol.jitter;
    gp.weights_ = gp.chol_.triangularView<Eigen::Lower>().solve(ys);
    gp.weights_ = gp.chol_.transpose().triangularView<Eigen::Upper>().solve(gp.weights_);

    double logdet = 0.0;
    for (Eigen::Index i = 0; i < gp.chol_.rows(); ++i) logdet += std::log(gp.chol_(i, i));
    gp.lml_ = -0.5 * ys.dot(gp.weights_) - logdet -
              0.5 * static_cast<double>(n) * 1.8378770664093454835606594728112; // log(2 pi)
    return gp;
}

GPPosterior FittedGP::predict(const DesignPoint& x) const {
    auto z = space_.normalize(x);
    double kxx = kernel_eval(spec_, z, z);
    if (data_.size() == 0) return GPPosterior{0.0, kxx * scale_ * scale_};

    const Eigen::Index n = static_cast<Eigen::Index>(data_.size());
    Eigen::VectorXd kstar(n);
    for (Eigen::Index i = 0; i < n; ++i)
        kstar(i) = kernel_eval(spec_, z, {xnorm_(i, 0), xnorm_(i, 1)});

    double mean_std = kstar.dot(weights_);
    Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(kstar);
    double var_std = kxx - v.squaredNorm();
    if (var_std < 0.0) var_std = 0.0; // round-off clamp

    return GPPosterior{offset_ + scale_ * mean_std, scale_ * scale_ * var_std};
}

double FittedGP::prior_variance(const DesignPoint& x) const {
    auto z = space_.normalize(x);
    return kernel_eval(spec_, z, z) * scale_ * scale_;
}

double probability_of_feasibility(const GPPosterior& post, double threshold) {
    if (post.variance <= 0.0) return post.mean >= threshold ? 1.0 : 0.0;
    double p = normal_cdf((post.mean - threshold) / std::sqrt(post.variance));
    return std::clamp(p, 0.0, 1.0);
}

double probability_of_feasibility(const FittedGP& gp, const DesignPoint& x, double threshold) {
    return probability_of_feasibility(gp.predict(x), threshold);
}

double log_marginal_likelihood(const Dataset& data, const KernelSpec& spec, const DesignSpace& space,
                               FitOptions opts) {
    return FittedGP::fit(data, spec, space, opts).log_marginal_likelihood();
}

KernelSpec fit_lengthscales(const Dataset& data, KernelSpec base, const DesignSpace& space,
                            const HyperFitConfig& cfg, FitOptions opts) {
    base.validate();
    if (!cfg.enabled || data.size() < 2) return base;

    auto lml_at = [&](const std::array<double, 2>& log_ls) -> double {
        KernelSpec s = base;
        s.lengthscales = {std::exp(log_ls[0]), std::exp(log_ls[1])};
        try {
            return log_marginal_likelihood(data, s, space, opts);
        } catch (const NumericalError&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    const double lo = cfg.log_lengthscale_min, hi = cfg.log_lengthscale_max;
    Rng rng = Rng::derive(cfg.seed, 0x685390u);

    std::array<double, 2> best_ls{std::log(base.lengthscales[0]), std::log(base.lengthscales[1])};
    best_ls[0] = std::clamp(best_ls[0], lo, hi);
    best_ls[1] = std::clamp(best_ls[1], lo, hi);
    double best_val = lml_at(best_ls);

    for (int r = 0; r < cfg.restarts; ++r) {
        std::array<double, 2> p;
        if (r == 0) {
            p = best_ls; // polish the incoming spec first
        } else {
            p = {rng.uniform(lo, hi), rng.uniform(lo, hi)};
        }
        double val = lml_at(p);
        // compass search with shrinking step
        double step = 0.6;
        while (step > 5e-3) {
            bool improved = false;
            for (int d = 0; d < 2; ++d) {
                for (double sgn : {+1.0, -1.0}) {
                    std::array<double, 2> q = p;
                    q[d] = std::clamp(q[d] + sgn * step, lo, hi);
                    double v = lml_at(q);
                    if (v > val) {
                        val = v;
                        p = q;
                        improved = true;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
        if (val > best_val) {
            best_val = val;
            best_ls = p;
        }
    }

    KernelSpec out = base;
    out.lengthscales = {std::exp(best_ls[0]), std::exp(best_ls[1])};
    return out;
}

// ---------------------------------------------------------------------------
// JSON snapshots: kernel spec + dataset + fit options; the factorization is
// recomputed on load.

namespace {

const char* kind_name(KernelKind k) {
    return k == KernelKind::se_product ? "se_product" : "matern_product_constant";
}

KernelKind kind_from_name(const std::string& s) {
    if (s == "se_product") return KernelKind::se_product;
    if (s == "matern_product_constant") return KernelKind::matern_product_constant;
    throw std::invalid_argument("unknown kernel kind: " + s);
}

} // namespace

nlohmann::json FittedGP::to_json() const {
    nlohmann::json j;
    j["kernel"] = {{"kind", kind_name(spec_.kind)},
                   {"lengthscales", spec_.lengthscales},
                   {"signal_variance", spec_.signal_variance},
                   {"constant_value", spec_.constant_value}};
    j["space"] = {{"alpha_min", space_.alpha_min}, {"alpha_max", space_.alpha_max}, {"max_added", space_.max_added}};
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : data_.points) pts.push_back({{"alpha", p.alpha}, {"n_added", p.n_added}});
    j["dataset"] = {{"points", pts}, {"targets", data_.targets}, {"noise_variance", data_.noise_variance}};
    j["standardize_targets"] = opts_.standardize_targets;
    return j;
}

FittedGP FittedGP::from_json(const nlohmann::json& j) {
    KernelSpec spec;
    spec.kind = kind_from_name(j.at("kernel").at("kind").get<std::string>());
    auto ls = j.at("kernel").at("lengthscales");
    spec.lengthscales = {ls.at(0).get<double>(), ls.at(1).get<double>()};
    spec.signal_variance = j.at("kernel").at("signal_variance").get<double>();
    spec.constant_value = j.at("kernel").at("constant_value").get<double>();

    DesignSpace space;
    space.alpha_min = j.at("space").at("alpha_min").get<double>();
    space.alpha_max = j.at("space").at("alpha_max").get<double>();
    space.max_added = j.at("space").at("max_added").get<int>();

    Dataset data;
    for (const auto& p : j.at("dataset").at("points"))
        data.points.push_back({p.at("alpha").get<double>(), p.at("n_added").get<int>()});
    data.targets = j.at("dataset").at("targets").get<std::vector<double>>();
    data.noise_variance = j.at("dataset").at("noise_variance").get<double>();

    FitOptions opts;
    opts.standardize_targets = j.at("standardize_targets").get<bool>();
    return fit(std::move(data), spec, space, opts);
}

} // namespace cpmes
