#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cpmes/gp.hpp"
#include "oracles.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Eigenvalues>

using namespace cpmes;

namespace {

const DesignSpace kSpace{0.0, 1.0, 3};

KernelSpec se_unit() { return KernelSpec{KernelKind::se_product, {1.0, 1.0}, 1.0, 1.0}; }

Dataset random_dataset(Rng& rng, std::size_t n, double noise) {
    Dataset d;
    d.noise_variance = noise;
    while (d.size() < n) {
        DesignPoint p{rng.uniform(), rng.uniform_int(0, 3)};
        if (noise == 0.0) {
            bool dup = false;
            for (const auto& q : d.points) dup = dup || q == p;
            if (dup) continue;
        }
        d.add(p, rng.uniform(-5.0, 5.0));
    }
    return d;
}

KernelSpec random_spec(Rng& rng) {
    KernelSpec s;
    s.kind = rng.uniform() < 0.5 ? KernelKind::se_product : KernelKind::matern_product_constant;
    s.lengthscales = {rng.uniform(0.1, 3.0), rng.uniform(0.1, 3.0)};
    s.signal_variance = rng.uniform(0.2, 4.0);
    s.constant_value = rng.uniform(0.5, 3.0);
    return s;
}

} // namespace

TEST_CASE("kernel at identical inputs equals its stated diagonal") {
    CHECK(kernel_eval(se_unit(), {0.3, 0.7}, {0.3, 0.7}) == doctest::Approx(1.0).epsilon(1e-15));

    KernelSpec m{KernelKind::matern_product_constant, {1.0, 1.0}, 1.0, 2.0};
    CHECK(kernel_eval(m, {0.4, 0.1}, {0.4, 0.1}) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("se product matches the per-dimension exponential form") {
    double k = kernel_eval(se_unit(), {0.0, 0.0}, {1.0, 0.0});
    CHECK(k == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
    // against the independently written oracle on random inputs
    Rng rng(77);
    for (int i = 0; i < 50; ++i) {
        auto spec = random_spec(rng);
        std::array<double, 2> x{rng.uniform(), rng.uniform()}, y{rng.uniform(), rng.uniform()};
        CHECK(kernel_eval(spec, x, y) == doctest::Approx(oracle::kernel(spec, x, y)).epsilon(1e-13));
    }
}

TEST_CASE("kernel symmetry is exact") {
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        auto spec = random_spec(rng);
        std::array<double, 2> x{rng.uniform(), rng.uniform()}, y{rng.uniform(), rng.uniform()};
        CHECK(kernel_eval(spec, x, y) == kernel_eval(spec, y, x));
    }
}

TEST_CASE("invalid kernel parameters are rejected") {
    KernelSpec bad = se_unit();
    bad.lengthscales[1] = 0.0;
    CHECK_THROWS_AS(kernel_eval(bad, {0, 0}, {0, 0}), std::invalid_argument);
    KernelSpec neg = se_unit();
    neg.signal_variance = -1.0;
    CHECK_THROWS_AS(neg.validate(), std::invalid_argument);
}

TEST_CASE("gram matrices are numerically psd before jitter") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        auto spec = random_spec(rng);
        std::size_t n = static_cast<std::size_t>(rng.uniform_int(2, 20));
        Eigen::MatrixXd K(n, n);
        std::vector<std::array<double, 2>> xs(n);
        for (auto& x : xs) x = {rng.uniform(), rng.uniform()};
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kernel_eval(spec, xs[i], xs[j]);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
        CHECK(es.eigenvalues().minCoeff() >= -1e-8);
    }
}

TEST_CASE("empty dataset predicts the prior") {
    auto gp = FittedGP::fit(Dataset{}, se_unit(), kSpace);
    auto post = gp.predict({0.25, 2});
    CHECK(post.mean == 0.0);
    CHECK(post.variance == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("single noiseless observation is interpolated") {
    Dataset d;
    d.add({0.5, 1}, 3.5);
    auto gp = FittedGP::fit(d, se_unit(), kSpace);
    auto post = gp.predict({0.5, 1});
    CHECK(post.mean == doctest::Approx(3.5).epsilon(1e-10));
    CHECK(post.variance == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("two-point posterior matches the hand-coded inversion") {
    Dataset d;
    d.noise_variance = 0.1;
    d.add({0.1, 0}, 1.0);
    d.add({0.8, 2}, -2.0);
    auto gp = FittedGP::fit(d, se_unit(), kSpace);
    DesignPoint q{0.4, 1};
    auto post = gp.predict(q);
    auto ref = oracle::gp_predict(d, se_unit(), kSpace, q);
    CHECK(post.mean == doctest::Approx(ref.mean).epsilon(1e-8));
    CHECK(post.variance == doctest::Approx(ref.variance).epsilon(1e-8));
}

TEST_CASE("posterior agrees with the direct-inversion oracle on random problems") {
    Rng rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        auto spec = random_spec(rng);
        double noise = trial % 3 == 0 ? 0.0 : rng.uniform(1e-4, 0.3);
        auto data = random_dataset(rng, static_cast<std::size_t>(rng.uniform_int(1, 8)), noise);
        bool standardize = trial % 2 == 0;
        auto gp = FittedGP::fit(data, spec, kSpace, FitOptions{standardize});
        for (int k = 0; k < 20; ++k) {
            DesignPoint q{rng.uniform(), rng.uniform_int(0, 3)};
            auto post = gp.predict(q);
            auto ref = oracle::gp_predict(data, spec, kSpace, q, standardize);
            CHECK(std::abs(post.mean - ref.mean) < 1e-8);
            CHECK(std::abs(post.variance - ref.variance) < 1e-8);
        }
    }
}

TEST_CASE("posterior variance never exceeds the prior variance") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        auto spec = random_spec(rng);
        auto data = random_dataset(rng, 6, 1e-3);
        auto gp = FittedGP::fit(data, spec, kSpace);
        for (int k = 0; k < 20; ++k) {
            DesignPoint q{rng.uniform(), rng.uniform_int(0, 3)};
            CHECK(gp.predict(q).variance <= gp.prior_variance(q) + 1e-10);
        }
    }
}

TEST_CASE("adding an observation cannot raise variance at that location") {
    Rng rng(47);
    for (int trial = 0; trial < 20; ++trial) {
        auto spec = random_spec(rng);
        auto data = random_dataset(rng, 5, 1e-2);
        DesignPoint q{rng.uniform(), rng.uniform_int(0, 3)};
        auto before = FittedGP::fit(data, spec, kSpace).predict(q).variance;
        data.add(q, rng.uniform(-5.0, 5.0));
        auto after = FittedGP::fit(data, spec, kSpace).predict(q).variance;
        CHECK(after <= before + 1e-9);
    }
}

TEST_CASE("duplicate points with zero noise are rejected") {
    Dataset d;
    d.add({0.5, 1}, 1.0);
    d.add({0.5, 1}, 2.0);
    CHECK_THROWS_AS(FittedGP::fit(d, se_unit(), kSpace), std::invalid_argument);
    d.noise_variance = 0.05; // with noise the same data is legitimate
    CHECK_NOTHROW(FittedGP::fit(d, se_unit(), kSpace));
}

TEST_CASE("probability of feasibility reference points") {
    CHECK(probability_of_feasibility(GPPosterior{2.0, 1.0}, 2.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(probability_of_feasibility(GPPosterior{4.0, 1.0}, 2.0) ==
          doctest::Approx(0.9772498680518208).epsilon(1e-12));
    CHECK(probability_of_feasibility(GPPosterior{1.0, 0.0}, 2.0) == 0.0);
    CHECK(probability_of_feasibility(GPPosterior{2.0, 0.0}, 2.0) == 1.0);
}

TEST_CASE("standardized fit maps back to raw units exactly") {
    Dataset d;
    d.noise_variance = 1e-6;
    d.add({0.0, 0}, 1000.0);
    d.add({0.3, 1}, 1300.0);
    d.add({0.9, 3}, 700.0);
    auto gp = FittedGP::fit(d, se_unit(), kSpace, FitOptions{true});
    for (std::size_t i = 0; i < d.size(); ++i) {
        auto post = gp.predict(d.points[i]);
        CHECK(post.mean == doctest::Approx(d.targets[i]).epsilon(1e-6));
        CHECK(post.variance < 1e-2);
    }
}

TEST_CASE("json snapshot round-trips the model") {
    Rng rng(99);
    auto data = random_dataset(rng, 6, 0.05);
    auto spec = random_spec(rng);
    auto gp = FittedGP::fit(data, spec, kSpace, FitOptions{true});
    auto clone = FittedGP::from_json(gp.to_json());
    for (int k = 0; k < 10; ++k) {
        DesignPoint q{rng.uniform(), rng.uniform_int(0, 3)};
        auto a = gp.predict(q);
        auto b = clone.predict(q);
        CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-12));
        CHECK(a.variance == doctest::Approx(b.variance).epsilon(1e-12));
    }
}

TEST_CASE("lengthscale fitting never lowers the marginal likelihood") {
    Rng rng(123);
    Dataset d;
    d.noise_variance = 1e-4;
    // smooth target so there is structure to fit
    for (int i = 0; i < 12; ++i) {
        DesignPoint p{rng.uniform(), rng.uniform_int(0, 3)};
        d.add(p, std::sin(4.0 * p.alpha) + 0.2 * p.n_added);
    }
    KernelSpec base = se_unit();
    HyperFitConfig hc;
    hc.seed = 7;
    auto fitted = fit_lengthscales(d, base, kSpace, hc, FitOptions{true});
    CHECK(log_marginal_likelihood(d, fitted, kSpace, FitOptions{true}) >=
          log_marginal_likelihood(d, base, kSpace, FitOptions{true}) - 1e-9);

    auto fitted2 = fit_lengthscales(d, base, kSpace, hc, FitOptions{true});
    CHECK(fitted.lengthscales[0] == fitted2.lengthscales[0]);
    CHECK(fitted.lengthscales[1] == fitted2.lengthscales[1]);
}
