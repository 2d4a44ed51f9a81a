#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpmes {

/// Error from a linear-algebra conditioning failure (e.g. a kernel matrix
/// that stays indefinite after jitter escalation).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Error raised when an expensive evaluation fails or returns garbage.
struct EvaluationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Counter-style PRNG built on SplitMix64. Pure 64-bit integer arithmetic,
/// so streams are bit-identical across platforms and languages; seeded
/// sub-streams are derived with `derive` instead of jumping state.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Independent stream keyed by (seed, stream, index).
    static Rng derive(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1).
    double uniform();
    /// Uniform double in (0, 1]; never returns 0 (safe for log()).
    double uniform_pos();
    double uniform(double lo, double hi);
    /// Uniform integer in [0, n); n must be positive.
    std::uint64_t uniform_int(std::uint64_t n);
    int uniform_int(int lo, int hi); // inclusive bounds
    /// Standard normal via Box-Muller (one fresh pair of uniforms per call).
    double normal();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(static_cast<std::uint64_t>(i + 1)));
            std::swap(v[i], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

double normal_pdf(double z);
double normal_cdf(double z);

/// A contract design: the shared incentive weight and the number of
/// recruited agents.
struct DesignPoint {
    double alpha = 0.0;
    int n_added = 0;

    bool operator==(const DesignPoint& o) const { return alpha == o.alpha && n_added == o.n_added; }
    bool operator!=(const DesignPoint& o) const { return !(*this == o); }
};

/// Discrete design grid: an alpha grid crossed with {0, ..., max_added}.
struct DesignLattice {
    std::vector<double> alpha_values; // ascending
    int max_added = 0;

    /// Regular grid over [0, 1] with `alpha_grid_size` points.
    static DesignLattice regular(int alpha_grid_size, int max_added);

    std::size_t size() const { return alpha_values.size() * static_cast<std::size_t>(max_added + 1); }
    DesignPoint at(std::size_t index) const;
    std::size_t index_of(const DesignPoint& d) const; // throws std::invalid_argument off-lattice
    bool contains(const DesignPoint& d) const;
    /// Nearest lattice design to (alpha, n_added) with both clamped in range.
    DesignPoint snap(double alpha, int n_added) const;

    std::vector<DesignPoint> all() const;
};

/// Shortest round-trip decimal formatting; locale-free, used for all CSV
/// output so repeated runs are byte-identical.
std::string format_double(double v);

/// Deterministic total order used for tie-breaking between designs.
inline bool design_less(const DesignPoint& a, const DesignPoint& b) {
    if (a.alpha != b.alpha) return a.alpha < b.alpha;
    return a.n_added < b.n_added;
}

} // namespace cpmes
