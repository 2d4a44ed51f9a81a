#include "cpmes/common.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

namespace cpmes {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace

Rng Rng::derive(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::uint64_t s = seed;
    (void)splitmix64(s);
    s ^= 0xd1b54a32d192ed03ull * (stream + 1);
    (void)splitmix64(s);
    s ^= 0x8cb92ba72f3d8dd7ull * (index + 1);
    (void)splitmix64(s);
    return Rng(s);
}

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
    // multiply-shift; bias < 2^-64, irrelevant at our draw counts
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

int Rng::uniform_int(int lo, int hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
    return lo + static_cast<int>(uniform_int(static_cast<std::uint64_t>(hi - lo) + 1));
}

double Rng::normal() {
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) * 0.39894228040143267793994605993438;
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z * 0.70710678118654752440084436210485);
}

DesignLattice DesignLattice::regular(int alpha_grid_size, int max_added) {
    if (alpha_grid_size < 2) throw std::invalid_argument("lattice needs at least 2 alpha points");
    if (max_added < 0) throw std::invalid_argument("max_added must be >= 0");
    DesignLattice lat;
    lat.max_added = max_added;
    lat.alpha_values.resize(static_cast<std::size_t>(alpha_grid_size));
    for (int i = 0; i < alpha_grid_size; ++i)
        lat.alpha_values[static_cast<std::size_t>(i)] = static_cast<double>(i) / (alpha_grid_size - 1);
    return lat;
}

DesignPoint DesignLattice::at(std::size_t index) const {
    if (index >= size()) throw std::invalid_argument("lattice index out of range");
    std::size_t per_alpha = static_cast<std::size_t>(max_added + 1);
    return DesignPoint{alpha_values[index / per_alpha], static_cast<int>(index % per_alpha)};
}

std::size_t DesignLattice::index_of(const DesignPoint& d) const {
    if (d.n_added < 0 || d.n_added > max_added)
        throw std::invalid_argument("design off lattice: n_added out of range");
    auto it = std::lower_bound(alpha_values.begin(), alpha_values.end(), d.alpha);
    if (it == alpha_values.end() || *it != d.alpha)
        throw std::invalid_argument("design off lattice: alpha not a grid value");
    std::size_t ai = static_cast<std::size_t>(it - alpha_values.begin());
    return ai * static_cast<std::size_t>(max_added + 1) + static_cast<std::size_t>(d.n_added);
}

bool DesignLattice::contains(const DesignPoint& d) const {
    if (d.n_added < 0 || d.n_added > max_added) return false;
    auto it = std::lower_bound(alpha_values.begin(), alpha_values.end(), d.alpha);
    return it != alpha_values.end() && *it == d.alpha;
}

DesignPoint DesignLattice::snap(double alpha, int n_added) const {
    int n = std::clamp(n_added, 0, max_added);
    auto it = std::lower_bound(alpha_values.begin(), alpha_values.end(), alpha);
    double best;
    if (it == alpha_values.end()) {
        best = alpha_values.back();
    } else if (it == alpha_values.begin()) {
        best = alpha_values.front();
    } else {
        double hi = *it, lo = *(it - 1);
        best = (alpha - lo) <= (hi - alpha) ? lo : hi;
    }
    return DesignPoint{best, n};
}

std::vector<DesignPoint> DesignLattice::all() const {
    std::vector<DesignPoint> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i));
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace cpmes
