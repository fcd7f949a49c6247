#pragma once

// Small generators for property tests.

#include "daflow/nodeset.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace daflow::support {

class Gen {
public:
    explicit Gen(unsigned long long seed) : rng_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    std::vector<double> vector(std::size_t n, double lo = -1.0, double hi = 1.0)
    {
        std::vector<double> v(n);
        for (auto& x : v) x = uniform(lo, hi);
        return v;
    }

    // Grid nodes moved by up to `amount` of the spacing, boundary nodes kept on the boundary.
    std::vector<Vec3> jittered_square(int n, double amount)
    {
        std::vector<Vec3> pos;
        const double h = 1.0 / (n - 1);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                double x = i * h, y = j * h;
                if (i > 0 && i < n - 1) x += uniform(-amount, amount) * h;
                if (j > 0 && j < n - 1) y += uniform(-amount, amount) * h;
                pos.push_back({x, y, 0.0});
            }
        return pos;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

inline NodeSet square_nodes(int n, Stretching s = Stretching::Uniform)
{
    return generate_cavity_2d(GridSpec{{n, n}, s});
}

inline NodeSet cube_nodes(int n, Stretching s = Stretching::Uniform)
{
    std::vector<Vec3> pos;
    std::vector<BoundaryTag> tags;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                auto c = [&](int a) {
                    const double xr = static_cast<double>(a) / (n - 1);
                    return s == Stretching::Uniform ? xr : stretch_coordinate(xr);
                };
                pos.push_back({c(i), c(j), c(k)});
                const bool b = i == 0 || j == 0 || k == 0 || i == n - 1 || j == n - 1 || k == n - 1;
                tags.emplace_back(b ? BoundaryTag{Wall{}} : BoundaryTag{Interior{}});
            }
    return NodeSet(3, std::move(pos), std::move(tags), {}, std::array<int, 3>{n, n, n});
}

}  // namespace daflow::support
