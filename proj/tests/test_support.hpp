#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "qlitho/states.hpp"

namespace qlitho::gen
{

using Rng = std::mt19937_64;

inline double angle(Rng& rng)
{
    return std::uniform_real_distribution<double>(0.0, kTwoPi)(rng);
}

inline int integer(Rng& rng, int lo, int hi)
{
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Complex gaussian_complex(Rng& rng)
{
    std::normal_distribution<double> g;
    return {g(rng), g(rng)};
}

inline std::vector<Complex> unit_vector(Rng& rng, std::size_t n)
{
    std::vector<Complex> v(n);
    double s = 0.0;
    for (auto& z : v)
    {
        z = gaussian_complex(rng);
        s += std::norm(z);
    }
    for (auto& z : v)
        z /= std::sqrt(s);
    return v;
}

// Phase that keeps a degenerate N = 2m branch away from cancellation.
inline double safe_phase(Rng& rng, int photons, int minority)
{
    double p = angle(rng);
    if (photons == 2 * minority && std::abs(std::remainder(p - kPi, kTwoPi)) < 0.3)
        p = std::fmod(p + kPi, kTwoPi);
    return p;
}

/// Random valid 1D superposition over a random subset of m values.
inline SuperpositionFixedN random_superposition_1d(Rng& rng, int photons)
{
    SuperpositionFixedN s{photons, {}};
    std::vector<int> ms;
    for (int m = 0; m <= max_minority(photons); ++m)
        if (ms.empty() || integer(rng, 0, 1) == 1)
            ms.push_back(m);
    auto const amps = unit_vector(rng, ms.size());
    for (std::size_t i = 0; i < ms.size(); ++i)
        s.terms.push_back({ProtoState1D::make(photons, ms[i], safe_phase(rng, photons, ms[i])), amps[i]});
    return s;
}

inline SuperpositionFixedN2D random_superposition_2d(Rng& rng, int photons)
{
    SuperpositionFixedN2D s{photons, {}};
    int const side = max_minority(photons) + 1;
    std::vector<std::pair<int, int>> idx;
    for (int m = 0; m < side; ++m)
        for (int k = 0; k < side; ++k)
            if (idx.empty() || integer(rng, 0, 1) == 1)
                idx.emplace_back(m, k);
    auto const amps = unit_vector(rng, idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
    {
        auto [m, k] = idx[i];
        s.terms.push_back({ProtoState2D::make(photons, m, k, safe_phase(rng, photons, m), safe_phase(rng, photons, k)),
                           amps[i]});
    }
    return s;
}

}  // namespace qlitho::gen
