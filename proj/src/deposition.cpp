#include "qlitho/deposition.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qlitho/errors.hpp"

namespace qlitho::deposition
{

namespace
{

void check_photons(int photons)
{
    if (photons < 1)
        throw UsageError("photon count must be at least 1, got " + std::to_string(photons));
}

void check_index(int photons, int index)
{
    if (index < 0 || index > max_minority(photons))
        throw UsageError("distribution index " + std::to_string(index) + " outside 0..floor("
                         + std::to_string(photons) + "/2)");
}

void check_proto(ProtoState1D const& s)
{
    check_photons(s.photons);
    check_index(s.photons, s.minority);
}

void check_proto(ProtoState2D const& s)
{
    check_photons(s.photons);
    check_index(s.photons, s.minority_x);
    check_index(s.photons, s.minority_y);
}

// Literal (un-normalized) x-pair or y-pair branch sum weighted by √C(N,m).
Complex pair_sum(int photons, int m, double phase, double angle)
{
    return std::sqrt(binomial(photons, m))
           * (std::polar(1.0, m * angle) + std::polar(1.0, (photons - m) * angle + phase));
}

double inverse_literal_norm(ProtoState1D const& s)
{
    double const n2 = literal_norm_squared(s);
    if (n2 < 1e-24)
        throw ValidationError("proto-state branches cancel");
    return 1.0 / std::sqrt(n2);
}

double inverse_literal_norm(ProtoState2D const& s)
{
    double const n2 = literal_norm_squared(s);
    if (n2 < 1e-24)
        throw ValidationError("proto-state branches cancel");
    return 1.0 / std::sqrt(n2);
}

double grid_angle(int i, int points) { return kTwoPi * i / points; }

}  // namespace

double binomial(int n, int k)
{
    if (k < 0 || k > n)
        return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (int i = 1; i <= k; ++i)
        c = c * (n - k + i) / i;
    return std::round(c);
}

double noon_rate(int photons, double phi)
{
    check_photons(photons);
    return (1.0 + std::cos(photons * phi)) / std::ldexp(1.0, photons);
}

Complex branch_amplitude(ProtoState1D const& s, double phi)
{
    check_proto(s);
    return pair_sum(s.photons, s.minority, s.phase, phi) * (inverse_literal_norm(s) / std::sqrt(2.0));
}

Complex matrix_element_1d(ProtoState1D const& bra, ProtoState1D const& ket, double phi)
{
    check_proto(bra);
    check_proto(ket);
    if (bra.photons != ket.photons)
        return {};  // δ_N conserves photon number

    int const n = bra.photons;
    int const m = bra.minority;
    int const mp = ket.minority;
    double const th = bra.phase;
    double const thp = ket.phase;

    Complex const bracket = std::polar(1.0, (mp - m) * phi)
                            + std::polar(1.0, (n - m - mp) * phi + thp)
                            + std::polar(1.0, -(n - m - mp) * phi - th)
                            + std::polar(1.0, -(mp - m) * phi + (thp - th));
    double const prefactor = std::sqrt(binomial(n, m) * binomial(n, mp)) / std::ldexp(1.0, n + 1);
    return prefactor * bracket * inverse_literal_norm(bra) * inverse_literal_norm(ket);
}

Complex matrix_element_1d(int photons, int m, int mp, double theta_m, double theta_mp, double phi)
{
    return matrix_element_1d(ProtoState1D{photons, m, theta_m}, ProtoState1D{photons, mp, theta_mp}, phi);
}

double element_bound_1d(ProtoState1D const& bra, ProtoState1D const& ket)
{
    check_proto(bra);
    check_proto(ket);
    double const a = std::sqrt(2.0 * binomial(bra.photons, bra.minority)) * inverse_literal_norm(bra);
    double const b = std::sqrt(2.0 * binomial(ket.photons, ket.minority)) * inverse_literal_norm(ket);
    return std::ldexp(a * b, -std::max(bra.photons, ket.photons));
}

double diagonal_rate_1d(int photons, int m, double theta, double phi)
{
    ProtoState1D const s{photons, m, theta};
    check_proto(s);
    double const literal = binomial(photons, m) * (1.0 + std::cos((photons - 2 * m) * phi + theta))
                           / std::ldexp(1.0, photons);
    double const inv = inverse_literal_norm(s);
    return literal * inv * inv;
}

OrderedRate fixed_m_superposition_rate(SuperpositionFixedM const& state, double phi)
{
    require_valid(state);
    OrderedRate out;
    for (auto const& t : state.terms)
    {
        double const r = std::norm(t.amplitude) * diagonal_rate_1d(t.photons, state.minority, t.phase, phi);
        out.per_order.emplace_back(t.photons, r);
        out.total += r;
    }
    return out;
}

double fixed_n_superposition_rate(SuperpositionFixedN const& state, double phi)
{
    require_valid(state);
    Complex a{};
    for (auto const& t : state.terms)
        a += t.amplitude * branch_amplitude(t.state, phi);
    return std::norm(a) / std::ldexp(1.0, state.photons);
}

Complex fixed_n_bilinear_rate(SuperpositionFixedN const& state, double phi)
{
    require_valid(state);
    Complex s{};
    for (auto const& bra : state.terms)
        for (auto const& ket : state.terms)
            s += std::conj(bra.amplitude) * ket.amplitude * matrix_element_1d(bra.state, ket.state, phi);
    return s;
}

double fixed_n_cosine_form(SuperpositionFixedN const& state, double phi)
{
    require_valid(state);
    int const n = state.photons;
    double s = 0.0;
    for (auto const& bra : state.terms)
    {
        for (auto const& ket : state.terms)
        {
            auto const w = derived_cross_weights(bra.amplitude, ket.amplitude);
            int const m = bra.state.minority;
            int const mp = ket.state.minority;
            double const th = bra.state.phase;
            double const thp = ket.state.phase;
            s += w.r * std::sqrt(binomial(n, m) * binomial(n, mp))
                 * std::cos(0.5 * (thp - th) + w.xi) * std::cos(0.5 * ((n - 2 * m) * phi + th))
                 * std::cos(0.5 * ((n - 2 * mp) * phi + thp)) * inverse_literal_norm(bra.state)
                 * inverse_literal_norm(ket.state);
        }
    }
    return s / std::ldexp(1.0, n - 1);
}

Complex branch_amplitude_2d(ProtoState2D const& s, double phi, double chi)
{
    check_proto(s);
    return 0.5 * inverse_literal_norm(s)
           * (pair_sum(s.photons, s.minority_x, s.phase_x, phi)
              + pair_sum(s.photons, s.minority_y, s.phase_y, chi));
}

Complex matrix_element_2d(ProtoState2D const& bra, ProtoState2D const& ket, double phi, double chi)
{
    check_proto(bra);
    check_proto(ket);
    if (bra.photons != ket.photons)
        return {};
    int const n = bra.photons;

    // One 2x2 block: bra pair (index a, phase pa, angle u) against ket pair
    // (index b, phase pb, angle v).
    auto block = [n](int a, double pa, double u, int b, double pb, double v) {
        Complex const e = std::polar(1.0, -a * u + b * v)
                          + std::polar(1.0, -a * u + (n - b) * v + pb)
                          + std::polar(1.0, -(n - a) * u - pa + b * v)
                          + std::polar(1.0, -(n - a) * u + (n - b) * v - (pa - pb));
        return std::sqrt(binomial(n, a) * binomial(n, b)) * e;
    };

    Complex const total = block(bra.minority_x, bra.phase_x, phi, ket.minority_x, ket.phase_x, phi)
                          + block(bra.minority_x, bra.phase_x, phi, ket.minority_y, ket.phase_y, chi)
                          + block(bra.minority_y, bra.phase_y, chi, ket.minority_x, ket.phase_x, phi)
                          + block(bra.minority_y, bra.phase_y, chi, ket.minority_y, ket.phase_y, chi);
    double const prefactor = std::ldexp(1.0, -2 * (n + 1));
    return prefactor * total * inverse_literal_norm(bra) * inverse_literal_norm(ket);
}

double element_bound_2d(ProtoState2D const& bra, ProtoState2D const& ket)
{
    check_proto(bra);
    check_proto(ket);
    auto peak = [](ProtoState2D const& s) {
        return (std::sqrt(binomial(s.photons, s.minority_x)) + std::sqrt(binomial(s.photons, s.minority_y)))
               * inverse_literal_norm(s);
    };
    return std::ldexp(peak(bra) * peak(ket), -2 * std::max(bra.photons, ket.photons));
}

double diagonal_rate_2d(ProtoState2D const& s, double phi, double chi)
{
    check_proto(s);
    int const n = s.photons;
    double const cx = binomial(n, s.minority_x);
    double const cy = binomial(n, s.minority_y);
    double const x = (n - 2 * s.minority_x) * phi + s.phase_x;
    double const y = (n - 2 * s.minority_y) * chi + s.phase_y;
    double const bracket = cx * (1.0 + std::cos(x)) + cy * (1.0 + std::cos(y))
                           + 4.0 * std::sqrt(cx * cy)
                                 * std::cos(0.5 * (n * (phi - chi) + s.phase_x - s.phase_y))
                                 * std::cos(0.5 * x) * std::cos(0.5 * y);
    double const inv = inverse_literal_norm(s);
    return 0.5 * bracket * inv * inv * std::ldexp(1.0, -2 * n);
}

double superposition_2d_rate(SuperpositionFixedN2D const& state, double phi, double chi)
{
    require_valid(state);
    Complex a{};
    for (auto const& t : state.terms)
        a += t.amplitude * branch_amplitude_2d(t.state, phi, chi);
    return std::norm(a) * std::ldexp(1.0, -2 * state.photons);
}

Complex superposition_2d_bilinear_rate(SuperpositionFixedN2D const& state, double phi, double chi)
{
    require_valid(state);
    Complex s{};
    for (auto const& bra : state.terms)
        for (auto const& ket : state.terms)
            s += std::conj(bra.amplitude) * ket.amplitude * matrix_element_2d(bra.state, ket.state, phi, chi);
    return s;
}

std::vector<RateSample> sample_rate_1d(SuperpositionFixedN const& state, int points)
{
    if (points < 1)
        throw UsageError("grid needs at least one point");
    std::vector<RateSample> out;
    out.reserve(points);
    for (int i = 0; i < points; ++i)
    {
        double const phi = grid_angle(i, points);
        out.push_back({phi, 0.0, fixed_n_superposition_rate(state, phi)});
    }
    return out;
}

std::vector<RateSample> sample_rate_2d(SuperpositionFixedN2D const& state, int phi_points, int chi_points)
{
    if (phi_points < 1 || chi_points < 1)
        throw UsageError("grid needs at least one point per axis");
    std::vector<RateSample> out;
    out.reserve(static_cast<std::size_t>(phi_points) * chi_points);
    for (int i = 0; i < phi_points; ++i)
        for (int j = 0; j < chi_points; ++j)
        {
            double const phi = grid_angle(i, phi_points);
            double const chi = grid_angle(j, chi_points);
            out.push_back({phi, chi, superposition_2d_rate(state, phi, chi)});
        }
    return out;
}

//---------------------------------------------------------------------------//
// Kernels
//---------------------------------------------------------------------------//

RateKernel1D::RateKernel1D(int photons, std::vector<double> phases, int points, double origin)
    : photons_(photons), points_(points), phases_(std::move(phases))
{
    check_photons(photons);
    if (points < 1)
        throw UsageError("grid needs at least one point");
    auto const slots = static_cast<std::size_t>(max_minority(photons) + 1);
    if (phases_.size() != slots)
        throw UsageError("kernel needs one phase per distribution index");
    basis_.resize(slots * points);
    for (int i = 0; i < points; ++i)
    {
        double const phi = origin + grid_angle(i, points);
        for (std::size_t m = 0; m < slots; ++m)
            basis_[i * slots + m] = branch_amplitude(
                ProtoState1D{photons, static_cast<int>(m), wrap_phase(phases_[m])}, phi);
    }
}

void RateKernel1D::rates(std::span<Complex const> weights, std::span<double> out) const
{
    auto const slots = phases_.size();
    if (weights.size() != slots || out.size() != static_cast<std::size_t>(points_))
        throw UsageError("kernel weight or output size mismatch");
    double const scale = std::ldexp(1.0, -photons_);
    for (int i = 0; i < points_; ++i)
    {
        Complex a{};
        Complex const* row = &basis_[i * slots];
        for (std::size_t m = 0; m < slots; ++m)
            a += weights[m] * row[m];
        out[i] = std::norm(a) * scale;
    }
}

RateKernel2D::RateKernel2D(int photons,
                           std::vector<double> phases_x,
                           std::vector<double> phases_y,
                           int phi_points,
                           int chi_points,
                           double phi_origin,
                           double chi_origin)
    : photons_(photons),
      side_(static_cast<std::size_t>(max_minority(photons) + 1)),
      phi_points_(phi_points),
      chi_points_(chi_points)
{
    check_photons(photons);
    if (phi_points < 1 || chi_points < 1)
        throw UsageError("grid needs at least one point per axis");
    if (phases_x.size() != side_ || phases_y.size() != side_)
        throw UsageError("kernel needs one phase per distribution index and axis");

    inv_norm_.resize(side_ * side_);
    for (std::size_t m = 0; m < side_; ++m)
        for (std::size_t k = 0; k < side_; ++k)
        {
            ProtoState2D const s{photons,
                                 static_cast<int>(m),
                                 static_cast<int>(k),
                                 wrap_phase(phases_x[m]),
                                 wrap_phase(phases_y[k])};
            inv_norm_[m * side_ + k] = inverse_literal_norm(s);
        }

    x_basis_.resize(side_ * phi_points);
    for (int i = 0; i < phi_points; ++i)
        for (std::size_t m = 0; m < side_; ++m)
            x_basis_[i * side_ + m]
                = 0.5 * pair_sum(photons, static_cast<int>(m), phases_x[m], phi_origin + grid_angle(i, phi_points));
    y_basis_.resize(side_ * chi_points);
    for (int j = 0; j < chi_points; ++j)
        for (std::size_t k = 0; k < side_; ++k)
            y_basis_[j * side_ + k]
                = 0.5 * pair_sum(photons, static_cast<int>(k), phases_y[k], chi_origin + grid_angle(j, chi_points));
}

void RateKernel2D::rates(std::span<Complex const> weights, std::span<double> out) const
{
    if (weights.size() != side_ * side_
        || out.size() != static_cast<std::size_t>(phi_points_) * chi_points_)
        throw UsageError("kernel weight or output size mismatch");

    std::vector<Complex> u(side_), v(side_);
    for (std::size_t m = 0; m < side_; ++m)
        for (std::size_t k = 0; k < side_; ++k)
        {
            Complex const w = weights[m * side_ + k] * inv_norm_[m * side_ + k];
            u[m] += w;
            v[k] += w;
        }

    std::vector<Complex> y(chi_points_);
    for (int j = 0; j < chi_points_; ++j)
        for (std::size_t k = 0; k < side_; ++k)
            y[j] += v[k] * y_basis_[j * side_ + k];

    double const scale = std::ldexp(1.0, -2 * photons_);
    for (int i = 0; i < phi_points_; ++i)
    {
        Complex x{};
        for (std::size_t m = 0; m < side_; ++m)
            x += u[m] * x_basis_[i * side_ + m];
        double* row = &out[static_cast<std::size_t>(i) * chi_points_];
        for (int j = 0; j < chi_points_; ++j)
            row[j] = std::norm(x + y[j]) * scale;
    }
}

}  // namespace qlitho::deposition
