#pragma once

#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "states.hpp"

// Closed-form deposition rates. Convention throughout:
//   Δ = ⟨(ê†)^N ê^N⟩ / N!,  ê = (sum of the mode operators) / √(mode count),
// so 1D rates carry 2^-N and 2D rates 4^-N exactly, and every formula here
// agrees with the Fock-space oracle to roundoff rather than up to scale.
namespace qlitho::deposition
{

/// Deposition rate at one point of the substrate.
struct RateSample
{
    double phi = 0.0;
    double chi = 0.0;
    double value = 0.0;
};

double binomial(int n, int k);

/// (1 + cos Nφ) / 2^N.
double noon_rate(int photons, double phi);

/// Amplitude A with ê^N|ψ⟩ = √(N!) 2^{-N/2} A |0,0⟩, so that
/// ⟨ψ|δ_N|ψ'⟩ = 2^{-N} conj(A) A'. Includes the degenerate-branch
/// renormalization.
Complex branch_amplitude(ProtoState1D const& s, double phi);

/// ⟨ψ_Nm|δ_N|ψ_Nm'⟩ from the four-exponential bracket,
///   2^{-(N+1)} √(C(N,m) C(N,m')) [e^{i(m'-m)φ} + e^{i(N-m-m')φ} e^{iθ'}
///        + e^{-i(N-m-m')φ} e^{-iθ} + e^{-i(m'-m)φ} e^{i(θ'-θ)}].
Complex matrix_element_1d(ProtoState1D const& bra, ProtoState1D const& ket, double phi);
Complex matrix_element_1d(int photons, int m, int mp, double theta_m, double theta_mp, double phi);

/// Upper bound on |matrix_element_1d(bra, ket, φ)| over φ; the scale used
/// for relative comparisons, since elements have exact zeros.
double element_bound_1d(ProtoState1D const& bra, ProtoState1D const& ket);

/// C(N,m) (1 + cos[(N-2m)φ + θ]) / 2^N (divided by the literal norm when
/// N = 2m).
double diagonal_rate_1d(int photons, int m, double theta, double phi);

/// Total over all orders plus the contribution of each photon-number branch
/// to its own moment δ_n.
struct OrderedRate
{
    double total = 0.0;
    std::vector<std::pair<int, double>> per_order;
};

OrderedRate fixed_m_superposition_rate(SuperpositionFixedM const& state, double phi);

/// 2^{-N} |Σ α_m A_m(φ)|².
double fixed_n_superposition_rate(SuperpositionFixedN const& state, double phi);

/// Σ_{m,m'} α_m* α_m' ⟨ψ_Nm|δ_N|ψ_Nm'⟩ as a complex number (its imaginary
/// part vanishes for any state).
Complex fixed_n_bilinear_rate(SuperpositionFixedN const& state, double phi);

/// Double cosine sum
///   2^{1-N} Σ r_m^{m'} √(C C') cos((θ'-θ)/2 + ξ) cos(½[(N-2m)φ+θ]) cos(½[(N-2m')φ+θ']).
double fixed_n_cosine_form(SuperpositionFixedN const& state, double phi);

Complex branch_amplitude_2d(ProtoState2D const& s, double phi, double chi);

/// ⟨ψ^k_Nm|δ_N|ψ^{k'}_Nm'⟩ as the four 2x2 exponential blocks with
/// √(binomial) weights and overall 4^{-(N+1)}.
Complex matrix_element_2d(ProtoState2D const& bra, ProtoState2D const& ket, double phi, double chi);

double element_bound_2d(ProtoState2D const& bra, ProtoState2D const& ket);

/// Diagonal 2D rate in three-term form.
double diagonal_rate_2d(ProtoState2D const& s, double phi, double chi);

double superposition_2d_rate(SuperpositionFixedN2D const& state, double phi, double chi);
Complex superposition_2d_bilinear_rate(SuperpositionFixedN2D const& state, double phi, double chi);

std::vector<RateSample> sample_rate_1d(SuperpositionFixedN const& state, int points);
std::vector<RateSample> sample_rate_2d(SuperpositionFixedN2D const& state, int phi_points, int chi_points);

/// Precomputed branch amplitudes on a uniform φ grid for repeated rate
/// evaluation with varying superposition weights (one slot per m = 0..⌊N/2⌋).
class RateKernel1D
{
  public:
    RateKernel1D(int photons, std::vector<double> phases, int points, double origin = 0.0);

    int photons() const { return photons_; }
    int points() const { return points_; }
    std::size_t slots() const { return phases_.size(); }
    std::vector<double> const& phases() const { return phases_; }

    /// Rates at every grid point for weights α_m (unit norm assumed).
    void rates(std::span<Complex const> weights, std::span<double> out) const;

  private:
    int photons_;
    int points_;
    std::vector<double> phases_;
    std::vector<Complex> basis_;  // [point * slots + m]
};

/// 2D analogue, using that a superposition amplitude splits into
/// X(φ) + Y(χ).
class RateKernel2D
{
  public:
    RateKernel2D(int photons,
                 std::vector<double> phases_x,
                 std::vector<double> phases_y,
                 int phi_points,
                 int chi_points,
                 double phi_origin = 0.0,
                 double chi_origin = 0.0);

    int photons() const { return photons_; }
    std::size_t slots() const { return side_ * side_; }
    int phi_points() const { return phi_points_; }
    int chi_points() const { return chi_points_; }

    /// Weights indexed [m * side + k]; output indexed [i_phi * chi_points + i_chi].
    void rates(std::span<Complex const> weights, std::span<double> out) const;

  private:
    int photons_;
    std::size_t side_;
    int phi_points_;
    int chi_points_;
    std::vector<double> inv_norm_;  // [m * side + k]
    std::vector<Complex> x_basis_;  // [i_phi * side + m]
    std::vector<Complex> y_basis_;  // [i_chi * side + k]
};

}  // namespace qlitho::deposition
