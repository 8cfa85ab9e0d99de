#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deposition.hpp"
#include "states.hpp"

namespace qlitho::synth
{

inline constexpr int kDefaultPoints1D = 1024;
inline constexpr int kDefaultPoints2D = 256;

//---------------------------------------------------------------------------//
// Classical baseline and coordinates
//---------------------------------------------------------------------------//

/// cos²(k x sinθ), k = 2π/λ: two plane waves at ±θ from the normal.
double classical_intensity(double x, double wavelength, double theta);

/// λ / (4 sinθ).
double rayleigh_resolution(double wavelength, double theta);

/// λ / (4N) at grazing incidence.
double quantum_resolution(double wavelength, int photons);

/// Relative beam phase at substrate position x: φ = 2 k x sinθ. With this
/// mapping the one-photon rate (1 + cos φ)/2 equals classical_intensity.
double phase_from_position(double x, double wavelength, double theta = kPi / 2);
double position_from_phase(double phi, double wavelength, double theta = kPi / 2);

//---------------------------------------------------------------------------//
// Quadrature
//---------------------------------------------------------------------------//

/// Cell-centred node i of an n-point periodic grid on [0, 2π).
inline double quadrature_node(int i, int points) { return kTwoPi * (i + 0.5) / points; }

/// Periodic trapezoid rule over [0, 2π) on nodes origin + 2πi/points.
double periodic_trapezoid(std::function<double(double)> const& f, int points, double origin);
double periodic_trapezoid(std::function<double(double)> const& f, int points = kDefaultPoints1D);

double periodic_trapezoid_2d(std::function<double(double, double)> const& f, int phi_points, int chi_points);

//---------------------------------------------------------------------------//
// Targets
//---------------------------------------------------------------------------//

/// h on [−π/2, π/2) (mod 2π), 0 elsewhere.
double trench(double phi, double height);

/// F(φ) = a_0 + Σ_{n≥1} (a_n cos nφ + b_n sin nφ). `sine[0]` is unused (0).
struct FourierCoefficients
{
    std::vector<double> cosine;
    std::vector<double> sine;

    int max_harmonic() const { return static_cast<int>(cosine.size()) - 1; }
    double evaluate(double phi) const;
    double evaluate(double phi, int up_to) const;
};

/// Coefficients of Σ_{p,q} a cos pφ cos qχ + b cos pφ sin qχ + c sin pφ cos qχ
/// + d sin pφ sin qχ, each stored row-major [p * size + q].
struct FourierCoefficients2D
{
    int size = 0;
    std::vector<double> a, b, c, d;

    double evaluate(double phi, double chi) const;
};

class TargetPattern1D
{
  public:
    using Evaluator = std::function<double(double)>;

    TargetPattern1D(std::string name, Evaluator f, std::map<std::string, double> parameters = {});

    double operator()(double phi) const { return f_(phi); }
    std::string const& name() const { return name_; }
    std::map<std::string, double> const& parameters() const { return params_; }

    static TargetPattern1D trench(double height);
    static TargetPattern1D constant(double value);
    static TargetPattern1D fourier_series(FourierCoefficients coefficients);
    /// Periodic linear interpolation through (φ, value) samples.
    static TargetPattern1D from_samples(std::vector<std::pair<double, double>> samples);

  private:
    std::string name_;
    Evaluator f_;
    std::map<std::string, double> params_;
};

class TargetPattern2D
{
  public:
    using Evaluator = std::function<double(double, double)>;

    TargetPattern2D(std::string name, Evaluator f, std::map<std::string, double> parameters = {});

    double operator()(double phi, double chi) const { return f_(phi, chi); }
    std::string const& name() const { return name_; }
    std::map<std::string, double> const& parameters() const { return params_; }
    std::optional<FourierCoefficients2D> const& coefficients() const { return coefficients_; }

    /// h where both |φ| and |χ| (wrapped to [−π, π)) are below half_width.
    static TargetPattern2D square(double height, double half_width);
    static TargetPattern2D fourier_series(FourierCoefficients2D coefficients);
    static TargetPattern2D separable(TargetPattern1D fx, TargetPattern1D fy);
    /// Bilinear periodic interpolation on a full rectangular grid of
    /// (φ, χ, value) samples.
    static TargetPattern2D from_samples(std::vector<std::array<double, 3>> const& samples);

  private:
    std::string name_;
    Evaluator f_;
    std::map<std::string, double> params_;
    std::optional<FourierCoefficients2D> coefficients_;
};

//---------------------------------------------------------------------------//
// Pseudo-Fourier synthesis
//---------------------------------------------------------------------------//

/// Numerical Fourier coefficients up to `max_harmonic`. Throws NumericError
/// if the target is non-finite anywhere on the grid.
FourierCoefficients
fourier_coefficients(TargetPattern1D const& target, int max_harmonic, int points = kDefaultPoints1D);

struct FourierTerm
{
    int harmonic = 1;
    double weight = 0.0;  // c_n ≥ 0
    double phase = 0.0;   // θ_n in [0, 2π)
};

/// P(φ) = t Σ c_n (1 + cos(nφ + θ_n)).
struct FourierProgram
{
    std::vector<FourierTerm> terms;
    double exposure_time = 1.0;

    /// Q = Σ c_n, the uniform background rate.
    double penalty() const;
};

Violations validate(FourierProgram const& program);

/// Polar form of each harmonic n ≥ 1: c_n = √(a²+b²), θ_n = atan2(−b, a).
/// Harmonics with c_n ≤ relative_cutoff · max c are dropped; the constant
/// term cannot be synthesized (the zero-photon branch deposits nothing).
FourierProgram to_fourier_program(FourierCoefficients const& coefficients,
                                  double exposure_time,
                                  double relative_cutoff = 1e-9);

double program_exposure(FourierProgram const& program, double phi);

/// Fixed-distribution (m = 0) superposition and exposure time whose
/// multi-order deposition reproduces the program exactly.
struct RealizedProgram
{
    SuperpositionFixedM state;
    double exposure_time = 0.0;
};

RealizedProgram realize_program(FourierProgram const& program);

//---------------------------------------------------------------------------//
// Approximation metrics
//---------------------------------------------------------------------------//

/// ∫|F − F_N|² dφ with F_N the truncated Fourier series.
double distance_DN(TargetPattern1D const& target, int max_harmonic, int points = kDefaultPoints1D);

struct ApproximationReport
{
    bool ok = false;
    double residual = 0.0;  // ∫|F − P_N|²
    double distance = 0.0;  // D_N
    double epsilon = 0.0;
    bool degenerate = false;
    std::string note;
};

ApproximationReport approximation_ok(TargetPattern1D const& target,
                                     std::function<double(double)> const& achieved,
                                     int max_harmonic,
                                     double epsilon,
                                     int points = kDefaultPoints1D);

//---------------------------------------------------------------------------//
// Fitting objectives
//---------------------------------------------------------------------------//

/// ∫|F − Δ_N t|² dφ by trapezoid quadrature; `points` ≥ 4N+1.
double objective_1d(SuperpositionFixedN const& state,
                    double exposure_time,
                    TargetPattern1D const& target,
                    int points = kDefaultPoints1D);

double objective_2d(SuperpositionFixedN2D const& state,
                    double exposure_time,
                    TargetPattern2D const& target,
                    int phi_points = kDefaultPoints2D,
                    int chi_points = kDefaultPoints2D);

/// objective_1d for a fixed N and phase template with the target sampled
/// once; amplitudes are the α_m for m = 0..⌊N/2⌋ and must have unit norm.
class Objective1D
{
  public:
    Objective1D(TargetPattern1D const& target, int photons, std::vector<double> phases, int points);

    double operator()(std::span<Complex const> amplitudes, double exposure_time) const;

    int photons() const { return kernel_.photons(); }
    std::vector<double> const& phases() const { return kernel_.phases(); }
    int points() const { return kernel_.points(); }

  private:
    deposition::RateKernel1D kernel_;
    std::vector<double> target_;
};

class Objective2D
{
  public:
    Objective2D(TargetPattern2D const& target,
                int photons,
                std::vector<double> phases_x,
                std::vector<double> phases_y,
                int phi_points,
                int chi_points);

    /// Amplitudes α_{mk} row-major [m * (⌊N/2⌋+1) + k], unit norm.
    double operator()(std::span<Complex const> amplitudes, double exposure_time) const;

    int photons() const { return kernel_.photons(); }

  private:
    deposition::RateKernel2D kernel_;
    std::vector<double> target_;
};

void check_grid_resolution(int points, int photons);

}  // namespace qlitho::synth
