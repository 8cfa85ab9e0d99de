#include "qlitho/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "qlitho/errors.hpp"

namespace qlitho::synth
{

namespace
{

void check_beam(double wavelength, double theta)
{
    if (!(wavelength > 0.0))
        throw UsageError("wavelength must be positive");
    if (!(theta >= 0.0 && theta <= kPi / 2))
        throw UsageError("beam angle must lie in (0, pi/2]");
}

void check_points(int points)
{
    if (points < 1)
        throw UsageError("quadrature needs at least one point");
}

// Wraps into [−π, π).
double centred(double phi)
{
    double w = wrap_phase(phi + kPi) - kPi;
    return w;
}

std::vector<double> sample_target(TargetPattern1D const& target, int points)
{
    std::vector<double> values(points);
    for (int i = 0; i < points; ++i)
    {
        values[i] = target(quadrature_node(i, points));
        if (!std::isfinite(values[i]))
        {
            std::ostringstream os;
            os << "target '" << target.name() << "' is non-finite at phi = " << quadrature_node(i, points);
            throw NumericError(os.str());
        }
    }
    return values;
}

// Linear interpolation on a sorted periodic axis; returns (lower index, weight of upper).
std::pair<std::size_t, double> periodic_bracket(std::vector<double> const& axis, double x)
{
    std::size_t const n = axis.size();
    if (n == 1)
        return {0, 0.0};
    x = wrap_phase(x);
    auto it = std::upper_bound(axis.begin(), axis.end(), x);
    std::size_t hi = static_cast<std::size_t>(it - axis.begin()) % n;
    std::size_t lo = (hi + n - 1) % n;
    double x_lo = axis[lo];
    double x_hi = axis[hi];
    if (x_hi <= x_lo)
        x_hi += kTwoPi;
    if (x < x_lo)
        x += kTwoPi;
    double const span = x_hi - x_lo;
    return {lo, span > 0.0 ? (x - x_lo) / span : 0.0};
}

}  // namespace

//---------------------------------------------------------------------------//

double classical_intensity(double x, double wavelength, double theta)
{
    check_beam(wavelength, theta);
    double const k = kTwoPi / wavelength;
    double const c = std::cos(k * x * std::sin(theta));
    return c * c;
}

double rayleigh_resolution(double wavelength, double theta)
{
    if (!(wavelength > 0.0))
        throw UsageError("wavelength must be positive");
    double const s = std::sin(theta);
    if (s == 0.0)
        throw DomainError("Rayleigh resolution undefined at zero beam angle");
    return wavelength / (4.0 * s);
}

double quantum_resolution(double wavelength, int photons)
{
    if (photons < 1)
        throw UsageError("photon count must be at least 1");
    return rayleigh_resolution(wavelength, kPi / 2) / photons;
}

double phase_from_position(double x, double wavelength, double theta)
{
    check_beam(wavelength, theta);
    return 2.0 * (kTwoPi / wavelength) * x * std::sin(theta);
}

double position_from_phase(double phi, double wavelength, double theta)
{
    check_beam(wavelength, theta);
    double const s = std::sin(theta);
    if (s == 0.0)
        throw DomainError("position undefined at zero beam angle");
    return phi / (2.0 * (kTwoPi / wavelength) * s);
}

double periodic_trapezoid(std::function<double(double)> const& f, int points, double origin)
{
    check_points(points);
    double s = 0.0;
    for (int i = 0; i < points; ++i)
        s += f(origin + kTwoPi * i / points);
    return s * kTwoPi / points;
}

double periodic_trapezoid(std::function<double(double)> const& f, int points)
{
    return periodic_trapezoid(f, points, kPi / points);
}

double periodic_trapezoid_2d(std::function<double(double, double)> const& f, int phi_points, int chi_points)
{
    check_points(phi_points);
    check_points(chi_points);
    double s = 0.0;
    for (int i = 0; i < phi_points; ++i)
        for (int j = 0; j < chi_points; ++j)
            s += f(quadrature_node(i, phi_points), quadrature_node(j, chi_points));
    return s * kTwoPi * kTwoPi / (static_cast<double>(phi_points) * chi_points);
}

double trench(double phi, double height)
{
    double const c = centred(phi);
    return (c >= -kPi / 2 && c < kPi / 2) ? height : 0.0;
}

//---------------------------------------------------------------------------//
// Fourier series
//---------------------------------------------------------------------------//

double FourierCoefficients::evaluate(double phi) const { return evaluate(phi, max_harmonic()); }

double FourierCoefficients::evaluate(double phi, int up_to) const
{
    if (cosine.empty())
        return 0.0;
    up_to = std::min(up_to, max_harmonic());
    double s = cosine[0];
    for (int n = 1; n <= up_to; ++n)
        s += cosine[n] * std::cos(n * phi) + sine[n] * std::sin(n * phi);
    return s;
}

double FourierCoefficients2D::evaluate(double phi, double chi) const
{
    double s = 0.0;
    for (int p = 0; p < size; ++p)
    {
        double const cp = std::cos(p * phi);
        double const sp = std::sin(p * phi);
        for (int q = 0; q < size; ++q)
        {
            double const cq = std::cos(q * chi);
            double const sq = std::sin(q * chi);
            std::size_t const i = static_cast<std::size_t>(p) * size + q;
            s += a[i] * cp * cq + b[i] * cp * sq + c[i] * sp * cq + d[i] * sp * sq;
        }
    }
    return s;
}

FourierCoefficients fourier_coefficients(TargetPattern1D const& target, int max_harmonic, int points)
{
    if (max_harmonic < 0)
        throw UsageError("maximum harmonic must be non-negative");
    check_points(points);
    if (points <= 2 * max_harmonic)
        throw UsageError("quadrature grid too coarse for the requested harmonics");

    auto const values = sample_target(target, points);
    FourierCoefficients out;
    out.cosine.assign(max_harmonic + 1, 0.0);
    out.sine.assign(max_harmonic + 1, 0.0);
    double const w = 1.0 / points;
    for (int i = 0; i < points; ++i)
        out.cosine[0] += values[i] * w;
    for (int n = 1; n <= max_harmonic; ++n)
    {
        double ac = 0.0;
        double as = 0.0;
        for (int i = 0; i < points; ++i)
        {
            double const phi = quadrature_node(i, points);
            ac += values[i] * std::cos(n * phi);
            as += values[i] * std::sin(n * phi);
        }
        out.cosine[n] = 2.0 * ac * w;
        out.sine[n] = 2.0 * as * w;
    }
    return out;
}

double FourierProgram::penalty() const
{
    double q = 0.0;
    for (auto const& t : terms)
        q += t.weight;
    return q;
}

Violations validate(FourierProgram const& program)
{
    Violations out;
    if (!(program.exposure_time > 0.0))
        out.push_back({"exposure_time", "exposure time must be positive"});
    std::set<int> seen;
    for (std::size_t i = 0; i < program.terms.size(); ++i)
    {
        auto const& t = program.terms[i];
        std::string const prefix = "terms[" + std::to_string(i) + "].";
        if (t.harmonic < 0)
            out.push_back({prefix + "harmonic", "harmonic must be non-negative"});
        if (!(t.weight >= 0.0))
            out.push_back({prefix + "weight", "weight must be non-negative"});
        if (!seen.insert(t.harmonic).second)
            out.push_back({prefix + "harmonic", "duplicate harmonic"});
    }
    return out;
}

FourierProgram
to_fourier_program(FourierCoefficients const& coefficients, double exposure_time, double relative_cutoff)
{
    FourierProgram prog;
    prog.exposure_time = exposure_time;
    double largest = 0.0;
    for (int n = 1; n <= coefficients.max_harmonic(); ++n)
        largest = std::max(largest, std::hypot(coefficients.cosine[n], coefficients.sine[n]));
    for (int n = 1; n <= coefficients.max_harmonic(); ++n)
    {
        double const a = coefficients.cosine[n];
        double const b = coefficients.sine[n];
        double const c = std::hypot(a, b);
        if (c == 0.0 || c <= relative_cutoff * largest)
            continue;
        prog.terms.push_back({n, c, wrap_phase(std::atan2(-b, a))});
    }
    auto const v = validate(prog);
    if (!v.empty())
        throw ValidationError("invalid Fourier program: " + describe(v));
    return prog;
}

double program_exposure(FourierProgram const& program, double phi)
{
    double s = 0.0;
    for (auto const& t : program.terms)
        s += t.weight * (1.0 + std::cos(t.harmonic * phi + t.phase));
    return program.exposure_time * s;
}

RealizedProgram realize_program(FourierProgram const& program)
{
    auto const v = validate(program);
    if (!v.empty())
        throw ValidationError("invalid Fourier program: " + describe(v));

    // Branch n with m = 0 deposits |α_n|² (1 + cos(nφ + θ_n)) / 2^n.
    double total = 0.0;
    for (auto const& t : program.terms)
    {
        if (t.harmonic < 1)
            throw ValidationError("harmonic 0 cannot be realized by a photon-number branch");
        total += t.weight * std::ldexp(1.0, t.harmonic);
    }
    if (!(total > 0.0))
        throw ValidationError("program has no positive weights to realize");

    RealizedProgram out;
    out.state.minority = 0;
    for (auto const& t : program.terms)
    {
        if (t.weight == 0.0)
            continue;
        double const p = t.weight * std::ldexp(1.0, t.harmonic) / total;
        out.state.terms.push_back({t.harmonic, t.phase, Complex{std::sqrt(p), 0.0}});
    }
    out.exposure_time = program.exposure_time * total;
    return out;
}

//---------------------------------------------------------------------------//
// Metrics
//---------------------------------------------------------------------------//

double distance_DN(TargetPattern1D const& target, int max_harmonic, int points)
{
    auto const coeffs = fourier_coefficients(target, max_harmonic, points);
    return periodic_trapezoid(
        [&](double phi) {
            double const d = target(phi) - coeffs.evaluate(phi);
            return d * d;
        },
        points);
}

ApproximationReport approximation_ok(TargetPattern1D const& target,
                                     std::function<double(double)> const& achieved,
                                     int max_harmonic,
                                     double epsilon,
                                     int points)
{
    if (!(epsilon > 0.0))
        throw UsageError("epsilon must be positive");
    ApproximationReport r;
    r.epsilon = epsilon;
    r.distance = distance_DN(target, max_harmonic, points);
    r.residual = periodic_trapezoid(
        [&](double phi) {
            double const d = target(phi) - achieved(phi);
            return d * d;
        },
        points);
    if (!std::isfinite(r.residual) || !std::isfinite(r.distance))
        throw NumericError("non-finite approximation integrals");

    // Agreement to roundoff counts as exact.
    double const floor = 1e-14 * std::max(1.0, periodic_trapezoid([&](double phi) {
                                              double const f = target(phi);
                                              return f * f;
                                          },
                                                                  points));
    if (r.distance <= floor)
    {
        r.degenerate = r.residual > floor;
        r.ok = !r.degenerate;
        if (r.degenerate)
            r.note = "band-limited target, criterion degenerate";
        return r;
    }
    r.ok = r.residual <= epsilon * r.distance;
    return r;
}

//---------------------------------------------------------------------------//
// Objectives
//---------------------------------------------------------------------------//

void check_grid_resolution(int points, int photons)
{
    if (points < 4 * photons + 1)
        throw UsageError("grid resolution " + std::to_string(points) + " below 4N+1 = "
                         + std::to_string(4 * photons + 1));
}

double objective_1d(SuperpositionFixedN const& state, double exposure_time, TargetPattern1D const& target, int points)
{
    require_valid(state);
    check_grid_resolution(points, state.photons);
    return periodic_trapezoid(
        [&](double phi) {
            double const d = target(phi) - deposition::fixed_n_superposition_rate(state, phi) * exposure_time;
            return d * d;
        },
        points);
}

double objective_2d(SuperpositionFixedN2D const& state,
                    double exposure_time,
                    TargetPattern2D const& target,
                    int phi_points,
                    int chi_points)
{
    require_valid(state);
    check_grid_resolution(phi_points, state.photons);
    check_grid_resolution(chi_points, state.photons);
    return periodic_trapezoid_2d(
        [&](double phi, double chi) {
            double const d = target(phi, chi) - deposition::superposition_2d_rate(state, phi, chi) * exposure_time;
            return d * d;
        },
        phi_points,
        chi_points);
}

Objective1D::Objective1D(TargetPattern1D const& target, int photons, std::vector<double> phases, int points)
    : kernel_(photons, std::move(phases), points, kPi / points)
{
    check_grid_resolution(points, photons);
    target_ = sample_target(target, points);
}

double Objective1D::operator()(std::span<Complex const> amplitudes, double exposure_time) const
{
    std::vector<double> rate(target_.size());
    kernel_.rates(amplitudes, rate);
    double s = 0.0;
    for (std::size_t i = 0; i < rate.size(); ++i)
    {
        double const d = target_[i] - rate[i] * exposure_time;
        s += d * d;
    }
    return s * kTwoPi / static_cast<double>(rate.size());
}

Objective2D::Objective2D(TargetPattern2D const& target,
                         int photons,
                         std::vector<double> phases_x,
                         std::vector<double> phases_y,
                         int phi_points,
                         int chi_points)
    : kernel_(photons,
              std::move(phases_x),
              std::move(phases_y),
              phi_points,
              chi_points,
              kPi / phi_points,
              kPi / chi_points)
{
    check_grid_resolution(phi_points, photons);
    check_grid_resolution(chi_points, photons);
    target_.resize(static_cast<std::size_t>(phi_points) * chi_points);
    for (int i = 0; i < phi_points; ++i)
        for (int j = 0; j < chi_points; ++j)
        {
            double const v = target(quadrature_node(i, phi_points), quadrature_node(j, chi_points));
            if (!std::isfinite(v))
                throw NumericError("target '" + target.name() + "' is non-finite on the grid");
            target_[static_cast<std::size_t>(i) * chi_points + j] = v;
        }
}

double Objective2D::operator()(std::span<Complex const> amplitudes, double exposure_time) const
{
    std::vector<double> rate(target_.size());
    kernel_.rates(amplitudes, rate);
    double s = 0.0;
    for (std::size_t i = 0; i < rate.size(); ++i)
    {
        double const d = target_[i] - rate[i] * exposure_time;
        s += d * d;
    }
    return s * kTwoPi * kTwoPi
           / (static_cast<double>(kernel_.phi_points()) * kernel_.chi_points());
}

//---------------------------------------------------------------------------//
// Targets
//---------------------------------------------------------------------------//

TargetPattern1D::TargetPattern1D(std::string name, Evaluator f, std::map<std::string, double> parameters)
    : name_(std::move(name)), f_(std::move(f)), params_(std::move(parameters))
{
    if (!f_)
        throw UsageError("target pattern needs an evaluator");
}

TargetPattern1D TargetPattern1D::trench(double height)
{
    if (!(height > 0.0))
        throw UsageError("trench height must be positive");
    return {"trench", [height](double phi) { return synth::trench(phi, height); }, {{"h", height}}};
}

TargetPattern1D TargetPattern1D::constant(double value)
{
    return {"constant", [value](double) { return value; }, {{"value", value}}};
}

TargetPattern1D TargetPattern1D::fourier_series(FourierCoefficients coefficients)
{
    if (coefficients.cosine.size() != coefficients.sine.size())
        throw UsageError("cosine and sine coefficient counts differ");
    return {"fourier", [c = std::move(coefficients)](double phi) { return c.evaluate(phi); }};
}

TargetPattern1D TargetPattern1D::from_samples(std::vector<std::pair<double, double>> samples)
{
    if (samples.empty())
        throw UsageError("sampled target needs at least one sample");
    for (auto& s : samples)
        s.first = wrap_phase(s.first);
    std::sort(samples.begin(), samples.end());
    std::vector<double> axis, values;
    for (auto const& [phi, v] : samples)
    {
        if (!std::isfinite(v))
            throw NumericError("sampled target contains a non-finite value");
        if (!axis.empty() && phi == axis.back())
            throw UsageError("sampled target has duplicate phi values");
        axis.push_back(phi);
        values.push_back(v);
    }
    return {"samples", [axis = std::move(axis), values = std::move(values)](double phi) {
                auto const [lo, w] = periodic_bracket(axis, phi);
                std::size_t const hi = (lo + 1) % axis.size();
                return (1.0 - w) * values[lo] + w * values[hi];
            }};
}

TargetPattern2D::TargetPattern2D(std::string name, Evaluator f, std::map<std::string, double> parameters)
    : name_(std::move(name)), f_(std::move(f)), params_(std::move(parameters))
{
    if (!f_)
        throw UsageError("target pattern needs an evaluator");
}

TargetPattern2D TargetPattern2D::square(double height, double half_width)
{
    if (!(height > 0.0) || !(half_width > 0.0 && half_width <= kPi))
        throw UsageError("square target needs positive height and half width in (0, pi]");
    return {"square",
            [height, half_width](double phi, double chi) {
                double const x = centred(phi);
                double const y = centred(chi);
                return (x >= -half_width && x < half_width && y >= -half_width && y < half_width) ? height : 0.0;
            },
            {{"h", height}, {"half_width", half_width}}};
}

TargetPattern2D TargetPattern2D::fourier_series(FourierCoefficients2D coefficients)
{
    auto const n = static_cast<std::size_t>(coefficients.size) * coefficients.size;
    if (coefficients.a.size() != n || coefficients.b.size() != n || coefficients.c.size() != n
        || coefficients.d.size() != n)
        throw UsageError("2D Fourier coefficient blocks must each hold size*size entries");
    TargetPattern2D t{"fourier", [coefficients](double phi, double chi) { return coefficients.evaluate(phi, chi); }};
    t.coefficients_ = std::move(coefficients);
    return t;
}

TargetPattern2D TargetPattern2D::separable(TargetPattern1D fx, TargetPattern1D fy)
{
    std::string name = "separable(" + fx.name() + "," + fy.name() + ")";
    return {std::move(name), [fx = std::move(fx), fy = std::move(fy)](double phi, double chi) {
                return fx(phi) * fy(chi);
            }};
}

TargetPattern2D TargetPattern2D::from_samples(std::vector<std::array<double, 3>> const& samples)
{
    if (samples.empty())
        throw UsageError("sampled target needs at least one sample");
    std::set<double> phis, chis;
    for (auto const& s : samples)
    {
        phis.insert(wrap_phase(s[0]));
        chis.insert(wrap_phase(s[1]));
    }
    std::vector<double> ax(phis.begin(), phis.end());
    std::vector<double> ay(chis.begin(), chis.end());
    if (ax.size() * ay.size() != samples.size())
        throw UsageError("2D samples must form a full rectangular grid without duplicates");

    std::vector<double> values(samples.size(), std::nan(""));
    for (auto const& s : samples)
    {
        if (!std::isfinite(s[2]))
            throw NumericError("sampled target contains a non-finite value");
        auto const i = static_cast<std::size_t>(std::lower_bound(ax.begin(), ax.end(), wrap_phase(s[0])) - ax.begin());
        auto const j = static_cast<std::size_t>(std::lower_bound(ay.begin(), ay.end(), wrap_phase(s[1])) - ay.begin());
        values[i * ay.size() + j] = s[2];
    }
    if (std::any_of(values.begin(), values.end(), [](double v) { return std::isnan(v); }))
        throw UsageError("2D samples must form a full rectangular grid without duplicates");

    return {"samples", [ax, ay, values](double phi, double chi) {
                auto const [i0, wx] = periodic_bracket(ax, phi);
                auto const [j0, wy] = periodic_bracket(ay, chi);
                std::size_t const i1 = (i0 + 1) % ax.size();
                std::size_t const j1 = (j0 + 1) % ay.size();
                auto at = [&](std::size_t i, std::size_t j) { return values[i * ay.size() + j]; };
                return (1 - wx) * (1 - wy) * at(i0, j0) + wx * (1 - wy) * at(i1, j0) + (1 - wx) * wy * at(i0, j1)
                       + wx * wy * at(i1, j1);
            }};
}

}  // namespace qlitho::synth
