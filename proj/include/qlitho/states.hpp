#pragma once

#include <complex>
#include <string>
#include <vector>

#include <json.hpp>

namespace qlitho
{

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPi = 3.141592653589793238462643383279;

/// Wraps an angle into [0, 2π).
double wrap_phase(double radians);

/// Two-mode entangled state with `photons` photons, `minority` of which sit
/// in the less occupied mode of each branch:
///   (e^{imφ}|N-m, m⟩ + e^{i(N-m)φ} e^{iθ}|m, N-m⟩) / √2.
struct ProtoState1D
{
    int photons = 1;
    int minority = 0;
    double phase = 0.0;  // θ_m, radians in [0, 2π)

    static ProtoState1D make(int photons, int minority, double phase = 0.0)
    {
        return {photons, minority, wrap_phase(phase)};
    }

    bool operator==(ProtoState1D const&) const = default;
};

/// Four-mode state: the x-pair (a,b) carries a 1D branch pair with
/// distribution `minority_x`, the y-pair (c,d) one with `minority_y`.
struct ProtoState2D
{
    int photons = 1;
    int minority_x = 0;
    int minority_y = 0;
    double phase_x = 0.0;  // ζ_m
    double phase_y = 0.0;  // ζ̄_k

    static ProtoState2D
    make(int photons, int minority_x, int minority_y, double phase_x = 0.0, double phase_y = 0.0)
    {
        return {photons, minority_x, minority_y, wrap_phase(phase_x), wrap_phase(phase_y)};
    }

    bool operator==(ProtoState2D const&) const = default;
};

struct Term1D
{
    ProtoState1D state;
    Complex amplitude;

    bool operator==(Term1D const&) const = default;
};

struct Term2D
{
    ProtoState2D state;
    Complex amplitude;

    bool operator==(Term2D const&) const = default;
};

/// Coherent superposition of N-photon proto-states with different
/// distributions; every branch interferes with every other.
struct SuperpositionFixedN
{
    int photons = 1;
    std::vector<Term1D> terms;

    bool operator==(SuperpositionFixedN const&) const = default;
};

struct SuperpositionFixedN2D
{
    int photons = 1;
    std::vector<Term2D> terms;

    bool operator==(SuperpositionFixedN2D const&) const = default;
};

/// One photon-number branch of a fixed-distribution superposition.
struct OrderTerm
{
    int photons = 1;
    double phase = 0.0;  // θ_n
    Complex amplitude;

    bool operator==(OrderTerm const&) const = default;
};

/// Superposition over photon numbers at a common distribution index.
struct SuperpositionFixedM
{
    int minority = 0;
    std::vector<OrderTerm> terms;

    bool operator==(SuperpositionFixedM const&) const = default;
};

struct Violation
{
    std::string path;
    std::string message;
};

using Violations = std::vector<Violation>;

Violations validate(ProtoState1D const& s);
Violations validate(ProtoState2D const& s);
Violations validate(SuperpositionFixedN const& s);
Violations validate(SuperpositionFixedN2D const& s);
Violations validate(SuperpositionFixedM const& s);

std::string describe(Violations const& v);

// Throws ValidationError listing every violation.
template<class State>
void require_valid(State const& s);

/// Squared norm of the literal (un-normalized) branch sum, i.e. 1 for
/// distinct branches and |1 + e^{iθ}|²/2 when N = 2m makes both branches the
/// same ket. Closed forms divide by its square root.
double literal_norm_squared(ProtoState1D const& s);
double literal_norm_squared(ProtoState2D const& s);

/// Polar form of α_m* α_m'.
struct CrossWeights
{
    double r = 0.0;
    double xi = 0.0;  // radians in [0, 2π)
};

CrossWeights derived_cross_weights(Complex alpha_m, Complex alpha_mp);

inline int max_minority(int photons) { return photons / 2; }

// JSON schema: amplitudes are [re, im] pairs, phases are radians.
void to_json(nlohmann::json& j, ProtoState1D const& s);
void from_json(nlohmann::json const& j, ProtoState1D& s);
void to_json(nlohmann::json& j, ProtoState2D const& s);
void from_json(nlohmann::json const& j, ProtoState2D& s);
void to_json(nlohmann::json& j, SuperpositionFixedN const& s);
void from_json(nlohmann::json const& j, SuperpositionFixedN& s);
void to_json(nlohmann::json& j, SuperpositionFixedN2D const& s);
void from_json(nlohmann::json const& j, SuperpositionFixedN2D& s);
void to_json(nlohmann::json& j, SuperpositionFixedM const& s);
void from_json(nlohmann::json const& j, SuperpositionFixedM& s);

nlohmann::json complex_to_json(Complex z);
Complex complex_from_json(nlohmann::json const& j);

}  // namespace qlitho
