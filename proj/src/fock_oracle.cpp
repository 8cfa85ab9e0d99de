#include "qlitho/fock_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "qlitho/errors.hpp"

namespace qlitho::fock
{

namespace
{
constexpr double kNormTol = 1e-12;

std::string format_occupation(Occupation const& occ)
{
    std::ostringstream os;
    os << '|';
    for (std::size_t i = 0; i < occ.size(); ++i)
        os << (i ? "," : "") << occ[i];
    os << "⟩";
    return os.str();
}

void check_mode(FockVector const& state, std::size_t mode)
{
    if (mode >= state.mode_count())
        throw UsageError("mode index " + std::to_string(mode) + " out of range for "
                         + std::to_string(state.mode_count()) + " modes");
}

void accumulate(FockVector::AmplitudeMap& amps, Occupation const& occ, Complex value)
{
    auto [it, inserted] = amps.try_emplace(occ, value);
    if (!inserted)
        it->second += value;
}

double factorial(int n)
{
    double f = 1.0;
    for (int i = 2; i <= n; ++i)
        f *= i;
    return f;
}

FockVector power_of_superposed(FockVector state, std::span<std::size_t const> modes, int order)
{
    for (int i = 0; i < order && !state.is_zero(); ++i)
        state = superposed_mode_annihilate(state, modes);
    return state;
}

}  // namespace

FockVector::FockVector(std::size_t mode_count, int cutoff) : modes_(mode_count), cutoff_(cutoff)
{
    if (mode_count == 0)
        throw UsageError("FockVector needs at least one mode");
    if (cutoff < 0)
        throw UsageError("photon cutoff must be non-negative");
}

FockVector::FockVector(std::size_t mode_count, int cutoff, AmplitudeMap amplitudes)
    : FockVector(mode_count, cutoff)
{
    for (auto& [occ, amp] : amplitudes)
    {
        if (occ.size() != modes_)
            throw UsageError("occupation " + format_occupation(occ) + " has wrong mode count");
        for (int n : occ)
        {
            if (n < 0)
                throw UsageError("negative occupation in " + format_occupation(occ));
            if (n > cutoff_)
                throw CapacityError("occupation " + format_occupation(occ) + " exceeds cutoff "
                                    + std::to_string(cutoff_));
        }
        if (std::abs(amp) > kPruneThreshold)
            amps_.emplace(occ, amp);
    }
}

FockVector FockVector::ket(Occupation occ, int cutoff, Complex amplitude)
{
    auto const modes = occ.size();
    return FockVector(modes, cutoff, {{std::move(occ), amplitude}});
}

Complex FockVector::amplitude(Occupation const& occ) const
{
    auto it = amps_.find(occ);
    return it == amps_.end() ? Complex{} : it->second;
}

double FockVector::norm_squared() const
{
    double s = 0.0;
    for (auto const& kv : amps_)
        s += std::norm(kv.second);
    return s;
}

double FockVector::norm() const { return std::sqrt(norm_squared()); }

FockVector FockVector::scaled(Complex factor) const
{
    AmplitudeMap out;
    for (auto const& [occ, amp] : amps_)
        out.emplace(occ, amp * factor);
    return FockVector(modes_, cutoff_, std::move(out));
}

FockVector FockVector::normalized() const
{
    double const n = norm();
    if (n == 0.0)
        throw ValidationError("cannot normalize the zero vector");
    return scaled(1.0 / n);
}

FockVector operator+(FockVector const& lhs, FockVector const& rhs)
{
    if (lhs.modes_ != rhs.modes_)
        throw UsageError("cannot add Fock vectors with different mode counts");
    auto amps = lhs.amps_;
    for (auto const& [occ, amp] : rhs.amps_)
        accumulate(amps, occ, amp);
    return FockVector(lhs.modes_, std::max(lhs.cutoff_, rhs.cutoff_), std::move(amps));
}

Complex inner(FockVector const& bra, FockVector const& ket)
{
    Complex s{};
    for (auto const& [occ, amp] : bra.amps_)
    {
        auto it = ket.amps_.find(occ);
        if (it != ket.amps_.end())
            s += std::conj(amp) * it->second;
    }
    return s;
}

FockVector annihilate(FockVector const& state, std::size_t mode)
{
    check_mode(state, mode);
    FockVector::AmplitudeMap out;
    for (auto const& [occ, amp] : state.amplitudes())
    {
        int const n = occ[mode];
        if (n == 0)
            continue;
        Occupation lowered = occ;
        --lowered[mode];
        accumulate(out, lowered, amp * std::sqrt(static_cast<double>(n)));
    }
    return FockVector(state.mode_count(), state.cutoff(), std::move(out));
}

FockVector create(FockVector const& state, std::size_t mode)
{
    check_mode(state, mode);
    FockVector::AmplitudeMap out;
    for (auto const& [occ, amp] : state.amplitudes())
    {
        Occupation raised = occ;
        int const n = ++raised[mode];
        if (n > state.cutoff())
            throw CapacityError("creation on " + format_occupation(occ) + " exceeds cutoff "
                                + std::to_string(state.cutoff()));
        accumulate(out, raised, amp * std::sqrt(static_cast<double>(n)));
    }
    return FockVector(state.mode_count(), state.cutoff(), std::move(out));
}

FockVector superposed_mode_annihilate(FockVector const& state, std::span<std::size_t const> modes)
{
    if (modes.empty())
        throw UsageError("superposed mode operator needs at least one mode");
    FockVector result(state.mode_count(), state.cutoff());
    for (auto mode : modes)
        result = result + annihilate(state, mode);
    return result.scaled(1.0 / std::sqrt(static_cast<double>(modes.size())));
}

Complex deposition_bilinear(FockVector const& bra,
                            FockVector const& ket,
                            std::span<std::size_t const> modes,
                            int order)
{
    if (order < 1)
        throw UsageError("moment order must be at least 1");
    auto const lowered_bra = power_of_superposed(bra, modes, order);
    auto const lowered_ket = power_of_superposed(ket, modes, order);
    return inner(lowered_bra, lowered_ket) / factorial(order);
}

double deposition_expectation(FockVector const& state, std::span<std::size_t const> modes, int order)
{
    if (order < 1)
        throw UsageError("moment order must be at least 1");
    double const n2 = state.norm_squared();
    if (std::abs(n2 - 1.0) > kNormTol)
    {
        std::ostringstream os;
        os << "state must be normalized; norm = " << std::sqrt(n2);
        throw ValidationError(os.str());
    }
    return power_of_superposed(state, modes, order).norm_squared() / factorial(order);
}

std::vector<std::size_t> all_modes(std::size_t mode_count)
{
    std::vector<std::size_t> modes(mode_count);
    std::iota(modes.begin(), modes.end(), std::size_t{0});
    return modes;
}

FockVector build_proto_state(ProtoState1D const& spec, double phi, int cutoff)
{
    auto const problems = validate(spec);
    if (!problems.empty())
        throw ValidationError("invalid proto-state: " + describe(problems));
    int const n = spec.photons;
    int const m = spec.minority;
    int const cap = cutoff < 0 ? n : cutoff;
    double const s = 1.0 / std::sqrt(2.0);

    FockVector::AmplitudeMap amps;
    accumulate(amps, {n - m, m}, s * std::polar(1.0, m * phi));
    accumulate(amps, {m, n - m}, s * std::polar(1.0, (n - m) * phi + spec.phase));
    return FockVector(2, cap, std::move(amps)).normalized();
}

FockVector build_proto_state(ProtoState2D const& spec, double phi, double chi, int cutoff)
{
    auto const problems = validate(spec);
    if (!problems.empty())
        throw ValidationError("invalid proto-state: " + describe(problems));
    int const n = spec.photons;
    int const m = spec.minority_x;
    int const k = spec.minority_y;
    int const cap = cutoff < 0 ? n : cutoff;

    FockVector::AmplitudeMap amps;
    accumulate(amps, {n - m, m, 0, 0}, 0.5 * std::polar(1.0, m * phi));
    accumulate(amps, {m, n - m, 0, 0}, 0.5 * std::polar(1.0, (n - m) * phi + spec.phase_x));
    accumulate(amps, {0, 0, n - k, k}, 0.5 * std::polar(1.0, k * chi));
    accumulate(amps, {0, 0, k, n - k}, 0.5 * std::polar(1.0, (n - k) * chi + spec.phase_y));
    return FockVector(4, cap, std::move(amps)).normalized();
}

FockVector build_state(SuperpositionFixedN const& state, double phi)
{
    require_valid(state);
    FockVector out(2, state.photons);
    for (auto const& t : state.terms)
        out = out + build_proto_state(t.state, phi).scaled(t.amplitude);
    return out;
}

FockVector build_state(SuperpositionFixedN2D const& state, double phi, double chi)
{
    require_valid(state);
    FockVector out(4, state.photons);
    for (auto const& t : state.terms)
        out = out + build_proto_state(t.state, phi, chi).scaled(t.amplitude);
    return out;
}

FockVector build_state(SuperpositionFixedM const& state, double phi)
{
    require_valid(state);
    int cap = 0;
    for (auto const& t : state.terms)
        cap = std::max(cap, t.photons);
    FockVector out(2, cap);
    for (auto const& t : state.terms)
    {
        ProtoState1D p{t.photons, state.minority, t.phase};
        out = out + build_proto_state(p, phi, cap).scaled(t.amplitude);
    }
    return out;
}

FockVector project_photon_number(FockVector const& state, int photons)
{
    FockVector::AmplitudeMap out;
    for (auto const& [occ, amp] : state.amplitudes())
        if (std::accumulate(occ.begin(), occ.end(), 0) == photons)
            out.emplace(occ, amp);
    return FockVector(state.mode_count(), state.cutoff(), std::move(out));
}

}  // namespace qlitho::fock
