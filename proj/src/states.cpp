#include "qlitho/states.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <utility>

#include "qlitho/errors.hpp"

namespace qlitho
{

namespace
{
constexpr double kUnitNormTol = 1e-10;
// Below this the summed degenerate branches are treated as cancelled.
constexpr double kCancelledNormSq = 1e-24;

bool phase_in_range(double p) { return std::isfinite(p) && p >= 0.0 && p < kTwoPi; }

void check_proto(ProtoState1D const& s, std::string const& prefix, Violations& out)
{
    if (s.photons < 1)
    {
        out.push_back({prefix + "photons", "photon count must be at least 1"});
        return;
    }
    auto const size_before = out.size();
    if (s.minority < 0)
        out.push_back({prefix + "minority", "m must be non-negative"});
    if (s.minority > max_minority(s.photons))
        out.push_back({prefix + "minority", "m exceeds floor(N/2)"});
    if (!phase_in_range(s.phase))
        out.push_back({prefix + "phase", "phase must lie in [0, 2pi)"});
    if (out.size() == size_before && literal_norm_squared(s) < kCancelledNormSq)
        out.push_back({prefix + "phase", "degenerate branches cancel (N = 2m, phase = pi)"});
}

void check_proto(ProtoState2D const& s, std::string const& prefix, Violations& out)
{
    if (s.photons < 1)
    {
        out.push_back({prefix + "photons", "photon count must be at least 1"});
        return;
    }
    auto const size_before = out.size();
    if (s.minority_x < 0 || s.minority_x > max_minority(s.photons))
        out.push_back({prefix + "minority_x", "m must lie in 0..floor(N/2)"});
    if (s.minority_y < 0 || s.minority_y > max_minority(s.photons))
        out.push_back({prefix + "minority_y", "k must lie in 0..floor(N/2)"});
    if (!phase_in_range(s.phase_x))
        out.push_back({prefix + "phase_x", "phase must lie in [0, 2pi)"});
    if (!phase_in_range(s.phase_y))
        out.push_back({prefix + "phase_y", "phase must lie in [0, 2pi)"});
    if (out.size() == size_before && literal_norm_squared(s) < kCancelledNormSq)
        out.push_back({prefix + "phase_x", "all branches cancel"});
}

template<class Term>
void check_unit_norm(std::vector<Term> const& terms, Violations& out)
{
    double sum = 0.0;
    for (auto const& t : terms)
    {
        if (!std::isfinite(t.amplitude.real()) || !std::isfinite(t.amplitude.imag()))
        {
            out.push_back({"terms", "non-finite amplitude"});
            return;
        }
        sum += std::norm(t.amplitude);
    }
    if (std::abs(sum - 1.0) > kUnitNormTol)
    {
        std::ostringstream os;
        os << "amplitudes not normalized (sum |alpha|^2 = " << sum << ")";
        out.push_back({"terms", os.str()});
    }
}

double branch_pair_norm_sq(int photons, int minority, double phase)
{
    if (2 * minority != photons)
        return 2.0;
    return std::norm(Complex{1.0, 0.0} + std::polar(1.0, phase));
}

}  // namespace

double wrap_phase(double radians)
{
    double w = std::fmod(radians, kTwoPi);
    if (w < 0.0)
        w += kTwoPi;
    if (w >= kTwoPi)
        w = 0.0;
    return w;
}

double literal_norm_squared(ProtoState1D const& s)
{
    return branch_pair_norm_sq(s.photons, s.minority, s.phase) / 2.0;
}

double literal_norm_squared(ProtoState2D const& s)
{
    return (branch_pair_norm_sq(s.photons, s.minority_x, s.phase_x)
            + branch_pair_norm_sq(s.photons, s.minority_y, s.phase_y))
           / 4.0;
}

Violations validate(ProtoState1D const& s)
{
    Violations out;
    check_proto(s, "", out);
    return out;
}

Violations validate(ProtoState2D const& s)
{
    Violations out;
    check_proto(s, "", out);
    return out;
}

Violations validate(SuperpositionFixedN const& s)
{
    Violations out;
    if (s.photons < 1)
        out.push_back({"photons", "photon count must be at least 1"});
    if (s.terms.empty())
        out.push_back({"terms", "superposition has no terms"});
    std::set<int> seen;
    for (std::size_t i = 0; i < s.terms.size(); ++i)
    {
        auto const& t = s.terms[i];
        std::string const prefix = "terms[" + std::to_string(i) + "].state.";
        if (t.state.photons != s.photons)
            out.push_back({prefix + "photons", "term photon count differs from N"});
        check_proto(t.state, prefix, out);
        if (!seen.insert(t.state.minority).second)
            out.push_back({prefix + "minority", "duplicate index"});
    }
    check_unit_norm(s.terms, out);
    return out;
}

Violations validate(SuperpositionFixedN2D const& s)
{
    Violations out;
    if (s.photons < 1)
        out.push_back({"photons", "photon count must be at least 1"});
    if (s.terms.empty())
        out.push_back({"terms", "superposition has no terms"});
    std::set<std::pair<int, int>> seen;
    for (std::size_t i = 0; i < s.terms.size(); ++i)
    {
        auto const& t = s.terms[i];
        std::string const prefix = "terms[" + std::to_string(i) + "].state.";
        if (t.state.photons != s.photons)
            out.push_back({prefix + "photons", "term photon count differs from N"});
        check_proto(t.state, prefix, out);
        if (!seen.insert({t.state.minority_x, t.state.minority_y}).second)
            out.push_back({prefix + "minority_x", "duplicate index"});
    }
    check_unit_norm(s.terms, out);
    return out;
}

Violations validate(SuperpositionFixedM const& s)
{
    Violations out;
    if (s.minority < 0)
        out.push_back({"minority", "m must be non-negative"});
    if (s.terms.empty())
        out.push_back({"terms", "superposition has no terms"});
    std::set<int> seen;
    for (std::size_t i = 0; i < s.terms.size(); ++i)
    {
        auto const& t = s.terms[i];
        std::string const prefix = "terms[" + std::to_string(i) + "].";
        check_proto(ProtoState1D{t.photons, s.minority, t.phase}, prefix, out);
        if (!seen.insert(t.photons).second)
            out.push_back({prefix + "photons", "duplicate index"});
    }
    check_unit_norm(s.terms, out);
    return out;
}

std::string describe(Violations const& v)
{
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i)
    {
        if (i)
            os << "; ";
        os << (v[i].path.empty() ? std::string("<state>") : v[i].path) << ": " << v[i].message;
    }
    return os.str();
}

template<class State>
void require_valid(State const& s)
{
    auto const v = validate(s);
    if (!v.empty())
        throw ValidationError("invalid state: " + describe(v));
}

template void require_valid(ProtoState1D const&);
template void require_valid(ProtoState2D const&);
template void require_valid(SuperpositionFixedN const&);
template void require_valid(SuperpositionFixedN2D const&);
template void require_valid(SuperpositionFixedM const&);

CrossWeights derived_cross_weights(Complex alpha_m, Complex alpha_mp)
{
    Complex const z = std::conj(alpha_m) * alpha_mp;
    double const r = std::abs(z);
    if (r == 0.0)
        return {0.0, 0.0};
    return {r, wrap_phase(std::arg(z))};
}

//---------------------------------------------------------------------------//
// JSON
//---------------------------------------------------------------------------//

nlohmann::json complex_to_json(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

Complex complex_from_json(nlohmann::json const& j)
{
    if (j.is_number())
        return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2)
        throw ValidationError("amplitude must be [re, im]");
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

void to_json(nlohmann::json& j, ProtoState1D const& s)
{
    j = {{"N", s.photons}, {"m", s.minority}, {"theta", s.phase}};
}

void from_json(nlohmann::json const& j, ProtoState1D& s)
{
    s.photons = j.at("N").get<int>();
    s.minority = j.value("m", 0);
    s.phase = j.value("theta", 0.0);
}

void to_json(nlohmann::json& j, ProtoState2D const& s)
{
    j = {{"N", s.photons},
         {"m", s.minority_x},
         {"k", s.minority_y},
         {"zeta", s.phase_x},
         {"zeta_bar", s.phase_y}};
}

void from_json(nlohmann::json const& j, ProtoState2D& s)
{
    s.photons = j.at("N").get<int>();
    s.minority_x = j.value("m", 0);
    s.minority_y = j.value("k", 0);
    s.phase_x = j.value("zeta", 0.0);
    s.phase_y = j.value("zeta_bar", 0.0);
}

void to_json(nlohmann::json& j, SuperpositionFixedN const& s)
{
    auto terms = nlohmann::json::array();
    for (auto const& t : s.terms)
        terms.push_back({{"m", t.state.minority},
                         {"theta", t.state.phase},
                         {"amplitude", complex_to_json(t.amplitude)}});
    j = {{"N", s.photons}, {"terms", std::move(terms)}};
}

void from_json(nlohmann::json const& j, SuperpositionFixedN& s)
{
    s.photons = j.at("N").get<int>();
    s.terms.clear();
    for (auto const& t : j.at("terms"))
    {
        ProtoState1D p{s.photons, t.at("m").get<int>(), t.value("theta", 0.0)};
        s.terms.push_back({p, complex_from_json(t.at("amplitude"))});
    }
}

void to_json(nlohmann::json& j, SuperpositionFixedN2D const& s)
{
    auto terms = nlohmann::json::array();
    for (auto const& t : s.terms)
        terms.push_back({{"m", t.state.minority_x},
                         {"k", t.state.minority_y},
                         {"zeta", t.state.phase_x},
                         {"zeta_bar", t.state.phase_y},
                         {"amplitude", complex_to_json(t.amplitude)}});
    j = {{"N", s.photons}, {"terms", std::move(terms)}};
}

void from_json(nlohmann::json const& j, SuperpositionFixedN2D& s)
{
    s.photons = j.at("N").get<int>();
    s.terms.clear();
    for (auto const& t : j.at("terms"))
    {
        ProtoState2D p{s.photons,
                       t.at("m").get<int>(),
                       t.at("k").get<int>(),
                       t.value("zeta", 0.0),
                       t.value("zeta_bar", 0.0)};
        s.terms.push_back({p, complex_from_json(t.at("amplitude"))});
    }
}

void to_json(nlohmann::json& j, SuperpositionFixedM const& s)
{
    auto terms = nlohmann::json::array();
    for (auto const& t : s.terms)
        terms.push_back(
            {{"n", t.photons}, {"theta", t.phase}, {"amplitude", complex_to_json(t.amplitude)}});
    j = {{"m", s.minority}, {"terms", std::move(terms)}};
}

void from_json(nlohmann::json const& j, SuperpositionFixedM& s)
{
    s.minority = j.value("m", 0);
    s.terms.clear();
    for (auto const& t : j.at("terms"))
        s.terms.push_back({t.at("n").get<int>(),
                           t.value("theta", 0.0),
                           complex_from_json(t.at("amplitude"))});
}

}  // namespace qlitho
