#include "qlitho/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "qlitho/errors.hpp"

namespace qlitho::optimize
{

namespace
{

std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kInitGeneration = ~std::uint64_t{0};

std::size_t pick_other(Rng& rng, std::size_t n, std::initializer_list<std::size_t> exclude)
{
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (;;)
    {
        std::size_t const r = pick(rng);
        if (std::find(exclude.begin(), exclude.end(), r) == exclude.end())
            return r;
    }
}

// Evaluates f on each candidate, split across threads in contiguous chunks.
std::vector<double>
evaluate_all(Objective const& f, std::vector<std::vector<double>> const& candidates, int threads)
{
    std::vector<double> out(candidates.size());
    auto run = [&](std::size_t begin, std::size_t end, std::exception_ptr& err) {
        try
        {
            for (std::size_t i = begin; i < end; ++i)
            {
                double v = f(candidates[i]);
                out[i] = std::isfinite(v) ? v : std::numeric_limits<double>::quiet_NaN();
            }
        }
        catch (...)
        {
            err = std::current_exception();
        }
    };

    std::size_t const n = candidates.size();
    std::size_t const workers = std::clamp<std::size_t>(threads < 1 ? 1 : threads, 1, std::max<std::size_t>(n, 1));
    std::vector<std::exception_ptr> errors(workers);
    if (workers == 1)
    {
        run(0, n, errors[0]);
    }
    else
    {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(run, n * w / workers, n * (w + 1) / workers, std::ref(errors[w]));
        for (auto& t : pool)
            t.join();
    }
    for (auto const& e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

void record(FitResult& r,
            std::vector<std::vector<double>> const& pop,
            std::vector<double> const& fitness,
            std::size_t& best)
{
    double sum = 0.0;
    std::size_t finite = 0;
    for (std::size_t i = 0; i < fitness.size(); ++i)
    {
        if (std::isnan(fitness[i]))
            continue;
        sum += fitness[i];
        ++finite;
        if (std::isnan(fitness[best]) || fitness[i] < fitness[best])
            best = i;
    }
    r.best_params = pop[best];
    r.best_objective = fitness[best];
    r.history.push_back(fitness[best]);
    r.mean_history.push_back(sum / static_cast<double>(finite));
}

}  // namespace

OptimizerConfig OptimizerConfig::defaults_for(Bounds bounds)
{
    OptimizerConfig c;
    c.population_size = static_cast<int>(std::clamp<std::size_t>(15 * bounds.size(), 4, 200));
    c.bounds = std::move(bounds);
    return c;
}

Violations validate(OptimizerConfig const& c)
{
    Violations out;
    if (c.population_size < 4)
        out.push_back({"population_size", "population size must be at least 4"});
    if (c.generations < 1)
        out.push_back({"generations", "generations must be at least 1"});
    if (!(c.mutation_factor > 0.0 && c.mutation_factor < 2.0))
        out.push_back({"mutation_factor", "mutation factor must lie in (0, 2)"});
    if (!(c.crossover_rate >= 0.0 && c.crossover_rate <= 1.0))
        out.push_back({"crossover_rate", "crossover rate must lie in [0, 1]"});
    if (c.threads < 1)
        out.push_back({"threads", "thread count must be at least 1"});
    if (c.bounds.empty())
        out.push_back({"bounds", "at least one parameter is required"});
    for (std::size_t i = 0; i < c.bounds.size(); ++i)
    {
        auto const& b = c.bounds[i];
        if (!(std::isfinite(b.lower) && std::isfinite(b.upper) && b.lower < b.upper))
            out.push_back({"bounds[" + std::to_string(i) + "]", "interval must be finite with lower < upper"});
    }
    return out;
}

Rng candidate_rng(std::uint64_t seed, std::uint64_t generation, std::uint64_t member)
{
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64(s);
    s = h ^ generation;
    h = splitmix64(s);
    s = h ^ member;
    h = splitmix64(s);
    std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    return Rng(seq);
}

std::vector<double> RandOneBin::donor(Population const& pop, std::size_t target, double factor, Rng& rng) const
{
    std::size_t const n = pop.members.size();
    std::size_t const r1 = pick_other(rng, n, {target});
    std::size_t const r2 = pick_other(rng, n, {target, r1});
    std::size_t const r3 = pick_other(rng, n, {target, r1, r2});
    auto const& a = pop.members[r1];
    auto const& b = pop.members[r2];
    auto const& c = pop.members[r3];
    std::vector<double> v(a.size());
    for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = a[j] + factor * (b[j] - c[j]);
    return v;
}

std::vector<double> BestOneBin::donor(Population const& pop, std::size_t target, double factor, Rng& rng) const
{
    std::size_t const n = pop.members.size();
    std::size_t const r1 = pick_other(rng, n, {target, pop.best});
    std::size_t const r2 = pick_other(rng, n, {target, pop.best, r1});
    auto const& best = pop.members[pop.best];
    auto const& a = pop.members[r1];
    auto const& b = pop.members[r2];
    std::vector<double> v(best.size());
    for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = best[j] + factor * (a[j] - b[j]);
    return v;
}

std::unique_ptr<Strategy> make_strategy(std::string const& name)
{
    if (name == "rand1bin")
        return std::make_unique<RandOneBin>();
    if (name == "best1bin")
        return std::make_unique<BestOneBin>();
    throw UsageError("unknown optimizer strategy '" + name + "'");
}

FitResult minimize(Objective const& objective, OptimizerConfig const& config)
{
    return minimize(objective, config, RandOneBin{});
}

FitResult minimize(Objective const& objective, OptimizerConfig const& config, Strategy const& strategy)
{
    auto const problems = validate(config);
    if (!problems.empty())
        throw ValidationError("invalid optimizer config: " + describe(problems));

    std::size_t const np = static_cast<std::size_t>(config.population_size);
    std::size_t const dim = config.bounds.size();
    FitResult result;

    std::vector<std::vector<double>> pop(np, std::vector<double>(dim));
    for (std::size_t i = 0; i < np; ++i)
    {
        auto rng = candidate_rng(config.seed, kInitGeneration, i);
        for (std::size_t j = 0; j < dim; ++j)
        {
            std::uniform_real_distribution<double> u(config.bounds[j].lower, config.bounds[j].upper);
            pop[i][j] = u(rng);
        }
    }
    auto fitness = evaluate_all(objective, pop, config.threads);
    result.evaluations += np;
    auto const initial_rejected = std::count_if(fitness.begin(), fitness.end(), [](double v) { return std::isnan(v); });
    result.rejected += static_cast<std::uint64_t>(initial_rejected);
    if (static_cast<std::size_t>(initial_rejected) == np)
        throw NumericError("every member of the initial population produced a non-finite objective");

    std::size_t best = 0;
    record(result, pop, fitness, best);

    std::vector<std::vector<double>> trials(np);
    for (int gen = 1; gen <= config.generations; ++gen)
    {
        Population const view{pop, best};
        for (std::size_t i = 0; i < np; ++i)
        {
            auto rng = candidate_rng(config.seed, static_cast<std::uint64_t>(gen), i);
            auto donor = strategy.donor(view, i, config.mutation_factor, rng);
            std::uniform_int_distribution<std::size_t> pick_dim(0, dim - 1);
            std::uniform_real_distribution<double> u01(0.0, 1.0);
            std::size_t const forced = pick_dim(rng);
            auto& trial = trials[i];
            trial = pop[i];
            for (std::size_t j = 0; j < dim; ++j)
            {
                if (j != forced && !(u01(rng) < config.crossover_rate))
                    continue;
                double v = donor[j];
                auto const& b = config.bounds[j];
                if (v < b.lower)
                    v = 0.5 * (pop[i][j] + b.lower);
                else if (v > b.upper)
                    v = 0.5 * (pop[i][j] + b.upper);
                trial[j] = v;
            }
        }

        auto const scores = evaluate_all(objective, trials, config.threads);
        result.evaluations += np;
        std::size_t rejected_now = 0;
        for (std::size_t i = 0; i < np; ++i)
        {
            if (std::isnan(scores[i]))
            {
                ++rejected_now;
                continue;
            }
            if (std::isnan(fitness[i]) || scores[i] <= fitness[i])
            {
                pop[i] = std::move(trials[i]);
                fitness[i] = scores[i];
            }
        }
        result.rejected += rejected_now;
        if (rejected_now == np)
        {
            std::ostringstream os;
            os << "generation " << gen << ": all " << np << " candidates produced non-finite objective values";
            throw NumericError(os.str());
        }
        record(result, pop, fitness, best);
    }
    return result;
}

//---------------------------------------------------------------------------//
// Codecs
//---------------------------------------------------------------------------//

Codec::Codec(std::size_t amplitude_count) : count_(amplitude_count)
{
    if (count_ == 0)
        throw UsageError("codec needs at least one amplitude");
}

Bounds Codec::bounds() const
{
    Bounds b(dimension(), Interval{-1.0, 1.0});
    b.back() = {std::log(kMinExposure), std::log(kMaxExposure)};
    return b;
}

void Codec::check(std::span<double const> params) const
{
    if (params.size() != dimension())
        throw UsageError("parameter vector has " + std::to_string(params.size()) + " entries, expected "
                         + std::to_string(dimension()));
}

std::vector<double> Codec::encode(std::span<Complex const> amplitudes, double exposure_time) const
{
    if (amplitudes.size() != count_)
        throw UsageError("expected " + std::to_string(count_) + " amplitudes, got "
                         + std::to_string(amplitudes.size()));
    if (!(exposure_time > 0.0))
        throw ValidationError("exposure time must be positive");
    std::vector<double> out;
    out.reserve(dimension());
    for (auto const& a : amplitudes)
    {
        out.push_back(a.real());
        out.push_back(a.imag());
    }
    out.push_back(std::log(exposure_time));
    return out;
}

std::vector<Complex> Codec::amplitudes(std::span<double const> params) const
{
    check(params);
    std::vector<Complex> out(count_);
    double n2 = 0.0;
    for (std::size_t i = 0; i < count_; ++i)
    {
        out[i] = {params[2 * i], params[2 * i + 1]};
        n2 += std::norm(out[i]);
    }
    if (!(n2 > 0.0) || !std::isfinite(n2))
        throw ValidationError("amplitude block cannot be normalized");
    double const s = 1.0 / std::sqrt(n2);
    for (auto& a : out)
        a *= s;
    return out;
}

double Codec::exposure_time(std::span<double const> params) const
{
    check(params);
    return std::exp(params.back());
}

namespace
{

std::vector<double> fill_phases(std::vector<double> phases, std::size_t slots)
{
    if (phases.empty())
        phases.assign(slots, 0.0);
    if (phases.size() != slots)
        throw UsageError("phase template needs " + std::to_string(slots) + " entries, got "
                         + std::to_string(phases.size()));
    for (auto& p : phases)
        p = wrap_phase(p);
    return phases;
}

bool same_phase(double a, double b)
{
    double const d = std::abs(wrap_phase(a) - wrap_phase(b));
    return std::min(d, kTwoPi - d) <= 1e-12;
}

}  // namespace

Codec1D::Codec1D(int photons, std::vector<double> phases)
    : photons_(photons)
    , phases_(fill_phases(std::move(phases), static_cast<std::size_t>(max_minority(std::max(photons, 0)) + 1)))
    , codec_(phases_.size())
{
    if (photons < 1)
        throw UsageError("photon count must be at least 1");
}

std::vector<double> Codec1D::encode(SuperpositionFixedN const& state, double exposure_time) const
{
    if (state.photons != photons_)
        throw UsageError("state photon number does not match codec");
    std::vector<Complex> amps(phases_.size());
    for (auto const& t : state.terms)
    {
        auto const m = static_cast<std::size_t>(t.state.minority);
        if (m >= amps.size())
            throw UsageError("minority index out of range for codec");
        if (!same_phase(t.state.phase, phases_[m]))
            throw UsageError("term phase differs from the codec phase template at m = " + std::to_string(m));
        amps[m] += t.amplitude;
    }
    return codec_.encode(amps, exposure_time);
}

Decoded1D Codec1D::decode(std::span<double const> params) const
{
    auto const amps = codec_.amplitudes(params);
    Decoded1D d;
    d.state.photons = photons_;
    for (std::size_t m = 0; m < amps.size(); ++m)
        d.state.terms.push_back({ProtoState1D::make(photons_, static_cast<int>(m), phases_[m]), amps[m]});
    d.exposure_time = codec_.exposure_time(params);
    return d;
}

Codec2D::Codec2D(int photons, std::vector<double> phases_x, std::vector<double> phases_y)
    : photons_(photons)
    , side_(static_cast<std::size_t>(max_minority(std::max(photons, 0)) + 1))
    , phases_x_(fill_phases(std::move(phases_x), side_))
    , phases_y_(fill_phases(std::move(phases_y), side_))
    , codec_(side_ * side_)
{
    if (photons < 1)
        throw UsageError("photon count must be at least 1");
}

std::vector<double> Codec2D::encode(SuperpositionFixedN2D const& state, double exposure_time) const
{
    if (state.photons != photons_)
        throw UsageError("state photon number does not match codec");
    std::vector<Complex> amps(side_ * side_);
    for (auto const& t : state.terms)
    {
        auto const m = static_cast<std::size_t>(t.state.minority_x);
        auto const k = static_cast<std::size_t>(t.state.minority_y);
        if (m >= side_ || k >= side_)
            throw UsageError("minority index out of range for codec");
        if (!same_phase(t.state.phase_x, phases_x_[m]) || !same_phase(t.state.phase_y, phases_y_[k]))
            throw UsageError("term phases differ from the codec phase template");
        amps[m * side_ + k] += t.amplitude;
    }
    return codec_.encode(amps, exposure_time);
}

Decoded2D Codec2D::decode(std::span<double const> params) const
{
    auto const amps = codec_.amplitudes(params);
    Decoded2D d;
    d.state.photons = photons_;
    for (std::size_t m = 0; m < side_; ++m)
        for (std::size_t k = 0; k < side_; ++k)
        {
            ProtoState2D p{photons_, static_cast<int>(m), static_cast<int>(k), phases_x_[m], phases_y_[k]};
            d.state.terms.push_back({p, amps[m * side_ + k]});
        }
    d.exposure_time = codec_.exposure_time(params);
    return d;
}

//---------------------------------------------------------------------------//
// Fit drivers
//---------------------------------------------------------------------------//

SuperpositionFit1D fit_superposition_1d(synth::TargetPattern1D const& target,
                                        Codec1D const& codec,
                                        int points,
                                        OptimizerConfig config,
                                        Strategy const& strategy)
{
    synth::Objective1D const objective(target, codec.photons(), codec.phases(), points);
    if (config.bounds.empty())
        config.bounds = codec.raw().bounds();
    if (config.bounds.size() != codec.dimension())
        throw UsageError("optimizer bounds do not match the parameter dimension");

    auto f = [&](std::span<double const> x) {
        try
        {
            return objective(codec.raw().amplitudes(x), codec.raw().exposure_time(x));
        }
        catch (ValidationError const&)
        {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    SuperpositionFit1D out;
    out.optimizer = minimize(f, config, strategy);
    out.best = codec.decode(out.optimizer.best_params);
    return out;
}

SuperpositionFit2D fit_superposition_2d(synth::TargetPattern2D const& target,
                                        Codec2D const& codec,
                                        int phi_points,
                                        int chi_points,
                                        OptimizerConfig config,
                                        Strategy const& strategy)
{
    synth::Objective2D const objective(target, codec.photons(), codec.phases_x(), codec.phases_y(), phi_points, chi_points);
    if (config.bounds.empty())
        config.bounds = codec.raw().bounds();
    if (config.bounds.size() != codec.dimension())
        throw UsageError("optimizer bounds do not match the parameter dimension");

    auto f = [&](std::span<double const> x) {
        try
        {
            return objective(codec.raw().amplitudes(x), codec.raw().exposure_time(x));
        }
        catch (ValidationError const&)
        {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    SuperpositionFit2D out;
    out.optimizer = minimize(f, config, strategy);
    out.best = codec.decode(out.optimizer.best_params);
    return out;
}

}  // namespace qlitho::optimize
