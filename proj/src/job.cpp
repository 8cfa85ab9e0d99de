#include "qlitho/job.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "qlitho/deposition.hpp"
#include "qlitho/errors.hpp"
#include "qlitho/fock_oracle.hpp"

namespace qlitho::cli
{

using nlohmann::json;
namespace fs = std::filesystem;

namespace
{

constexpr double kOracleTolerance = 1e-10;
constexpr int kOracleSamples1D = 64;
constexpr int kOracleSamples2D = 12;

//---------------------------------------------------------------------------//
// JSON access
//---------------------------------------------------------------------------//

void require_object(json const& j, std::string const& path)
{
    if (!j.is_object())
        throw ValidationError(path + ": expected an object");
}

void allow_keys(json const& j, std::string const& path, std::set<std::string> const& allowed)
{
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ValidationError(path + ": unknown key '" + it.key() + "'");
}

json const& required(json const& j, std::string const& key, std::string const& path)
{
    auto it = j.find(key);
    if (it == j.end())
        throw ValidationError(path + ": missing required key '" + key + "'");
    return *it;
}

double as_real(json const& v, std::string const& path)
{
    if (!v.is_number())
        throw ValidationError(path + ": expected a number");
    double const d = v.get<double>();
    if (!std::isfinite(d))
        throw ValidationError(path + ": must be finite");
    return d;
}

int as_int(json const& v, std::string const& path)
{
    if (!v.is_number_integer())
        throw ValidationError(path + ": expected an integer");
    return v.get<int>();
}

double real_or(json const& j, std::string const& key, double fallback, std::string const& path)
{
    auto it = j.find(key);
    return it == j.end() ? fallback : as_real(*it, path + "." + key);
}

int int_or(json const& j, std::string const& key, int fallback, std::string const& path)
{
    auto it = j.find(key);
    return it == j.end() ? fallback : as_int(*it, path + "." + key);
}

std::vector<double> reals_or(json const& j, std::string const& key, std::string const& path)
{
    auto it = j.find(key);
    if (it == j.end())
        return {};
    if (!it->is_array())
        throw ValidationError(path + "." + key + ": expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < it->size(); ++i)
        out.push_back(as_real((*it)[i], path + "." + key + "[" + std::to_string(i) + "]"));
    return out;
}

void require_positive(double v, std::string const& path)
{
    if (!(v > 0.0))
        throw ValidationError(path + ": must be positive");
}

void require_resolution(int points, int photons, std::string const& path)
{
    if (points < 4 * photons + 1)
        throw ValidationError(path + ": resolution " + std::to_string(points) + " below 4N+1 = "
                              + std::to_string(4 * photons + 1));
}

template<class State>
State parse_state(json const& j, std::string const& path)
{
    State s;
    try
    {
        s = j.get<State>();
    }
    catch (json::exception const& e)
    {
        throw ValidationError(path + ": " + e.what());
    }
    auto const v = validate(s);
    if (!v.empty())
        throw ValidationError(path + ": " + describe(v));
    return s;
}

//---------------------------------------------------------------------------//
// Targets
//---------------------------------------------------------------------------//

std::vector<std::vector<double>> read_numeric_csv(fs::path const& file, std::size_t columns)
{
    std::ifstream in(file);
    if (!in)
        throw ValidationError("cannot open target samples file '" + file.string() + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ','))
        {
            try
            {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
            }
            catch (std::exception const&)
            {
                numeric = false;
                break;
            }
        }
        if (!numeric)
        {
            if (rows.empty())
                continue;  // header
            throw ValidationError(file.string() + ":" + std::to_string(lineno) + ": non-numeric row");
        }
        if (row.size() != columns)
            throw ValidationError(file.string() + ":" + std::to_string(lineno) + ": expected "
                                  + std::to_string(columns) + " columns");
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw ValidationError("target samples file '" + file.string() + "' has no data rows");
    return rows;
}

fs::path resolve(fs::path const& base, std::string const& file)
{
    fs::path p(file);
    if (p.is_relative())
        p = base / p;
    if (!fs::exists(p))
        throw ValidationError("referenced file '" + p.string() + "' does not exist");
    return p;
}

synth::TargetPattern1D parse_target_1d(json const& j, fs::path const& base, std::string const& path)
{
    require_object(j, path);
    auto const kind = required(j, "kind", path);
    if (!kind.is_string())
        throw ValidationError(path + ".kind: expected a string");
    auto const k = kind.get<std::string>();
    if (k == "trench")
    {
        allow_keys(j, path, {"kind", "h"});
        double const h = real_or(j, "h", 1.0, path);
        require_positive(h, path + ".h");
        return synth::TargetPattern1D::trench(h);
    }
    if (k == "constant")
    {
        allow_keys(j, path, {"kind", "value"});
        return synth::TargetPattern1D::constant(as_real(required(j, "value", path), path + ".value"));
    }
    if (k == "fourier")
    {
        allow_keys(j, path, {"kind", "cosine", "sine"});
        synth::FourierCoefficients c{reals_or(j, "cosine", path), reals_or(j, "sine", path)};
        if (c.cosine.empty() || c.cosine.size() != c.sine.size())
            throw ValidationError(path + ": cosine and sine need the same non-zero length");
        return synth::TargetPattern1D::fourier_series(std::move(c));
    }
    if (k == "samples")
    {
        allow_keys(j, path, {"kind", "file"});
        auto const file = resolve(base, required(j, "file", path).get<std::string>());
        std::vector<std::pair<double, double>> samples;
        for (auto const& r : read_numeric_csv(file, 2))
            samples.emplace_back(r[0], r[1]);
        return synth::TargetPattern1D::from_samples(std::move(samples));
    }
    throw ValidationError(path + ".kind: unknown 1D target '" + k + "'");
}

synth::TargetPattern2D parse_target_2d(json const& j, fs::path const& base, std::string const& path)
{
    require_object(j, path);
    auto const kind = required(j, "kind", path);
    if (!kind.is_string())
        throw ValidationError(path + ".kind: expected a string");
    auto const k = kind.get<std::string>();
    if (k == "square")
    {
        allow_keys(j, path, {"kind", "h", "half_width"});
        double const h = real_or(j, "h", 1.0, path);
        double const w = real_or(j, "half_width", kPi / 2, path);
        require_positive(h, path + ".h");
        if (!(w > 0.0 && w <= kPi))
            throw ValidationError(path + ".half_width: must lie in (0, pi]");
        return synth::TargetPattern2D::square(h, w);
    }
    if (k == "fourier")
    {
        allow_keys(j, path, {"kind", "size", "a", "b", "c", "d"});
        synth::FourierCoefficients2D c;
        c.size = as_int(required(j, "size", path), path + ".size");
        if (c.size < 1)
            throw ValidationError(path + ".size: must be at least 1");
        auto const n = static_cast<std::size_t>(c.size) * c.size;
        auto block = [&](char const* key) {
            auto v = reals_or(j, key, path);
            if (v.empty())
                v.assign(n, 0.0);
            if (v.size() != n)
                throw ValidationError(path + "." + key + ": expected size*size entries");
            return v;
        };
        c.a = block("a");
        c.b = block("b");
        c.c = block("c");
        c.d = block("d");
        return synth::TargetPattern2D::fourier_series(std::move(c));
    }
    if (k == "separable")
    {
        allow_keys(j, path, {"kind", "x", "y"});
        return synth::TargetPattern2D::separable(parse_target_1d(required(j, "x", path), base, path + ".x"),
                                                 parse_target_1d(required(j, "y", path), base, path + ".y"));
    }
    if (k == "samples")
    {
        allow_keys(j, path, {"kind", "file"});
        auto const file = resolve(base, required(j, "file", path).get<std::string>());
        std::vector<std::array<double, 3>> samples;
        for (auto const& r : read_numeric_csv(file, 3))
            samples.push_back({r[0], r[1], r[2]});
        try
        {
            return synth::TargetPattern2D::from_samples(samples);
        }
        catch (UsageError const& e)
        {
            throw ValidationError(path + ": " + e.what());
        }
    }
    throw ValidationError(path + ".kind: unknown 2D target '" + k + "'");
}

OptimizerSettings parse_optimizer(json const& j, std::string const& path)
{
    OptimizerSettings s;
    if (j.is_null())
        return s;
    require_object(j, path);
    allow_keys(j, path, {"population_size", "generations", "mutation_factor", "crossover_rate", "strategy"});
    if (j.contains("population_size"))
        s.population_size = as_int(j["population_size"], path + ".population_size");
    s.generations = int_or(j, "generations", s.generations, path);
    s.mutation_factor = real_or(j, "mutation_factor", s.mutation_factor, path);
    s.crossover_rate = real_or(j, "crossover_rate", s.crossover_rate, path);
    if (j.contains("strategy"))
        s.strategy = j["strategy"].get<std::string>();
    try
    {
        (void)optimize::make_strategy(s.strategy);
    }
    catch (UsageError const& e)
    {
        throw ValidationError(path + ".strategy: " + e.what());
    }
    // Dimension-independent checks; bounds are filled in at run time.
    auto probe = s.config_for({{0.0, 1.0}}, 0, 1);
    auto const v = optimize::validate(probe);
    if (!v.empty())
        throw ValidationError(path + ": " + describe(v));
    return s;
}

//---------------------------------------------------------------------------//
// Artifacts
//---------------------------------------------------------------------------//

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter
{
  public:
    CsvWriter(fs::path const& file, std::vector<std::string> const& header) : path_(file), out_(file)
    {
        if (!out_)
            throw ValidationError("cannot write '" + file.string() + "'");
        for (std::size_t i = 0; i < header.size(); ++i)
            out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }

    void row(std::initializer_list<double> values)
    {
        bool first = true;
        for (double v : values)
        {
            if (!std::isfinite(v))
                throw NumericError("non-finite value while writing '" + path_.string() + "'");
            out_ << (first ? "" : ",") << fmt(v);
            first = false;
        }
        out_ << '\n';
    }

  private:
    fs::path path_;
    std::ofstream out_;
};

double grid_angle(int i, int points) { return kTwoPi * i / points; }

void write_trace(fs::path const& file, optimize::FitResult const& r)
{
    CsvWriter csv(file, {"generation", "best", "mean"});
    for (std::size_t g = 0; g < r.history.size(); ++g)
        csv.row({static_cast<double>(g), r.history[g], r.mean_history[g]});
}

void write_json(fs::path const& file, json const& j)
{
    std::ofstream out(file);
    if (!out)
        throw ValidationError("cannot write '" + file.string() + "'");
    out << j.dump(2) << '\n';
}

json fit_summary(optimize::FitResult const& r)
{
    return {{"best_objective", r.best_objective},
            {"generations", r.history.empty() ? 0 : r.history.size() - 1},
            {"evaluations", r.evaluations},
            {"rejected", r.rejected},
            {"best_params", r.best_params}};
}

//---------------------------------------------------------------------------//
// Oracle cross-checks
//---------------------------------------------------------------------------//

struct OracleStats
{
    double max_relative = 0.0;
    int samples = 0;

    void add(double closed, double oracle, double scale)
    {
        max_relative = std::max(max_relative, std::abs(closed - oracle) / scale);
        ++samples;
    }

    json to_json(double tolerance) const
    {
        return {{"samples", samples}, {"max_relative_deviation", max_relative}, {"tolerance", tolerance}};
    }

    void require(double tolerance, std::string const& what) const
    {
        if (!(max_relative <= tolerance))
        {
            std::ostringstream os;
            os << what << ": closed form deviates from the Fock oracle by " << max_relative << " (tolerance "
               << tolerance << ")";
            throw OracleMismatch(os.str());
        }
    }
};

std::vector<int> sample_indices(int points, int wanted)
{
    std::vector<int> out;
    int const stride = std::max(1, points / wanted);
    for (int i = 0; i < points; i += stride)
        out.push_back(i);
    return out;
}

double rate_scale(SuperpositionFixedN const& s)
{
    double scale = 0.0;
    for (auto const& a : s.terms)
        for (auto const& b : s.terms)
            scale += std::abs(a.amplitude) * std::abs(b.amplitude) * deposition::element_bound_1d(a.state, b.state);
    return scale;
}

double rate_scale(SuperpositionFixedN2D const& s)
{
    double scale = 0.0;
    for (auto const& a : s.terms)
        for (auto const& b : s.terms)
            scale += std::abs(a.amplitude) * std::abs(b.amplitude) * deposition::element_bound_2d(a.state, b.state);
    return scale;
}

double rate_scale(SuperpositionFixedM const& s)
{
    double scale = 0.0;
    for (auto const& t : s.terms)
    {
        ProtoState1D const p{t.photons, s.minority, t.phase};
        scale += std::norm(t.amplitude) * deposition::element_bound_1d(p, p);
    }
    return scale;
}

OracleStats oracle_check(SuperpositionFixedN const& s, int points)
{
    OracleStats st;
    auto const modes = fock::all_modes(2);
    double const scale = rate_scale(s);
    for (int i : sample_indices(points, kOracleSamples1D))
    {
        double const phi = grid_angle(i, points);
        auto const psi = fock::build_state(s, phi);
        st.add(deposition::fixed_n_superposition_rate(s, phi),
               fock::deposition_expectation(psi, modes, s.photons),
               scale);
    }
    return st;
}

OracleStats oracle_check(SuperpositionFixedM const& s, int points)
{
    OracleStats st;
    auto const modes = fock::all_modes(2);
    double const scale = rate_scale(s);
    for (int i : sample_indices(points, kOracleSamples1D))
    {
        double const phi = grid_angle(i, points);
        auto const psi = fock::build_state(s, phi);
        double oracle = 0.0;
        for (auto const& t : s.terms)
        {
            auto const branch = fock::project_photon_number(psi, t.photons);
            oracle += fock::deposition_bilinear(branch, branch, modes, t.photons).real();
        }
        st.add(deposition::fixed_m_superposition_rate(s, phi).total, oracle, scale);
    }
    return st;
}

OracleStats oracle_check(SuperpositionFixedN2D const& s, int phi_points, int chi_points)
{
    OracleStats st;
    auto const modes = fock::all_modes(4);
    double const scale = rate_scale(s);
    for (int i : sample_indices(phi_points, kOracleSamples2D))
        for (int j : sample_indices(chi_points, kOracleSamples2D))
        {
            double const phi = grid_angle(i, phi_points);
            double const chi = grid_angle(j, chi_points);
            // Branches of different (m, k) share kets, so the summed vector
            // is not unit norm; compare the bilinear form directly.
            auto const psi = fock::build_state(s, phi, chi);
            st.add(deposition::superposition_2d_rate(s, phi, chi),
                   fock::deposition_bilinear(psi, psi, modes, s.photons).real(),
                   scale);
        }
    return st;
}

//---------------------------------------------------------------------------//
// Commands
//---------------------------------------------------------------------------//

struct Context
{
    JobSpec const& job;
    json manifest;
    std::vector<fs::path> artifacts;

    fs::path artifact(std::string const& name)
    {
        auto p = job.out_dir / name;
        artifacts.push_back(p);
        return p;
    }
};

std::string const kPhi = "phi [rad]";
std::string const kChi = "chi [rad]";
std::string const kDelta = "delta [normalized intensity]";
std::string const kExposure = "exposure [normalized intensity]";

json pattern_stats(std::vector<double> const& delta, double t)
{
    double lo = delta.front();
    double hi = delta.front();
    double sum = 0.0;
    for (double v : delta)
    {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
    }
    return {{"delta_min", lo},
            {"delta_max", hi},
            {"delta_mean", sum / static_cast<double>(delta.size())},
            {"exposure_min", lo * t},
            {"exposure_max", hi * t},
            {"maxima", count_periodic_maxima(delta)}};
}

void run_eval_1d(Context& ctx, Eval1DJob const& task)
{
    std::vector<double> delta(task.points);
    std::visit(
        [&](auto const& state) {
            using S = std::decay_t<decltype(state)>;
            for (int i = 0; i < task.points; ++i)
            {
                double const phi = grid_angle(i, task.points);
                if constexpr (std::is_same_v<S, SuperpositionFixedN>)
                    delta[i] = deposition::fixed_n_superposition_rate(state, phi);
                else
                    delta[i] = deposition::fixed_m_superposition_rate(state, phi).total;
            }
            ctx.manifest["derived"]["state"] = state;
            if (ctx.job.oracle)
            {
                auto const st = oracle_check(state, task.points);
                ctx.manifest["oracle"] = st.to_json(kOracleTolerance);
                st.require(kOracleTolerance, "eval-1d");
            }
        },
        task.state);

    CsvWriter csv(ctx.artifact("pattern.csv"), {kPhi, kDelta, kExposure});
    for (int i = 0; i < task.points; ++i)
        csv.row({grid_angle(i, task.points), delta[i], delta[i] * task.exposure_time});
    ctx.manifest["derived"].update(pattern_stats(delta, task.exposure_time));
}

void write_pattern_2d(Context& ctx,
                      SuperpositionFixedN2D const& state,
                      int phi_points,
                      int chi_points,
                      double t)
{
    std::vector<double> delta(static_cast<std::size_t>(phi_points) * chi_points);
    for (int i = 0; i < phi_points; ++i)
        for (int j = 0; j < chi_points; ++j)
            delta[static_cast<std::size_t>(i) * chi_points + j]
                = deposition::superposition_2d_rate(state, grid_angle(i, phi_points), grid_angle(j, chi_points));
    CsvWriter csv(ctx.artifact("pattern.csv"), {kPhi, kChi, kDelta, kExposure});
    double lo = delta.front(), hi = delta.front();
    for (int i = 0; i < phi_points; ++i)
        for (int j = 0; j < chi_points; ++j)
        {
            double const d = delta[static_cast<std::size_t>(i) * chi_points + j];
            lo = std::min(lo, d);
            hi = std::max(hi, d);
            csv.row({grid_angle(i, phi_points), grid_angle(j, chi_points), d, d * t});
        }
    auto& derived = ctx.manifest["derived"];
    derived["delta_min"] = lo;
    derived["delta_max"] = hi;
    derived["exposure_min"] = lo * t;
    derived["exposure_max"] = hi * t;
    if (ctx.job.oracle)
    {
        auto const st = oracle_check(state, phi_points, chi_points);
        ctx.manifest["oracle"] = st.to_json(kOracleTolerance);
        st.require(kOracleTolerance, ctx.job.command);
    }
}

void run_eval_2d(Context& ctx, Eval2DJob const& task)
{
    ctx.manifest["derived"]["state"] = task.state;
    write_pattern_2d(ctx, task.state, task.phi_points, task.chi_points, task.exposure_time);
}

void run_fit_fourier(Context& ctx, FitFourierJob const& task)
{
    auto const coeffs = synth::fourier_coefficients(task.target, task.max_harmonic, task.quadrature_points);
    auto const program = synth::to_fourier_program(coeffs, task.exposure_time);
    auto const realized = synth::realize_program(program);

    auto achieved = [&](double phi) { return synth::program_exposure(program, phi); };
    double const distance = synth::distance_DN(task.target, task.max_harmonic, task.quadrature_points);
    double const residual = synth::periodic_trapezoid(
        [&](double phi) {
            double const d = task.target(phi) - achieved(phi);
            return d * d;
        },
        task.quadrature_points);

    json terms = json::array();
    for (auto const& t : program.terms)
        terms.push_back({{"harmonic", t.harmonic}, {"weight", t.weight}, {"phase", t.phase}});
    auto& d = ctx.manifest["derived"];
    d["fourier"] = {{"cosine", coeffs.cosine}, {"sine", coeffs.sine}};
    d["program"] = {{"terms", terms}, {"exposure_time", program.exposure_time}};
    d["Q"] = program.penalty();
    d["Q_note"] = "Q = sum of program weights c_n over synthesized harmonics n >= 1; "
                  "the background exposure is Q * t and the pattern mean equals it";
    d["background_exposure"] = program.penalty() * program.exposure_time;
    d["D_N"] = distance;
    d["residual"] = residual;
    d["realized_state"] = realized.state;
    d["realized_exposure_time"] = realized.exposure_time;
    if (task.epsilon)
    {
        auto const rep = synth::approximation_ok(task.target, achieved, task.max_harmonic, *task.epsilon,
                                                 task.quadrature_points);
        d["approximation"] = {{"epsilon", rep.epsilon},
                              {"ok", rep.ok},
                              {"degenerate", rep.degenerate},
                              {"note", rep.note}};
    }

    std::vector<double> delta(task.points);
    CsvWriter csv(ctx.artifact("pattern.csv"), {kPhi, kDelta, kExposure});
    for (int i = 0; i < task.points; ++i)
    {
        double const phi = grid_angle(i, task.points);
        delta[i] = deposition::fixed_m_superposition_rate(realized.state, phi).total;
        csv.row({phi, delta[i], delta[i] * realized.exposure_time});
    }
    d.update(pattern_stats(delta, realized.exposure_time));

    if (ctx.job.oracle)
    {
        auto const st = oracle_check(realized.state, task.points);
        ctx.manifest["oracle"] = st.to_json(kOracleTolerance);
        st.require(kOracleTolerance, "fit-fourier");
    }
}

void run_fit_superposition_1d(Context& ctx, FitSuperposition1DJob const& task)
{
    optimize::Codec1D const codec(task.photons, task.phases);
    auto const config = task.optimizer.config_for(codec.raw().bounds(), ctx.job.seed, ctx.job.threads);
    auto const strategy = optimize::make_strategy(task.optimizer.strategy);
    auto const fit = optimize::fit_superposition_1d(task.target, codec, task.points, config, *strategy);

    auto const& state = fit.best.state;
    double const t = fit.best.exposure_time;
    auto& d = ctx.manifest["derived"];
    d["state"] = state;
    d["exposure_time"] = t;
    d["d_N"] = fit.optimizer.best_objective;
    d["residual"] = synth::objective_1d(state, t, task.target, task.points);
    d["optimizer"] = fit_summary(fit.optimizer);
    d["optimizer"]["population_size"] = config.population_size;
    d["optimizer"]["strategy"] = strategy->name();

    std::vector<double> delta(task.points);
    CsvWriter csv(ctx.artifact("pattern.csv"), {kPhi, kDelta, kExposure});
    for (int i = 0; i < task.points; ++i)
    {
        double const phi = grid_angle(i, task.points);
        delta[i] = deposition::fixed_n_superposition_rate(state, phi);
        csv.row({phi, delta[i], delta[i] * t});
    }
    d.update(pattern_stats(delta, t));
    write_trace(ctx.artifact("trace.csv"), fit.optimizer);

    if (ctx.job.oracle)
    {
        auto const st = oracle_check(state, task.points);
        ctx.manifest["oracle"] = st.to_json(kOracleTolerance);
        st.require(kOracleTolerance, "fit-superposition-1d");
    }
}

void run_fit_superposition_2d(Context& ctx, FitSuperposition2DJob const& task)
{
    optimize::Codec2D const codec(task.photons, task.phases_x, task.phases_y);
    auto const config = task.optimizer.config_for(codec.raw().bounds(), ctx.job.seed, ctx.job.threads);
    auto const strategy = optimize::make_strategy(task.optimizer.strategy);
    auto const fit
        = optimize::fit_superposition_2d(task.target, codec, task.phi_points, task.chi_points, config, *strategy);

    auto& d = ctx.manifest["derived"];
    d["state"] = fit.best.state;
    d["exposure_time"] = fit.best.exposure_time;
    d["d_N"] = fit.optimizer.best_objective;
    d["residual"] = synth::objective_2d(
        fit.best.state, fit.best.exposure_time, task.target, task.phi_points, task.chi_points);
    d["optimizer"] = fit_summary(fit.optimizer);
    d["optimizer"]["population_size"] = config.population_size;
    d["optimizer"]["strategy"] = strategy->name();
    write_pattern_2d(ctx, fit.best.state, task.phi_points, task.chi_points, fit.best.exposure_time);
    write_trace(ctx.artifact("trace.csv"), fit.optimizer);
}

void run_classical(Context& ctx, ClassicalJob const& task)
{
    // One fringe period in x spans a phase of 2π.
    double const period = synth::position_from_phase(kTwoPi, task.wavelength, task.theta);
    CsvWriter csv(ctx.artifact("pattern.csv"), {kPhi, "x [wavelength units]", "intensity [normalized intensity]"});
    for (int i = 0; i < task.points; ++i)
    {
        double const x = period * i / task.points;
        csv.row({grid_angle(i, task.points), x, synth::classical_intensity(x, task.wavelength, task.theta)});
    }
    auto& d = ctx.manifest["derived"];
    d["rayleigh_resolution"] = synth::rayleigh_resolution(task.wavelength, task.theta);
    d["fringe_period"] = period;
}

void run_verify_oracle(Context& ctx, VerifyOracleJob const& task)
{
    std::mt19937_64 rng(ctx.job.seed);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);

    OracleStats one_d;
    auto const modes2 = fock::all_modes(2);
    for (int n = 1; n <= task.max_photons; ++n)
        for (int m = 0; m <= max_minority(n); ++m)
            for (int mp = 0; mp <= max_minority(n); ++mp)
                for (int draw = 0; draw < task.draws; ++draw)
                {
                    double const phi = angle(rng);
                    auto const a = ProtoState1D::make(n, m, angle(rng));
                    auto const b = ProtoState1D::make(n, mp, angle(rng));
                    if (!validate(a).empty() || !validate(b).empty())
                        continue;
                    Complex const closed = deposition::matrix_element_1d(a, b, phi);
                    Complex const oracle = fock::deposition_bilinear(
                        fock::build_proto_state(a, phi), fock::build_proto_state(b, phi), modes2, n);
                    one_d.max_relative = std::max(
                        one_d.max_relative, std::abs(closed - oracle) / deposition::element_bound_1d(a, b));
                    ++one_d.samples;
                }

    OracleStats two_d;
    auto const modes4 = fock::all_modes(4);
    for (int n = 1; n <= task.max_photons_2d; ++n)
    {
        int const side = max_minority(n) + 1;
        for (int p = 0; p < side * side; ++p)
            for (int q = 0; q < side * side; ++q)
                for (int draw = 0; draw < task.draws; ++draw)
                {
                    double const phi = angle(rng);
                    double const chi = angle(rng);
                    auto const a = ProtoState2D::make(n, p / side, p % side, angle(rng), angle(rng));
                    auto const b = ProtoState2D::make(n, q / side, q % side, angle(rng), angle(rng));
                    if (!validate(a).empty() || !validate(b).empty())
                        continue;
                    Complex const closed = deposition::matrix_element_2d(a, b, phi, chi);
                    Complex const oracle = fock::deposition_bilinear(
                        fock::build_proto_state(a, phi, chi), fock::build_proto_state(b, phi, chi), modes4, n);
                    two_d.max_relative = std::max(
                        two_d.max_relative, std::abs(closed - oracle) / deposition::element_bound_2d(a, b));
                    ++two_d.samples;
                }
    }

    json report = {{"one_dimensional", one_d.to_json(task.tolerance)},
                   {"two_dimensional", two_d.to_json(task.tolerance)},
                   {"max_relative_deviation", std::max(one_d.max_relative, two_d.max_relative)},
                   {"passed", one_d.max_relative <= task.tolerance && two_d.max_relative <= task.tolerance}};
    write_json(ctx.artifact("report.json"), report);
    ctx.manifest["derived"] = report;
    one_d.require(task.tolerance, "verify-oracle (1D)");
    two_d.require(task.tolerance, "verify-oracle (2D)");
}

Task parse_task(std::string const& command, json const& j, fs::path const& base)
{
    std::string const p = "job";
    if (command == "eval-1d")
    {
        Eval1DJob t;
        t.points = int_or(j, "points", t.points, p);
        t.exposure_time = real_or(j, "exposure_time", t.exposure_time, p);
        require_positive(t.exposure_time, "job.exposure_time");
        auto const kind = j.value("state_kind", std::string("fixed_n"));
        int photons = 0;
        if (kind == "fixed_n")
        {
            auto s = parse_state<SuperpositionFixedN>(required(j, "state", p), "job.state");
            photons = s.photons;
            t.state = std::move(s);
        }
        else if (kind == "fixed_m")
        {
            auto s = parse_state<SuperpositionFixedM>(required(j, "state", p), "job.state");
            for (auto const& term : s.terms)
                photons = std::max(photons, term.photons);
            t.state = std::move(s);
        }
        else if (kind == "noon")
        {
            auto const& s = required(j, "state", p);
            require_object(s, "job.state");
            allow_keys(s, "job.state", {"N", "theta"});
            SuperpositionFixedN st;
            st.photons = as_int(required(s, "N", "job.state"), "job.state.N");
            st.terms.push_back({ProtoState1D::make(st.photons, 0, real_or(s, "theta", 0.0, "job.state")), 1.0});
            auto const v = validate(st);
            if (!v.empty())
                throw ValidationError("job.state: " + describe(v));
            photons = st.photons;
            t.state = std::move(st);
        }
        else
            throw ValidationError("job.state_kind: expected fixed_n, fixed_m or noon");
        require_resolution(t.points, photons, "job.points");
        return t;
    }
    if (command == "eval-2d")
    {
        Eval2DJob t;
        t.state = parse_state<SuperpositionFixedN2D>(required(j, "state", p), "job.state");
        t.phi_points = int_or(j, "phi_points", t.phi_points, p);
        t.chi_points = int_or(j, "chi_points", t.chi_points, p);
        t.exposure_time = real_or(j, "exposure_time", t.exposure_time, p);
        require_positive(t.exposure_time, "job.exposure_time");
        require_resolution(t.phi_points, t.state.photons, "job.phi_points");
        require_resolution(t.chi_points, t.state.photons, "job.chi_points");
        return t;
    }
    if (command == "fit-fourier")
    {
        FitFourierJob t{.target = parse_target_1d(required(j, "target", p), base, "job.target")};
        t.max_harmonic = int_or(j, "max_harmonic", t.max_harmonic, p);
        if (t.max_harmonic < 1)
            throw ValidationError("job.max_harmonic: must be at least 1");
        t.exposure_time = real_or(j, "exposure_time", t.exposure_time, p);
        require_positive(t.exposure_time, "job.exposure_time");
        t.points = int_or(j, "points", t.points, p);
        t.quadrature_points = int_or(j, "quadrature_points", t.quadrature_points, p);
        require_resolution(t.points, t.max_harmonic, "job.points");
        require_resolution(t.quadrature_points, t.max_harmonic, "job.quadrature_points");
        if (j.contains("epsilon"))
        {
            t.epsilon = as_real(j["epsilon"], "job.epsilon");
            require_positive(*t.epsilon, "job.epsilon");
        }
        return t;
    }
    if (command == "fit-superposition-1d")
    {
        FitSuperposition1DJob t{.target = parse_target_1d(required(j, "target", p), base, "job.target")};
        t.photons = as_int(required(j, "N", p), "job.N");
        if (t.photons < 1)
            throw ValidationError("job.N: must be at least 1");
        t.phases = reals_or(j, "phases", p);
        if (!t.phases.empty() && t.phases.size() != static_cast<std::size_t>(max_minority(t.photons) + 1))
            throw ValidationError("job.phases: expected floor(N/2)+1 entries");
        t.points = int_or(j, "points", t.points, p);
        require_resolution(t.points, t.photons, "job.points");
        t.optimizer = parse_optimizer(j.value("optimizer", json()), "job.optimizer");
        return t;
    }
    if (command == "fit-superposition-2d")
    {
        FitSuperposition2DJob t{.target = parse_target_2d(required(j, "target", p), base, "job.target")};
        t.photons = as_int(required(j, "N", p), "job.N");
        if (t.photons < 1)
            throw ValidationError("job.N: must be at least 1");
        auto const side = static_cast<std::size_t>(max_minority(t.photons) + 1);
        t.phases_x = reals_or(j, "phases_x", p);
        t.phases_y = reals_or(j, "phases_y", p);
        if ((!t.phases_x.empty() && t.phases_x.size() != side) || (!t.phases_y.empty() && t.phases_y.size() != side))
            throw ValidationError("job.phases_x/phases_y: expected floor(N/2)+1 entries");
        t.phi_points = int_or(j, "phi_points", t.phi_points, p);
        t.chi_points = int_or(j, "chi_points", t.chi_points, p);
        require_resolution(t.phi_points, t.photons, "job.phi_points");
        require_resolution(t.chi_points, t.photons, "job.chi_points");
        t.optimizer = parse_optimizer(j.value("optimizer", json()), "job.optimizer");
        return t;
    }
    if (command == "classical")
    {
        ClassicalJob t;
        t.wavelength = real_or(j, "wavelength", t.wavelength, p);
        t.theta = real_or(j, "theta", t.theta, p);
        t.points = int_or(j, "points", t.points, p);
        require_positive(t.wavelength, "job.wavelength");
        if (!(t.theta > 0.0 && t.theta <= kPi / 2))
            throw ValidationError("job.theta: must lie in (0, pi/2]");
        if (t.points < 2)
            throw ValidationError("job.points: must be at least 2");
        return t;
    }
    if (command == "verify-oracle")
    {
        VerifyOracleJob t;
        t.max_photons = int_or(j, "max_photons", t.max_photons, p);
        t.max_photons_2d = int_or(j, "max_photons_2d", t.max_photons_2d, p);
        t.draws = int_or(j, "draws", t.draws, p);
        t.tolerance = real_or(j, "tolerance", t.tolerance, p);
        if (t.max_photons < 1 || t.max_photons > 12 || t.max_photons_2d < 0 || t.max_photons_2d > 8)
            throw ValidationError("job: max_photons must lie in [1, 12] and max_photons_2d in [0, 8]");
        if (t.draws < 1)
            throw ValidationError("job.draws: must be at least 1");
        require_positive(t.tolerance, "job.tolerance");
        return t;
    }
    throw ValidationError("job.command: unknown command '" + command + "'");
}

std::set<std::string> allowed_keys(std::string const& command)
{
    std::set<std::string> common{"schema_version", "command", "seed", "threads", "oracle", "out"};
    std::set<std::string> extra;
    if (command == "eval-1d")
        extra = {"state", "state_kind", "points", "exposure_time"};
    else if (command == "eval-2d")
        extra = {"state", "phi_points", "chi_points", "exposure_time"};
    else if (command == "fit-fourier")
        extra = {"target", "max_harmonic", "exposure_time", "points", "quadrature_points", "epsilon"};
    else if (command == "fit-superposition-1d")
        extra = {"target", "N", "phases", "points", "optimizer"};
    else if (command == "fit-superposition-2d")
        extra = {"target", "N", "phases_x", "phases_y", "phi_points", "chi_points", "optimizer"};
    else if (command == "classical")
        extra = {"wavelength", "theta", "points"};
    else if (command == "verify-oracle")
        extra = {"max_photons", "max_photons_2d", "draws", "tolerance"};
    else
        throw ValidationError("job.command: unknown command '" + command + "'");
    common.insert(extra.begin(), extra.end());
    return common;
}

}  // namespace

//---------------------------------------------------------------------------//

optimize::OptimizerConfig OptimizerSettings::config_for(optimize::Bounds bounds, std::uint64_t seed, int threads) const
{
    auto c = optimize::OptimizerConfig::defaults_for(std::move(bounds));
    if (population_size)
        c.population_size = *population_size;
    c.generations = generations;
    c.mutation_factor = mutation_factor;
    c.crossover_rate = crossover_rate;
    c.seed = seed;
    c.threads = threads;
    return c;
}

int count_periodic_maxima(std::vector<double> const& values)
{
    std::size_t const n = values.size();
    if (n < 3)
        return 0;
    double peak = 0.0;
    for (double v : values)
        peak = std::max(peak, std::abs(v));
    double const eps = 1e-12 * std::max(peak, 1e-300);
    int count = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        double const left = values[(i + n - 1) % n];
        double const right = values[(i + 1) % n];
        if (values[i] - left > eps && values[i] - right >= -eps)
            ++count;
    }
    return count;
}

JobSpec parse_job(json const& doc, fs::path const& base_dir)
{
    require_object(doc, "job");
    JobSpec job;
    job.source = doc;
    job.schema_version = as_int(required(doc, "schema_version", "job"), "job.schema_version");
    if (job.schema_version != kSchemaVersion)
        throw ValidationError("job.schema_version: unsupported version " + std::to_string(job.schema_version)
                              + " (expected " + std::to_string(kSchemaVersion) + ")");
    auto const& cmd = required(doc, "command", "job");
    if (!cmd.is_string())
        throw ValidationError("job.command: expected a string");
    job.command = cmd.get<std::string>();
    allow_keys(doc, "job", allowed_keys(job.command));
    if (doc.contains("seed"))
    {
        auto const& seed = doc["seed"];
        if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0))
            throw ValidationError("job.seed: expected a non-negative integer");
        job.seed = doc["seed"].get<std::uint64_t>();
    }
    job.threads = int_or(doc, "threads", job.threads, "job");
    if (job.threads < 1)
        throw ValidationError("job.threads: must be at least 1");
    if (doc.contains("oracle"))
    {
        if (!doc["oracle"].is_boolean())
            throw ValidationError("job.oracle: expected a boolean");
        job.oracle = doc["oracle"].get<bool>();
    }
    if (doc.contains("out"))
        job.out_dir = doc["out"].get<std::string>();
    job.task = parse_task(job.command, doc, base_dir);
    return job;
}

JobSpec load_job(fs::path const& path)
{
    std::ifstream in(path);
    if (!in)
        throw UsageError("cannot open job file '" + path.string() + "'");
    json doc;
    try
    {
        doc = json::parse(in);
    }
    catch (json::parse_error const& e)
    {
        throw ValidationError("job file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_job(doc, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

JobSpec with_overrides(JobSpec job, RunOptions const& options)
{
    if (options.seed)
        job.seed = *options.seed;
    if (options.threads)
    {
        if (*options.threads < 1)
            throw UsageError("--threads must be at least 1");
        job.threads = *options.threads;
    }
    if (options.oracle)
        job.oracle = true;
    if (options.out_dir)
        job.out_dir = *options.out_dir;
    return job;
}

RunReport run(JobSpec const& job)
{
    std::error_code ec;
    fs::create_directories(job.out_dir, ec);
    if (ec)
        throw ValidationError("cannot create output directory '" + job.out_dir.string() + "': " + ec.message());

    Context ctx{job, json::object(), {}};
    ctx.manifest["schema_version"] = kSchemaVersion;
    ctx.manifest["tool"] = {{"name", "qlitho"}, {"version", kToolVersion}};
    ctx.manifest["command"] = job.command;
    ctx.manifest["inputs"] = job.source;
    ctx.manifest["seed"] = job.seed;
    ctx.manifest["threads"] = job.threads;
    ctx.manifest["oracle_check"] = job.oracle;
    ctx.manifest["normalization"] = kNormalization;
    ctx.manifest["phase_mapping"] = "phi = 2 k x sin(theta), k = 2 pi / lambda";
    ctx.manifest["derived"] = json::object();

    auto const manifest_path = job.out_dir / "manifest.json";
    try
    {
        std::visit(
            [&](auto const& task) {
                using T = std::decay_t<decltype(task)>;
                if constexpr (std::is_same_v<T, Eval1DJob>)
                    run_eval_1d(ctx, task);
                else if constexpr (std::is_same_v<T, Eval2DJob>)
                    run_eval_2d(ctx, task);
                else if constexpr (std::is_same_v<T, FitFourierJob>)
                    run_fit_fourier(ctx, task);
                else if constexpr (std::is_same_v<T, FitSuperposition1DJob>)
                    run_fit_superposition_1d(ctx, task);
                else if constexpr (std::is_same_v<T, FitSuperposition2DJob>)
                    run_fit_superposition_2d(ctx, task);
                else if constexpr (std::is_same_v<T, ClassicalJob>)
                    run_classical(ctx, task);
                else
                    run_verify_oracle(ctx, task);
            },
            job.task);
    }
    catch (OracleMismatch const& e)
    {
        // Keep the evidence next to the failing artifacts.
        ctx.manifest["oracle_error"] = e.what();
        write_json(manifest_path, ctx.manifest);
        throw;
    }

    json files = json::array();
    for (auto const& a : ctx.artifacts)
        files.push_back(a.filename().string());
    files.push_back("manifest.json");
    ctx.manifest["artifacts"] = files;
    write_json(manifest_path, ctx.manifest);
    ctx.artifacts.push_back(manifest_path);
    return {std::move(ctx.manifest), std::move(ctx.artifacts)};
}

json error_json(std::string const& kind, std::string const& message, ExitCode code)
{
    return {{"error", {{"kind", kind}, {"message", message}, {"exit_code", static_cast<int>(code)}}}};
}

ExitCode run_job_file(fs::path const& path, RunOptions const& options, std::ostream& err)
{
    auto fail = [&](std::string const& kind, std::string const& message, ExitCode code) {
        err << error_json(kind, message, code).dump() << '\n';
        return code;
    };
    try
    {
        run(with_overrides(load_job(path), options));
        return ExitCode::ok;
    }
    catch (OracleMismatch const& e)
    {
        return fail("oracle_mismatch", e.what(), ExitCode::oracle_mismatch);
    }
    catch (NumericError const& e)
    {
        return fail("numeric", e.what(), ExitCode::numeric_failure);
    }
    catch (UsageError const& e)
    {
        return fail("usage", e.what(), ExitCode::invalid_job);
    }
    catch (ValidationError const& e)
    {
        return fail("validation", e.what(), ExitCode::invalid_job);
    }
    catch (CapacityError const& e)
    {
        return fail("capacity", e.what(), ExitCode::invalid_job);
    }
    catch (DomainError const& e)
    {
        return fail("domain", e.what(), ExitCode::invalid_job);
    }
    catch (json::exception const& e)
    {
        return fail("validation", e.what(), ExitCode::invalid_job);
    }
}

}  // namespace qlitho::cli
