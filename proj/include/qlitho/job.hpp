#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "optimize.hpp"
#include "states.hpp"
#include "synth.hpp"

namespace qlitho::cli
{

inline constexpr int kSchemaVersion = 1;
inline constexpr char const* kToolVersion = "0.1.0";
inline constexpr char const* kNormalization
    = "Delta = <(e^dag)^N e^N>/N!, e = (sum of mode operators)/sqrt(mode count); "
      "1D rates carry 2^-N, 2D rates 4^-N";

enum class ExitCode : int
{
    ok = 0,
    invalid_job = 2,
    numeric_failure = 3,
    oracle_mismatch = 4,
};

/// Closed form and Fock-space oracle disagree beyond tolerance.
class OracleMismatch : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct OptimizerSettings
{
    std::optional<int> population_size;
    int generations = 500;
    double mutation_factor = 0.7;
    double crossover_rate = 0.9;
    std::string strategy = "rand1bin";

    optimize::OptimizerConfig config_for(optimize::Bounds bounds, std::uint64_t seed, int threads) const;
};

struct Eval1DJob
{
    std::variant<SuperpositionFixedN, SuperpositionFixedM> state;
    int points = synth::kDefaultPoints1D;
    double exposure_time = 1.0;
};

struct Eval2DJob
{
    SuperpositionFixedN2D state;
    int phi_points = synth::kDefaultPoints2D;
    int chi_points = synth::kDefaultPoints2D;
    double exposure_time = 1.0;
};

struct FitFourierJob
{
    synth::TargetPattern1D target;
    int max_harmonic = 10;
    double exposure_time = 1.0;
    int points = synth::kDefaultPoints1D;
    int quadrature_points = 16384;
    std::optional<double> epsilon{};  // no verdict when unset
};

struct FitSuperposition1DJob
{
    synth::TargetPattern1D target;
    int photons = 0;
    std::vector<double> phases{};
    int points = synth::kDefaultPoints1D;
    OptimizerSettings optimizer{};
};

struct FitSuperposition2DJob
{
    synth::TargetPattern2D target;
    int photons = 0;
    std::vector<double> phases_x{};
    std::vector<double> phases_y{};
    int phi_points = synth::kDefaultPoints2D;
    int chi_points = synth::kDefaultPoints2D;
    OptimizerSettings optimizer{};
};

struct ClassicalJob
{
    double wavelength = 1.0;
    double theta = kPi / 2;
    int points = synth::kDefaultPoints1D;
};

struct VerifyOracleJob
{
    int max_photons = 6;
    int max_photons_2d = 4;
    int draws = 20;
    double tolerance = 1e-10;
};

using Task = std::variant<Eval1DJob,
                          Eval2DJob,
                          FitFourierJob,
                          FitSuperposition1DJob,
                          FitSuperposition2DJob,
                          ClassicalJob,
                          VerifyOracleJob>;

struct JobSpec
{
    int schema_version = kSchemaVersion;
    std::string command;
    Task task;
    std::uint64_t seed = 0;
    int threads = 1;
    bool oracle = false;
    std::filesystem::path out_dir = ".";
    nlohmann::json source;  // the job document as read
};

/// Command-line overrides; unset fields keep the job's values.
struct RunOptions
{
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool oracle = false;
    std::optional<std::filesystem::path> out_dir;
};

/// Parses and validates a job document. Relative file references resolve
/// against base_dir. Throws UsageError / ValidationError on invalid jobs.
JobSpec parse_job(nlohmann::json const& document, std::filesystem::path const& base_dir = ".");
JobSpec load_job(std::filesystem::path const& path);

struct RunReport
{
    nlohmann::json manifest;
    std::vector<std::filesystem::path> artifacts;
};

/// Executes the job and writes its artifacts. Throws on failure.
RunReport run(JobSpec const& job);

/// Applies overrides to a parsed job.
JobSpec with_overrides(JobSpec job, RunOptions const& options);

/// Full pipeline: load, override, run. Failures are reported as one JSON
/// object on `err` and mapped to an exit code.
ExitCode run_job_file(std::filesystem::path const& path, RunOptions const& options, std::ostream& err);

nlohmann::json error_json(std::string const& kind, std::string const& message, ExitCode code);

/// Strict local maxima of a periodic sequence, tolerant to roundoff ties.
int count_periodic_maxima(std::vector<double> const& values);

}  // namespace qlitho::cli
