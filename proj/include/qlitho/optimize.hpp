#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "states.hpp"
#include "synth.hpp"

namespace qlitho::optimize
{

struct Interval
{
    double lower = 0.0;
    double upper = 0.0;
};

using Bounds = std::vector<Interval>;
using Objective = std::function<double(std::span<double const>)>;
using Rng = std::mt19937_64;

struct OptimizerConfig
{
    int population_size = 40;
    int generations = 500;
    double mutation_factor = 0.7;
    double crossover_rate = 0.9;
    std::uint64_t seed = 0;
    Bounds bounds;
    int threads = 1;

    /// Population 15x the parameter count (capped at 200) and the stock
    /// hyperparameters, over the given box.
    static OptimizerConfig defaults_for(Bounds bounds);
};

Violations validate(OptimizerConfig const& config);

struct FitResult
{
    std::vector<double> best_params;
    double best_objective = 0.0;
    std::vector<double> history;       // best per generation, index 0 = initial population
    std::vector<double> mean_history;  // mean of finite members per generation
    std::uint64_t evaluations = 0;
    std::uint64_t rejected = 0;
};

/// Snapshot of the current generation handed to a mutation strategy.
struct Population
{
    std::span<std::vector<double> const> members;
    std::size_t best = 0;
};

/// Donor-vector construction for differential evolution.
class Strategy
{
  public:
    virtual ~Strategy() = default;
    virtual std::string name() const = 0;
    virtual std::vector<double> donor(Population const& pop, std::size_t target, double factor, Rng& rng) const = 0;
};

/// x_r1 + F (x_r2 − x_r3), r1, r2, r3 distinct and different from the target.
class RandOneBin final : public Strategy
{
  public:
    std::string name() const override { return "rand1bin"; }
    std::vector<double> donor(Population const& pop, std::size_t target, double factor, Rng& rng) const override;
};

/// x_best + F (x_r1 − x_r2).
class BestOneBin final : public Strategy
{
  public:
    std::string name() const override { return "best1bin"; }
    std::vector<double> donor(Population const& pop, std::size_t target, double factor, Rng& rng) const override;
};

std::unique_ptr<Strategy> make_strategy(std::string const& name);

/// Per-candidate generator seeded from (seed, generation, member) only.
Rng candidate_rng(std::uint64_t seed, std::uint64_t generation, std::uint64_t member);

/// Differential evolution with binomial crossover and greedy one-to-one
/// selection. Candidates with non-finite objective values are rejected;
/// a generation in which every candidate is rejected raises NumericError.
FitResult minimize(Objective const& objective, OptimizerConfig const& config, Strategy const& strategy);
FitResult minimize(Objective const& objective, OptimizerConfig const& config);

//---------------------------------------------------------------------------//
// Parameter encodings for the superposition fits
//---------------------------------------------------------------------------//

inline constexpr double kMinExposure = 1e-3;
inline constexpr double kMaxExposure = 1e4;

/// Layout [re α_0, im α_0, re α_1, ..., ln t]. Decoding renormalizes the
/// amplitude block.
class Codec
{
  public:
    explicit Codec(std::size_t amplitude_count);

    std::size_t amplitude_count() const { return count_; }
    std::size_t dimension() const { return 2 * count_ + 1; }
    Bounds bounds() const;

    std::vector<double> encode(std::span<Complex const> amplitudes, double exposure_time) const;
    /// Normalized amplitudes; ValidationError when the block is all zero.
    std::vector<Complex> amplitudes(std::span<double const> params) const;
    double exposure_time(std::span<double const> params) const;

  private:
    void check(std::span<double const> params) const;
    std::size_t count_;
};

struct Decoded1D
{
    SuperpositionFixedN state;
    double exposure_time = 0.0;
};

struct Decoded2D
{
    SuperpositionFixedN2D state;
    double exposure_time = 0.0;
};

/// One slot per m = 0..⌊N/2⌋ with a fixed phase template.
class Codec1D
{
  public:
    Codec1D(int photons, std::vector<double> phases);

    int photons() const { return photons_; }
    std::vector<double> const& phases() const { return phases_; }
    Codec const& raw() const { return codec_; }
    std::size_t dimension() const { return codec_.dimension(); }

    std::vector<double> encode(SuperpositionFixedN const& state, double exposure_time) const;
    Decoded1D decode(std::span<double const> params) const;

  private:
    int photons_;
    std::vector<double> phases_;
    Codec codec_;
};

/// Slots (m, k) row-major with separate x and y phase templates.
class Codec2D
{
  public:
    Codec2D(int photons, std::vector<double> phases_x, std::vector<double> phases_y);

    int photons() const { return photons_; }
    std::vector<double> const& phases_x() const { return phases_x_; }
    std::vector<double> const& phases_y() const { return phases_y_; }
    Codec const& raw() const { return codec_; }
    std::size_t dimension() const { return codec_.dimension(); }

    std::vector<double> encode(SuperpositionFixedN2D const& state, double exposure_time) const;
    Decoded2D decode(std::span<double const> params) const;

  private:
    int photons_;
    std::size_t side_;
    std::vector<double> phases_x_;
    std::vector<double> phases_y_;
    Codec codec_;
};

struct SuperpositionFit1D
{
    Decoded1D best;
    FitResult optimizer;
};

struct SuperpositionFit2D
{
    Decoded2D best;
    FitResult optimizer;
};

/// Fits α and t to minimize ∫|F − Δ t|². Empty config bounds are filled
/// from the codec.
SuperpositionFit1D fit_superposition_1d(synth::TargetPattern1D const& target,
                                        Codec1D const& codec,
                                        int points,
                                        OptimizerConfig config,
                                        Strategy const& strategy = RandOneBin{});

SuperpositionFit2D fit_superposition_2d(synth::TargetPattern2D const& target,
                                        Codec2D const& codec,
                                        int phi_points,
                                        int chi_points,
                                        OptimizerConfig config,
                                        Strategy const& strategy = RandOneBin{});

}  // namespace qlitho::optimize
