#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "states.hpp"

namespace qlitho::fock
{

/// Occupation numbers, one per mode.
using Occupation = std::vector<int>;

/// Sparse multimode Fock-space vector. Amplitudes below `kPruneThreshold`
/// in magnitude are dropped on construction.
class FockVector
{
  public:
    static constexpr double kPruneThreshold = 1e-15;
    using AmplitudeMap = std::map<Occupation, Complex>;

    FockVector(std::size_t mode_count, int cutoff);
    FockVector(std::size_t mode_count, int cutoff, AmplitudeMap amplitudes);

    // Single basis ket |occ⟩ scaled by `amplitude`.
    static FockVector ket(Occupation occ, int cutoff, Complex amplitude = 1.0);

    std::size_t mode_count() const { return modes_; }
    int cutoff() const { return cutoff_; }
    AmplitudeMap const& amplitudes() const { return amps_; }
    bool is_zero() const { return amps_.empty(); }

    Complex amplitude(Occupation const& occ) const;
    double norm_squared() const;
    double norm() const;

    FockVector scaled(Complex factor) const;
    FockVector normalized() const;

    friend FockVector operator+(FockVector const& lhs, FockVector const& rhs);
    friend Complex inner(FockVector const& bra, FockVector const& ket);

  private:
    std::size_t modes_;
    int cutoff_;
    AmplitudeMap amps_;
};

FockVector annihilate(FockVector const& state, std::size_t mode);
FockVector create(FockVector const& state, std::size_t mode);

/// ê = (Σ_{i ∈ modes} â_i) / √|modes|.
FockVector superposed_mode_annihilate(FockVector const& state, std::span<std::size_t const> modes);

/// ⟨ψ|(ê†)^N ê^N|ψ⟩ / N! for a unit-norm ψ.
double deposition_expectation(FockVector const& state, std::span<std::size_t const> modes, int order);

/// ⟨bra|(ê†)^N ê^N|ket⟩ / N!, evaluated as ⟨ê^N bra, ê^N ket⟩ / N!. No
/// normalization requirement.
Complex deposition_bilinear(FockVector const& bra,
                            FockVector const& ket,
                            std::span<std::size_t const> modes,
                            int order);

std::vector<std::size_t> all_modes(std::size_t mode_count);

/// Ket of a proto-state at phase φ (and χ). Branches that coincide (N = 2m)
/// are summed before normalizing. `cutoff` < 0 selects N.
FockVector build_proto_state(ProtoState1D const& spec, double phi, int cutoff = -1);
FockVector build_proto_state(ProtoState2D const& spec, double phi, double chi, int cutoff = -1);

// Full superposed kets: Σ α |proto⟩.
FockVector build_state(SuperpositionFixedN const& state, double phi);
FockVector build_state(SuperpositionFixedN2D const& state, double phi, double chi);
FockVector build_state(SuperpositionFixedM const& state, double phi);

/// Component of `state` with total photon number `photons`.
FockVector project_photon_number(FockVector const& state, int photons);

}  // namespace qlitho::fock
