#pragma once

#include "nls/stackelberg.hpp"
#include "nls/weights.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace nls {

struct ObservabilityOptions {
    int samples = 50;
    std::uint64_t seed = 1;
    int modes = 16;   // terminal data sum_m xi_m sin(m pi x / L), m <= min(modes, n)
    PicardOptions picard;
};

struct ObservabilityStats {
    int samples = 0;
    int skipped = 0;   // samples with a vanishing denominator
    double max_ratio = 0.0;
    double median_ratio = 0.0;
    std::vector<double> ratios;
};

/// Gaussian modal terminal data drawn from a seeded mt19937_64 stream.
std::vector<Vector> modal_samples(const Grid& grid, int count, int modes, std::uint64_t seed);

/// [|rho(0)|^2 + int varpi^-2 |psi|^2] / int int_omega |rho|^2 for the
/// adjoint pair of `system` with rho(T) = terminal; nullopt when the
/// denominator vanishes. The t = T row is dropped from the psi term, where
/// the weight is infinite.
std::optional<double> observability_ratio(const CoupledSystem& system,
                                          const CarlemanWeights& weights,
                                          ObservabilityWeight which, const Vector& terminal,
                                          const PicardOptions& picard = {});

ObservabilityStats probe_observability(const CoupledSystem& system, const CarlemanWeights& weights,
                                       ObservabilityWeight which,
                                       const ObservabilityOptions& options = {});

}  // namespace nls
