#pragma once

#include "nls/boundary.hpp"
#include "nls/follower.hpp"
#include "nls/kernel.hpp"
#include "nls/leader.hpp"
#include "nls/parabolic.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <random>

namespace nls::verify {

using Rng = std::mt19937_64;

std::shared_ptr<const ParabolicSolver> make_solver(
    const Grid& grid, const TimeGrid& time, const KernelSpec& kernel = KernelSpec::zero(),
    std::optional<SpaceTimeField> reaction = std::nullopt,
    std::optional<SpaceTimeField> kernel_scale = std::nullopt);

/// Standard normal values on interior nodes, zero on the boundary nodes.
Vector random_slice(const Grid& grid, Rng& rng, double scale = 1.0);
/// random_slice at every time row.
SpaceTimeField random_field(const Grid& grid, const TimeGrid& time, Rng& rng, double scale = 1.0);

/// Time-dependent, non-symmetric tabulated kernel with entries of size `scale`.
KernelSpec random_kernel(const Grid& grid, const TimeGrid& time, Rng& rng, double scale = 0.5);

/// L = 1, omega = (0.1, 0.35), O = (0.6, 0.9), O_d = (0.2, 0.8).
struct Regions {
    RegionMask omega;
    RegionMask follower;
    RegionMask target;
};
Regions standard_regions(const Grid& grid);

struct InstanceOptions {
    int n = 6;
    int steps = 6;
    double horizon = 0.2;
    double mu = 10.0;
    bool random_kernel = true;
};

/// Random data (f, z_d, z0) on the standard regions.
FollowerProblem follower_instance(std::uint64_t seed, const InstanceOptions& opt = {});
BoundaryFollowerProblem boundary_instance(std::uint64_t seed, const InstanceOptions& opt = {},
                                          Side side = Side::right, double profile = 1.0);
LeaderProblem leader_instance(std::uint64_t seed, const InstanceOptions& opt, double epsilon);
LeaderProblem boundary_leader_instance(std::uint64_t seed, const InstanceOptions& opt,
                                       double epsilon);

/// Eigen-kernel benchmark: c = 1, mode 1, L = 1, T = 0.2, omega = (0.1, 0.6),
/// O = (0.7, 0.9), O_d = (0.1, 0.9), mu = 100, z0 = sin(pi x), z_d = 0.
/// `boundary` swaps the distributed follower for Dirichlet control at x = L.
LeaderProblem benchmark_leader(int n, int steps, double epsilon, bool boundary = false);

}  // namespace nls::verify
