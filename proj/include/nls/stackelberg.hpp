#pragma once

#include "nls/grid.hpp"
#include "nls/parabolic.hpp"

#include <memory>
#include <variant>
#include <vector>

namespace nls {

/// Follower acting as a source on an interior region O.
struct DistributedChannel {
    RegionMask region;
};

/// Follower acting through Dirichlet data u * profile at one boundary node.
struct BoundaryChannel {
    Side side = Side::right;
    double profile = 1.0;
};

using FollowerChannel = std::variant<DistributedChannel, BoundaryChannel>;

/// The follower's optimality system in deviation variables z = y - ybar:
///
///   forward  z  (state model):    source f chi_omega + follower response
///   backward p  (follower model): source (z - z_d) chi_Od, p(T) = 0
///
/// with the follower response -p/mu on O (distributed) or Dirichlet data
/// (profile/mu) dp/dnu on Gamma (boundary). In the linear problem both models
/// coincide; the semilinear linearisations give them different coefficients.
/// The leader's adjoint pair reuses the same two models: rho is the backward
/// solve of the state model, psi the forward solve of the follower model.
struct CoupledSystem {
    std::shared_ptr<const ParabolicSolver> state_model;
    std::shared_ptr<const ParabolicSolver> follower_model;
    FollowerChannel channel;
    RegionMask leader_region;
    RegionMask target_region;
    double mu = 100.0;

    const Grid& grid() const { return state_model->grid(); }
    const TimeGrid& time() const { return state_model->time(); }
    bool boundary() const { return std::holds_alternative<BoundaryChannel>(channel); }

    /// Throws ConfigError on mu <= 0, overlapping omega and O, or grid mismatch.
    void validate() const;
};

struct PicardOptions {
    double tol = 1e-12;      // relative increment tolerance
    int max_iter = 200;
    double blowup = 1e3;     // increment growth treated as divergence
};

/// Outcome of a fixed-point solve; `increments` lists successive
/// |x^{k+1} - x^k| in the control norm.
struct FixedPointTrace {
    int iterations = 0;
    double contraction = 0.0;   // last ratio of successive increments (0 if < 2 steps)
    std::vector<double> increments;
};

struct CoupledState {
    SpaceTimeField z;
    SpaceTimeField p;   // raw backward field (row N is p(T))
    FixedPointTrace trace;
};

struct AdjointPair {
    SpaceTimeField rho;   // raw backward field, rho(T) = terminal
    SpaceTimeField psi;
    FixedPointTrace trace;
};

/// Adds the follower's best response to p (raw adjoint field) into a
/// forward problem driven by `model`.
void add_follower_response(const CoupledSystem& system, const SpaceTimeField& p,
                           ForwardProblem& problem);

/// Distributed follower control v = -p/mu on O (source-aligned rows).
SpaceTimeField distributed_response(const CoupledSystem& system, const SpaceTimeField& p);

/// Boundary follower control u^k = (profile/mu) dp/dnu(t_k), u^0 = 0.
Vector boundary_response(const CoupledSystem& system, const SpaceTimeField& p);

/// Picard iteration p^0 = 0, z^k = forward(f, response(p^k)), p^{k+1} = backward(z^k).
/// Throws NonContractionError when the increments grow past `blowup` times
/// the first one, turn non-finite, or the iteration budget runs out.
CoupledState solve_coupled(const CoupledSystem& system, const SpaceTimeField& leader,
                           const Vector& initial, const SpaceTimeField& target,
                           const PicardOptions& options = {});

/// Picard iteration for the leader's adjoint pair
///   rho: backward (state model), rho(T) = terminal, source psi chi_Od
///   psi: forward (follower model) from 0, driven by the follower response to rho.
AdjointPair solve_adjoint_pair(const CoupledSystem& system, const Vector& terminal,
                               const PicardOptions& options = {});

}  // namespace nls
