#pragma once

#include "nls/grid.hpp"
#include "nls/kernel.hpp"
#include "nls/leader.hpp"
#include "nls/parabolic.hpp"
#include "nls/stackelberg.hpp"

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace nls {

/// G with its first two derivatives and a constant L with |G'| + |G''| <= L.
struct Nonlinearity {
    std::string name = "zero";
    double amplitude = 0.0;
    std::function<double(double)> g;
    std::function<double(double)> dg;
    std::function<double(double)> d2g;
    double bound = 0.0;

    bool is_zero() const { return name == "zero" || amplitude == 0.0; }

    static Nonlinearity zero();
    static Nonlinearity tanh(double c);     // c tanh(s)
    static Nonlinearity clip(double c);     // c s / sqrt(1 + s^2)
    static Nonlinearity linear(double k);   // k s
    /// "zero" | "tanh" | "clip" | "linear"; throws ConfigError otherwise.
    static Nonlinearity from_name(const std::string& name, double amplitude);
};

/// Checks |G'| + |G''| <= bound on `samples` points of [-range, range].
bool check_bound(const Nonlinearity& G, double range = 50.0, int samples = 20001);

/// Where G enters: as a zeroth-order term G(y) on the right-hand side, or
/// inside the kernel integral, int K G(y(theta)) dtheta.
enum class Placement { reaction, kernel };

/// int_0^1 G'(base + s z) ds by 8-point Gauss-Legendre.
double mean_derivative(const Nonlinearity& G, double base, double z);

struct LinearizationCoeffs {
    SpaceTimeField a;   // int_0^1 G'(ybar + s w) ds
    SpaceTimeField b;   // G'(w + ybar)
};

LinearizationCoeffs linearization_coeffs(const SpaceTimeField& w, const SpaceTimeField& ybar,
                                         const Nonlinearity& G);

/// Implicit Euler for y_t - Lap y + [kernel] = [G] + S with homogeneous
/// Dirichlet data, solved by Newton's method at every step. With
/// Placement::reaction the left side carries int K y and G(y) is a source;
/// with Placement::kernel the nonlocal term is int K G(y).
SpaceTimeField semilinear_forward(const Grid& grid, const TimeGrid& time,
                                  const std::shared_ptr<const KernelOperator>& kernel,
                                  const Nonlinearity& G, Placement placement,
                                  const Vector& initial,
                                  const std::optional<SpaceTimeField>& source = std::nullopt);

/// Semilinear Stackelberg problem in deviation variables around ybar.
struct SemilinearProblem {
    Grid grid;
    TimeGrid time;
    std::shared_ptr<const KernelOperator> kernel;
    FollowerChannel channel;
    RegionMask leader_region;
    RegionMask target_region;
    double mu = 100.0;
    double epsilon = 1e-4;
    Nonlinearity nonlinearity;
    Placement placement = Placement::reaction;
    Vector initial;               // z0 = y0 - ybar0
    SpaceTimeField target;        // z_d = y_d - ybar
    SpaceTimeField reference;     // ybar

    void validate() const;
};

/// Builds z0, z_d and ybar (semilinear uncontrolled trajectory from ybar0).
SemilinearProblem reduce_semilinear(SemilinearProblem base, const Vector& y0, const Vector& ybar0,
                                    const SpaceTimeField& y_d);

/// Coupled system of the problem linearised at w. For G = 0 with reaction
/// placement no coefficient fields are attached, so the result coincides
/// with the linear system.
CoupledSystem linearized_system(const SemilinearProblem& problem, const SpaceTimeField& w);

struct SemilinearIterate {
    int iteration = 0;
    double increment = 0.0;
    double terminal_norm = 0.0;
    double contraction = 0.0;   // increment ratio, 0 for the first two
};

struct SemilinearRun {
    std::vector<SpaceTimeField> history;   // w^0, w^1, ...
    std::vector<SemilinearIterate> trace;
    LeaderSolution final;
    bool converged = false;
    double terminal_norm = 0.0;
    double max_coefficient = 0.0;   // max |a|, |b| over all iterates
};

struct SemilinearOptions {
    double tol = 1e-8;
    int max_outer = 50;
    LeaderOptions leader;
};

/// Picard loop w -> z(w) over linearised leader problems, from w^0 = 0.
SemilinearRun solve_semilinear_stackelberg(const SemilinearProblem& problem,
                                           const SemilinearOptions& options = {});

void write_semilinear_trace(std::ostream& out, const SemilinearRun& run);

/// Distributed follower for the semilinear state equation (reaction placement),
/// in original variables.
struct SemilinearFollowerProblem {
    Grid grid;
    TimeGrid time;
    std::shared_ptr<const KernelOperator> kernel;
    RegionMask leader_region;
    RegionMask follower_region;
    RegionMask target_region;
    double mu = 1000.0;
    Nonlinearity nonlinearity;
    SpaceTimeField leader;   // f
    SpaceTimeField target;   // y_d
    Vector initial;          // y0
};

struct SemilinearFollowerState {
    SpaceTimeField y;
    SpaceTimeField p;   // raw backward field
};

SemilinearFollowerState semilinear_follower_state(const SemilinearFollowerProblem& problem,
                                                  const SpaceTimeField& v);
double semilinear_follower_objective(const SemilinearFollowerProblem& problem,
                                     const SpaceTimeField& v);
SpaceTimeField semilinear_follower_gradient(const SemilinearFollowerProblem& problem,
                                            const SpaceTimeField& v);

/// Picard iteration on the follower optimality system; returns v_hat = -p/mu on O.
SpaceTimeField solve_semilinear_follower(const SemilinearFollowerProblem& problem,
                                         const PicardOptions& options = {});

/// Second-order adjoints at (f, v): phi forward with reaction -G'(y) and
/// source w1 chi_O; eta backward with the same reaction and source
/// G''(y) phi p + phi chi_Od. Returns <eta, w2>_O + mu <w1, w2>_O.
double hessian_bilinear_form(const SemilinearFollowerProblem& problem, const SpaceTimeField& v,
                             const SpaceTimeField& w1, const SpaceTimeField& w2);
double hessian_quadratic_form(const SemilinearFollowerProblem& problem, const SpaceTimeField& v,
                              const SpaceTimeField& w1);

}  // namespace nls
