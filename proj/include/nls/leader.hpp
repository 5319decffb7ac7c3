#pragma once

#include "nls/cg.hpp"
#include "nls/grid.hpp"
#include "nls/stackelberg.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nls {

/// Penalised null-control problem for the leader:
///   min_f  1/2 |f|^2_omega + 1/(2 eps) |z(T)|^2
/// where z solves the follower optimality system for f.
struct LeaderProblem {
    CoupledSystem system;
    Vector initial;           // z0
    SpaceTimeField target;    // z_d
    double epsilon = 1e-4;
    std::optional<SpaceTimeField> reference;   // ybar, when built from original variables

    const Grid& grid() const { return system.grid(); }
    const TimeGrid& time() const { return system.time(); }
    void validate() const;
};

struct LeaderOptions {
    double tol = 1e-8;
    int max_iter = 500;
    double inner_factor = 1e-2;   // inner Picard tol = inner_factor * tol
    int inner_max_iter = 200;
};

struct LeaderSolution {
    SpaceTimeField f_hat;
    SpaceTimeField z;
    SpaceTimeField p;
    SpaceTimeField rho;   // raw backward field
    SpaceTimeField psi;
    double terminal_norm = 0.0;
    double control_norm = 0.0;
    double objective = 0.0;
    double characterization = 0.0;   // |f - rho|_omega
    double duality_gap = 0.0;
    int cg_iterations = 0;
    bool converged = false;
    bool stagnated = false;
    std::vector<double> cg_history;
};

/// ybar = uncontrolled trajectory from ybar0; z0 = y0 - ybar0, z_d = y_d - ybar.
LeaderProblem reduce_to_null(const CoupledSystem& system, const Vector& y0, const Vector& ybar0,
                             const SpaceTimeField& y_d, double epsilon);

double leader_objective(const LeaderProblem& problem, const SpaceTimeField& f,
                        const LeaderOptions& options = {});

/// f - rho on omega, with rho(T) = -z(T)/eps; vanishes at the minimiser.
SpaceTimeField leader_gradient(const LeaderProblem& problem, const SpaceTimeField& f,
                               const LeaderOptions& options = {});

LeaderSolution solve_leader_cg(const LeaderProblem& problem, const LeaderOptions& options = {},
                               const SpaceTimeField* warm_start = nullptr);

/// |LHS - RHS| / (1 + |LHS|) for
///   |f|^2 + |z(T)|^2 / eps = -<z0, rho(0)> + <z_d, psi>_{O_d}.
double duality_identity_check(const LeaderSolution& solution, const LeaderProblem& problem);

struct SweepRow {
    double epsilon = 0.0;
    double terminal_norm = 0.0;
    double control_norm = 0.0;
    int cg_iterations = 0;
    double duality_gap = 0.0;
    bool converged = false;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    std::optional<double> slope;   // least-squares slope of log|z(T)| against log eps
    bool terminal_monotone = true;
    bool control_monotone = true;
    std::optional<double> control_ratio;   // max/min of |f_eps|
    bool aborted = false;
    std::string abort_reason;
};

/// Least-squares slope of log y against log x; nullopt if any value is not positive.
std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Solves for each eps (warm-starting from the previous one); an inner
/// failure stops the sweep and returns the rows computed so far.
SweepReport epsilon_sweep(const LeaderProblem& problem, const std::vector<double>& eps_list,
                          const LeaderOptions& options = {});

void write_sweep(std::ostream& out, const SweepReport& report);

}  // namespace nls
