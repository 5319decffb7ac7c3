#pragma once

#include "nls/grid.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace nls {

/// Time profile l(t): equal to t on [0, T/4], to T - t on [3T/4, T], and a
/// symmetric quartic on the plateau matching value, slope and curvature at
/// both joins. Its maximum is 13T/32, reached at T/2.
class LProfile {
public:
    explicit LProfile(double horizon);

    double horizon() const noexcept { return horizon_; }
    double operator()(double t) const;
    double derivative(double t) const;
    double max_value() const noexcept { return 13.0 * horizon_ / 32.0; }

    /// l-bar: constant max_value() on [0, T/2], l(t) on [T/2, T].
    double bar(double t) const;

private:
    double horizon_;
};

LProfile build_l(double horizon);

/// eta0(x) = (x/L)^(2c)(1 - x/L)^(2(1-c)) with c the centre of omega' in
/// units of L: positive inside, zero on the boundary, single critical point
/// at the centre of omega'. `amplitude` rescales the samples.
Vector build_eta0(const Grid& grid, const Interval& omega_prime, double amplitude = 1.0);

/// Carleman weight functions built from eta0 samples and l(t) for fixed
/// parameters (s, lambda). All x-dependence is evaluated at grid nodes.
class CarlemanWeights {
public:
    CarlemanWeights(const Grid& grid, Vector eta0, LProfile l, double s, double lambda);

    const Grid& grid() const noexcept { return grid_; }
    const Vector& eta0() const noexcept { return eta0_; }
    const LProfile& l() const noexcept { return l_; }
    double s() const noexcept { return s_; }
    double lambda() const noexcept { return lambda_; }
    double eta0_max() const noexcept { return m0_; }

    double sigma(int i) const;
    double sigma_plus() const;
    double sigma_minus() const;

    double eta(double t, int i) const;
    double phi(double t, int i) const;
    double alpha(double t, int i) const;
    double zeta(double t, int i) const;

    double eta_star(double t) const;    // max_x eta
    double phi_star(double t) const;    // min_x phi
    double alpha_star(double t) const;  // max_x alpha
    double zeta_star(double t) const;   // min_x zeta

    // The observability weights overflow double range away from t = 0, so
    // they are also available in log form.
    double log_varpi1(double t) const;
    double log_varpi2(double t) const;
    double varpi1(double t) const;
    double varpi2(double t) const;

    /// Largest s for which exp(-(1+s) sigma^-/l^4) <= exp(-s sigma^+/l^4):
    /// s* = sigma^- / (sigma^+ - sigma^-).
    double critical_s() const;

    /// Checks the eta0 admissibility conditions: positive inside, zero on
    /// the boundary, nonzero discrete gradient outside omega'.
    bool eta0_admissible(const Interval& omega_prime) const;

private:
    double exponent(int i) const;  // lambda * (2 M0 + eta0_i)

    Grid grid_;
    Vector eta0_;
    LProfile l_;
    double s_;
    double lambda_;
    double m0_;
};

struct PropExpReport {
    bool holds = false;          // inequality holds at every sampled time
    double margin = 0.0;         // min over t of ((1+s)sigma^- - s sigma^+) / l^4(t)
    double critical_s = 0.0;     // closed form sigma^-/(sigma^+ - sigma^-)
};

PropExpReport check_prop_exp(const CarlemanWeights& weights, const std::vector<double>& t_samples);

/// Grid-scan estimate of the critical s: scans s over [s_lo, s_hi] with
/// `n_s` samples and returns the midpoint of the last true / first false pair
/// of the sampled inequality exp(-(1+s)sigma^-/l^4) <= exp(-s sigma^+/l^4).
double scan_critical_s(const CarlemanWeights& weights, const std::vector<double>& t_samples,
                       double s_lo, double s_hi, int n_s);

enum class ObservabilityWeight { varpi1, varpi2 };

struct WeightedNorm {
    double log_value = 0.0;   // log of the squared weighted norm (-inf for zero)
    double value() const;     // may overflow to +inf
};

/// Quadrature of varpi^2 |field|^2 over [0, T - dt] x mask; the weight is
/// infinite on the final row.
WeightedNorm weighted_target_norm(const SpaceTimeField& field, const CarlemanWeights& weights,
                                  const TimeGrid& time, ObservabilityWeight which,
                                  const RegionMask& mask);

struct WeightedRefinement {
    WeightedNorm coarse;
    WeightedNorm fine;
    /// fine/coarse, computed from the logs so it stays finite when both
    /// values overflow.
    double ratio = 0.0;
};

/// Evaluates weighted_target_norm of a sampled function on `time` and on
/// the doubled time grid.
WeightedRefinement weighted_target_refinement(const std::function<double(double, double)>& fn,
                                              const CarlemanWeights& weights,
                                              const TimeGrid& time, ObservabilityWeight which,
                                              const RegionMask& mask);

struct CarlemanFunctionals {
    double m_value = 0.0;
    double n_value = 0.0;
};

/// M(z) = s lambda^2 int e^{-2s eta} phi |grad z|^2 + s^3 lambda^4 int e^{-2s eta} phi^3 |z|^2
/// N(z) = s^-1 int e^{-2s eta} phi^-1 |grad z|^2 + s lambda^2 int e^{-2s eta} phi |z|^2
/// Trapezoid in time and space with t = 0, T dropped; centred differences
/// for the gradient, one-sided at the boundary nodes.
CarlemanFunctionals carleman_functionals(const SpaceTimeField& field,
                                         const CarlemanWeights& weights, const TimeGrid& time);

/// Columns `t l alpha_star zeta_star varpi1 varpi2 log_varpi1 log_varpi2`
/// at every time node; varpi values past double range print as inf.
void write_weight_table(std::ostream& out, const CarlemanWeights& weights, const TimeGrid& time);

}  // namespace nls
