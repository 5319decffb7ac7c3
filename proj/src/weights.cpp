#include "nls/weights.hpp"

#include "nls/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace nls {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without overflow.
double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double log_weight(const CarlemanWeights& w, double t, ObservabilityWeight which) {
    return which == ObservabilityWeight::varpi1 ? w.log_varpi1(t) : w.log_varpi2(t);
}

Vector discrete_gradient(const Vector& u, double h) {
    const int m = static_cast<int>(u.size());
    Vector g(m);
    g[0] = (u[1] - u[0]) / h;
    g[m - 1] = (u[m - 1] - u[m - 2]) / h;
    for (int i = 1; i + 1 < m; ++i) g[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
    return g;
}

}  // namespace

LProfile::LProfile(double horizon) : horizon_(horizon) {
    if (!(horizon > 0.0)) throw DimensionError("l(t) needs a positive horizon");
}

double LProfile::operator()(double t) const {
    const double T = horizon_;
    if (t <= 0.25 * T) return t;
    if (t >= 0.75 * T) return T - t;
    const double d = 0.25 * T;
    const double tau = t - 0.5 * T;
    const double tau2 = tau * tau;
    return 13.0 * d / 8.0 - 3.0 * tau2 / (4.0 * d) + tau2 * tau2 / (8.0 * d * d * d);
}

double LProfile::derivative(double t) const {
    const double T = horizon_;
    if (t <= 0.25 * T) return 1.0;
    if (t >= 0.75 * T) return -1.0;
    const double d = 0.25 * T;
    const double tau = t - 0.5 * T;
    return -1.5 * tau / d + 0.5 * tau * tau * tau / (d * d * d);
}

double LProfile::bar(double t) const { return t <= 0.5 * horizon_ ? max_value() : (*this)(t); }

LProfile build_l(double horizon) { return LProfile(horizon); }

Vector build_eta0(const Grid& grid, const Interval& omega_prime, double amplitude) {
    const double L = grid.length();
    if (!(omega_prime.a > 0.0 && omega_prime.b < L && omega_prime.a < omega_prime.b)) {
        throw ConfigError("omega' must be a nonempty interval strictly inside (0, L)");
    }
    if (!(amplitude > 0.0)) throw ConfigError("eta0 amplitude must be positive");
    const double c = 0.5 * (omega_prime.a + omega_prime.b) / L;
    Vector eta0 = Vector::Zero(grid.nodes());
    for (int i = 1; i <= grid.interior(); ++i) {
        const double xi = grid.x(i) / L;
        eta0[i] = amplitude * std::pow(xi, 2.0 * c) * std::pow(1.0 - xi, 2.0 * (1.0 - c));
    }
    return eta0;
}

CarlemanWeights::CarlemanWeights(const Grid& grid, Vector eta0, LProfile l, double s,
                                 double lambda)
    : grid_(grid), eta0_(std::move(eta0)), l_(l), s_(s), lambda_(lambda) {
    if (eta0_.size() != grid_.nodes()) throw DimensionError("eta0 samples do not match grid");
    if (!(s_ > 0.0) || !(lambda_ > 0.0)) throw ConfigError("s and lambda must be positive");
    m0_ = eta0_.cwiseAbs().maxCoeff();
}

double CarlemanWeights::exponent(int i) const { return lambda_ * (2.0 * m0_ + eta0_[i]); }

double CarlemanWeights::sigma(int i) const {
    return std::exp(4.0 * lambda_ * m0_) - std::exp(exponent(i));
}

double CarlemanWeights::sigma_plus() const {
    return std::exp(4.0 * lambda_ * m0_) - std::exp(2.0 * lambda_ * m0_);
}

double CarlemanWeights::sigma_minus() const {
    return std::exp(4.0 * lambda_ * m0_) - std::exp(3.0 * lambda_ * m0_);
}

double CarlemanWeights::eta(double t, int i) const { return sigma(i) / std::pow(l_(t), 4); }

double CarlemanWeights::phi(double t, int i) const {
    return std::exp(exponent(i)) / std::pow(l_(t), 4);
}

double CarlemanWeights::alpha(double t, int i) const { return sigma(i) / std::pow(l_.bar(t), 4); }

double CarlemanWeights::zeta(double t, int i) const {
    return std::exp(exponent(i)) / std::pow(l_.bar(t), 4);
}

double CarlemanWeights::eta_star(double t) const { return sigma_plus() / std::pow(l_(t), 4); }

double CarlemanWeights::phi_star(double t) const {
    return std::exp(2.0 * lambda_ * m0_) / std::pow(l_(t), 4);
}

double CarlemanWeights::alpha_star(double t) const {
    return sigma_plus() / std::pow(l_.bar(t), 4);
}

double CarlemanWeights::zeta_star(double t) const {
    return std::exp(2.0 * lambda_ * m0_) / std::pow(l_.bar(t), 4);
}

double CarlemanWeights::log_varpi1(double t) const {
    return s_ * alpha_star(t) - 1.5 * std::log(zeta_star(t));
}

double CarlemanWeights::log_varpi2(double t) const {
    return s_ * alpha_star(t) - 0.5 * std::log(zeta_star(t));
}

double CarlemanWeights::varpi1(double t) const { return std::exp(log_varpi1(t)); }
double CarlemanWeights::varpi2(double t) const { return std::exp(log_varpi2(t)); }

double CarlemanWeights::critical_s() const {
    return sigma_minus() / (sigma_plus() - sigma_minus());
}

bool CarlemanWeights::eta0_admissible(const Interval& omega_prime) const {
    const int last = grid_.nodes() - 1;
    if (eta0_[0] != 0.0 || eta0_[last] != 0.0) return false;
    for (int i = 1; i < last; ++i) {
        if (!(eta0_[i] > 0.0)) return false;
    }
    const Vector g = discrete_gradient(eta0_, grid_.h());
    for (int i = 0; i <= last; ++i) {
        if (!omega_prime.contains(grid_.x(i)) && g[i] == 0.0) return false;
    }
    return true;
}

PropExpReport check_prop_exp(const CarlemanWeights& weights, const std::vector<double>& t_samples) {
    PropExpReport report;
    const double s = weights.s();
    const double sp = weights.sigma_plus();
    const double sm = weights.sigma_minus();
    report.critical_s = weights.critical_s();
    report.holds = true;
    report.margin = std::numeric_limits<double>::infinity();
    for (double t : t_samples) {
        const double l4 = std::pow(weights.l()(t), 4);
        const double lhs = -(1.0 + s) * sm / l4;
        const double rhs = -s * sp / l4;
        report.holds = report.holds && lhs <= rhs;
        report.margin = std::min(report.margin, ((1.0 + s) * sm - s * sp) / l4);
    }
    return report;
}

double scan_critical_s(const CarlemanWeights& weights, const std::vector<double>& t_samples,
                       double s_lo, double s_hi, int n_s) {
    const double sp = weights.sigma_plus();
    const double sm = weights.sigma_minus();
    auto holds = [&](double s) {
        for (double t : t_samples) {
            const double l4 = std::pow(weights.l()(t), 4);
            // compared through the exponents: both sides underflow for small l
            if (-(1.0 + s) * sm / l4 > -s * sp / l4) return false;
        }
        return true;
    };
    double last_true = s_lo;
    for (int j = 0; j < n_s; ++j) {
        const double s = s_lo + (s_hi - s_lo) * j / (n_s - 1);
        if (!holds(s)) return 0.5 * (last_true + s);
        last_true = s;
    }
    return s_hi;
}

double WeightedNorm::value() const { return std::exp(log_value); }

WeightedNorm weighted_target_norm(const SpaceTimeField& field, const CarlemanWeights& weights,
                                  const TimeGrid& time, ObservabilityWeight which,
                                  const RegionMask& mask) {
    const Grid& grid = weights.grid();
    if (!field.matches(grid, time)) throw DimensionError("weighted_target_norm: field shape");
    const int last = time.steps() - 1;  // t = T excluded
    WeightedNorm out{kNegInf};
    for (int k = 0; k <= last; ++k) {
        const double space = integrate_space(field.slice(k).cwiseAbs2(), grid, &mask);
        if (space <= 0.0) continue;
        const double wt = (k == 0 || k == last) && last > 0 ? 0.5 * time.dt() : time.dt();
        const double term = std::log(wt) + 2.0 * log_weight(weights, time.t(k), which) +
                            std::log(space);
        out.log_value = log_add(out.log_value, term);
    }
    return out;
}

WeightedRefinement weighted_target_refinement(const std::function<double(double, double)>& fn,
                                              const CarlemanWeights& weights,
                                              const TimeGrid& time, ObservabilityWeight which,
                                              const RegionMask& mask) {
    const TimeGrid fine_time(time.horizon(), 2 * time.steps());
    const auto coarse_field = SpaceTimeField::sample(weights.grid(), time, fn);
    const auto fine_field = SpaceTimeField::sample(weights.grid(), fine_time, fn);
    WeightedRefinement out;
    out.coarse = weighted_target_norm(coarse_field, weights, time, which, mask);
    out.fine = weighted_target_norm(fine_field, weights, fine_time, which, mask);
    if (out.coarse.log_value == kNegInf && out.fine.log_value == kNegInf) {
        out.ratio = 1.0;
    } else {
        out.ratio = std::exp(out.fine.log_value - out.coarse.log_value);
    }
    return out;
}

CarlemanFunctionals carleman_functionals(const SpaceTimeField& field,
                                         const CarlemanWeights& weights, const TimeGrid& time) {
    const Grid& grid = weights.grid();
    if (!field.matches(grid, time)) throw DimensionError("carleman_functionals: field shape");
    const double s = weights.s();
    const double lam = weights.lambda();
    const Vector wx = grid.trapezoid_weights();
    double m_grad = 0.0, m_val = 0.0, n_grad = 0.0, n_val = 0.0;
    for (int k = 1; k < time.steps(); ++k) {
        const double t = time.t(k);
        const Vector z = field.slice(k);
        const Vector g = discrete_gradient(z, grid.h());
        for (int i = 0; i < grid.nodes(); ++i) {
            const double e = -2.0 * s * weights.eta(t, i);
            const double lphi = std::log(weights.phi(t, i));
            const double w = time.dt() * wx[i];
            const double g2 = g[i] * g[i];
            const double z2 = z[i] * z[i];
            m_grad += w * std::exp(e + lphi) * g2;
            m_val += w * std::exp(e + 3.0 * lphi) * z2;
            n_grad += w * std::exp(e - lphi) * g2;
            n_val += w * std::exp(e + lphi) * z2;
        }
    }
    CarlemanFunctionals out;
    out.m_value = s * lam * lam * m_grad + s * s * s * std::pow(lam, 4) * m_val;
    out.n_value = n_grad / s + s * lam * lam * n_val;
    return out;
}

void write_weight_table(std::ostream& out, const CarlemanWeights& weights, const TimeGrid& time) {
    out << "# t l alpha_star zeta_star varpi1 varpi2 log_varpi1 log_varpi2\n";
    const auto old = out.precision(10);
    const double inf = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= time.steps(); ++k) {
        const double t = time.t(k);
        out << t << ' ' << weights.l()(t) << ' ';
        if (k == time.steps()) {
            // l vanishes at T: every weight is infinite there.
            out << inf << ' ' << inf << ' ' << inf << ' ' << inf << ' ' << inf << ' ' << inf << '\n';
            continue;
        }
        out << weights.alpha_star(t) << ' ' << weights.zeta_star(t) << ' ' << weights.varpi1(t)
            << ' ' << weights.varpi2(t) << ' ' << weights.log_varpi1(t) << ' '
            << weights.log_varpi2(t) << '\n';
    }
    out.precision(old);
}

}  // namespace nls
