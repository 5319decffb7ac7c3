#include "nls/observability.hpp"

#include "nls/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace nls {

std::vector<Vector> modal_samples(const Grid& grid, int count, int modes, std::uint64_t seed) {
    if (count < 0 || modes < 1) throw ConfigError("modal_samples: need count >= 0 and modes >= 1");
    const int m = std::min(modes, grid.interior());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Vector> out;
    out.reserve(count);
    for (int s = 0; s < count; ++s) {
        Vector v = Vector::Zero(grid.nodes());
        for (int k = 1; k <= m; ++k) {
            const double xi = normal(rng);
            for (int i = 1; i <= grid.interior(); ++i) {
                v[i] += xi * std::sin(k * std::numbers::pi * grid.x(i) / grid.length());
            }
        }
        out.push_back(std::move(v));
    }
    return out;
}

std::optional<double> observability_ratio(const CoupledSystem& system,
                                          const CarlemanWeights& weights,
                                          ObservabilityWeight which, const Vector& terminal,
                                          const PicardOptions& picard) {
    const Grid& g = system.grid();
    const TimeGrid& t = system.time();
    if (!(weights.grid() == g)) throw DimensionError("observability_ratio: weights grid");
    const AdjointPair pair = solve_adjoint_pair(system, terminal, picard);

    const double rho_omega = norm_l2_spacetime(pair.rho, g, t, &system.leader_region);
    const double denom = rho_omega * rho_omega;
    if (!(denom > 0.0)) return std::nullopt;

    const double rho0 = integrate_space(pair.rho.slice(0).cwiseAbs2(), g);
    double psi = 0.0;
    for (int k = 0; k < t.steps(); ++k) {
        const double tk = t.t(k);
        const double lw = which == ObservabilityWeight::varpi1 ? weights.log_varpi1(tk)
                                                               : weights.log_varpi2(tk);
        const double wt = (k == 0 ? 0.5 : 1.0) * t.dt();
        psi += wt * std::exp(-2.0 * lw) * integrate_space(pair.psi.slice(k).cwiseAbs2(), g);
    }
    return (rho0 + psi) / denom;
}

ObservabilityStats probe_observability(const CoupledSystem& system, const CarlemanWeights& weights,
                                       ObservabilityWeight which,
                                       const ObservabilityOptions& options) {
    ObservabilityStats st;
    for (const Vector& terminal :
         modal_samples(system.grid(), options.samples, options.modes, options.seed)) {
        ++st.samples;
        const auto r = observability_ratio(system, weights, which, terminal, options.picard);
        if (!r) {
            ++st.skipped;
            continue;
        }
        st.ratios.push_back(*r);
    }
    if (!st.ratios.empty()) {
        std::vector<double> sorted = st.ratios;
        std::sort(sorted.begin(), sorted.end());
        st.max_ratio = sorted.back();
        const std::size_t n = sorted.size();
        st.median_ratio = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    }
    return st;
}

}  // namespace nls
