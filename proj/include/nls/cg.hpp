#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace nls {

struct CgOptions {
    double tol = 1e-8;   // relative: stop when |r| <= tol * (1 + |b|)
    int max_iter = 500;
    /// Measure the residual against tol * (1 + |x|) instead; used where the
    /// right-hand side scales like 1/eps but the solution stays bounded.
    bool relative_to_solution = false;
};

template <typename T>
struct CgResult {
    T x;
    int iterations = 0;
    bool converged = false;
    bool stagnated = false;        // no progress over the last `kStagnationWindow` steps
    double residual = 0.0;         // final |b - A x|
    double rhs_norm = 0.0;         // |b|
    std::vector<double> history;   // residual norm per iteration, starting with the initial one
};

inline constexpr int kStagnationWindow = 25;

/// Conjugate gradients for a self-adjoint positive definite operator in the
/// inner product `dot`. T needs +, -, and scalar * (any field type here).
template <typename T, typename Apply, typename Dot>
CgResult<T> conjugate_gradient(Apply&& apply, const T& b, T x0, Dot&& dot, const CgOptions& opt) {
    CgResult<T> out;
    out.x = std::move(x0);
    out.rhs_norm = std::sqrt(std::max(0.0, dot(b, b)));
    auto threshold = [&] {
        const double scale =
            opt.relative_to_solution ? std::sqrt(std::max(0.0, dot(out.x, out.x))) : out.rhs_norm;
        return opt.tol * (1.0 + scale);
    };

    T r = b - apply(out.x);
    double rr = dot(r, r);
    out.residual = std::sqrt(std::max(0.0, rr));
    out.history.push_back(out.residual);
    if (out.residual <= threshold()) {
        out.converged = true;
        return out;
    }
    T d = r;
    double best = out.residual;
    int since_best = 0;
    for (int it = 1; it <= opt.max_iter; ++it) {
        const T ad = apply(d);
        const double curvature = dot(d, ad);
        if (!(curvature > 0.0)) break;
        const double step = rr / curvature;
        out.x = out.x + step * d;
        r = r - step * ad;
        const double rr_new = dot(r, r);
        out.iterations = it;
        out.residual = std::sqrt(std::max(0.0, rr_new));
        out.history.push_back(out.residual);
        if (out.residual <= threshold()) {
            out.converged = true;
            return out;
        }
        if (out.residual < 0.999 * best) {
            best = out.residual;
            since_best = 0;
        } else if (++since_best >= kStagnationWindow) {
            out.stagnated = true;
        }
        d = r + (rr_new / rr) * d;
        rr = rr_new;
    }
    return out;
}

}  // namespace nls
