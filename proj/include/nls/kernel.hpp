#pragma once

#include "nls/grid.hpp"
#include "nls/weights.hpp"

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace nls {

struct ZeroKernel {};

/// K(t,x,theta) = tau(t) a(x) b(theta).
struct SeparableKernel {
    std::function<double(double)> tau;
    std::function<double(double)> a;
    std::function<double(double)> b;
    bool time_constant = false;  // caller's promise that tau is constant
};

/// K(t,x,theta) = amplitude * exp(-(x-theta)^2/width^2) * exp(-decay / l^4(t)).
struct GaussianDecayKernel {
    double amplitude = 1.0;
    double width = 0.1;
    double decay = 0.0;
};

/// Samples K[k](i, j) = K(t_k, x_i, theta_j) on the full node set.
struct TabulatedKernel {
    std::vector<RowMatrix> samples;
};

class KernelSpec {
public:
    using Variant = std::variant<ZeroKernel, SeparableKernel, GaussianDecayKernel, TabulatedKernel>;

    KernelSpec() : variant_(ZeroKernel{}) {}
    KernelSpec(Variant v);  // NOLINT(google-explicit-constructor)

    static KernelSpec zero() { return KernelSpec(); }
    /// c * sin(m pi x / L) sin(m pi theta / L), constant in time.
    static KernelSpec eigen(double amplitude, int mode, double length);

    const Variant& variant() const noexcept { return variant_; }
    std::string kind() const;
    bool time_constant() const;

    /// Kernel samples at time row k on the full node set, validated finite.
    RowMatrix samples(int k, const Grid& grid, const TimeGrid& time) const;

    /// True when K(t,x,theta) == K(t,theta,x) at every sample, up to rounding.
    bool symmetric(const Grid& grid, const TimeGrid& time) const;

private:
    Variant variant_;
};

/// Reads a tabulated kernel from columnar text with header `k i j value`.
/// Every (k, i, j) triple of the grids must appear exactly once.
TabulatedKernel load_tabulated_kernel(std::istream& in, const Grid& grid, const TimeGrid& time);
TabulatedKernel load_tabulated_kernel(const std::string& path, const Grid& grid,
                                      const TimeGrid& time);

/// Dense per-step quadrature matrices (N_k u)_i = sum_j K(t_k,x_i,theta_j) w_j u_j
/// over all nodes with trapezoidal weights w_j.
class KernelOperator {
public:
    KernelOperator(const Grid& grid, const TimeGrid& time, std::vector<Matrix> matrices,
                   bool time_constant, bool symmetric);

    const Grid& grid() const noexcept { return grid_; }
    const TimeGrid& time() const noexcept { return time_; }
    bool time_constant() const noexcept { return time_constant_; }
    bool symmetric() const noexcept { return symmetric_; }
    bool is_zero() const noexcept { return zero_; }

    const Matrix& matrix(int k) const;
    Vector apply(int k, const Vector& u) const;
    Vector apply_transpose(int k, const Vector& w) const;

private:
    Grid grid_;
    TimeGrid time_;
    std::vector<Matrix> matrices_;
    bool time_constant_;
    bool symmetric_;
    bool zero_;
};

std::shared_ptr<const KernelOperator> assemble(const KernelSpec& spec, const Grid& grid,
                                               const TimeGrid& time);

struct Admissibility {
    double log_value = 0.0;       // log of the grid maximum
    double log_value_refined = 0.0;  // same on the doubled time grid
    bool diverging = false;       // refined maximum exceeds 10x the coarse one
    double value() const;         // may be +inf
};

/// Grid maximum of exp(sigma^-/l^4(t_k)) * sum_j |K(t_k,x_i,theta_j)| w_j over
/// interior times t_k in [dt, T-dt], evaluated again on the doubled time
/// grid to flag divergence.
Admissibility admissibility_constant(const KernelSpec& spec, const CarlemanWeights& weights,
                                     const Grid& grid, const TimeGrid& time);

}  // namespace nls
