#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>

namespace nls {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Uniform grid on [0, L] with `n_interior` unknown nodes and two Dirichlet
/// boundary nodes. Node i sits at x_i = i*h, i = 0..n_interior+1.
class Grid {
public:
    Grid(double length, int n_interior);

    double length() const noexcept { return length_; }
    int interior() const noexcept { return n_; }
    int nodes() const noexcept { return n_ + 2; }
    double h() const noexcept { return h_; }
    double x(int i) const noexcept { return i * h_; }
    Vector coordinates() const;

    /// Composite trapezoidal weights on all nodes; they sum to L.
    Vector trapezoid_weights() const;

    bool operator==(const Grid& other) const = default;

private:
    double length_;
    int n_;
    double h_;
};

/// Uniform time grid t_k = k*dt, k = 0..n_steps.
class TimeGrid {
public:
    TimeGrid(double horizon, int n_steps);

    double horizon() const noexcept { return horizon_; }
    int steps() const noexcept { return n_steps_; }
    double dt() const noexcept { return dt_; }
    double t(int k) const noexcept { return k == n_steps_ ? horizon_ : k * dt_; }

    bool operator==(const TimeGrid& other) const = default;

private:
    double horizon_;
    int n_steps_;
    double dt_;
};

/// Closed interval [a, b] strictly inside the spatial domain.
struct Interval {
    double a = 0.0;
    double b = 0.0;

    bool contains(double x) const noexcept { return a <= x && x <= b; }
    bool intersects(const Interval& other) const noexcept {
        return a <= other.b && other.a <= b;
    }
    double length() const noexcept { return b - a; }
    bool operator==(const Interval& other) const = default;
};

enum class Side { left, right };

std::string to_string(Side side);

/// Sharp 0/1 node weights of an interior region (omega, O, O_d).
class RegionMask {
public:
    RegionMask() = default;
    RegionMask(std::string name, Interval interval, const Grid& grid);

    /// Mask equal to one on every node; used for "no mask".
    static RegionMask whole(const Grid& grid);

    const std::string& name() const noexcept { return name_; }
    const Interval& interval() const noexcept { return interval_; }
    const Vector& weights() const noexcept { return weights_; }
    double operator[](int i) const { return weights_[i]; }
    int size() const noexcept { return static_cast<int>(weights_.size()); }
    int count() const;

    /// Pointwise product with a spatial slice.
    Vector apply(const Vector& slice) const;

private:
    std::string name_;
    Interval interval_{};
    Vector weights_;
};

/// Samples of a function on the (n_steps+1) x (n_interior+2) time-space grid.
/// Row k holds time t_k; column i holds node x_i (boundary nodes included).
class SpaceTimeField {
public:
    SpaceTimeField() = default;
    SpaceTimeField(const Grid& grid, const TimeGrid& time);
    SpaceTimeField(int time_rows, int nodes);

    template <typename F>
    static SpaceTimeField sample(const Grid& grid, const TimeGrid& time, F&& fn) {
        SpaceTimeField out(grid, time);
        for (int k = 0; k <= time.steps(); ++k) {
            for (int i = 0; i < grid.nodes(); ++i) {
                out(k, i) = fn(time.t(k), grid.x(i));
            }
        }
        return out;
    }

    int time_rows() const noexcept { return static_cast<int>(values_.rows()); }
    int nodes() const noexcept { return static_cast<int>(values_.cols()); }
    bool matches(const Grid& grid, const TimeGrid& time) const noexcept;

    double& operator()(int k, int i) { return values_(k, i); }
    double operator()(int k, int i) const { return values_(k, i); }

    auto row(int k) { return values_.row(k); }
    auto row(int k) const { return values_.row(k); }
    Vector slice(int k) const { return values_.row(k).transpose(); }
    void set_slice(int k, const Vector& v) { values_.row(k) = v.transpose(); }

    RowMatrix& values() noexcept { return values_; }
    const RowMatrix& values() const noexcept { return values_; }

    bool all_finite() const;
    double max_abs() const;

    /// Multiplies every time slice by the node mask.
    SpaceTimeField masked(const RegionMask& mask) const;

    SpaceTimeField& operator+=(const SpaceTimeField& other);
    SpaceTimeField& operator-=(const SpaceTimeField& other);
    SpaceTimeField& operator*=(double s);
    friend SpaceTimeField operator+(SpaceTimeField a, const SpaceTimeField& b) { return a += b; }
    friend SpaceTimeField operator-(SpaceTimeField a, const SpaceTimeField& b) { return a -= b; }
    friend SpaceTimeField operator*(double s, SpaceTimeField a) { return a *= s; }

    bool operator==(const SpaceTimeField& other) const { return values_ == other.values_; }

private:
    RowMatrix values_;
};

/// Second-difference operator on interior nodes with homogeneous Dirichlet
/// closure: (Lap u)_i = (u_{i-1} - 2u_i + u_{i+1}) / h^2.
class TridiagonalOperator {
public:
    TridiagonalOperator(Vector lower, Vector diag, Vector upper);

    int size() const noexcept { return static_cast<int>(diag_.size()); }
    const Vector& lower() const noexcept { return lower_; }
    const Vector& diag() const noexcept { return diag_; }
    const Vector& upper() const noexcept { return upper_; }

    Vector apply(const Vector& u) const;
    Matrix dense() const;

private:
    Vector lower_;  // sub-diagonal, size n-1
    Vector diag_;
    Vector upper_;  // super-diagonal, size n-1
};

TridiagonalOperator build_laplacian(const Grid& grid);

/// Trapezoidal approximation of the integral of mask*slice over the domain.
double integrate_space(const Vector& slice, const Grid& grid, const RegionMask* mask = nullptr);

/// Composite-trapezoid L2(Q) norm of a field, optionally restricted to a mask.
double norm_l2_spacetime(const SpaceTimeField& field, const Grid& grid, const TimeGrid& time,
                         const RegionMask* mask = nullptr);

// The control problems pair fields with the inner products below. They use
// h * sum over interior nodes in space and the right-endpoint rule
// dt * sum_{k=1..n_steps} in time, which is the pairing under which the
// implicit Euler scheme and its backward counterpart are exact transposes.

/// h * sum over interior nodes of mask*a*b.
double space_dot(const Vector& a, const Vector& b, const Grid& grid,
                 const RegionMask* mask = nullptr);
double space_norm(const Vector& a, const Grid& grid, const RegionMask* mask = nullptr);

/// dt * sum_{k>=1} space_dot(a_k, b_k).
double control_dot(const SpaceTimeField& a, const SpaceTimeField& b, const Grid& grid,
                   const TimeGrid& time, const RegionMask* mask = nullptr);
double control_norm(const SpaceTimeField& a, const Grid& grid, const TimeGrid& time,
                    const RegionMask* mask = nullptr);

}  // namespace nls
