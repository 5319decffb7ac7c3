#include "nls/grid.hpp"

#include "nls/errors.hpp"

#include <cmath>

namespace nls {

Grid::Grid(double length, int n_interior) : length_(length), n_(n_interior) {
    if (!(length > 0.0) || !std::isfinite(length)) {
        throw DimensionError("grid length must be positive and finite");
    }
    if (n_interior < 1) {
        throw DimensionError("grid needs at least one interior node");
    }
    h_ = length / (n_interior + 1);
}

Vector Grid::coordinates() const {
    Vector x(nodes());
    for (int i = 0; i < nodes(); ++i) x[i] = this->x(i);
    x[nodes() - 1] = length_;
    return x;
}

Vector Grid::trapezoid_weights() const {
    Vector w = Vector::Constant(nodes(), h_);
    w[0] = 0.5 * h_;
    w[nodes() - 1] = 0.5 * h_;
    return w;
}

TimeGrid::TimeGrid(double horizon, int n_steps) : horizon_(horizon), n_steps_(n_steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw DimensionError("time horizon must be positive and finite");
    }
    if (n_steps < 1) {
        throw DimensionError("time grid needs at least one step");
    }
    dt_ = horizon / n_steps;
}

std::string to_string(Side side) { return side == Side::left ? "left" : "right"; }

RegionMask::RegionMask(std::string name, Interval interval, const Grid& grid)
    : name_(std::move(name)), interval_(interval), weights_(Vector::Zero(grid.nodes())) {
    if (!(interval.a < interval.b)) {
        throw ConfigError("region '" + name_ + "' must satisfy a < b");
    }
    if (!(interval.a > 0.0 && interval.b < grid.length())) {
        throw ConfigError("region '" + name_ + "' must lie strictly inside (0, L)");
    }
    // tolerance for interval ends landing on nodes
    const double slack = 1e-12 * grid.length();
    for (int i = 1; i <= grid.interior(); ++i) {
        const double x = grid.x(i);
        if (x >= interval.a - slack && x <= interval.b + slack) weights_[i] = 1.0;
    }
}

RegionMask RegionMask::whole(const Grid& grid) {
    RegionMask m;
    m.name_ = "Omega";
    m.interval_ = {0.0, grid.length()};
    m.weights_ = Vector::Ones(grid.nodes());
    return m;
}

int RegionMask::count() const {
    int c = 0;
    for (int i = 0; i < size(); ++i) c += weights_[i] != 0.0 ? 1 : 0;
    return c;
}

Vector RegionMask::apply(const Vector& slice) const {
    if (slice.size() != weights_.size()) {
        throw DimensionError("mask '" + name_ + "' applied to slice of wrong length");
    }
    return slice.cwiseProduct(weights_);
}

SpaceTimeField::SpaceTimeField(const Grid& grid, const TimeGrid& time)
    : values_(RowMatrix::Zero(time.steps() + 1, grid.nodes())) {}

SpaceTimeField::SpaceTimeField(int time_rows, int nodes)
    : values_(RowMatrix::Zero(time_rows, nodes)) {}

bool SpaceTimeField::matches(const Grid& grid, const TimeGrid& time) const noexcept {
    return time_rows() == time.steps() + 1 && nodes() == grid.nodes();
}

bool SpaceTimeField::all_finite() const { return values_.allFinite(); }

double SpaceTimeField::max_abs() const {
    return values_.size() == 0 ? 0.0 : values_.cwiseAbs().maxCoeff();
}

SpaceTimeField SpaceTimeField::masked(const RegionMask& mask) const {
    if (mask.size() != nodes()) throw DimensionError("mask/field node count mismatch");
    SpaceTimeField out = *this;
    for (int k = 0; k < time_rows(); ++k) {
        out.values_.row(k) = values_.row(k).cwiseProduct(mask.weights().transpose());
    }
    return out;
}

SpaceTimeField& SpaceTimeField::operator+=(const SpaceTimeField& other) {
    if (other.values_.rows() != values_.rows() || other.values_.cols() != values_.cols()) {
        throw DimensionError("field shapes differ");
    }
    values_ += other.values_;
    return *this;
}

SpaceTimeField& SpaceTimeField::operator-=(const SpaceTimeField& other) {
    if (other.values_.rows() != values_.rows() || other.values_.cols() != values_.cols()) {
        throw DimensionError("field shapes differ");
    }
    values_ -= other.values_;
    return *this;
}

SpaceTimeField& SpaceTimeField::operator*=(double s) {
    values_ *= s;
    return *this;
}

TridiagonalOperator::TridiagonalOperator(Vector lower, Vector diag, Vector upper)
    : lower_(std::move(lower)), diag_(std::move(diag)), upper_(std::move(upper)) {
    if (lower_.size() + 1 != diag_.size() || upper_.size() + 1 != diag_.size()) {
        throw DimensionError("tridiagonal band sizes are inconsistent");
    }
}

Vector TridiagonalOperator::apply(const Vector& u) const {
    const int n = size();
    if (u.size() != n) throw DimensionError("tridiagonal apply: length mismatch");
    Vector out(n);
    for (int i = 0; i < n; ++i) {
        double acc = diag_[i] * u[i];
        if (i > 0) acc += lower_[i - 1] * u[i - 1];
        if (i + 1 < n) acc += upper_[i] * u[i + 1];
        out[i] = acc;
    }
    return out;
}

Matrix TridiagonalOperator::dense() const {
    const int n = size();
    Matrix m = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        m(i, i) = diag_[i];
        if (i > 0) m(i, i - 1) = lower_[i - 1];
        if (i + 1 < n) m(i, i + 1) = upper_[i];
    }
    return m;
}

TridiagonalOperator build_laplacian(const Grid& grid) {
    const int n = grid.interior();
    if (n < 2) throw DimensionError("laplacian needs at least two interior nodes");
    const double c = 1.0 / (grid.h() * grid.h());
    return TridiagonalOperator(Vector::Constant(n - 1, c), Vector::Constant(n, -2.0 * c),
                               Vector::Constant(n - 1, c));
}

double integrate_space(const Vector& slice, const Grid& grid, const RegionMask* mask) {
    if (slice.size() != grid.nodes()) {
        throw DimensionError("integrate_space: slice length does not match grid");
    }
    Vector w = grid.trapezoid_weights();
    if (mask != nullptr) w = mask->apply(w);
    return w.dot(slice);
}

double norm_l2_spacetime(const SpaceTimeField& field, const Grid& grid, const TimeGrid& time,
                         const RegionMask* mask) {
    if (!field.matches(grid, time)) {
        throw DimensionError("norm_l2_spacetime: field does not match grids");
    }
    double acc = 0.0;
    for (int k = 0; k <= time.steps(); ++k) {
        const double wt = (k == 0 || k == time.steps()) ? 0.5 * time.dt() : time.dt();
        acc += wt * integrate_space(field.slice(k).cwiseAbs2(), grid, mask);
    }
    return std::sqrt(acc);
}

double space_dot(const Vector& a, const Vector& b, const Grid& grid, const RegionMask* mask) {
    if (a.size() != grid.nodes() || b.size() != grid.nodes()) {
        throw DimensionError("space_dot: slice length does not match grid");
    }
    const int n = grid.interior();
    double acc = 0.0;
    if (mask == nullptr) {
        acc = a.segment(1, n).dot(b.segment(1, n));
    } else {
        for (int i = 1; i <= n; ++i) acc += (*mask)[i] * a[i] * b[i];
    }
    return grid.h() * acc;
}

double space_norm(const Vector& a, const Grid& grid, const RegionMask* mask) {
    return std::sqrt(space_dot(a, a, grid, mask));
}

double control_dot(const SpaceTimeField& a, const SpaceTimeField& b, const Grid& grid,
                   const TimeGrid& time, const RegionMask* mask) {
    if (!a.matches(grid, time) || !b.matches(grid, time)) {
        throw DimensionError("control_dot: field does not match grids");
    }
    double acc = 0.0;
    for (int k = 1; k <= time.steps(); ++k) acc += space_dot(a.slice(k), b.slice(k), grid, mask);
    return time.dt() * acc;
}

double control_norm(const SpaceTimeField& a, const Grid& grid, const TimeGrid& time,
                    const RegionMask* mask) {
    return std::sqrt(control_dot(a, a, grid, time, mask));
}

}  // namespace nls
