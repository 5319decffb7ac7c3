#include "nls/kernel.hpp"

#include "nls/errors.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace nls {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double log_max_rowsum(const KernelSpec& spec, double sigma_minus, const Grid& grid,
                      const TimeGrid& time) {
    const LProfile l(time.horizon());
    const Vector w = grid.trapezoid_weights();
    double best = -std::numeric_limits<double>::infinity();
    if (const auto* gk = std::get_if<GaussianDecayKernel>(&spec.variant())) {
        // time factor and weight combined in log form
        if (gk->amplitude == 0.0) return best;
        double rmax = 0.0;
        for (int i = 0; i < grid.nodes(); ++i) {
            double acc = 0.0;
            for (int j = 0; j < grid.nodes(); ++j) {
                const double d = (grid.x(i) - grid.x(j)) / gk->width;
                acc += std::exp(-d * d) * w[j];
            }
            rmax = std::max(rmax, acc);
        }
        for (int k = 1; k < time.steps(); ++k) {
            const double l4 = std::pow(l(time.t(k)), 4);
            best = std::max(best, (sigma_minus - gk->decay) / l4 + std::log(std::abs(gk->amplitude) * rmax));
        }
        return best;
    }
    for (int k = 1; k < time.steps(); ++k) {
        const RowMatrix K = spec.samples(k, grid, time);
        const Vector rows = K.cwiseAbs() * w;
        const double rmax = rows.maxCoeff();
        if (rmax <= 0.0) continue;
        best = std::max(best, sigma_minus / std::pow(l(time.t(k)), 4) + std::log(rmax));
    }
    return best;
}

}  // namespace

KernelSpec::KernelSpec(Variant v) : variant_(std::move(v)) {
    if (const auto* g = std::get_if<GaussianDecayKernel>(&variant_)) {
        if (!(g->width > 0.0)) throw ConfigError("gaussian_decay kernel needs width > 0");
        if (!(g->decay >= 0.0)) throw ConfigError("gaussian_decay kernel needs decay >= 0");
        if (!std::isfinite(g->amplitude)) throw ConfigError("kernel amplitude must be finite");
    }
    if (const auto* s = std::get_if<SeparableKernel>(&variant_)) {
        if (!s->tau || !s->a || !s->b) throw ConfigError("separable kernel needs tau, a and b");
    }
}

KernelSpec KernelSpec::eigen(double amplitude, int mode, double length) {
    const double kx = mode * std::numbers::pi / length;
    SeparableKernel sk;
    sk.tau = [amplitude](double) { return amplitude; };
    sk.a = [kx](double x) { return std::sin(kx * x); };
    sk.b = sk.a;
    sk.time_constant = true;
    return KernelSpec(sk);
}

std::string KernelSpec::kind() const {
    return std::visit(overloaded{[](const ZeroKernel&) { return std::string("zero"); },
                                 [](const SeparableKernel&) { return std::string("separable"); },
                                 [](const GaussianDecayKernel&) {
                                     return std::string("gaussian_decay");
                                 },
                                 [](const TabulatedKernel&) { return std::string("tabulated"); }},
                      variant_);
}

bool KernelSpec::time_constant() const {
    return std::visit(
        overloaded{[](const ZeroKernel&) { return true; },
                   [](const SeparableKernel& s) { return s.time_constant; },
                   [](const GaussianDecayKernel& g) { return g.decay == 0.0; },
                   [](const TabulatedKernel& t) {
                       for (std::size_t k = 1; k < t.samples.size(); ++k) {
                           if (t.samples[k] != t.samples[0]) return false;
                       }
                       return true;
                   }},
        variant_);
}

RowMatrix KernelSpec::samples(int k, const Grid& grid, const TimeGrid& time) const {
    const int m = grid.nodes();
    const double t = time.t(k);
    RowMatrix out = RowMatrix::Zero(m, m);
    std::visit(overloaded{
                   [](const ZeroKernel&) {},
                   [&](const SeparableKernel& s) {
                       const double tau = s.tau(t);
                       Vector a(m), b(m);
                       for (int i = 0; i < m; ++i) {
                           a[i] = s.a(grid.x(i));
                           b[i] = s.b(grid.x(i));
                       }
                       out = tau * a * b.transpose();
                   },
                   [&](const GaussianDecayKernel& g) {
                       const LProfile l(time.horizon());
                       const double lt = l(t);
                       double decay = 1.0;
                       if (g.decay > 0.0) decay = lt > 0.0 ? std::exp(-g.decay / std::pow(lt, 4)) : 0.0;
                       for (int i = 0; i < m; ++i) {
                           for (int j = 0; j < m; ++j) {
                               const double d = (grid.x(i) - grid.x(j)) / g.width;
                               out(i, j) = g.amplitude * std::exp(-d * d) * decay;
                           }
                       }
                   },
                   [&](const TabulatedKernel& tab) {
                       if (static_cast<int>(tab.samples.size()) != time.steps() + 1) {
                           throw DimensionError("tabulated kernel: time rows do not match grid");
                       }
                       const RowMatrix& K = tab.samples[k];
                       if (K.rows() != m || K.cols() != m) {
                           throw DimensionError("tabulated kernel: node count does not match grid");
                       }
                       out = K;
                   }},
               variant_);
    if (!out.allFinite()) throw DimensionError("kernel samples must be finite");
    return out;
}

bool KernelSpec::symmetric(const Grid& grid, const TimeGrid& time) const {
    const int rows = time_constant() ? 1 : time.steps() + 1;
    for (int k = 0; k < rows; ++k) {
        const RowMatrix K = samples(k, grid, time);
        const double scale = K.cwiseAbs().maxCoeff();
        if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale) return false;
    }
    return true;
}

TabulatedKernel load_tabulated_kernel(std::istream& in, const Grid& grid, const TimeGrid& time) {
    const int m = grid.nodes();
    const int rows = time.steps() + 1;
    TabulatedKernel tab;
    tab.samples.assign(rows, RowMatrix::Constant(m, m, std::numeric_limits<double>::quiet_NaN()));
    std::string line;
    bool header = false;
    long count = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        if (!header) {
            std::string a, b, c, d;
            ls >> a >> b >> c >> d;
            if (a != "k" || b != "i" || c != "j" || d != "value") {
                throw ConfigError("tabulated kernel: expected header 'k i j value'");
            }
            header = true;
            continue;
        }
        int k = 0, i = 0, j = 0;
        double v = 0.0;
        if (!(ls >> k >> i >> j >> v)) throw ConfigError("tabulated kernel: malformed line: " + line);
        if (k < 0 || k >= rows || i < 0 || i >= m || j < 0 || j >= m) {
            throw DimensionError("tabulated kernel: index out of range: " + line);
        }
        if (!std::isnan(tab.samples[k](i, j))) {
            throw ConfigError("tabulated kernel: duplicate entry: " + line);
        }
        tab.samples[k](i, j) = v;
        ++count;
    }
    if (!header) throw ConfigError("tabulated kernel: missing header");
    if (count != static_cast<long>(rows) * m * m) {
        throw DimensionError("tabulated kernel: expected " + std::to_string(rows * m * m) +
                             " entries, found " + std::to_string(count));
    }
    return tab;
}

TabulatedKernel load_tabulated_kernel(const std::string& path, const Grid& grid,
                                      const TimeGrid& time) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open kernel file: " + path);
    return load_tabulated_kernel(in, grid, time);
}

KernelOperator::KernelOperator(const Grid& grid, const TimeGrid& time,
                               std::vector<Matrix> matrices, bool time_constant, bool symmetric)
    : grid_(grid),
      time_(time),
      matrices_(std::move(matrices)),
      time_constant_(time_constant),
      symmetric_(symmetric) {
    const std::size_t expected = time_constant_ ? 1 : static_cast<std::size_t>(time.steps() + 1);
    if (matrices_.size() != expected) throw DimensionError("kernel operator: wrong matrix count");
    zero_ = true;
    for (const auto& m : matrices_) {
        if (m.rows() != grid.nodes() || m.cols() != grid.nodes()) {
            throw DimensionError("kernel operator: matrix does not match grid");
        }
        zero_ = zero_ && m.isZero(0.0);
    }
}

const Matrix& KernelOperator::matrix(int k) const {
    return time_constant_ ? matrices_.front() : matrices_.at(static_cast<std::size_t>(k));
}

Vector KernelOperator::apply(int k, const Vector& u) const { return matrix(k) * u; }

Vector KernelOperator::apply_transpose(int k, const Vector& w) const {
    return matrix(k).transpose() * w;
}

std::shared_ptr<const KernelOperator> assemble(const KernelSpec& spec, const Grid& grid,
                                               const TimeGrid& time) {
    const bool constant = spec.time_constant();
    const Vector w = grid.trapezoid_weights();
    const int rows = constant ? 1 : time.steps() + 1;
    std::vector<Matrix> mats;
    mats.reserve(rows);
    for (int k = 0; k < rows; ++k) {
        const RowMatrix K = spec.samples(k, grid, time);
        mats.emplace_back(K * w.asDiagonal());
    }
    return std::make_shared<const KernelOperator>(grid, time, std::move(mats), constant,
                                                  spec.symmetric(grid, time));
}

double Admissibility::value() const { return std::exp(log_value); }

Admissibility admissibility_constant(const KernelSpec& spec, const CarlemanWeights& weights,
                                     const Grid& grid, const TimeGrid& time) {
    const double sm = weights.sigma_minus();
    Admissibility out;
    out.log_value = log_max_rowsum(spec, sm, grid, time);
    if (std::holds_alternative<TabulatedKernel>(spec.variant())) {
        // Samples are tied to the given time grid, so no refinement is possible.
        out.log_value_refined = out.log_value;
    } else {
        out.log_value_refined = log_max_rowsum(spec, sm, grid, TimeGrid(time.horizon(), 2 * time.steps()));
    }
    const double ninf = -std::numeric_limits<double>::infinity();
    out.diverging = out.log_value_refined != ninf &&
                    (out.log_value == ninf || out.log_value_refined - out.log_value > std::log(10.0));
    return out;
}

}  // namespace nls
