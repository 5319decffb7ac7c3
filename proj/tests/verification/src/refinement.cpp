#include "nls_verify/refinement.hpp"

#include <cmath>
#include <stdexcept>

namespace nls::verify {

namespace {

RefinementStudy from_errors(std::vector<double> errors) {
    RefinementStudy out;
    out.errors = std::move(errors);
    for (std::size_t l = 0; l + 1 < out.errors.size(); ++l) {
        const double a = out.errors[l];
        const double b = out.errors[l + 1];
        if (a > 0.0 && b > 0.0) {
            out.orders.emplace_back(std::log2(a / b));
        } else {
            out.orders.emplace_back(std::nullopt);
        }
        if (!(b < a)) out.monotone = false;
    }
    return out;
}

}  // namespace

std::optional<double> RefinementStudy::mean_order() const {
    double sum = 0.0;
    int count = 0;
    for (const auto& o : orders) {
        if (o) {
            sum += *o;
            ++count;
        }
    }
    if (count == 0) return std::nullopt;
    return sum / count;
}

RefinementStudy refinement_study(const std::function<double(int)>& error_at, int levels) {
    if (levels < 3) throw std::invalid_argument("refinement study needs at least three levels");
    std::vector<double> errors;
    for (int l = 0; l < levels; ++l) errors.push_back(std::abs(error_at(l)));
    return from_errors(std::move(errors));
}

RefinementStudy richardson_study(const std::function<double(int)>& value_at, int levels) {
    if (levels < 3) throw std::invalid_argument("refinement study needs at least three levels");
    std::vector<double> values;
    for (int l = 0; l < levels; ++l) values.push_back(value_at(l));
    std::vector<double> diffs;
    for (std::size_t l = 0; l + 1 < values.size(); ++l) {
        diffs.push_back(std::abs(values[l] - values[l + 1]));
    }
    return from_errors(std::move(diffs));
}

}  // namespace nls::verify
