#pragma once

#include <functional>
#include <optional>
#include <vector>

namespace nls::verify {

struct RefinementStudy {
    std::vector<double> errors;
    /// log2(e_l / e_{l+1}) per consecutive pair; nullopt where an error is zero.
    std::vector<std::optional<double>> orders;
    bool monotone = true;   // errors strictly decrease level to level

    /// Mean of the defined orders; nullopt when none is defined.
    std::optional<double> mean_order() const;
};

/// Runs `error_at(level)` for level = 0..levels-1, each level halving the
/// step of the previous one. Requires at least three levels.
RefinementStudy refinement_study(const std::function<double(int)>& error_at, int levels);

/// Richardson-style orders from a scalar quantity with unknown limit:
/// errors are taken as |q_l - q_{l+1}|.
RefinementStudy richardson_study(const std::function<double(int)>& value_at, int levels);

}  // namespace nls::verify
