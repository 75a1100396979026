#pragma once

#include <functional>
#include <vector>

namespace readout {

// Plain downhill-simplex minimizer (reflection 1, expansion 2, contraction
// 0.5, shrink 0.5) for low-dimensional calibration problems.
struct NelderMeadOptions {
    int max_iterations = 800;
    double x_tolerance = 1e-8;    // simplex diameter triggering convergence
    double initial_step = 0.1;    // per-coordinate offset for the start simplex
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                             std::vector<double> start, NelderMeadOptions options = {});

}  // namespace readout
