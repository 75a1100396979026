#include "readout/neldermead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace readout {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                             std::vector<double> start, NelderMeadOptions options) {
    if (!objective || start.empty()) {
        throw std::invalid_argument("nelder_mead: need an objective and a non-empty start point");
    }
    const std::size_t dim = start.size();

    std::vector<std::vector<double>> simplex(dim + 1, start);
    for (std::size_t i = 0; i < dim; ++i) {
        simplex[i + 1][i] += options.initial_step;
    }
    std::vector<double> value(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) {
        value[i] = objective(simplex[i]);
    }

    NelderMeadResult result;
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        // Order so that 0 is best, dim is worst.
        std::vector<std::size_t> idx(dim + 1);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
        std::vector<std::vector<double>> sorted_x(dim + 1);
        std::vector<double> sorted_f(dim + 1);
        for (std::size_t i = 0; i <= dim; ++i) {
            sorted_x[i] = simplex[idx[i]];
            sorted_f[i] = value[idx[i]];
        }
        simplex.swap(sorted_x);
        value.swap(sorted_f);

        double diameter = 0.0;
        for (std::size_t i = 1; i <= dim; ++i) {
            for (std::size_t j = 0; j < dim; ++j) {
                diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[0][j]));
            }
        }
        if (diameter < options.x_tolerance) {
            result.converged = true;
            break;
        }

        // Centroid of all but the worst.
        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = 0; j < dim; ++j) {
                centroid[j] += simplex[i][j] / static_cast<double>(dim);
            }
        }
        auto blend = [&](double t) {
            std::vector<double> x(dim);
            for (std::size_t j = 0; j < dim; ++j) {
                x[j] = centroid[j] + t * (simplex[dim][j] - centroid[j]);
            }
            return x;
        };

        const std::vector<double> reflected = blend(-1.0);
        const double f_reflected = objective(reflected);
        if (f_reflected < value[0]) {
            const std::vector<double> expanded = blend(-2.0);
            const double f_expanded = objective(expanded);
            if (f_expanded < f_reflected) {
                simplex[dim] = expanded;
                value[dim] = f_expanded;
            } else {
                simplex[dim] = reflected;
                value[dim] = f_reflected;
            }
            continue;
        }
        if (f_reflected < value[dim - 1]) {
            simplex[dim] = reflected;
            value[dim] = f_reflected;
            continue;
        }
        const bool outside = f_reflected < value[dim];
        const std::vector<double> contracted = blend(outside ? -0.5 : 0.5);
        const double f_contracted = objective(contracted);
        if (f_contracted < std::min(f_reflected, value[dim])) {
            simplex[dim] = contracted;
            value[dim] = f_contracted;
            continue;
        }
        // Shrink toward the best vertex.
        for (std::size_t i = 1; i <= dim; ++i) {
            for (std::size_t j = 0; j < dim; ++j) {
                simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
            }
            value[i] = objective(simplex[i]);
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= dim; ++i) {
        if (value[i] < value[best]) {
            best = i;
        }
    }
    result.x = simplex[best];
    result.value = value[best];
    result.iterations = iter;
    return result;
}

}  // namespace readout
