#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "wanpm/drift.hpp"
#include "wanpm/random.hpp"

namespace testing {

inline double relative_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

/// Central difference of f along coordinate i.
inline double central_difference(const std::function<double(const wanpm::Vector&)>& f, wanpm::Vector x,
                                 Eigen::Index i, double h = 1e-5) {
    const double x0 = x(i);
    x(i) = x0 + h;
    const double up = f(x);
    x(i) = x0 - h;
    const double down = f(x);
    return (up - down) / (2.0 * h);
}

inline wanpm::Matrix random_matrix(int rows, int cols, wanpm::RandomStream& stream, double scale = 1.0) {
    wanpm::Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = scale * stream.normal();
    return m;
}

}  // namespace testing
