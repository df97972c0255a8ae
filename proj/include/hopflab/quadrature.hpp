#pragma once

#include <cstddef>
#include <functional>

namespace hopflab {

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = false;
    std::size_t evaluations = 0;
};

/// Adaptive Gauss-Kronrod (G7,K15) on [a,b]. Splits the interval with the
/// worst error estimate until max(abs_tol, rel_tol*|I|) is met or the
/// interval budget runs out. Handles integrable endpoint singularities and
/// jump discontinuities by grading; nodes never touch the endpoints.
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double abs_tol, double rel_tol,
                              std::size_t max_intervals = 4096);

/// Adaptive integral over [a, +inf) via the map x = a + t/(1-t).
QuadResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                 double abs_tol, double rel_tol,
                                 std::size_t max_intervals = 4096);

}  // namespace hopflab
