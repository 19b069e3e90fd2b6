#pragma once

#include <functional>

namespace mht {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

/// Adaptive Gauss-Kronrod quadrature on [a, b]; either end may be infinite.
QuadResult integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-10,
                     int max_depth = 18);

/// Fixed 5-point Gauss-Legendre rule on a finite interval.
double gauss_legendre5(const std::function<double(double)>& f, double a, double b);

}  // namespace mht
