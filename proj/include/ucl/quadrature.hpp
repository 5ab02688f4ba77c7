#ifndef UCL_QUADRATURE_HPP
#define UCL_QUADRATURE_HPP

#include <functional>
#include <stdexcept>

namespace ucl {

// Adaptive Gauss-Kronrod (G7/K15) integration on [a,b].
// Splits the interval recursively until the embedded error estimate of every
// panel is below rel_tol * |I| (or abs_tol), up to max_panels subdivisions.
struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;   // accumulated error estimate
    bool converged = true;
    long panels = 0;
};

QuadratureResult integrate_gk(const std::function<double(double)>& f,
                              double a, double b,
                              double rel_tol = 1e-9,
                              double abs_tol = 1e-14,
                              long max_panels = 1L << 15);

// Convenience wrapper that throws on non-convergence.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-9);

} // namespace ucl

#endif
