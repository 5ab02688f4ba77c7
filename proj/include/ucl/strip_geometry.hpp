#ifndef UCL_STRIP_GEOMETRY_HPP
#define UCL_STRIP_GEOMETRY_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ucl {

// Geometry of the vertical strip (X0, X1) x R^{d-1} together with the
// anisotropic coefficients lambda_j entering the symbol
//   psi(x1, xi')^2 = sum_{j>=2} (1 - x1 lambda_j) xi_j^2.
struct StripConfig {
    int d = 3;                    // dimension, >= 3
    double X0 = -1.0;             // left face, X0 < 0
    double X1 = 1.0;              // right face, X1 > 0
    std::vector<double> lambdas;  // length d, lambdas[0] == 0
    double c0 = 1.0;              // coercivity constant
    double m_star = 0.0;          // min of lambda_j, j >= 2 (0 allowed for the flat case)
    double M_star = 0.0;          // max of lambda_j, j >= 2

    bool flat() const;  // all lambda_j == 0
};

// Radial-ellipsoidal coordinates of a transverse frequency:
// xi' = lambda * omega' with psi(a, omega') = 1.
struct EllipsoidCoords {
    double lambda = 0.0;
    std::vector<double> omega;  // length d-1
};

struct CoercivityFailure {
    double x1;
    int j;           // 1-based coefficient index
    double value;    // the offending 1 - x1 lambda_j
};

struct CoercivityResult {
    bool ok = false;
    double c0 = 0.0;  // smallest certified constant
    std::optional<CoercivityFailure> failure;
};

struct PseudoconvexityResult {
    bool ok = false;
    double m_star = 0.0;
    double M_star = 0.0;
    std::vector<int> bad_indices;  // 1-based indices with lambda_j <= 0
};

// Oracle interface for a general C^3 weight: value, gradient, Hessian at x.
struct WeightOracle {
    std::function<double(const std::vector<double>&)> value;
    std::function<std::vector<double>(const std::vector<double>&)> grad;
    std::function<std::vector<std::vector<double>>(const std::vector<double>&)> hess;
};

// Output of the change of coordinates turning a general weight into strip
// coefficients at a point x0: the adapted frame L_1..L_d, the symmetric
// curvature matrices A_2..A_d, and the resulting lambda_j.
struct StripCoefficients {
    std::vector<double> lambdas;                    // length d, lambdas[0] == 0
    std::vector<std::vector<double>> L;             // d vectors of length d
    std::vector<std::vector<std::vector<double>>> A;  // d-1 symmetric d x d matrices (A_2..A_d)
};

// psi(x1, xi').  Throws std::domain_error if some 1 - x1 lambda_j <= 0.
double psi_eval(const StripConfig& cfg, double x1, const std::vector<double>& xi_perp);

// d/dx1 of psi at (x1, xi'): -sum lambda_j xi_j^2 / (2 psi).  Zero if xi' = 0.
double psi_dx1(const StripConfig& cfg, double x1, const std::vector<double>& xi_perp);

// Certifies 1/c0^2 |xi|^2 <= sum (1 - x1 lambda_j) |xi_j|^2 <= c0^2 |xi|^2 on a
// sample grid of x1 values (endpoints included; the form is affine in x1 so
// endpoint checking is exact).  Returns the tightest certified c0.
CoercivityResult check_coercivity(const StripConfig& cfg, int n_samples = 257);

PseudoconvexityResult check_pseudoconvexity(const StripConfig& cfg);

// Frequency <-> (radius, ellipsoid direction) at height a.
EllipsoidCoords ellipsoid_coords(const StripConfig& cfg, double a,
                                 const std::vector<double>& xi_perp);
std::vector<double> ellipsoid_coords_inverse(const EllipsoidCoords& ec);

// Change of coordinates adapted to a weight at x0:
//   L_1 = grad(x0); L_j orthogonal to L_1, |L_j| = |L_1|, diagonalizing the
//   Hessian restricted to L_1^perp; A_j symmetric, determined by
//     A_j L_1 = -alpha_j L_1 - mu_j L_j,
//     A_j L_k =  alpha_k L_j - alpha_j L_k   (k != j, k >= 2),
//     A_j L_j = -mu_j L_1 + sum_{k>=2} alpha_k L_k,
//   where Hess L_j = mu_j L_j + alpha_j L_1 on the frame; and
//     lambda_j = (2/|L_1|^2) (Hess L_1 . L_1 + Hess L_j . L_j) / |L_1|^2
// normalized as in the source construction (see implementation).
StripCoefficients strip_coefficients_from_weight(const WeightOracle& w,
                                                 const std::vector<double>& x0);

// [strip] config-section (de)serialization helpers.
std::string strip_to_config(const StripConfig& cfg);
StripConfig strip_from_config(const std::string& section_body);

} // namespace ucl

#endif
