#ifndef UCL_UCP_HPP
#define UCL_UCP_HPP

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace ucl {

using Vec3 = std::array<double, 3>;

// Uniform cube grid [lo, hi]^3 with n nodes per axis, node (i, j, k) at
// lo + h * (i, j, k).  Real-valued fields; the elliptic laboratory works in
// physical space with Dirichlet data, unlike the spectral strip fields.
struct BoxGrid {
    int n = 0;
    double lo = -1.0, hi = 1.0;

    double h() const { return (hi - lo) / double(n - 1); }
    double coord(int i) const { return lo + h() * i; }
    std::size_t size() const { return std::size_t(n) * n * n; }
    std::size_t idx(int i, int j, int k) const {
        return (std::size_t(i) * n + j) * n + k;
    }
    Vec3 point(int i, int j, int k) const { return {coord(i), coord(j), coord(k)}; }
};

struct BoxField {
    BoxGrid g;
    std::vector<double> v;
    bool empty() const { return v.empty(); }
};

BoxField make_box_field(const BoxGrid& g);

using Mask = std::vector<char>;
Mask mask_from(const BoxGrid& g, const std::function<bool(const Vec3&)>& pred);
Mask ball_mask(const BoxGrid& g, const Vec3& c, double r);
Mask annulus_mask(const BoxGrid& g, const Vec3& c, double r1, double r2);

// Node-weighted L^p norm over a mask; per-axis trapezoid half weights at
// mask edges so smooth masked integrals are second-order accurate.
double box_lp_norm(const BoxField& f, double p, const Mask& mask);
// sqrt(||u||_2^2 + ||grad u||_2^2) over the mask, one-sided differences at
// mask boundaries.  Throws on an empty mask.
double box_h1_norm(const BoxField& f, const Mask& mask);

// Smeared ball indicator: 1 inside, 0 outside, linear ramp of one cell width
// across the sphere.  Integrating against it recovers ball integrals of
// smooth fields to second order, where a sharp mask is only first order.
std::vector<double> ball_weights(const BoxGrid& g, const Vec3& c, double r);
double box_lp_norm(const BoxField& f, double p, const std::vector<double>& w);
// Weighted H^1 norm with centered differences (the field must be meaningful
// one cell beyond the weight support).
double box_h1_norm(const BoxField& f, const std::vector<double>& w);

// Lower-order coefficients of Delta u = V u + W1 . grad u + div(W2 u).
// Empty fields stand for zero coefficients.
struct Potentials {
    BoxField V;
    std::array<BoxField, 3> W1, W2;
};

struct SolveResult {
    BoxField u;
    double residual = 0.0;  // achieved relative residual
    int iterations = 0;
    bool converged = false;
};

// Second-order finite differences: 7-point Laplacian, centered W1 . grad u,
// conservative flux differencing for div(W2 u).  Unknowns are the interior
// nodes; every other node carries the Dirichlet value.  Interior nodes must
// not touch the grid faces.  Solved by BiCGStab to the relative tolerance.
SolveResult solve_elliptic(const BoxGrid& g, const Mask& interior,
                           const Potentials& pot,
                           const std::function<double(const Vec3&)>& boundary,
                           double tol = 1e-8, int max_iter = -1);

// Cutoff source f_eta = 2 grad(eta).grad(u) + Lap(eta) u - W1.grad(eta) u
// - W2.grad(eta) u on the cap geometry Omega = B_0(2R) n {x1 < -R/4}, with
// eta = 1 on B_0(3R/2) n {x1 < -7R/24} and vanishing near the boundary.
// support_ok verifies supp f_eta lies in the observation shell union the
// transition slab {-7R/24 < x1 < -R/4}.
struct CutoffSource {
    BoxField f;
    BoxField eta;
    bool support_ok = false;
};

CutoffSource cutoff_source(const BoxField& u, const Potentials& pot, double R);

// Trilinear interpolation; throws when x leaves the grid box.
double trilinear(const BoxField& f, const Vec3& x);

// Conformal reflection through the sphere of radius R and the associated
// Kelvin transform (R/|x|)^{d-2} u(T x) with d = 3, evaluated on the target
// mask (zero elsewhere).  Vector fields map through the reflection matrix
// (R^2/|x|^2)(I - 2 x x^T/|x|^2); the scalar potential picks up the
// (R^4/|x|^4) factor plus the first-order correction from the W fields.
Vec3 kelvin_T(const Vec3& x, double R);
BoxField kelvin_scalar(const BoxField& u, double R, const BoxGrid& target,
                       const Mask& where);
std::array<BoxField, 3> kelvin_vector(const std::array<BoxField, 3>& W, double R,
                                      const BoxGrid& target, const Mask& where);
BoxField kelvin_potential_V(const BoxField& V, const std::array<BoxField, 3>& W1,
                            const std::array<BoxField, 3>& W2, double R,
                            const BoxGrid& target, const Mask& where);

// Rotation-averaging density rho_R(r): the spherical measure of directions
// x0 with x . x0 < -R/3 at |x| = r.  Closed form 2 pi (1 - R/(3r)) for
// r >= R/3 and zero below; the quadrature version integrates the indicator
// over a product grid on the sphere.
double cap_density(double r, double R);
double cap_density_quad(double r, double R, int nquad);

// Averages squared per-direction estimates over the sphere and applies the
// 1/sqrt(rho_R(R/2)) factor of the annulus argument.
double annulus_from_caps(const std::function<double(const Vec3&)>& cap_estimate,
                         double R, int nquad);

// Interpolation inequality nO <= C * nw^alpha * nOmega^(1-alpha).  Since
// nw <= nOmega, the smallest admissible C at fixed alpha (the largest sample
// ratio) grows with alpha, so the strength of the statement is the largest
// alpha whose constant stays under a cap.  three_balls_C evaluates the tight
// constant at one alpha; three_balls_fit scans the 99-point alpha grid and
// returns the largest alpha with C(alpha) <= C_cap.
struct ThreeBallsSample {
    double nw = 0.0, nO = 0.0, nOmega = 0.0;
};

struct ThreeBallsFit {
    double C = 0.0, alpha = 0.0;
    bool feasible = false;
    int active_sample = -1;  // sample where the constant is attained
};

double three_balls_C(const std::vector<ThreeBallsSample>& samples, double alpha);
ThreeBallsFit three_balls_fit(const std::vector<ThreeBallsSample>& samples,
                              double C_cap);

// Polyline path certification for the geometric condition: r_y is half the
// sampled clearance along the path, re-verified by testing ball samples
// against the domain predicate.
struct Polyline {
    std::vector<Vec3> pts;
    double length() const;
    Vec3 at_arclength(double s) const;
};

struct PathCert {
    Polyline path;
    double r_y = 0.0;
    bool ok = false;
};

PathCert certify_path(const Polyline& path,
                      const std::function<bool(const Vec3&)>& in_Omega,
                      const std::function<double(const Vec3&)>& clearance,
                      int nsamples = 200);

struct GCResult {
    std::vector<PathCert> certs;
    bool all_ok = false;
};

// For each target point, tries the oracle's candidate polylines in order and
// keeps the first certified one.
GCResult check_GC(const std::function<bool(const Vec3&)>& in_Omega,
                  const std::function<double(const Vec3&)>& clearance,
                  const std::vector<Vec3>& targets,
                  const std::function<std::vector<Polyline>(const Vec3&)>& oracle);

// Ball-chain composition along a certified path: centers advance by exactly
// R_y = min(r_y/4, r0) in arclength steps, each step applying a three-balls
// estimate with constants (C_step, alpha_step); the composed exponent is
// alpha_step^N and the constant C_step^{sum alpha^j}.  A step constant
// below 1 is promoted to 1 so composition never strengthens a single step.
struct ChainResult {
    int N = 0;
    std::vector<Vec3> centers;
    double R_y = 0.0;
    double C = 0.0, alpha = 0.0;
    bool capped = false;
};

ChainResult chain_propagate(const PathCert& cert, double r0, double C_step,
                            double alpha_step, int step_cap = 10000);

// Multi-scale random bump field scaled to a prescribed L^q norm over the
// mask; the experiments control potential classes through their norms.
BoxField synth_potential(const BoxGrid& g, const Mask& mask, unsigned seed,
                         double target_norm, double q);

} // namespace ucl

#endif
