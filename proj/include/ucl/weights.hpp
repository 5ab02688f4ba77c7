#ifndef UCL_WEIGHTS_HPP
#define UCL_WEIGHTS_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "ucl/strip_geometry.hpp"

namespace ucl {

// The quadratic-linear weight family phi_k(x) = k1 x1^2 + k' . x'.
struct WeightVector {
    std::vector<double> k;  // length d; k[0] is the quadratic coefficient

    int dim() const { return (int)k.size(); }
};

double phi_eval(const WeightVector& k, const std::vector<double>& x);
std::vector<double> phi_grad(const WeightVector& k, const std::vector<double>& x);
std::vector<std::vector<double>> phi_hess(const WeightVector& k, const std::vector<double>& x);

// Wraps a WeightVector as a general weight oracle.
WeightOracle make_weight_oracle(const WeightVector& k);

// A sampler yields points of the region it represents (here: rejection
// sampling inside a bounding box against a membership predicate).
struct RegionSampler {
    std::vector<double> box_lo, box_hi;  // bounding box
    std::function<bool(const std::vector<double>&)> inside;
    // Closure points where affine-in-x' weights attain their extremes over the
    // region (cap-face centers etc.).  weight_comparison evaluates these in
    // addition to random samples so the analytic extremes are hit exactly.
    std::vector<std::vector<double>> extreme_candidates;
};

struct SubellipticityReport {
    bool pass = false;
    double alpha = 0.0;    // min |grad phi| over samples
    double beta = 0.0;     // min of the Hessian form combination / |grad phi|^2
    double c3_norm = 0.0;  // sup over samples of |phi| + |grad| + |Hess| (C3 proxy;
                           // the third derivative vanishes for the quadratic family)
    std::vector<double> alpha_witness, beta_witness;
    bool grad_vanished = false;
    std::vector<double> grad_witness;
};

// Checks inf |grad phi| > 0 and, for tangent directions xi with |xi| = |grad phi|
// and xi . grad phi = 0,
//   (Hess phi) grad.grad + (Hess phi) xi.xi >= beta |grad phi|^2
// over n_samples points of the sampler's region minus omega0.
SubellipticityReport check_subellipticity(
    const WeightOracle& w, const RegionSampler& domain,
    const std::function<bool(const std::vector<double>&)>& omega0,
    int n_samples, std::mt19937_64& rng, int tangent_rotations = 16);

// Largest rho with inf_{k, O} phi_k >= (1+rho) sup_{k, slab} phi_k.
// Also reports the two extremes.
struct ComparisonResult {
    double rho = -1.0;
    double inf_O = 0.0;
    double sup_slab = 0.0;
};
ComparisonResult weight_comparison(const std::vector<WeightVector>& k_set,
                                   const RegionSampler& O,
                                   const RegionSampler& slab,
                                   int n_samples, std::mt19937_64& rng);

// The standard test geometry at scale R: Omega = B_0(2R) n {x1 < -R/4},
// O = B_0(3R/2) n {x1 < -R/3}, omega = (B_0(2R) \ B_0(R)) n {x1 < -R/4},
// slab = Omega n {x1 in (-7R/24, -R/4)}.
RegionSampler cap_domain_Omega(int d, double R);
RegionSampler cap_domain_O(int d, double R);
RegionSampler cap_domain_omega(int d, double R);
RegionSampler cap_domain_slab(int d, double R);

// For phi = phi_{e1} on the cap geometry the extremes are analytic:
// inf_O phi = R^2/9 (attained at x1 = -R/3) and sup_slab = (7R/24)^2.
double cap_inf_O_exact(double R);
double cap_sup_slab_exact(double R);

// Samples n_k directions k with |k/|k| - e1| <= eps (unit-norm k).
std::vector<WeightVector> sample_k_ball(int d, double eps, int n_k, std::mt19937_64& rng);

struct EpsilonSearch {
    bool found = false;
    double eps = 0.0;
    double alpha_uniform = 0.0;
    double beta_uniform = 0.0;
    double rho = 0.0;
};

// Bisection on eps in [0, 1/2] (20 iterations) for the largest sampled eps
// such that every k in a sample of B_{e1}(eps) passes subellipticity with
// uniform alpha, beta and the comparison holds with rho >= target_rho.
EpsilonSearch find_epsilon(double R, double target_rho, int n_k, int n_samples,
                           std::uint64_t seed);

} // namespace ucl

#endif
