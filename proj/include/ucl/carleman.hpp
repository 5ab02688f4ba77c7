#ifndef UCL_CARLEMAN_HPP
#define UCL_CARLEMAN_HPP

#include <string>
#include <vector>

#include "ucl/grid.hpp"
#include "ucl/operators.hpp"
#include "ucl/strip_geometry.hpp"
#include "ucl/weights.hpp"

namespace ucl {

// Transverse coordinate convention shared by the verdict modules: axis a of
// index ia sits at -Lperp/2 + ia * hperp (the torus cell centered at 0).
double perp_coord(const GridField& f, int ia);
void field_point(const GridField& f, int i1, std::size_t it, std::vector<double>& x);

struct NamedTerm {
    std::string name;
    double value = 0.0;
};

struct CarlemanCase {
    StripConfig cfg;
    GridField w;
    SourceBundle src;
    double tau = 8.0;
    std::vector<char> E;  // optional voxel mask on w's grid (empty = no E part)
    // relative consistency tolerance between the declared sources and the
    // recomputed operator action, quoted at n1 = 128 and scaled with h^2
    double consistency_tol = 1e-3;
};

struct CarlemanVerdict {
    std::vector<NamedTerm> lhs_terms, rhs_terms;
    double lhs = 0.0, rhs = 0.0, ratio = 0.0;     // the L^2-level inequality
    double lhs_E = 0.0, rhs_E = 0.0, ratio_E = 0.0;  // the L^{2d/(d-2)}-level one
    bool has_E_side = false;
    double tau = 0.0;
    bool consistent = false;
    double consistency_rel = 0.0;
    bool pass = false;  // max ratio <= C_pass and the case was consistent
};

// Evaluates both sides of the two strip inequalities for a compactly
// supported w solving the conjugated equation with the declared sources.
// Throws on an empty field; returns consistent = false (and pass = false)
// when the recomputed operator action disagrees with the sources.
CarlemanVerdict strip_carleman_check(const CarlemanCase& c, double C_pass = 1e6);

// Weighted verdict on the cap geometry: u compactly supported in the domain
// mask, weight phi_k = k1 x1^2 + k'.x', |k| in the role of the large
// parameter, observation term ||e^phi u||_{H1(omega)} on the right-hand side.
struct WeightedCase {
    GridField u;
    SourceBundle src;       // sources of Delta u = f2 + f2star + div(F2 + F2star)
    WeightVector k;
    std::vector<char> domain_mask;
    std::vector<char> omega_mask;
    std::vector<char> E;    // optional
    double consistency_tol = 1e-3;
};

CarlemanVerdict weighted_carleman_check(const WeightedCase& c, double C_pass = 1e6);

// Radial cutoff profile: 1 on [0, 1/2], 0 on [1, inf), quintic in between.
double eta_ball(double r);
double eta_ball_d1(double r);
double eta_ball_d2(double r);

// General conjugated operator Delta w - 2 tau grad(phi).grad(w)
// + tau^2 |grad phi|^2 w (finite differences in x1, spectral in x').
GridField apply_weight_conjugated(const GridField& w, const WeightOracle& phi,
                                  double tau);

// Laplacian and full divergence on grid fields (FD in x1 with ghost zeros,
// spectral in the transverse axes); valid for fields with support margins.
GridField laplacian(const GridField& f);
GridField full_divergence(const std::vector<GridField>& F);

// L2 norm of a vector field (pointwise Euclidean magnitude).
double vec_lp_norm(const std::vector<GridField>& F, double p);
double vec_lp_norm_masked(const std::vector<GridField>& F, double p,
                          const std::vector<char>& mask);

// H1 norm restricted to a voxel mask, with one-sided differences at mask
// boundaries on every axis.
double h1_norm_masked(const GridField& f, const std::vector<char>& mask);

struct LocalizedCase {
    GridField w_x0;
    SourceBundle src;
    std::vector<char> ball_mask;  // voxels within tau^{-1/3} of x0
    double tau = 0.0;
    bool support_ok = false;  // supp w_x0 inside the ball mask
};

// Builds the cutoff localization w_x0 = eta(tau^{1/3}(x - x0)) w together with
// its exact source terms
//   f2_x0    = eta f2~ - grad(eta).F2~ + tau Lap(phi) w_x0
//              + 2 grad(eta).grad(w) + Lap(eta) w - 2 tau grad(phi).grad(eta) w
//   f2*'_x0  = eta f2*'~ - grad(eta).F2*'~
//   F_x0     = eta F~   (componentwise, both integrability classes)
// where the tilded sources drive the conjugated equation for w.
LocalizedCase localized_cutoff_case(const GridField& w, const WeightOracle& phi,
                                    const SourceBundle& tilde_src,
                                    const std::vector<double>& x0, double tau);

} // namespace ucl

#endif
