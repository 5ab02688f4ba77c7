#ifndef UCL_OPERATORS_HPP
#define UCL_OPERATORS_HPP

#include <vector>

#include "ucl/grid.hpp"
#include "ucl/kernels.hpp"
#include "ucl/strip_geometry.hpp"

namespace ucl {

// One-dimensional action of a kernel on a single transverse mode: given the
// symbol profile and samples g of a function on the uniform x1 grid
// (x_i = X0 + i h, i < n1), returns the integral transform sampled on the same
// grid.  sel picks k0, k1 or r; transpose applies the transposed kernel.
//
// The fast path exploits the first-order structure of the kernels: they are
// products and compositions of one-sided exponential smoothing operators
//   (S_c g)(x) = int_{y>x} e^{-int_x^y c} g(y) dy,
//   (P_c g)(x) = int_{y<x} e^{-int_y^x c} g(y) dy,
// evaluated by a two-term recurrence with exact product integration of a
// piecewise-quadratic density against the local exponential.  Cost O(n1) per
// mode; recurrences are arranged so every per-cell transition factor is <= 1
// on the index range actually used (no overflow for large tau or lambda).
// Profiles with B < 0 (psi increasing, outside the pseudoconvex regime) fall
// back to the dense quadrature path.
std::vector<cplx> apply_mode(const PsiProfile& p, double tau, KernelSelector sel,
                             bool transpose, double X0, double h, int n1,
                             const std::vector<cplx>& g);

// Dense reference path: tabulates the kernel at node pairs with eval-style
// pointwise formulas and integrates by trapezoid weights.  O(n1^2) kernel
// evaluations, each with an inner adaptive quadrature; used as an oracle.
std::vector<cplx> apply_mode_dense(const PsiProfile& p, double tau, KernelSelector sel,
                                   bool transpose, double X0, double h, int n1,
                                   const std::vector<cplx>& g);

struct SourceBundle {
    GridField f2;
    GridField f2star;
    std::vector<GridField> F2;      // d components
    std::vector<GridField> F2star;  // d components
};

// K_{tau,j}: Fourier transform in x', per-mode 1-D kernel integral, inverse
// transform.  j = 0 applies k0; j = 1 applies k1; j >= 2 applies i xi_j k0.
GridField apply_K(const StripConfig& cfg, double tau, int j, const GridField& f);

// R_tau: k0 composed with multiplication by d(psi)/dx1 at the source point.
GridField apply_R(const StripConfig& cfg, double tau, const GridField& f);

// High-frequency projector: multiplies mode xi' by eta(psi(X1,xi')/tau).
// complement = true applies I - P_hf instead.
GridField apply_Phf(const StripConfig& cfg, double tau, const GridField& f,
                    bool complement = false);

// Conjugated operator: per transverse mode,
//   d^2/dx1^2 - psi(x1,xi')^2 - 2 tau d/dx1 + tau^2,
// with fourth-order centered differences in x1 (ghost zeros outside, valid
// for fields with support margins).
GridField apply_conjugated_operator(const StripConfig& cfg, double tau,
                                    const GridField& w);

struct ResidualReport {
    double residual = 0.0;  // ||w - K0(Lw) - Rw||_2 / ||w||_2
    double wnorm = 0.0;
};

ResidualReport parametrix_residual(const StripConfig& cfg, double tau,
                                   const GridField& w);

// Right-hand side of the refined parametrix identity: the transverse part of
// F2star is split by the projector, its low-frequency divergence is folded
// into the k0 source, and the e1 component goes through k1 in both bands.
GridField assemble_parametrix(const StripConfig& cfg, double tau,
                              const SourceBundle& src, const GridField& w_feedback);

} // namespace ucl

#endif
