#ifndef UCL_GRID_HPP
#define UCL_GRID_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace ucl {

using cplx = std::complex<double>;

// Complex field sampled on [X0, X1] x (transverse torus of side Lperp)^{d-1}.
// The x1 grid includes both endpoints (spacing h1 = (X1-X0)/(n1-1)); the
// transverse grid is uniform periodic with nperp points per axis, which makes
// the discrete Fourier transform in x' exact for band-limited data.
struct GridField {
    int d = 3;
    int n1 = 0;
    int nperp = 0;
    double X0 = -1.0, X1 = 1.0;
    double Lperp = 2.0;
    std::vector<cplx> v;  // row-major: i1 slowest, then transverse axes

    double h1() const { return (X1 - X0) / double(n1 - 1); }
    double hperp() const { return Lperp / double(nperp); }
    double x1_at(int i1) const { return X0 + h1() * i1; }
    std::size_t nt() const;  // nperp^{d-1}
    std::size_t size() const { return std::size_t(n1) * nt(); }
    std::size_t idx(int i1, std::size_t it) const { return std::size_t(i1) * nt() + it; }

    bool compatible(const GridField& o) const;
};

GridField make_field(int d, int n1, int nperp, double X0, double X1, double Lperp);

// In-place arithmetic helpers used all over the operator code.
void axpy(GridField& y, cplx a, const GridField& x);  // y += a x
void scale(GridField& f, cplx a);

// Forward/backward DFT over the transverse axes, slice by slice in x1.
// to_modes is unnormalized (FFTW convention); from_modes divides by nperp^{d-1}
// so the pair is an exact inverse.
GridField to_modes(const GridField& f);
GridField from_modes(const GridField& fhat);

// Angular frequency of transverse index m on an axis.
double mode_frequency(int m, int nperp, double Lperp);
// Unpacks the flat transverse index into the frequency vector xi' (d-1 comps).
void mode_xi(const GridField& f, std::size_t it, std::vector<double>& xi);

// Cell-volume-weighted L^p norm (p = inf gives the max).  The x1 endpoints get
// trapezoid half-weights.
double lp_norm(const GridField& f, double p);
// Same restricted to a voxel mask (mask.size() == f.size(), nonzero = in).
double lp_norm_masked(const GridField& f, double p, const std::vector<char>& mask);

// Checks that the field vanishes on a margin of `cells` grid cells at every
// face of the fundamental box (x1 faces and transverse faces).
bool check_margin(const GridField& f, int cells);

// Gradient: centered differences in x1 (one-sided at the endpoints), spectral
// differentiation in x'.  Returns d components.
std::vector<GridField> gradient(const GridField& f);

// Spectral transverse divergence of the last d-1 components of F.
GridField div_perp(const std::vector<GridField>& Fperp);

} // namespace ucl

#endif
