#include "ucl/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace ucl {

namespace {

// Product integration on one cell of width h against e^{-c t}, t in [0, h]:
// the density is interpolated by the quadratic through three neighboring
// nodes and integrated exactly via the moments M_k = int_0^h t^k e^{-c t} dt.
// T = e^{-c h} is the transition factor for values carried across the cell.
struct CellMoments {
    double T, M0, M1, M2;

    CellMoments(double c, double h) {
        const double z = c * h;
        T = std::exp(-z);
        if (std::fabs(z) < 1e-3) {
            // series in z; truncation after z^4 is far below roundoff here
            M0 = h * (1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0
                      + z * z * z * z / 120.0);
            M1 = h * h * (0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0
                          + z * z * z * z / 144.0);
            M2 = h * h * h * (1.0 / 3.0 - z / 4.0 + z * z / 10.0
                              - z * z * z / 36.0 + z * z * z * z / 168.0);
        } else {
            M0 = (1.0 - T) / c;
            M1 = (M0 - h * T) / c;
            M2 = (2.0 * M1 - h * h * T) / c;
        }
    }
};

// Weights for the quadratic through nodes t = 0, h, 2h (forward-facing cell).
struct CellW {
    double T, A0, A1, A2;
};

CellW cell_weights(double c, double h) {
    const CellMoments m(c, h);
    CellW w;
    w.T = m.T;
    const double h2 = h * h;
    w.A0 = (m.M2 - 3.0 * h * m.M1 + 2.0 * h2 * m.M0) / (2.0 * h2);
    w.A1 = -(m.M2 - 2.0 * h * m.M1) / h2;
    w.A2 = (m.M2 - h * m.M1) / (2.0 * h2);
    return w;
}

// Weights for the quadratic through nodes t = -h, 0, h (boundary cell, where
// no third node exists past the far end).
struct CellWB {
    double T, Am1, A0, A1;
};

CellWB cell_weights_onesided(double c, double h) {
    const CellMoments m(c, h);
    CellWB w;
    w.T = m.T;
    const double h2 = h * h;
    w.Am1 = (m.M2 - h * m.M1) / (2.0 * h2);
    w.A0 = (h2 * m.M0 - m.M2) / h2;
    w.A1 = (m.M2 + h * m.M1) / (2.0 * h2);
    return w;
}

// Per-mode tabulation shared by all kernel applications.
struct Mode1D {
    const PsiProfile* p;
    double tau, X0, h;
    int n;
    std::vector<double> psi_n;   // nodal psi
    std::vector<double> psi_m;   // midpoint psi
    std::vector<double> dpsi_n;  // nodal d psi / dx1
    std::vector<double> gt;      // running integral int_{X0}^{x} e^{-2(Phi(x)-Phi(s))} ds
    int istar;                   // first node with psi <= tau

    Mode1D(const PsiProfile& prof, double tau_, double X0_, double h_, int n_)
        : p(&prof), tau(tau_), X0(X0_), h(h_), n(n_) {
        psi_n.resize(n);
        dpsi_n.resize(n);
        psi_m.resize(n - 1);
        for (int i = 0; i < n; ++i) {
            const double x = X0 + h * i;
            psi_n[i] = p->psi(x);
            dpsi_n[i] = p->dpsi(x);
        }
        for (int i = 0; i + 1 < n; ++i) psi_m[i] = p->psi(X0 + h * (i + 0.5));
        istar = n;
        for (int i = 0; i < n; ++i) {
            if (psi_n[i] <= tau) {
                istar = i;
                break;
            }
        }
        gt.assign(n, 0.0);
        for (int i = 1; i < n; ++i) {
            const double ps = psi_m[i - 1];
            const double T2 = std::exp(-2.0 * ps * h);
            const double q = (2.0 * ps * h < 1e-6) ? h : (1.0 - T2) / (2.0 * ps);
            gt[i] = T2 * gt[i - 1] + q;
        }
    }

    // (S_c g)(x_i) for i >= i_lo, with c given at cell midpoints.  The cell
    // density is the quadratic through g[i], g[i+1], g[i+2] (one-sided at
    // the last cell).
    std::vector<cplx> seq_S(const std::vector<double>& c_mid,
                            const std::vector<cplx>& g, int i_lo) const {
        std::vector<cplx> out(n, cplx(0.0));
        for (int i = n - 2; i >= i_lo; --i) {
            cplx cell;
            double T;
            if (i + 2 < n) {
                const CellW w = cell_weights(c_mid[i], h);
                T = w.T;
                cell = w.A0 * g[i] + w.A1 * g[i + 1] + w.A2 * g[i + 2];
            } else {
                const CellWB w = cell_weights_onesided(c_mid[i], h);
                T = w.T;
                cell = w.Am1 * g[i - 1] + w.A0 * g[i] + w.A1 * g[i + 1];
            }
            out[i] = T * out[i + 1] + cell;
        }
        return out;
    }

    // (P_c g)(x_i) for i <= i_hi; density quadratic through g[i], g[i-1],
    // g[i-2] (one-sided at the first cell).
    std::vector<cplx> seq_P(const std::vector<double>& c_mid,
                            const std::vector<cplx>& g, int i_hi) const {
        std::vector<cplx> out(n, cplx(0.0));
        for (int i = 1; i <= i_hi && i < n; ++i) {
            cplx cell;
            double T;
            if (i >= 2) {
                const CellW w = cell_weights(c_mid[i - 1], h);
                T = w.T;
                cell = w.A0 * g[i] + w.A1 * g[i - 1] + w.A2 * g[i - 2];
            } else {
                const CellWB w = cell_weights_onesided(c_mid[i - 1], h);
                T = w.T;
                cell = w.Am1 * g[i + 1] + w.A0 * g[i] + w.A1 * g[i - 1];
            }
            out[i] = T * out[i - 1] + cell;
        }
        return out;
    }

    std::vector<double> cmid_plus() const {  // tau + psi
        std::vector<double> c(n - 1);
        for (int i = 0; i + 1 < n; ++i) c[i] = tau + psi_m[i];
        return c;
    }
    std::vector<double> cmid_minus() const {  // tau - psi
        std::vector<double> c(n - 1);
        for (int i = 0; i + 1 < n; ++i) c[i] = tau - psi_m[i];
        return c;
    }
    std::vector<double> cmid_neg() const {  // psi - tau
        std::vector<double> c(n - 1);
        for (int i = 0; i + 1 < n; ++i) c[i] = psi_m[i] - tau;
        return c;
    }

    std::vector<cplx> k0(const std::vector<cplx>& g) const {
        const auto u = seq_S(cmid_plus(), g, 0);
        const auto v = seq_S(cmid_minus(), u, istar);
        std::vector<cplx> out(n);
        if (istar > 0) {
            std::vector<cplx> gg(n);
            for (int i = 0; i < n; ++i) gg[i] = gt[i] * g[i];
            const auto w1 = seq_P(cmid_neg(), gg, istar - 1);
            for (int i = 0; i < istar; ++i) out[i] = -(w1[i] + gt[i] * u[i]);
        }
        for (int i = istar; i < n; ++i) out[i] = v[i];
        return out;
    }

    std::vector<cplx> k1(const std::vector<cplx>& g) const {
        std::vector<cplx> mg(n);
        for (int i = 0; i < n; ++i) mg[i] = (tau + psi_n[i]) * g[i];
        std::vector<cplx> out = k0(mg);
        const auto a = seq_S(cmid_minus(), g, istar);
        for (int i = istar; i < n; ++i) out[i] -= a[i];
        if (istar > 0) {
            const auto b = seq_P(cmid_neg(), g, istar - 1);
            for (int i = 0; i < istar; ++i) out[i] += b[i];
        }
        return out;
    }

    std::vector<cplx> r(const std::vector<cplx>& g) const {
        std::vector<cplx> mg(n);
        for (int i = 0; i < n; ++i) mg[i] = dpsi_n[i] * g[i];
        return k0(mg);
    }

    std::vector<cplx> k0t(const std::vector<cplx>& g) const {
        std::vector<cplx> d1g(n, cplx(0.0)), d2g(n, cplx(0.0));
        for (int i = 0; i < n; ++i) (i < istar ? d1g[i] : d2g[i]) = g[i];
        std::vector<cplx> out(n, cplx(0.0));
        if (istar > 0) {
            const auto s1 = seq_S(cmid_neg(), d1g, 0);
            std::vector<cplx> gg(n);
            for (int i = 0; i < n; ++i) gg[i] = gt[i] * d1g[i];
            const auto p1 = seq_P(cmid_plus(), gg, n - 1);
            for (int i = 0; i < n; ++i) out[i] = -(gt[i] * s1[i] + p1[i]);
        }
        if (istar < n) {
            const auto inner = seq_P(cmid_minus(), d2g, n - 1);
            const auto p2 = seq_P(cmid_plus(), inner, n - 1);
            for (int i = 0; i < n; ++i) out[i] += p2[i];
        }
        return out;
    }

    std::vector<cplx> k1t(const std::vector<cplx>& g) const {
        std::vector<cplx> d1g(n, cplx(0.0)), d2g(n, cplx(0.0));
        for (int i = 0; i < n; ++i) (i < istar ? d1g[i] : d2g[i]) = g[i];
        const auto base = k0t(g);
        std::vector<cplx> out(n);
        for (int i = 0; i < n; ++i) out[i] = (tau + psi_n[i]) * base[i];
        const auto q1 = seq_P(cmid_minus(), d2g, n - 1);
        const auto q2 = seq_S(cmid_neg(), d1g, 0);
        for (int i = 0; i < n; ++i) out[i] += q2[i] - q1[i];
        return out;
    }

    std::vector<cplx> rt(const std::vector<cplx>& g) const {
        const auto base = k0t(g);
        std::vector<cplx> out(n);
        for (int i = 0; i < n; ++i) out[i] = dpsi_n[i] * base[i];
        return out;
    }
};

} // namespace

std::vector<cplx> apply_mode_dense(const PsiProfile& p, double tau, KernelSelector sel,
                                   bool transpose, double X0, double h, int n1,
                                   const std::vector<cplx>& g) {
    double (*kf)(const PsiProfile&, double, double, double, double) = nullptr;
    switch (sel) {
        case KernelSelector::k0: kf = kernel_k0; break;
        case KernelSelector::k1: kf = kernel_k1; break;
        case KernelSelector::r: kf = kernel_r; break;
        default: throw std::invalid_argument("apply_mode_dense: unsupported selector");
    }
    // Per-cell two-point Gauss quadrature with linear interpolation of g.
    // Gauss points sit strictly inside each cell, so the one-sided branch
    // indicators of the kernels (which jump across y = x) are sampled
    // unambiguously; nodal trapezoid would lose an order at the diagonal.
    const double gl = 0.5 / std::sqrt(3.0);
    std::vector<cplx> out(n1, cplx(0.0));
    for (int i = 0; i < n1; ++i) {
        const double xi = X0 + h * i;
        cplx acc(0.0);
        for (int j = 0; j + 1 < n1; ++j) {
            const double ym = X0 + h * (j + 0.5);
            for (double t : {-gl, gl}) {
                const double y = ym + t * h;
                const double frac = (j + 0.5 + t);
                const int jl = j;
                const double wr = frac - jl;
                const cplx gv = (1.0 - wr) * g[jl] + wr * g[jl + 1];
                const double k = transpose ? kf(p, tau, y, xi, X0) : kf(p, tau, xi, y, X0);
                acc += 0.5 * h * k * gv;
            }
        }
        out[i] = acc;
    }
    return out;
}

std::vector<cplx> apply_mode(const PsiProfile& p, double tau, KernelSelector sel,
                             bool transpose, double X0, double h, int n1,
                             const std::vector<cplx>& g) {
    if ((int)g.size() != n1) throw std::invalid_argument("apply_mode: size mismatch");
    // the quadratic cell rule needs three nodes; tiny grids go dense
    if (p.B < 0.0 || n1 < 3)
        return apply_mode_dense(p, tau, sel, transpose, X0, h, n1, g);
    Mode1D m(p, tau, X0, h, n1);
    switch (sel) {
        case KernelSelector::k0: return transpose ? m.k0t(g) : m.k0(g);
        case KernelSelector::k1: return transpose ? m.k1t(g) : m.k1(g);
        case KernelSelector::r: return transpose ? m.rt(g) : m.r(g);
        default: throw std::invalid_argument("apply_mode: unsupported selector");
    }
}

namespace {

// Applies a per-mode 1-D transform to every transverse mode of f.
template <typename Fn>
GridField per_mode(const GridField& f, Fn&& fn) {
    GridField fhat = to_modes(f);
    const std::size_t nt = f.nt();
    std::vector<double> xi;
    std::vector<cplx> g(f.n1), out;
    for (std::size_t it = 0; it < nt; ++it) {
        mode_xi(f, it, xi);
        for (int i1 = 0; i1 < f.n1; ++i1) g[i1] = fhat.v[fhat.idx(i1, it)];
        fn(xi, g, out);
        for (int i1 = 0; i1 < f.n1; ++i1) fhat.v[fhat.idx(i1, it)] = out[i1];
    }
    return from_modes(fhat);
}

} // namespace

GridField apply_K(const StripConfig& cfg, double tau, int j, const GridField& f) {
    if (j < 0 || j > cfg.d) throw std::invalid_argument("apply_K: j out of range");
    return per_mode(f, [&](const std::vector<double>& xi, const std::vector<cplx>& g,
                                std::vector<cplx>& out) {
        const PsiProfile p = make_psi_profile(cfg, xi);
        const KernelSelector sel = (j == 1) ? KernelSelector::k1 : KernelSelector::k0;
        out = apply_mode(p, tau, sel, false, f.X0, f.h1(), f.n1, g);
        if (j >= 2) {
            const cplx fac(0.0, xi[j - 2]);
            for (auto& z : out) z *= fac;
        }
    });
}

GridField apply_R(const StripConfig& cfg, double tau, const GridField& f) {
    return per_mode(f, [&](const std::vector<double>& xi, const std::vector<cplx>& g,
                                std::vector<cplx>& out) {
        const PsiProfile p = make_psi_profile(cfg, xi);
        out = apply_mode(p, tau, KernelSelector::r, false, f.X0, f.h1(), f.n1, g);
    });
}

GridField apply_Phf(const StripConfig& cfg, double tau, const GridField& f,
                    bool complement) {
    return per_mode(f, [&](const std::vector<double>& xi, const std::vector<cplx>& g,
                                std::vector<cplx>& out) {
        const PsiProfile p = make_psi_profile(cfg, xi);
        double m = eta_cutoff(p.psi(f.X1) / tau);
        if (complement) m = 1.0 - m;
        out = g;
        for (auto& z : out) z *= m;
    });
}

GridField apply_conjugated_operator(const StripConfig& cfg, double tau,
                                    const GridField& w) {
    const double h = w.h1();
    return per_mode(w, [&](const std::vector<double>& xi, const std::vector<cplx>& g,
                                std::vector<cplx>& out) {
        const PsiProfile p = make_psi_profile(cfg, xi);
        const int n = w.n1;
        out.assign(n, cplx(0.0));
        for (int i = 0; i < n; ++i) {
            const cplx gm2 = (i > 1) ? g[i - 2] : cplx(0.0);
            const cplx gm = (i > 0) ? g[i - 1] : cplx(0.0);
            const cplx gp = (i + 1 < n) ? g[i + 1] : cplx(0.0);
            const cplx gp2 = (i + 2 < n) ? g[i + 2] : cplx(0.0);
            const double x = w.X0 + h * i;
            const cplx d2 = (-gp2 + 16.0 * gp - 30.0 * g[i] + 16.0 * gm - gm2)
                / (12.0 * h * h);
            const cplx d1 = (-gp2 + 8.0 * gp - 8.0 * gm + gm2) / (12.0 * h);
            out[i] = d2 - p.psi2(x) * g[i] - 2.0 * tau * d1 + tau * tau * g[i];
        }
    });
}

ResidualReport parametrix_residual(const StripConfig& cfg, double tau,
                                   const GridField& w) {
    ResidualReport rep;
    rep.wnorm = lp_norm(w, 2.0);
    if (rep.wnorm == 0.0) return rep;
    const GridField f = apply_conjugated_operator(cfg, tau, w);
    GridField rec = apply_K(cfg, tau, 0, f);
    const GridField rw = apply_R(cfg, tau, w);
    axpy(rec, cplx(1.0), rw);
    GridField diff = w;
    axpy(diff, cplx(-1.0), rec);
    rep.residual = lp_norm(diff, 2.0) / rep.wnorm;
    return rep;
}

GridField assemble_parametrix(const StripConfig& cfg, double tau,
                              const SourceBundle& src, const GridField& w_feedback) {
    const GridField& ref = src.f2;
    // low-frequency transverse divergence folded into the zeroth-order source
    std::vector<GridField> Flo;
    for (int a = 1; a < ref.d; ++a)
        Flo.push_back(apply_Phf(cfg, tau, src.F2star[a], true));
    GridField s0 = src.f2;
    axpy(s0, cplx(1.0), src.f2star);
    GridField dlo = div_perp(Flo);
    axpy(s0, cplx(1.0), dlo);
    GridField out = apply_K(cfg, tau, 0, s0);

    // e1 component: high-frequency part and low-frequency part both through k1
    GridField e1_hi = src.F2[0];
    GridField phf1 = apply_Phf(cfg, tau, src.F2star[0], false);
    axpy(e1_hi, cplx(1.0), phf1);
    GridField t1 = apply_K(cfg, tau, 1, e1_hi);
    axpy(out, cplx(1.0), t1);
    GridField e1_lo = apply_Phf(cfg, tau, src.F2star[0], true);
    GridField t1lo = apply_K(cfg, tau, 1, e1_lo);
    axpy(out, cplx(1.0), t1lo);

    for (int j = 2; j <= cfg.d; ++j) {
        GridField comp = src.F2[j - 1];
        GridField phfj = apply_Phf(cfg, tau, src.F2star[j - 1], false);
        axpy(comp, cplx(1.0), phfj);
        GridField tj = apply_K(cfg, tau, j, comp);
        axpy(out, cplx(1.0), tj);
    }

    GridField rw = apply_R(cfg, tau, w_feedback);
    axpy(out, cplx(1.0), rw);
    return out;
}

} // namespace ucl
