#include "ucl/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ucl {

double perp_coord(const GridField& f, int ia) {
    return -0.5 * f.Lperp + ia * f.hperp();
}

void field_point(const GridField& f, int i1, std::size_t it, std::vector<double>& x) {
    x.assign(f.d, 0.0);
    x[0] = f.x1_at(i1);
    for (int a = f.d - 2; a >= 0; --a) {
        x[a + 1] = perp_coord(f, int(it % f.nperp));
        it /= f.nperp;
    }
}

namespace {

// quintic smoothstep and its derivatives on [0,1]
double ss(double t) { return t * t * t * (t * (6.0 * t - 15.0) + 10.0); }
double ss1(double t) { return 30.0 * t * t * (t - 1.0) * (t - 1.0); }
double ss2(double t) { return 60.0 * t * (2.0 * t - 1.0) * (t - 1.0); }

}  // namespace

double eta_ball(double r) {
    if (r <= 0.5) return 1.0;
    if (r >= 1.0) return 0.0;
    return 1.0 - ss(2.0 * r - 1.0);
}

double eta_ball_d1(double r) {
    if (r <= 0.5 || r >= 1.0) return 0.0;
    return -2.0 * ss1(2.0 * r - 1.0);
}

double eta_ball_d2(double r) {
    if (r <= 0.5 || r >= 1.0) return 0.0;
    return -4.0 * ss2(2.0 * r - 1.0);
}

GridField laplacian(const GridField& f) {
    // x1 part: centered second difference with ghost zeros
    GridField out = f;
    const double h = f.h1();
    const std::size_t nt = f.nt();
    for (int i1 = 0; i1 < f.n1; ++i1) {
        for (std::size_t it = 0; it < nt; ++it) {
            const cplx c = f.v[f.idx(i1, it)];
            const cplx p = (i1 + 1 < f.n1) ? f.v[f.idx(i1 + 1, it)] : cplx(0.0);
            const cplx m = (i1 > 0) ? f.v[f.idx(i1 - 1, it)] : cplx(0.0);
            out.v[out.idx(i1, it)] = (p - 2.0 * c + m) / (h * h);
        }
    }
    // transverse part: spectral -|xi|^2
    GridField hat = to_modes(f);
    std::vector<double> xi;
    for (int i1 = 0; i1 < f.n1; ++i1)
        for (std::size_t it = 0; it < nt; ++it) {
            mode_xi(hat, it, xi);
            double s = 0.0;
            for (double z : xi) s += z * z;
            hat.v[hat.idx(i1, it)] *= -s;
        }
    GridField perp = from_modes(hat);
    axpy(out, 1.0, perp);
    return out;
}

GridField full_divergence(const std::vector<GridField>& F) {
    if (F.empty()) throw std::invalid_argument("full_divergence: empty field list");
    const GridField& f0 = F[0];
    GridField out = f0;
    const double h = f0.h1();
    const std::size_t nt = f0.nt();
    for (int i1 = 0; i1 < f0.n1; ++i1)
        for (std::size_t it = 0; it < nt; ++it) {
            const cplx p = (i1 + 1 < f0.n1) ? f0.v[f0.idx(i1 + 1, it)] : cplx(0.0);
            const cplx m = (i1 > 0) ? f0.v[f0.idx(i1 - 1, it)] : cplx(0.0);
            out.v[out.idx(i1, it)] = (p - m) / (2.0 * h);
        }
    if ((int)F.size() > 1) {
        std::vector<GridField> perp(F.begin() + 1, F.end());
        axpy(out, 1.0, div_perp(perp));
    }
    return out;
}

namespace {

GridField magnitude_field(const std::vector<GridField>& F) {
    GridField m = F[0];
    for (std::size_t i = 0; i < m.v.size(); ++i) {
        double s = 0.0;
        for (const auto& c : F) s += std::norm(c.v[i]);
        m.v[i] = std::sqrt(s);
    }
    return m;
}

}  // namespace

double vec_lp_norm(const std::vector<GridField>& F, double p) {
    return lp_norm(magnitude_field(F), p);
}

double vec_lp_norm_masked(const std::vector<GridField>& F, double p,
                          const std::vector<char>& mask) {
    return lp_norm_masked(magnitude_field(F), p, mask);
}

double h1_norm_masked(const GridField& f, const std::vector<char>& mask) {
    if (mask.size() != f.v.size())
        throw std::invalid_argument("h1_norm_masked: mask size mismatch");
    const std::size_t nt = f.nt();
    const double h1 = f.h1(), hp = f.hperp();

    // transverse strides for each axis (axis 0 fastest-varying is the last one)
    std::vector<std::size_t> stride(f.d - 1);
    std::size_t s = 1;
    for (int a = f.d - 2; a >= 0; --a) {
        stride[a] = s;
        s *= f.nperp;
    }

    auto inm = [&](std::size_t idx) { return mask[idx] != 0; };
    auto diff = [&](cplx cm, cplx cc, cplx cp, bool hm, bool hp_ok, double hh) {
        if (hm && hp_ok) return (cp - cm) / (2.0 * hh);
        if (hp_ok) return (cp - cc) / hh;
        if (hm) return (cc - cm) / hh;
        return cplx(0.0);
    };

    double acc = 0.0;
    for (int i1 = 0; i1 < f.n1; ++i1) {
        const double w1 = (i1 == 0 || i1 == f.n1 - 1) ? 0.5 : 1.0;
        for (std::size_t it = 0; it < nt; ++it) {
            const std::size_t id = f.idx(i1, it);
            if (!inm(id)) continue;
            const cplx cc = f.v[id];
            double g2 = std::norm(cc);
            // x1 axis
            {
                const bool hm = i1 > 0 && inm(f.idx(i1 - 1, it));
                const bool hpk = i1 + 1 < f.n1 && inm(f.idx(i1 + 1, it));
                const cplx cm = hm ? f.v[f.idx(i1 - 1, it)] : cplx(0.0);
                const cplx cp = hpk ? f.v[f.idx(i1 + 1, it)] : cplx(0.0);
                g2 += std::norm(diff(cm, cc, cp, hm, hpk, h1));
            }
            // transverse axes (periodic index, mask decides availability)
            for (int a = 0; a < f.d - 1; ++a) {
                const std::size_t st = stride[a];
                const int pos = int((it / st) % f.nperp);
                const std::size_t base = it - std::size_t(pos) * st;
                const std::size_t itp = base + std::size_t((pos + 1) % f.nperp) * st;
                const std::size_t itm =
                    base + std::size_t((pos + f.nperp - 1) % f.nperp) * st;
                const bool hm = inm(f.idx(i1, itm));
                const bool hpk = inm(f.idx(i1, itp));
                const cplx cm = hm ? f.v[f.idx(i1, itm)] : cplx(0.0);
                const cplx cp = hpk ? f.v[f.idx(i1, itp)] : cplx(0.0);
                g2 += std::norm(diff(cm, cc, cp, hm, hpk, hp));
            }
            acc += w1 * g2;
        }
    }
    double cell = h1;
    for (int a = 0; a < f.d - 1; ++a) cell *= hp;
    return std::sqrt(acc * cell);
}

namespace {

std::vector<GridField> sum_components(const std::vector<GridField>& A,
                                      const std::vector<GridField>& B) {
    std::vector<GridField> out = A;
    for (std::size_t c = 0; c < out.size(); ++c) axpy(out[c], 1.0, B[c]);
    return out;
}

double scaled_tol(double tol, const GridField& f) {
    const double h_ref = (f.X1 - f.X0) / 127.0;
    const double r = f.h1() / h_ref;
    return tol * std::max(1.0, r * r);
}

double mask_volume(const GridField& f, const std::vector<char>& mask) {
    double cell = f.h1();
    for (int a = 0; a < f.d - 1; ++a) cell *= f.hperp();
    std::size_t cnt = 0;
    for (char c : mask)
        if (c) ++cnt;
    return cell * double(cnt);
}

}  // namespace

CarlemanVerdict strip_carleman_check(const CarlemanCase& c, double C_pass) {
    if (c.w.v.empty()) throw std::invalid_argument("strip_carleman_check: empty field");
    if ((int)c.src.F2.size() != c.cfg.d || (int)c.src.F2star.size() != c.cfg.d)
        throw std::invalid_argument("strip_carleman_check: need d vector components");

    CarlemanVerdict v;
    v.tau = c.tau;
    const int d = c.cfg.d;
    const double tau = c.tau;
    const double p2s = 2.0 * d / double(d - 2);
    const double p2sp = 2.0 * d / double(d + 2);

    const double wnorm = lp_norm(c.w, 2.0);
    if (wnorm == 0.0) {
        v.consistent = true;
        v.pass = true;
        return v;
    }

    // consistency: recompute the conjugated-operator action and compare
    GridField Lw = apply_conjugated_operator(c.cfg, tau, c.w);
    GridField declared = c.src.f2;
    axpy(declared, 1.0, c.src.f2star);
    axpy(declared, 1.0, full_divergence(sum_components(c.src.F2, c.src.F2star)));
    GridField diff = Lw;
    axpy(diff, -1.0, declared);
    const double lwn = lp_norm(Lw, 2.0);
    v.consistency_rel = (lwn > 0.0) ? lp_norm(diff, 2.0) / lwn : lp_norm(diff, 2.0);
    v.consistent = v.consistency_rel <= scaled_tol(c.consistency_tol, c.w);

    const auto grad = gradient(c.w);
    const double gradnorm = vec_lp_norm(grad, 2.0);
    const double f2n = lp_norm(c.src.f2, 2.0);
    const double F2n = vec_lp_norm(c.src.F2, 2.0);
    const double f2sn = lp_norm(c.src.f2star, p2sp);
    const double F2sn = vec_lp_norm(c.src.F2star, p2sp);
    const double F2s2n = vec_lp_norm(c.src.F2star, 2.0);

    v.lhs_terms = {{"tau^{3/2} |w|_2", std::pow(tau, 1.5) * wnorm},
                   {"tau^{1/2} |grad w|_2", std::sqrt(tau) * gradnorm}};
    const double e1 = 0.75 - 0.5 / d;
    v.rhs_terms = {{"|f2|_2", f2n},
                   {"tau |F2|_2", tau * F2n},
                   {"tau^{3/4-1/2d} |f2*'|_{2*'}", std::pow(tau, e1) * f2sn},
                   {"tau^{7/4-1/2d} |F2*'|_{2*'}", std::pow(tau, e1 + 1.0) * F2sn},
                   {"tau^{1/2} |F2*'|_2", std::sqrt(tau) * F2s2n}};
    for (const auto& t : v.lhs_terms) v.lhs += t.value;
    for (const auto& t : v.rhs_terms) v.rhs += t.value;
    v.ratio = (v.rhs > 0.0) ? v.lhs / v.rhs : 0.0;

    // the L^{2d/(d-2)} level with the optional localized E term
    const double e2 = 0.75 + 0.5 / d;
    v.lhs_E = std::pow(tau, e2) * lp_norm(c.w, p2s);
    if (!c.E.empty()) {
        v.has_E_side = true;
        const double Evol = mask_volume(c.w, c.E);
        const double mfac = std::min(1.0 / (tau * std::pow(Evol, 1.0 / d)), 1.0);
        v.lhs_E += std::pow(tau, e2) * mfac *
                   (tau * lp_norm_masked(c.w, 2.0, c.E) +
                    vec_lp_norm_masked(grad, 2.0, c.E));
    }
    v.rhs_E = f2n + tau * F2n + std::pow(tau, e2) * (f2sn + tau * F2sn) +
              std::pow(tau, e2) * F2s2n;
    v.ratio_E = (v.rhs_E > 0.0) ? v.lhs_E / v.rhs_E : 0.0;

    v.pass = v.consistent && v.ratio <= C_pass && v.ratio_E <= C_pass;
    return v;
}

CarlemanVerdict weighted_carleman_check(const WeightedCase& c, double C_pass) {
    if (c.u.v.empty()) throw std::invalid_argument("weighted_carleman_check: empty field");
    if (c.domain_mask.size() != c.u.v.size() || c.omega_mask.size() != c.u.v.size())
        throw std::invalid_argument("weighted_carleman_check: mask size mismatch");
    const int d = c.u.d;
    if (c.k.dim() != d) throw std::invalid_argument("weighted_carleman_check: bad k");

    CarlemanVerdict v;
    double kmag = 0.0;
    for (double z : c.k.k) kmag += z * z;
    kmag = std::sqrt(kmag);
    v.tau = kmag;

    const double unorm = lp_norm(c.u, 2.0);
    if (unorm == 0.0) {
        v.consistent = true;
        v.pass = true;
        return v;
    }

    // consistency: Delta u against the declared sources
    GridField Lu = laplacian(c.u);
    GridField declared = c.src.f2;
    axpy(declared, 1.0, c.src.f2star);
    axpy(declared, 1.0, full_divergence(sum_components(c.src.F2, c.src.F2star)));
    GridField diff = Lu;
    axpy(diff, -1.0, declared);
    const double lun = lp_norm(Lu, 2.0);
    v.consistency_rel = (lun > 0.0) ? lp_norm(diff, 2.0) / lun : lp_norm(diff, 2.0);
    v.consistent = v.consistency_rel <= scaled_tol(c.consistency_tol, c.u);

    // pointwise exponential weight
    GridField wexp = c.u;
    std::vector<double> x;
    for (int i1 = 0; i1 < c.u.n1; ++i1)
        for (std::size_t it = 0; it < c.u.nt(); ++it) {
            field_point(c.u, i1, it, x);
            wexp.v[wexp.idx(i1, it)] = std::exp(phi_eval(c.k, x));
        }
    auto weighted = [&](const GridField& f) {
        GridField g = f;
        for (std::size_t i = 0; i < g.v.size(); ++i) g.v[i] *= wexp.v[i];
        return g;
    };
    auto weighted_vec = [&](const std::vector<GridField>& F) {
        std::vector<GridField> out;
        out.reserve(F.size());
        for (const auto& f : F) out.push_back(weighted(f));
        return out;
    };

    const GridField wu = weighted(c.u);
    const auto wgrad = weighted_vec(gradient(c.u));
    const double p2s = 2.0 * d / double(d - 2);
    const double p2sp = 2.0 * d / double(d + 2);
    const double e1 = 0.75 - 0.5 / d;
    const double e2 = 0.75 + 0.5 / d;

    const double wun = lp_norm_masked(wu, 2.0, c.domain_mask);
    const double wgn = vec_lp_norm_masked(wgrad, 2.0, c.domain_mask);
    const double f2n = lp_norm_masked(weighted(c.src.f2), 2.0, c.domain_mask);
    const double F2n = vec_lp_norm_masked(weighted_vec(c.src.F2), 2.0, c.domain_mask);
    const double f2sn = lp_norm_masked(weighted(c.src.f2star), p2sp, c.domain_mask);
    const auto wF2s = weighted_vec(c.src.F2star);
    const double F2sn = vec_lp_norm_masked(wF2s, p2sp, c.domain_mask);
    const double F2s2n = vec_lp_norm_masked(wF2s, 2.0, c.domain_mask);
    const double obs = h1_norm_masked(wu, c.omega_mask);

    v.lhs_terms = {{"|k|^{3/2} |e^phi u|_2", std::pow(kmag, 1.5) * wun},
                   {"|k|^{1/2} |e^phi grad u|_2", std::sqrt(kmag) * wgn}};
    v.rhs_terms = {{"|e^phi f2|_2", f2n},
                   {"|k| |e^phi F2|_2", kmag * F2n},
                   {"|k|^{1/2} |e^phi F2*'|_2", std::sqrt(kmag) * F2s2n},
                   {"|k|^{3/4-1/2d} |e^phi f2*'|_{2*'}", std::pow(kmag, e1) * f2sn},
                   {"|k|^{7/4-1/2d} |e^phi F2*'|_{2*'}", std::pow(kmag, e1 + 1.0) * F2sn},
                   {"|k|^{3/2} |e^phi u|_{H1(omega)}", std::pow(kmag, 1.5) * obs}};
    for (const auto& t : v.lhs_terms) v.lhs += t.value;
    for (const auto& t : v.rhs_terms) v.rhs += t.value;
    v.ratio = (v.rhs > 0.0) ? v.lhs / v.rhs : 0.0;

    v.lhs_E = std::pow(kmag, e2) * lp_norm_masked(wu, p2s, c.domain_mask);
    if (!c.E.empty()) {
        v.has_E_side = true;
        const double Evol = mask_volume(c.u, c.E);
        const double mfac = std::min(1.0 / (kmag * std::pow(Evol, 1.0 / d)), 1.0);
        v.lhs_E += std::pow(kmag, e2) * mfac *
                   (kmag * lp_norm_masked(wu, 2.0, c.E) +
                    vec_lp_norm_masked(wgrad, 2.0, c.E));
    }
    v.rhs_E = f2n + kmag * F2n + std::pow(kmag, e2) * (f2sn + kmag * F2sn) +
              std::pow(kmag, e2) * F2s2n + std::pow(kmag, e2 + 1.0) * obs;
    v.ratio_E = (v.rhs_E > 0.0) ? v.lhs_E / v.rhs_E : 0.0;

    v.pass = v.consistent && v.ratio <= C_pass && v.ratio_E <= C_pass;
    return v;
}

GridField apply_weight_conjugated(const GridField& w, const WeightOracle& phi,
                                  double tau) {
    GridField out = laplacian(w);
    const auto grad = gradient(w);
    std::vector<double> x;
    for (int i1 = 0; i1 < w.n1; ++i1)
        for (std::size_t it = 0; it < w.nt(); ++it) {
            field_point(w, i1, it, x);
            const auto g = phi.grad(x);
            cplx dot(0.0);
            double g2 = 0.0;
            for (int a = 0; a < w.d; ++a) {
                dot += g[a] * grad[a].v[grad[a].idx(i1, it)];
                g2 += g[a] * g[a];
            }
            const std::size_t id = out.idx(i1, it);
            out.v[id] += -2.0 * tau * dot + tau * tau * g2 * w.v[id];
        }
    return out;
}

LocalizedCase localized_cutoff_case(const GridField& w, const WeightOracle& phi,
                                    const SourceBundle& tilde_src,
                                    const std::vector<double>& x0, double tau) {
    if ((int)x0.size() != w.d) throw std::invalid_argument("localized_cutoff_case: bad x0");
    if (tau < 1.0) throw std::invalid_argument("localized_cutoff_case: tau < 1");
    const double rad = std::pow(tau, -1.0 / 3.0);
    if (x0[0] - rad < w.X0 || x0[0] + rad > w.X1)
        throw std::invalid_argument("localized_cutoff_case: ball exits the strip");

    LocalizedCase lc;
    lc.tau = tau;
    lc.w_x0 = w;
    lc.ball_mask.assign(w.v.size(), 0);

    const auto grad_w = gradient(w);
    const double t13 = std::pow(tau, 1.0 / 3.0);

    SourceBundle& src = lc.src;
    src.f2 = w;
    src.f2star = w;
    src.F2.clear();
    src.F2star.clear();
    for (int c = 0; c < w.d; ++c) {
        src.F2.push_back(w);
        src.F2star.push_back(w);
    }

    std::vector<double> x;
    for (int i1 = 0; i1 < w.n1; ++i1)
        for (std::size_t it = 0; it < w.nt(); ++it) {
            const std::size_t id = w.idx(i1, it);
            field_point(w, i1, it, x);
            double r2 = 0.0;
            std::vector<double> rho(w.d);
            for (int a = 0; a < w.d; ++a) {
                rho[a] = t13 * (x[a] - x0[a]);
                r2 += rho[a] * rho[a];
            }
            const double r = std::sqrt(r2);
            if (r <= 1.0 + 1e-12) lc.ball_mask[id] = 1;

            const double eta = eta_ball(r);
            const double etap = eta_ball_d1(r);
            std::vector<double> geta(w.d, 0.0);
            double lap_eta = 0.0;
            if (r > 1e-14) {
                for (int a = 0; a < w.d; ++a) geta[a] = t13 * etap * rho[a] / r;
                lap_eta = t13 * t13 *
                          (eta_ball_d2(r) + double(w.d - 1) * etap / r);
            }

            const cplx wv = w.v[id];
            lc.w_x0.v[id] = eta * wv;

            const auto gphi = phi.grad(x);
            const auto hphi = phi.hess(x);
            double lap_phi = 0.0;
            for (int a = 0; a < w.d; ++a) lap_phi += hphi[a][a];

            cplx geta_F2(0.0), geta_F2s(0.0), geta_gw(0.0);
            double gphi_geta = 0.0;
            for (int a = 0; a < w.d; ++a) {
                geta_F2 += geta[a] * tilde_src.F2[a].v[id];
                geta_F2s += geta[a] * tilde_src.F2star[a].v[id];
                geta_gw += geta[a] * grad_w[a].v[id];
                gphi_geta += gphi[a] * geta[a];
            }

            src.f2.v[id] = eta * tilde_src.f2.v[id] - geta_F2 +
                           tau * lap_phi * (eta * wv) + 2.0 * geta_gw +
                           lap_eta * wv - 2.0 * tau * gphi_geta * wv;
            src.f2star.v[id] = eta * tilde_src.f2star.v[id] - geta_F2s;
            for (int a = 0; a < w.d; ++a) {
                src.F2[a].v[id] = eta * tilde_src.F2[a].v[id];
                src.F2star[a].v[id] = eta * tilde_src.F2star[a].v[id];
            }
        }

    lc.support_ok = true;
    double mx = 0.0;
    for (const auto& z : lc.w_x0.v) mx = std::max(mx, std::abs(z));
    for (std::size_t i = 0; i < lc.w_x0.v.size(); ++i)
        if (!lc.ball_mask[i] && std::abs(lc.w_x0.v[i]) > 1e-14 * mx)
            lc.support_ok = false;
    return lc;
}

} // namespace ucl
