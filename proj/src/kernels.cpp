#include "ucl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ucl/quadrature.hpp"

namespace ucl {

double eta_cutoff(double t) {
    if (t <= 2.0) return 0.0;
    if (t >= 3.0) return 1.0;
    const double s = t - 2.0;
    return s * s * s * (s * (6.0 * s - 15.0) + 10.0);  // quintic smoothstep
}

double PsiProfile::psi(double s) const {
    const double v = A - B * s;
    if (v < 0.0) throw std::domain_error("psi^2 negative: coercivity violated");
    return std::sqrt(v);
}

double PsiProfile::phi_int(double a, double b) const {
    if (std::fabs(B) < 1e-14) return std::sqrt(A) * (b - a);
    auto F = [&](double s) {
        const double v = A - B * s;
        if (v < 0.0) throw std::domain_error("psi^2 negative in antiderivative");
        return -(2.0 / (3.0 * B)) * v * std::sqrt(v);
    };
    return F(b) - F(a);
}

double PsiProfile::dpsi(double s) const {
    const double p = psi(s);
    if (p == 0.0) return 0.0;
    return -B / (2.0 * p);
}

PsiProfile make_psi_profile(const StripConfig& cfg, const std::vector<double>& xi_perp) {
    PsiProfile p;
    for (int j = 2; j <= cfg.d; ++j) {
        const double xij = xi_perp[j - 2];
        p.A += xij * xij;
        p.B += cfg.lambdas[j - 1] * xij * xij;
    }
    return p;
}

namespace {

// The common inner integrand of both k0 branches:
//   exp(-tau (y-x) + 2 Phi(s) - Phi(x) - Phi(y)),
// written with Phi differences only.
double inner_integral(const PsiProfile& p, double tau, double x, double y,
                      double a, double b) {
    if (b <= a) return 0.0;
    auto f = [&](double s) {
        const double e = -tau * (y - x) - p.phi_int(s, x) - p.phi_int(s, y);
        return std::exp(e);
    };
    return integrate(f, a, b, 1e-9);
}

} // namespace

double kernel_k0(const PsiProfile& p, double tau, double x1, double y1, double X0) {
    const double psix = p.psi(x1);
    if (psix > tau) {
        const double m = std::min(x1, y1);
        return -inner_integral(p, tau, x1, y1, X0, m);
    }
    if (y1 > x1) return inner_integral(p, tau, x1, y1, x1, y1);
    return 0.0;
}

double kernel_k1(const PsiProfile& p, double tau, double x1, double y1, double X0) {
    const double psix = p.psi(x1);
    double v = kernel_k0(p, tau, x1, y1, X0) * (tau + p.psi(y1));
    if (psix <= tau && y1 > x1)
        v -= std::exp(-tau * (y1 - x1) + p.phi_int(x1, y1));
    if (psix > tau && y1 < x1)
        v += std::exp(tau * (x1 - y1) - p.phi_int(y1, x1));
    return v;
}

double kernel_r(const PsiProfile& p, double tau, double x1, double y1, double X0) {
    return kernel_k0(p, tau, x1, y1, X0) * p.dpsi(y1);
}

double kernel_k0_d1(const PsiProfile& p, double tau, double x1, double y1, double X0) {
    const double psix = p.psi(x1);
    double v = 0.0;
    if (x1 < y1) v -= std::exp(-tau * (y1 - x1) - p.phi_int(x1, y1));
    if (psix > tau)
        v -= (tau - psix) * inner_integral(p, tau, x1, y1, X0, std::min(x1, y1));
    if (psix <= tau && x1 < y1)
        v += (tau - psix) * inner_integral(p, tau, x1, y1, x1, y1);
    return v;
}

double kernel_k1_d1(const PsiProfile& p, double tau, double x1, double y1, double X0) {
    const double psix = p.psi(x1);
    double v = kernel_k0_d1(p, tau, x1, y1, X0) * (tau + p.psi(y1));
    if (psix <= tau && y1 > x1)
        v -= (tau - psix) * std::exp(-tau * (y1 - x1) + p.phi_int(x1, y1));
    if (psix > tau && y1 < x1)
        v += (tau - psix) * std::exp(tau * (x1 - y1) - p.phi_int(y1, x1));
    return v;
}

std::complex<double> eval_kernel(const StripConfig& cfg, const KernelQuery& q) {
    if (q.tau < 1.0) throw std::invalid_argument("tau must be >= 1");
    if (q.x1 < cfg.X0 || q.x1 > cfg.X1 || q.y1 < cfg.X0 || q.y1 > cfg.X1)
        throw std::invalid_argument("x1, y1 must lie in [X0, X1]");
    const PsiProfile p = make_psi_profile(cfg, q.xi_perp);
    switch (q.selector) {
        case KernelSelector::k0:
            return kernel_k0(p, q.tau, q.x1, q.y1, cfg.X0);
        case KernelSelector::k1:
            return kernel_k1(p, q.tau, q.x1, q.y1, cfg.X0);
        case KernelSelector::kj: {
            if (q.j < 2 || q.j > cfg.d) throw std::invalid_argument("kj needs j in [2,d]");
            const double xij = q.xi_perp[q.j - 2];
            return std::complex<double>(0.0, xij) *
                   kernel_k0(p, q.tau, q.x1, q.y1, cfg.X0);
        }
        case KernelSelector::r:
            return kernel_r(p, q.tau, q.x1, q.y1, cfg.X0);
        case KernelSelector::k0_d1:
            return kernel_k0_d1(p, q.tau, q.x1, q.y1, cfg.X0);
        case KernelSelector::k1_d1:
            return kernel_k1_d1(p, q.tau, q.x1, q.y1, cfg.X0);
        case KernelSelector::k1_d1_lf: {
            const double psiX1 = p.psi(cfg.X1);
            const double lf = 1.0 - eta_cutoff(psiX1 / q.tau);
            if (lf == 0.0) return 0.0;
            return lf * kernel_k1_d1(p, q.tau, q.x1, q.y1, cfg.X0);
        }
    }
    return 0.0;
}

double constant_psi_oracle(double tau, double psi_const, double x1, double y1,
                           double X0) {
    if (psi_const <= 0.0) throw std::invalid_argument("psi_const must be positive");
    const double dlt = y1 - x1;
    if (psi_const <= tau) {
        if (dlt <= 0.0) return 0.0;
        const double z = psi_const * dlt;
        // sinh(z)/psi, with the small-z limit handled by the series
        const double sh = (std::fabs(z) < 1e-6) ? dlt * (1.0 + z * z / 6.0)
                                                : std::sinh(z) / psi_const;
        return std::exp(-tau * dlt) * sh;
    }
    const double m = std::min(x1, y1);
    // -e^{-tau d - psi (x+y)} (e^{2 psi m} - e^{2 psi X0}) / (2 psi), grouped to
    // keep all exponents nonpositive.
    const double e1 = std::exp(-tau * dlt - psi_const * (x1 + y1 - 2.0 * m));
    const double e2 = std::exp(-tau * dlt - psi_const * (x1 + y1 - 2.0 * X0));
    return -(e1 - e2) / (2.0 * psi_const);
}

namespace {

std::vector<std::vector<double>> unit_directions(int dperp, int n_dirs) {
    std::vector<std::vector<double>> dirs;
    if (dperp == 1) {
        dirs.push_back({1.0});
        return dirs;
    }
    if (dperp == 2) {
        // half circle: the kernels only depend on xi through squares
        for (int i = 0; i < n_dirs; ++i) {
            const double th = M_PI * (i + 0.5) / n_dirs;
            dirs.push_back({std::cos(th), std::sin(th)});
        }
        return dirs;
    }
    std::mt19937_64 rng(0x5161ULL);
    std::normal_distribution<double> N(0.0, 1.0);
    while ((int)dirs.size() < n_dirs) {
        std::vector<double> u(dperp);
        double n = 0.0;
        for (double& x : u) {
            x = N(rng);
            n += x * x;
        }
        n = std::sqrt(n);
        if (n < 1e-12) continue;
        for (double& x : u) x /= n;
        dirs.push_back(u);
    }
    return dirs;
}

} // namespace

double kernel_sup_on_sigma(const StripConfig& cfg, double tau, double x1, double y1,
                           double lambda, KernelSelector sel, DerivWeight w,
                           int n_dirs) {
    const int dperp = cfg.d - 1;
    double sup = 0.0;
    for (const auto& u : unit_directions(dperp, n_dirs)) {
        // omega = u / psi(x1, u) lies on Sigma_{x1}; xi = lambda * omega
        const double pu = psi_eval(cfg, x1, u);
        std::vector<double> xi(dperp);
        double omega_norm = 0.0;
        for (int i = 0; i < dperp; ++i) {
            xi[i] = lambda * u[i] / pu;
            omega_norm += (u[i] / pu) * (u[i] / pu);
        }
        omega_norm = std::sqrt(omega_norm);
        KernelQuery q;
        q.tau = tau;
        q.x1 = x1;
        q.y1 = y1;
        q.xi_perp = xi;
        q.selector = sel;
        double v = std::abs(eval_kernel(cfg, q));
        if (w == DerivWeight::lambda) v *= lambda;
        if (w == DerivWeight::lambda_omega) v *= lambda * omega_norm;
        sup = std::max(sup, v);
    }
    return sup;
}

double weighted_lambda_integral(const StripConfig& cfg, double x1, double y1,
                                double tau, double lambda_lo, double lambda_hi,
                                DerivWeight w, KernelSelector sel, int n_dirs) {
    if (lambda_hi <= lambda_lo) return 0.0;
    const double expo = 1.0 - 2.0 / double(cfg.d);
    auto f = [&](double lam) {
        const double s = kernel_sup_on_sigma(cfg, tau, x1, y1, lam, sel, w, n_dirs);
        return s * s * std::pow(lam, expo);
    };
    // the integrand decays exponentially in lambda; a moderate tolerance keeps
    // the nested quadrature affordable
    QuadratureResult r = integrate_gk(f, lambda_lo, lambda_hi, 1e-6, 1e-30, 1 << 10);
    if (!r.converged) throw std::runtime_error("lambda integral did not converge");
    return r.value;
}

namespace {

struct SweepPoint {
    double x1, y1, lambda, tau, ratio;
};

// One catalogued inequality: ratio of the measured kernel size to the stated
// right-hand side (outer constant 1, inner exponential constants fixed at 8).
double bound_ratio(const StripConfig& cfg, const std::string& id, double tau,
                   double x1, double y1, double lambda, int n_dirs) {
    const double ad = std::fabs(x1 - y1);
    const double C_in = 8.0;
    if (id == "k0_hf") {
        if (lambda <= tau) return -1.0;
        const double k = kernel_sup_on_sigma(cfg, tau, x1, y1, lambda,
                                             KernelSelector::k0, DerivWeight::none, n_dirs);
        double rhs;
        if (y1 < x1)
            rhs = (1.0 / lambda) *
                  std::exp(-(lambda - tau) * ad - lambda * ad * ad / C_in);
        else
            rhs = (1.0 / lambda) * std::exp(-(lambda / C_in + tau) * ad);
        return rhs > 0.0 ? k / rhs : -1.0;
    }
    if (id == "k0_lf") {
        if (lambda > tau || ad < 1e-9) return -1.0;
        const double k = kernel_sup_on_sigma(cfg, tau, x1, y1, lambda,
                                             KernelSelector::k0, DerivWeight::none, n_dirs);
        double rhs;
        if (lambda * ad <= 1.0)
            rhs = ad * std::exp(-tau * ad);
        else
            rhs = (1.0 / lambda) *
                  std::exp(-(tau - lambda) * ad - lambda * ad * ad / C_in);
        return rhs > 0.0 ? k / rhs : -1.0;
    }
    if (id == "k0_hf_bis") {
        if (lambda <= 2.0 * tau) return -1.0;
        const double k = kernel_sup_on_sigma(cfg, tau, x1, y1, lambda,
                                             KernelSelector::k0, DerivWeight::none, n_dirs);
        const double rhs = std::exp(-tau * ad);
        return (tau + lambda) * k / rhs;
    }
    if (id == "k1") {
        const double k1 = kernel_sup_on_sigma(cfg, tau, x1, y1, lambda,
                                              KernelSelector::k1, DerivWeight::none, n_dirs);
        const double k0 = kernel_sup_on_sigma(cfg, tau, x1, y1, lambda,
                                              KernelSelector::k0, DerivWeight::none, n_dirs);
        const double rhs =
            std::exp(-std::fabs(tau - lambda) * ad - lambda * ad * ad / C_in) +
            (tau + lambda) * k0;
        return rhs > 0.0 ? k1 / rhs : -1.0;
    }
    if (id == "k0_weighted_integral") {
        if (ad < 1e-9) return -1.0;
        const double I = weighted_lambda_integral(cfg, x1, y1, tau, 2.0 * tau,
                                                  2.0 * tau + 40.0 / std::max(ad, 0.05),
                                                  DerivWeight::none, KernelSelector::k0,
                                                  std::min(n_dirs, 16));
        const double rhs = std::exp(-tau * ad) * std::pow(tau, -1.0 / double(cfg.d));
        return std::sqrt(I) / rhs;
    }
    throw std::invalid_argument("unknown bound id: " + id);
}

double sweep_max(const StripConfig& cfg, const std::string& id,
                 const std::vector<double>& taus, int n_xy, int n_lambda,
                 int n_dirs, KernelQuery* witness) {
    double best = 0.0;
    for (double tau : taus) {
        for (int ix = 0; ix < n_xy; ++ix) {
            const double x1 = cfg.X0 + (cfg.X1 - cfg.X0) * (ix + 0.5) / n_xy;
            for (int iy = 0; iy < n_xy; ++iy) {
                const double y1 = cfg.X0 + (cfg.X1 - cfg.X0) * (iy + 0.5) / n_xy;
                for (int il = 0; il < n_lambda; ++il) {
                    // geometric lambda ladder around tau, excluding lambda = 0
                    const double lam = tau * std::pow(2.0, -2.0 + 5.0 * il / std::max(1, n_lambda - 1));
                    const double r = bound_ratio(cfg, id, tau, x1, y1, lam, n_dirs);
                    if (r > best) {
                        best = r;
                        if (witness) {
                            witness->tau = tau;
                            witness->x1 = x1;
                            witness->y1 = y1;
                            witness->xi_perp = {lam, 0.0};
                        }
                    }
                }
            }
        }
    }
    return best;
}

} // namespace

KernelBoundReport validate_kernel_bounds(const StripConfig& cfg,
                                         const std::vector<double>& tau_sweep,
                                         const std::string& bound_id) {
    KernelBoundReport rep;
    rep.bound_id = bound_id;
    rep.max_ratio = sweep_max(cfg, bound_id, tau_sweep, 7, 6, 16, &rep.witness);
    rep.fitted_C = rep.max_ratio;
    rep.refined_max_ratio = sweep_max(cfg, bound_id, tau_sweep, 11, 9, 32, nullptr);
    rep.stable = std::isfinite(rep.refined_max_ratio) &&
                 rep.refined_max_ratio <= 1.3 * rep.max_ratio + 1e-12;
    return rep;
}

} // namespace ucl
