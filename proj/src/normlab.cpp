#include "ucl/normlab.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "ucl/kernels.hpp"
#include "ucl/operators.hpp"
#include "ucl/quadrature.hpp"

namespace ucl {

namespace {

constexpr double kInfSurrogate = 64.0;

double eff_exp(double p) {
    if (std::isinf(p) || p > kInfSurrogate) return kInfSurrogate;
    return p;
}

// Pointwise duality map of L^s: y -> |y|^{s-1} sgn(y).
GridField duality_map(const GridField& y, double s) {
    GridField out = y;
    for (auto& z : out.v) {
        const double a = std::abs(z);
        z = (a == 0.0) ? cplx(0.0) : std::pow(a, s - 1.0) * (z / a);
    }
    return out;
}

GridField random_start(const GridField& proto, std::mt19937_64& rng) {
    GridField x = proto;
    std::normal_distribution<double> N(0.0, 1.0);
    for (auto& z : x.v) z = cplx(N(rng), N(rng));
    // keep a 2-cell support margin so the probe also works for operators that
    // assume compactly supported data
    const std::size_t nt = x.nt();
    for (int i1 = 0; i1 < x.n1; ++i1) {
        if (i1 >= 2 && i1 < x.n1 - 2) continue;
        for (std::size_t it = 0; it < nt; ++it) x.v[x.idx(i1, it)] = cplx(0.0);
    }
    return x;
}

} // namespace

NormEstimate estimate_pq_norm(const LinearOp& op, const GridField& prototype,
                              const NormProbe& probe) {
    NormEstimate best;
    const double p = eff_exp(probe.p);
    const double q = eff_exp(probe.q);
    const double pdual = p / (p - 1.0);
    std::mt19937_64 rng(probe.seed);
    for (int rs = 0; rs < probe.restarts; ++rs) {
        GridField x = random_start(prototype, rng);
        double prev = 0.0;
        for (int it = 0; it < probe.iters; ++it) {
            const double nx = lp_norm(x, p);
            if (nx == 0.0) break;
            scale(x, cplx(1.0 / nx));
            GridField y = op.apply(x);
            const double r = lp_norm(y, q);
            if (r < prev * (1.0 - 1e-9)) best.nondecreasing = false;
            if (r > best.value) best.value = r;
            if (it > 3 && std::fabs(r - prev) <= 1e-10 * std::max(r, 1e-300)) {
                prev = r;
                break;
            }
            prev = r;
            GridField u = duality_map(y, q);
            GridField z = op.adjoint(u);
            x = duality_map(z, pdual);
        }
        if (prev == 0.0 && best.value == 0.0) continue;
    }
    return best;
}

ScalingFit tau_scaling_fit(const std::function<double(double)>& norm_at_tau,
                           const std::vector<double>& taus, double predicted,
                           double tol) {
    if (taus.size() < 4) throw std::invalid_argument("need at least 4 tau values");
    ScalingFit fit;
    fit.predicted = predicted;
    fit.taus = taus;
    for (double t : taus) fit.log_norms.push_back(std::log(norm_at_tau(t)));

    auto ols = [](const std::vector<double>& ts, const std::vector<double>& ys,
                  double& slope, double& icpt, double& r2,
                  std::vector<double>& resid) {
        const int n = (int)ts.size();
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int i = 0; i < n; ++i) {
            const double x = std::log(ts[i]);
            sx += x;
            sy += ys[i];
            sxx += x * x;
            sxy += x * ys[i];
        }
        slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        icpt = (sy - slope * sx) / n;
        double ss_res = 0, ss_tot = 0;
        const double ybar = sy / n;
        resid.resize(n);
        for (int i = 0; i < n; ++i) {
            const double yhat = icpt + slope * std::log(ts[i]);
            resid[i] = ys[i] - yhat;
            ss_res += resid[i] * resid[i];
            ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
        }
        r2 = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
    };

    std::vector<double> resid;
    ols(fit.taus, fit.log_norms, fit.slope, fit.intercept, fit.r2, resid);

    // transition-regime guard: drop the smallest tau if it is a 3-sigma
    // outlier.  Tested leave-one-out: an endpoint included in its own fit has
    // leverage large enough that its standardized residual never reaches 3.
    if (taus.size() >= 5) {
        std::vector<double> t2(fit.taus.begin() + 1, fit.taus.end());
        std::vector<double> y2(fit.log_norms.begin() + 1, fit.log_norms.end());
        double sl = 0, ic = 0, r2 = 0;
        std::vector<double> res2;
        ols(t2, y2, sl, ic, r2, res2);
        double s2 = 0.0;
        for (double r : res2) s2 += r * r;
        const double dof = std::max(1.0, double(res2.size()) - 2.0);
        const double sigma = std::sqrt(s2 / dof);
        const double pred0 = ic + sl * std::log(fit.taus.front());
        const double floor = 1e-6 * std::max(1.0, std::fabs(pred0));
        if (std::fabs(fit.log_norms.front() - pred0) >
            std::max(3.0 * sigma, floor)) {
            fit.slope = sl;
            fit.intercept = ic;
            fit.r2 = r2;
            fit.dropped_smallest = true;
        }
    }

    fit.inconclusive = fit.r2 < 0.8;
    fit.pass = !fit.inconclusive && fit.slope <= predicted + tol;
    return fit;
}

double stein_tomas_bound(const std::function<double(double)>& kprof,
                         double lambda_lo, double lambda_hi, int n, StBound mode) {
    if (lambda_hi <= lambda_lo) return 0.0;
    const double w = double(n - 1) / double(n + 1);
    if (mode == StBound::L2L2) {
        double m = 0.0;
        const int N = 2048;
        for (int i = 0; i <= N; ++i) {
            const double lam = lambda_lo + (lambda_hi - lambda_lo) * i / double(N);
            m = std::max(m, kprof(lam));
        }
        return m;
    }
    const bool squared = (mode == StBound::LpL2 || mode == StBound::L2LpPrime);
    auto f = [&](double lam) {
        const double k = kprof(lam);
        return (squared ? k * k : k) * std::pow(lam, w);
    };
    QuadratureResult r = integrate_gk(f, lambda_lo, lambda_hi, 1e-8, 1e-30, 1 << 12);
    if (!r.converged) throw std::runtime_error("multiplier-weight integral diverged");
    return squared ? std::sqrt(r.value) : r.value;
}

std::string op_row_name(OpRow row) {
    switch (row) {
        case OpRow::K0_22: return "K0 2->2";
        case OpRow::K0_2_2s: return "K0 2->2*";
        case OpRow::GradK0_22: return "grad' K0 2->2";
        case OpRow::K0_2sp_2: return "K0 2*'->2";
        case OpRow::K0_2sp_2s: return "K0 2*'->2*";
        case OpRow::Kj_22: return "Kj 2->2";
        case OpRow::Kj_2_2s: return "Kj 2->2*";
        case OpRow::Rgrad_22: return "R (grad' domain) 2->2";
        case OpRow::PhfK0_22: return "Phf K0 2->2";
        case OpRow::PhfK0_2sp_2: return "Phf K0 2*'->2";
        case OpRow::PhfK1_22: return "Phf K1 2->2";
        case OpRow::PhfKj_22: return "Phf Kj 2->2";
        case OpRow::PhfKj_2_2s: return "Phf Kj 2->2*";
        case OpRow::IhfK1_2sp_2: return "(I-Phf) K1 2*'->2";
        case OpRow::IhfK1_2sp_2s: return "(I-Phf) K1 2*'->2*";
    }
    return "?";
}

double op_row_predicted(OpRow row, int d) {
    const double a = 3.0 / 4.0 + 1.0 / (2.0 * d);
    switch (row) {
        case OpRow::K0_22: return -1.5;
        case OpRow::K0_2_2s: return -a;
        case OpRow::GradK0_22: return -0.5;
        case OpRow::K0_2sp_2: return -a;
        case OpRow::K0_2sp_2s: return 0.0;
        case OpRow::Kj_22: return -0.5;
        case OpRow::Kj_2_2s: return 0.25 - 1.0 / (2.0 * d);
        case OpRow::Rgrad_22: return -1.5;
        case OpRow::PhfK0_22: return -2.0;
        case OpRow::PhfK0_2sp_2: return -1.0;
        case OpRow::PhfK1_22: return -1.0;
        case OpRow::PhfKj_22: return -1.0;
        case OpRow::PhfKj_2_2s: return 0.0;
        case OpRow::IhfK1_2sp_2: return 0.25 - 1.0 / (2.0 * d);
        case OpRow::IhfK1_2sp_2s: return 1.0;
    }
    return 0.0;
}

void op_row_exponents(OpRow row, int d, double& p, double& q) {
    const double two_s = 2.0 * d / double(d - 2);
    const double two_sp = 2.0 * d / double(d + 2);
    p = 2.0;
    q = 2.0;
    switch (row) {
        case OpRow::K0_2_2s:
        case OpRow::Kj_2_2s:
        case OpRow::PhfKj_2_2s: q = two_s; break;
        case OpRow::K0_2sp_2:
        case OpRow::PhfK0_2sp_2:
        case OpRow::IhfK1_2sp_2: p = two_sp; break;
        case OpRow::K0_2sp_2s:
        case OpRow::IhfK1_2sp_2s:
            p = two_sp;
            q = two_s;
            break;
        default: break;
    }
}

namespace {

struct RowModeSpec {
    KernelSelector sel = KernelSelector::k0;
    int phf = 0;  // 0 none, +1 projector, -1 complement
    enum class Fac { none, grad_abs, i_xi2, inv_grad } fac = Fac::none;
};

RowModeSpec row_mode_spec(OpRow row) {
    RowModeSpec s;
    switch (row) {
        case OpRow::K0_22:
        case OpRow::K0_2_2s:
        case OpRow::K0_2sp_2:
        case OpRow::K0_2sp_2s: break;
        case OpRow::GradK0_22: s.fac = RowModeSpec::Fac::grad_abs; break;
        case OpRow::Kj_22:
        case OpRow::Kj_2_2s: s.fac = RowModeSpec::Fac::i_xi2; break;
        case OpRow::Rgrad_22:
            s.sel = KernelSelector::r;
            s.fac = RowModeSpec::Fac::inv_grad;
            break;
        case OpRow::PhfK0_22:
        case OpRow::PhfK0_2sp_2: s.phf = 1; break;
        case OpRow::PhfK1_22:
            s.sel = KernelSelector::k1;
            s.phf = 1;
            break;
        case OpRow::PhfKj_22:
        case OpRow::PhfKj_2_2s:
            s.fac = RowModeSpec::Fac::i_xi2;
            s.phf = 1;
            break;
        case OpRow::IhfK1_2sp_2:
        case OpRow::IhfK1_2sp_2s:
            s.sel = KernelSelector::k1;
            s.phf = -1;
            break;
    }
    return s;
}

cplx row_factor(const RowModeSpec& s, const std::vector<double>& xi) {
    double n2 = 0.0;
    for (double x : xi) n2 += x * x;
    const double nx = std::sqrt(n2);
    switch (s.fac) {
        case RowModeSpec::Fac::none: return cplx(1.0);
        case RowModeSpec::Fac::grad_abs: return cplx(nx);
        case RowModeSpec::Fac::i_xi2: return cplx(0.0, xi[0]);
        case RowModeSpec::Fac::inv_grad: return nx > 0.0 ? cplx(1.0 / nx) : cplx(0.0);
    }
    return cplx(1.0);
}

} // namespace

LinearOp make_row_op(const StripConfig& cfg, double tau, OpRow row) {
    const RowModeSpec spec = row_mode_spec(row);
    auto act = [cfg, tau, spec](const GridField& f, bool adj) {
        GridField fhat = to_modes(f);
        const std::size_t nt = f.nt();
        std::vector<double> xi;
        std::vector<cplx> g(f.n1), out;
        for (std::size_t it = 0; it < nt; ++it) {
            mode_xi(f, it, xi);
            const PsiProfile p = make_psi_profile(cfg, xi);
            cplx fac = row_factor(spec, xi);
            if (adj) fac = std::conj(fac);
            double m = 1.0;
            if (spec.phf != 0) {
                const double eta = eta_cutoff(p.psi(f.X1) / tau);
                m = (spec.phf > 0) ? eta : 1.0 - eta;
            }
            if (fac == cplx(0.0) || m == 0.0) {
                for (int i1 = 0; i1 < f.n1; ++i1) fhat.v[fhat.idx(i1, it)] = cplx(0.0);
                continue;
            }
            for (int i1 = 0; i1 < f.n1; ++i1) g[i1] = fhat.v[fhat.idx(i1, it)];
            out = apply_mode(p, tau, spec.sel, adj, f.X0, f.h1(), f.n1, g);
            const cplx scale = fac * m;
            for (int i1 = 0; i1 < f.n1; ++i1)
                fhat.v[fhat.idx(i1, it)] = scale * out[i1];
        }
        return from_modes(fhat);
    };
    LinearOp op;
    op.apply = [act](const GridField& f) { return act(f, false); };
    op.adjoint = [act](const GridField& f) { return act(f, true); };
    return op;
}

namespace {

// L2 norm of the 1-D mode operator by power iteration on K^T K.
double mode_sigma(const PsiProfile& p, double tau, KernelSelector sel, double X0,
                  double h, int n1) {
    std::vector<cplx> v(n1);
    for (int i = 0; i < n1; ++i)
        v[i] = cplx(std::sin(0.7 * i + 1.0) + 0.3, std::cos(1.3 * i));
    double lam = 0.0;
    for (int it = 0; it < 30; ++it) {
        auto Av = apply_mode(p, tau, sel, false, X0, h, n1, v);
        auto w = apply_mode(p, tau, sel, true, X0, h, n1, Av);
        double nrm = 0.0, ip = 0.0;
        for (int i = 0; i < n1; ++i) {
            nrm += std::norm(w[i]);
            ip += (std::conj(v[i]) * w[i]).real();
        }
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) return 0.0;
        double vn = 0.0;
        for (int i = 0; i < n1; ++i) vn += std::norm(v[i]);
        lam = ip / vn;
        for (int i = 0; i < n1; ++i) v[i] = w[i] / nrm;
    }
    return lam > 0.0 ? std::sqrt(lam) : 0.0;
}

} // namespace

double mode_sup_l2_norm(const StripConfig& cfg, double tau, OpRow row, double X0,
                        double h, int n1, int n_lambda) {
    const RowModeSpec spec = row_mode_spec(row);
    std::vector<double> lambdas;
    const double lo = 0.25, hi = 6.0 * tau;
    for (int i = 0; i < n_lambda; ++i)
        lambdas.push_back(lo * std::pow(hi / lo, double(i) / double(n_lambda - 1)));
    for (double f : {0.85, 0.95, 1.0, 1.05, 1.15, 1.9, 2.1, 2.5, 2.9, 3.1})
        lambdas.push_back(f * tau);

    std::vector<std::vector<double>> dirs;
    {
        std::vector<double> u(cfg.d - 1, 0.0);
        u[0] = 1.0;
        dirs.push_back(u);
        if (cfg.d >= 3) {
            std::vector<double> u2(cfg.d - 1, 0.0);
            u2[cfg.d - 2] = 1.0;
            dirs.push_back(u2);
            std::vector<double> u3(cfg.d - 1, 1.0 / std::sqrt(double(cfg.d - 1)));
            dirs.push_back(u3);
        }
    }

    const double X1 = X0 + h * (n1 - 1);
    double sup = 0.0;
    for (const auto& u : dirs) {
        for (double lam : lambdas) {
            std::vector<double> xi(u.size());
            for (std::size_t i = 0; i < u.size(); ++i) xi[i] = lam * u[i];
            const PsiProfile p = make_psi_profile(cfg, xi);
            if (p.psi2(X1) < 0.0) continue;
            double m = 1.0;
            if (spec.phf != 0) {
                const double eta = eta_cutoff(p.psi(X1) / tau);
                m = (spec.phf > 0) ? eta : 1.0 - eta;
            }
            const double fac = std::abs(row_factor(spec, xi));
            if (m == 0.0 || fac == 0.0) continue;
            const double s = mode_sigma(p, tau, spec.sel, X0, h, n1);
            sup = std::max(sup, m * fac * s);
        }
    }
    return sup;
}

std::vector<RowReport> proposition_suite(const StripConfig& cfg, const GridSpec& gs,
                                         const std::vector<double>& taus,
                                         std::uint64_t seed) {
    std::vector<RowReport> reports;
    const GridField proto =
        make_field(cfg.d, gs.n1, gs.nperp, cfg.X0, cfg.X1, gs.Lperp);
    const OpRow rows[] = {
        OpRow::K0_22,       OpRow::K0_2_2s,      OpRow::GradK0_22,
        OpRow::K0_2sp_2,    OpRow::K0_2sp_2s,    OpRow::Kj_22,
        OpRow::Kj_2_2s,     OpRow::Rgrad_22,     OpRow::PhfK0_22,
        OpRow::PhfK0_2sp_2, OpRow::PhfK1_22,     OpRow::PhfKj_22,
        OpRow::PhfKj_2_2s,  OpRow::IhfK1_2sp_2,  OpRow::IhfK1_2sp_2s};
    int rowid = 0;
    for (OpRow row : rows) {
        RowReport rep;
        rep.row = row;
        rep.name = op_row_name(row);
        NormProbe probe;
        op_row_exponents(row, cfg.d, probe.p, probe.q);
        probe.seed = seed + 1000 * rowid;
        probe.restarts = 4;
        probe.iters = 40;
        for (double tau : taus) {
            const LinearOp op = make_row_op(cfg, tau, row);
            rep.norms.push_back(estimate_pq_norm(op, proto, probe).value);
        }
        double mx = 0.0;
        for (double n : rep.norms) mx = std::max(mx, n);
        if (mx < 1e-13) {
            // identically-zero operator (e.g. R on a flat configuration)
            rep.fit.pass = true;
            rep.fit.predicted = op_row_predicted(row, cfg.d);
            reports.push_back(rep);
            ++rowid;
            continue;
        }
        // a projected row can vanish at large tau when the grid carries no
        // mode above the cutoff band; fit only the measurable points
        std::vector<double> fit_taus, fit_norms;
        for (std::size_t i = 0; i < taus.size(); ++i)
            if (rep.norms[i] > 1e-13) {
                fit_taus.push_back(taus[i]);
                fit_norms.push_back(rep.norms[i]);
            }
        if (fit_taus.size() < 4) {
            rep.fit.inconclusive = true;
            rep.fit.predicted = op_row_predicted(row, cfg.d);
        } else {
            std::size_t idx = 0;
            rep.fit = tau_scaling_fit(
                [&](double) { return fit_norms[idx++]; }, fit_taus,
                op_row_predicted(row, cfg.d));
        }
        reports.push_back(rep);
        ++rowid;
    }
    return reports;
}

} // namespace ucl
