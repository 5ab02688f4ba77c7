// End-to-end acceptance runs for the laboratory: one pass/fail line per
// criterion, nonzero exit when any of them fails.  Tolerances are pinned
// here, next to the check they gate.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <iostream>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "ucl/carleman.hpp"
#include "ucl/config.hpp"
#include "ucl/experiments.hpp"
#include "ucl/grid.hpp"
#include "ucl/kernels.hpp"
#include "ucl/normlab.hpp"
#include "ucl/operators.hpp"
#include "ucl/report.hpp"
#include "ucl/strip_geometry.hpp"
#include "ucl/ucp.hpp"
#include "ucl/weights.hpp"
#include "ucl/wolff.hpp"

using namespace ucl;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int g_failures = 0;

void report(int crit, bool pass, const std::string& detail) {
    std::printf("%s criterion %2d: %s\n", pass ? "PASS" : "FAIL", crit,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fnum(double v) { return fmt_sig(v); }

double norm3(const Vec3& x) {
    return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
}

StripConfig flat3() {
    StripConfig c;
    c.d = 3;
    c.X0 = -0.5;
    c.X1 = 0.5;
    c.lambdas = {0.0, 0.0, 0.0};
    return c;
}

StripConfig curved3() {
    StripConfig c = flat3();
    c.lambdas = {0.0, 0.5, 1.0};
    return c;
}

GridField bump_field(const StripConfig& cfg, int n1, int nperp, double Lperp,
                     double cx, double sharp) {
    GridField w = make_field(cfg.d, n1, nperp, cfg.X0, cfg.X1, Lperp);
    std::vector<double> x;
    for (int i1 = 0; i1 < n1; ++i1) {
        const double x1 = w.x1_at(i1);
        for (std::size_t it = 0; it < w.nt(); ++it) {
            field_point(w, i1, it, x);
            double r2 = (x1 - cx) * (x1 - cx);
            for (int a = 1; a < cfg.d; ++a) r2 += x[a] * x[a];
            w.v[w.idx(i1, it)] = std::exp(-sharp * r2);
        }
    }
    return w;
}

GridField random_scalar(int n1, int nperp, double X0, double X1, double Lperp,
                        std::mt19937& rng, double amp = 1.0) {
    GridField f = make_field(3, n1, nperp, X0, X1, Lperp);
    std::uniform_real_distribution<double> u(-amp, amp);
    for (auto& z : f.v) z = u(rng);
    return f;
}

std::vector<GridField> random_vector(int n1, int nperp, double X0, double X1,
                                     double Lperp, std::mt19937& rng,
                                     double amp = 1.0) {
    std::vector<GridField> F;
    for (int c = 0; c < 3; ++c)
        F.push_back(random_scalar(n1, nperp, X0, X1, Lperp, rng, amp));
    return F;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

const Verdict& verdict_named(const ReportBundle& b, const std::string& id) {
    for (const auto& v : b.verdicts)
        if (v.id == id) return v;
    throw std::runtime_error("missing verdict: " + id);
}

double harmonic_basis(const Vec3& x, const std::vector<double>& a) {
    return a[0] + a[1] * x[0] + a[2] * x[1] + a[3] * x[2]
        + a[4] * (x[0] * x[0] - x[1] * x[1]) + a[5] * x[0] * x[1]
        + a[6] * (x[0] * x[0] + x[1] * x[1] - 2.0 * x[2] * x[2]);
}

// ---------------------------------------------------------------------------
// 1. parametrix residual on a Gaussian bump, flat symbol, with x1 refinement

void criterion_1() {
    const StripConfig sc = flat3();
    const std::vector<double> taus = {8.0, 16.0, 32.0};
    std::vector<double> coarse, fine;
    // sharp enough that the strip-edge tails (exp(-15)) sit far below the
    // discretization error at both resolutions
    const GridField wc = bump_field(sc, 128, 64, 2.0, 0.0, 60.0);
    const GridField wf = bump_field(sc, 255, 64, 2.0, 0.0, 60.0);
    bool ok = true;
    double worst = 0.0, worst_ratio = kInf;
    for (double tau : taus) {
        const double rc = parametrix_residual(sc, tau, wc).residual;
        const double rf = parametrix_residual(sc, tau, wf).residual;
        worst = std::max(worst, rc);
        worst_ratio = std::min(worst_ratio, rc / rf);
        ok = ok && rc <= 1e-3 && rc / rf >= 3.0;
    }
    report(1, ok,
           "parametrix residual on 128x64^2 bump: max " + fnum(worst)
               + " (tol 0.001), min refinement ratio " + fnum(worst_ratio)
               + " (need >= 3)");
}

// ---------------------------------------------------------------------------
// 2. kernel factorization identities and the constant-profile closed form

void criterion_2() {
    const StripConfig curved = curved3();
    const StripConfig flat = flat3();
    std::mt19937_64 rng(2026);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst_fact = 0.0, worst_oracle = 0.0;
    for (int t = 0; t < 1000; ++t) {
        KernelQuery q;
        q.tau = 1.0 + 30.0 * U(rng);
        q.x1 = -0.45 + 0.9 * U(rng);
        q.y1 = -0.45 + 0.9 * U(rng);
        q.xi_perp = {8.0 * U(rng) - 4.0, 8.0 * U(rng) - 4.0};
        q.selector = KernelSelector::k0;
        const std::complex<double> k0 = eval_kernel(curved, q);
        for (int j = 2; j <= 3; ++j) {
            KernelQuery qj = q;
            qj.selector = KernelSelector::kj;
            qj.j = j;
            const std::complex<double> expect =
                std::complex<double>(0.0, q.xi_perp[j - 2]) * k0;
            const double e = std::abs(eval_kernel(curved, qj) - expect)
                / std::max(1.0, std::abs(expect));
            worst_fact = std::max(worst_fact, e);
        }
        KernelQuery qr = q;
        qr.selector = KernelSelector::r;
        const PsiProfile p = make_psi_profile(curved, q.xi_perp);
        const std::complex<double> expect_r = k0 * p.dpsi(q.y1);
        worst_fact = std::max(worst_fact,
                              std::abs(eval_kernel(curved, qr) - expect_r)
                                  / std::max(1.0, std::abs(expect_r)));

        // flat symbol: the profile is constant in x1 and the kernel has an
        // elementary antiderivative to compare against
        KernelQuery qo = q;
        const double psi = std::sqrt(q.xi_perp[0] * q.xi_perp[0]
                                     + q.xi_perp[1] * q.xi_perp[1]);
        const double oracle = constant_psi_oracle(q.tau, psi, q.x1, q.y1, flat.X0);
        const double got = eval_kernel(flat, qo).real();
        worst_oracle = std::max(worst_oracle, std::fabs(got - oracle)
                                    / std::max(1.0, std::fabs(oracle)));
    }
    const bool ok = worst_fact <= 1e-12 && worst_oracle <= 1e-10;
    report(2, ok,
           "kernel identities over 1000 queries: factorization error "
               + fnum(worst_fact) + " (tol 1e-12), closed-form error "
               + fnum(worst_oracle) + " (tol 1e-10)");
}

// ---------------------------------------------------------------------------
// 3. large-parameter scaling of the catalogued operator rows

void criterion_3() {
    const StripConfig sc = curved3();
    const std::vector<double> taus = {8.0, 16.0, 32.0, 64.0, 128.0, 256.0};

    auto mode_fit = [&](OpRow row, double predicted) {
        auto norm_at = [&](double tau) {
            const int n1 = std::max(65, int(2.0 * tau) + 1);
            const double h = (sc.X1 - sc.X0) / (n1 - 1);
            return mode_sup_l2_norm(sc, tau, row, sc.X0, h, n1, 32);
        };
        return tau_scaling_fit(norm_at, taus, predicted, 0.15);
    };

    const ScalingFit f_k0 = mode_fit(OpRow::K0_22, -1.5);
    const ScalingFit f_phf = mode_fit(OpRow::PhfK0_22, -2.0);
    const ScalingFit f_phfj = mode_fit(OpRow::PhfKj_22, -1.0);

    // the mixed-exponent row has no single-mode reduction: estimate it by
    // duality-map power iteration on a grid that resolves tau oscillations
    auto grid_norm = [&](double tau) {
        const int n1 = std::max(129, int(2.0 * tau) + 1);
        const GridField proto = make_field(sc.d, n1, 16, sc.X0, sc.X1, 2.0);
        NormProbe probe;
        op_row_exponents(OpRow::K0_2sp_2, sc.d, probe.p, probe.q);
        probe.restarts = 3;
        probe.iters = 30;
        probe.seed = 7;
        return estimate_pq_norm(make_row_op(sc, tau, OpRow::K0_2sp_2), proto,
                                probe).value;
    };
    const double pred_mixed = -(0.75 + 1.0 / 6.0);
    const ScalingFit f_mix = tau_scaling_fit(grid_norm, taus, pred_mixed, 0.15);

    const double gap = f_k0.slope - f_phf.slope;
    const bool ok = f_k0.pass && !f_k0.inconclusive
        && f_phf.pass && !f_phf.inconclusive
        && f_phfj.pass && !f_phfj.inconclusive
        && f_mix.pass && !f_mix.inconclusive
        && gap >= 0.3;
    report(3, ok,
           "tau-scaling slopes: base " + fnum(f_k0.slope) + " (pred -1.5), "
               + "projected " + fnum(f_phf.slope) + " (pred -2), "
               + "projected transverse " + fnum(f_phfj.slope) + " (pred -1), "
               + "mixed-exponent " + fnum(f_mix.slope) + " (pred "
               + fnum(pred_mixed) + "), projection gain " + fnum(gap)
               + " (need >= 0.3)");
}

// ---------------------------------------------------------------------------
// 4. strip inequality ratio uniform in tau over seeded bump solutions

void criterion_4() {
    ExperimentConfig cfg;
    cfg.experiment = "carleman-verify";
    cfg.seed = 42;
    cfg.has_seed = true;
    cfg.set("cases", "100");
    cfg.set("taus", "[8, 16, 32, 64, 128]");
    cfg.set("n1", "128");
    cfg.set("nperp", "16");
    const ReportBundle b = run_experiment(cfg);
    const Verdict& slope = verdict_named(b, "slope");
    const Verdict& disp = verdict_named(b, "dispersion");
    const Verdict& cons = verdict_named(b, "consistency");
    const bool ok = slope.pass && disp.pass && cons.pass;
    report(4, ok,
           "strip inequality over 100 bumps, tau 8..128: ratio drift "
               + fnum(slope.value) + " (tol 0.1), max/median "
               + fnum(disp.value) + " (tol 5), sources consistent: "
               + (cons.pass ? "yes" : "no"));
}

// ---------------------------------------------------------------------------
// 5. weight family extremes and the uniform tilt neighborhood

void criterion_5() {
    WeightVector k;
    k.k = {1.0, 0.0, 0.0};
    std::mt19937_64 rng(6);
    const ComparisonResult res = weight_comparison(
        {k}, cap_domain_O(3, 1.0), cap_domain_slab(3, 1.0), 2000, rng);
    const double e_inf = std::fabs(res.inf_O - 1.0 / 9.0);
    const double e_sup = std::fabs(res.sup_slab - 49.0 / 576.0);
    const double e_rho = std::fabs(res.rho - 15.0 / 49.0);
    const EpsilonSearch eps = find_epsilon(1.0, 0.25, 32, 200, 99);
    const bool ok = e_inf <= 1e-9 && e_sup <= 1e-9 && e_rho <= 1e-9
        && eps.found && eps.eps > 0.0 && eps.alpha_uniform > 0.0
        && eps.beta_uniform > 0.0;
    report(5, ok,
           "weight extremes: |inf - 1/9| = " + fnum(e_inf) + ", |sup - 49/576| = "
               + fnum(e_sup) + ", |rho - 15/49| = " + fnum(e_rho)
               + " (tol 1e-9); eps = " + fnum(eps.eps) + " over 32 tilts, alpha "
               + fnum(eps.alpha_uniform) + ", beta " + fnum(eps.beta_uniform));
}

// ---------------------------------------------------------------------------
// 6. concentration family guarantees on large seeded clouds

void criterion_6() {
    const std::vector<int> sizes = {10000, 30000, 100000};
    const std::vector<std::uint64_t> seeds = {101, 102, 103};
    bool ok = true;
    std::string note;
    for (std::size_t m = 0; m < sizes.size(); ++m) {
        const DiscreteMeasure mu = synth_measure(sizes[m], seeds[m]);
        double ratio4 = 0.0, ratio8 = 0.0;
        for (int kgrid : {4, 8}) {
            const ConcentrationFamily fam =
                concentration_search(mu, 4.0, 0.3, kgrid);
            bool disjoint = true, half = true;
            const DiscreteMeasure push = pushforward_Y(mu);
            for (std::size_t j = 0; j < fam.entries.size(); ++j) {
                const auto& e = fam.entries[j];
                const DiscreteMeasure tilted = tilt_measure(push, e.k);
                if (mass_fraction_outside(tilted, e.box_y) > 0.5 + 1e-12)
                    half = false;
                for (std::size_t i = 0; i < j; ++i)
                    if (e.box_y.intersects(fam.entries[i].box_y))
                        disjoint = false;
            }
            ok = ok && disjoint && half && fam.ratio > 0.0;
            (kgrid == 4 ? ratio4 : ratio8) = fam.ratio;
        }
        const double rel = std::fabs(ratio8 - ratio4) / ratio4;
        ok = ok && rel <= 0.3;
        if (!note.empty()) note += ", ";
        note += std::to_string(sizes[m]) + " pts: ratio " + fnum(ratio4)
            + ", doubling drift " + fnum(rel);
    }
    report(6, ok, "concentration families verified (disjoint, half mass); "
                      + note + " (drift tol 0.3)");
}

// ---------------------------------------------------------------------------
// 7. level-set splitter: constraints, tail bound, box selection

void criterion_7() {
    // (a) the default laboratory configuration satisfies every constraint
    ExperimentConfig cfg;
    cfg.experiment = "split-potentials";
    cfg.seed = 3;
    cfg.has_seed = true;
    cfg.set("q0", "6");
    cfg.set("q1", "6");
    cfg.set("q2", "6");
    cfg.set("n", "8");
    const ReportBundle b = run_experiment(cfg);
    const bool constraints_ok = verdict_named(b, "bounded_parts").pass
        && verdict_named(b, "spike_parts").pass
        && verdict_named(b, "smallness").pass
        && verdict_named(b, "n_above_tau3").pass;

    // (b) spike tail bound: mass above the cut level against the full norm
    int cheb_pass = 0;
    const int cheb_trials = 100;
    for (int t = 0; t < cheb_trials; ++t) {
        std::mt19937 rng(500u + t);
        const GridField V = random_scalar(17, 8, -1.0, 1.0, 2.0, rng, 4.0);
        const auto W1 = random_vector(17, 8, -1.0, 1.0, 2.0, rng, 4.0);
        const auto W2 = random_vector(17, 8, -1.0, 1.0, 2.0, rng, 4.0);
        const double q1 = 5.0;
        const PotentialSplit s = split_potentials(V, W1, W2, 6.0, q1, 6.0, 2.0);
        const double lhs = std::pow(vec_lp_norm(s.W1_d, 3.0), 3.0);
        const double rhs = std::pow(s.lambda1, 3.0 - q1)
            * std::pow(vec_lp_norm(W1, q1), q1);
        if (lhs <= rhs * (1.0 + 1e-12)) ++cheb_pass;
    }

    // (c) box selection succeeds whenever the summation property dominates
    // the contradiction bound with a factor-2 margin
    ConstraintConstants cc;
    const double r = (1.0 + cc.eps) / (1.0 - cc.eps);
    int jstar_pass = 0;
    const int jstar_trials = 100;
    for (int t = 0; t < jstar_trials; ++t) {
        std::mt19937 rng(1000u + t);
        std::uniform_int_distribution<int> un(2, 10);
        const double n = un(rng);
        auto W1 = random_vector(25, 8, -2.0, -1.0, 2.0, rng, 1.0);
        auto W2 = random_vector(25, 8, -2.0, -1.0, 2.0, rng, 1.0);
        ConcentrationFamily fam;
        const int m = 4;
        const double w = 1.0 / m;
        double sum_inv = 0.0;
        for (int j = 0; j < m; ++j) {
            ConcentrationEntry e;
            e.k = {n, 0.0, 0.0};
            e.box_x.lo = {-2.0 + j * w + 0.01, -1.0, -1.0};
            e.box_x.hi = {-2.0 + (j + 1) * w - 0.01, 1.0, 1.0};
            fam.entries.push_back(e);
            sum_inv += 1.0 / e.box_x.volume();
        }
        const double g1 = vec_lp_norm(W1, 3.0);
        const double g2 = vec_lp_norm(W2, 3.0);
        const double mass = std::pow(g1, 3.0) + std::pow(r * g2, 3.0);
        const double s = std::cbrt(
            0.5 * sum_inv / (std::pow(8.0 * cc.C2 * n, 3.0) * 4.0 * mass));
        for (auto& comp : W1)
            for (auto& z : comp.v) z *= s;
        for (auto& comp : W2)
            for (auto& z : comp.v) z *= s;
        const JstarResult res = select_jstar(fam, W1, W2, n, cc);
        if (res.precondition_ok && res.found) ++jstar_pass;
    }

    const bool ok = constraints_ok && cheb_pass == cheb_trials
        && jstar_pass == jstar_trials;
    report(7, ok,
           std::string("splitter audit: constraints ")
               + (constraints_ok ? "pass" : "FAIL") + ", tail bound "
               + std::to_string(cheb_pass) + "/100, box selection "
               + std::to_string(jstar_pass) + "/100");
}

// ---------------------------------------------------------------------------
// 8. exponent calculus closed forms

void criterion_8() {
    const bool limit_ok = gamma_exponent(kInf, 3) == 2.0 / 3.0;

    bool continuity_ok = true;
    double worst_jump = 0.0;
    for (int d : {3, 4, 5}) {
        const double q = d;
        const double upper = 1.0 / (1.5 * (1.0 - d / (2.0 * q)) + 1.0 / (2.0 * q));
        const double lower = 1.0 / ((0.75 + 1.0 / (2.0 * d)) * (2.0 - d / q));
        const double at = gamma_exponent(q, d);
        const double jump = std::max(std::fabs(upper - lower),
                                     std::fabs(at - upper));
        worst_jump = std::max(worst_jump, jump);
        continuity_ok = continuity_ok && jump <= 1e-12;
    }

    bool order_ok = true;
    for (int d : {3, 4, 5}) {
        const double lo = 0.5 * (3.0 * d - 2.0) + 0.1;
        const double hi = 20.0 * d;
        for (int i = 0; i < 50; ++i) {
            const double q = lo + (hi - lo) * i / 49.0;
            if (!(delta_exponent(q, d) < delta_prev_exponent(q, d)))
                order_ok = false;
        }
    }

    const bool ok = limit_ok && continuity_ok && order_ok;
    report(8, ok,
           std::string("exponent calculus: gamma(inf) = 2/3 ")
               + (limit_ok ? "exact" : "FAIL") + ", branch jump at q = d "
               + fnum(worst_jump) + " (tol 1e-12), delta < previous rate on "
               + "50-point grids for d in {3,4,5}: " + (order_ok ? "yes" : "no"));
}

// ---------------------------------------------------------------------------
// 9. three-ball interpolation: harmonic family exactness and potential growth

void criterion_9() {
    // (a) harmonic monomials Re(x1 + i x2)^m at the target resolution
    BoxGrid g{64, -1.05, 1.05};
    const auto ww = ball_weights(g, {0, 0, 0}, 0.25);
    const auto wO = ball_weights(g, {0, 0, 0}, 0.5);
    const auto wOm = ball_weights(g, {0, 0, 0}, 1.0);
    std::vector<ThreeBallsSample> mono;
    for (int m = 1; m <= 6; ++m) {
        BoxField u = make_box_field(g);
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j)
                for (int k = 0; k < g.n; ++k) {
                    const Vec3 p = g.point(i, j, k);
                    const std::complex<double> z(p[0], p[1]);
                    u.v[g.idx(i, j, k)] = std::pow(z, m).real();
                }
        mono.push_back({box_h1_norm(u, ww), box_h1_norm(u, wO),
                        box_h1_norm(u, wOm)});
    }
    const double C_half = three_balls_C(mono, 0.5);
    const ThreeBallsFit mono_fit = three_balls_fit(mono, 1.01);
    const bool mono_ok = C_half <= 1.01 && mono_fit.feasible
        && mono_fit.alpha >= 0.5;

    // (b) growth of the constant when a bounded potential is scaled up
    const double R = 0.25;
    BoxGrid gs{64, -4.4 * R, 4.4 * R};
    const Mask interior = ball_mask(gs, {0, 0, 0}, 4.0 * R);
    const auto sw = ball_weights(gs, {0, 0, 0}, R);
    const auto sO = ball_weights(gs, {0, 0, 0}, 2.0 * R);
    const auto sOm = ball_weights(gs, {0, 0, 0}, 4.0 * R);
    const BoxField Vbase = synth_potential(gs, interior, 22u, 1.0, kInf);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u01(-1.0, 1.0);
    std::vector<double> lognorm, loglogC;
    bool feasible = true;
    std::string scale_note;
    for (double s : {1.0, 2.0, 4.0, 8.0}) {
        Potentials pot;
        pot.V = Vbase;
        for (auto& v : pot.V.v) v *= s;
        std::vector<ThreeBallsSample> samples;
        for (int f = 0; f < 4; ++f) {
            std::vector<double> a(7);
            for (auto& c : a) c = u01(rng);
            const auto bd = [&](const Vec3& x) { return harmonic_basis(x, a); };
            const SolveResult sol = solve_elliptic(gs, interior, pot, bd);
            if (!sol.converged)
                throw std::runtime_error("acceptance: elliptic solve stalled");
            samples.push_back({box_h1_norm(sol.u, sw), box_h1_norm(sol.u, sO),
                               box_h1_norm(sol.u, sOm)});
        }
        const double Cs = three_balls_C(samples, 0.5);
        const ThreeBallsFit fit = three_balls_fit(samples, std::max(1.01, Cs));
        feasible = feasible && fit.feasible && fit.alpha > 0.0 && fit.alpha < 1.0;
        if (Cs > 1.0) {
            lognorm.push_back(std::log(s));
            loglogC.push_back(std::log(std::log(Cs)));
        }
        if (!scale_note.empty()) scale_note += " ";
        scale_note += fnum(Cs);
    }
    bool growth_ok = true;
    double expn = 0.0;
    if (lognorm.size() >= 2) {
        expn = ls_slope(lognorm, loglogC);
        growth_ok = expn <= 2.0 / 3.0 + 0.1;
    }
    const bool ok = mono_ok && feasible && growth_ok;
    report(9, ok,
           "three balls at 64^3: harmonic constant " + fnum(C_half)
               + " (tol 1.01) at exponent 1/2; scaled-potential constants ["
               + scale_note + "], log-constant growth exponent " + fnum(expn)
               + " (tol " + fnum(2.0 / 3.0 + 0.1) + ")");
}

// ---------------------------------------------------------------------------
// 10. conformal reflection: involution, fixed sphere, harmonicity order

void criterion_10() {
    const double R = 1.0;
    // pointwise involution
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double inv_err = 0.0;
    for (int t = 0; t < 200; ++t) {
        Vec3 x = {u(rng), u(rng), u(rng)};
        if (norm3(x) < 0.2) continue;
        const Vec3 tt = kelvin_T(kelvin_T(x, R), R);
        for (int a = 0; a < 3; ++a)
            inv_err = std::max(inv_err, std::fabs(tt[a] - x[a]));
    }

    // grid-level double transform and fixed-sphere mismatch
    auto smooth = [](const Vec3& p) {
        return p[0] + 0.2 * (p[0] * p[0] + p[1] * p[1] + p[2] * p[2])
            - 0.4 * p[1];
    };
    auto run = [&](int n) {
        BoxGrid g{n, -2.2, 2.2};
        BoxField f = make_box_field(g);
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j)
                for (int k = 0; k < g.n; ++k)
                    f.v[g.idx(i, j, k)] = smooth(g.point(i, j, k));
        const Mask outer = annulus_mask(g, {0, 0, 0}, 0.5, 2.0);
        const Mask inner = annulus_mask(g, {0, 0, 0}, 0.75, 1.3);
        const BoxField once = kelvin_scalar(f, R, g, outer);
        const BoxField twice = kelvin_scalar(once, R, g, inner);
        double err = 0.0, sphere = 0.0;
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j)
                for (int k = 0; k < g.n; ++k) {
                    const std::size_t id = g.idx(i, j, k);
                    const Vec3 p = g.point(i, j, k);
                    if (inner[id])
                        err = std::max(err, std::fabs(twice.v[id] - f.v[id]));
                    if (outer[id] && std::fabs(norm3(p) - R) < 0.5 * g.h())
                        sphere = std::max(sphere,
                                          std::fabs(once.v[id] - smooth(p)));
                }
        return std::pair<double, double>(err, sphere);
    };
    const auto [e1, s1] = run(45);
    const auto [e2, s2] = run(89);

    // harmonicity of the transform of u = 1: the image is the fundamental
    // profile, whose 7-point residual is pure second-order truncation; the
    // stride keeps evaluation nodes fixed across refinement
    auto residual = [&](int n, int stride) {
        BoxGrid g{n, -2.2, 2.2};
        BoxField one = make_box_field(g);
        for (auto& v : one.v) v = 1.0;
        const Mask shell = annulus_mask(g, {0, 0, 0}, 0.6, 1.9);
        const BoxField t = kelvin_scalar(one, R, g, shell);
        const double h2 = g.h() * g.h();
        double worst = 0.0;
        for (int i = stride; i + 1 < g.n; i += stride)
            for (int j = stride; j + 1 < g.n; j += stride)
                for (int k = stride; k + 1 < g.n; k += stride) {
                    const Vec3 p = g.point(i, j, k);
                    const double r = norm3(p);
                    if (r < 0.8 || r > 1.6) continue;
                    const double lap =
                        (t.v[g.idx(i + 1, j, k)] + t.v[g.idx(i - 1, j, k)]
                         + t.v[g.idx(i, j + 1, k)] + t.v[g.idx(i, j - 1, k)]
                         + t.v[g.idx(i, j, k + 1)] + t.v[g.idx(i, j, k - 1)]
                         - 6.0 * t.v[g.idx(i, j, k)]) / h2;
                    worst = std::max(worst, std::fabs(lap));
                }
        return worst;
    };
    const double r1 = residual(41, 1);
    const double r2 = residual(81, 2);

    const bool ok = inv_err <= 1e-13 && e1 < 0.05 && e1 / e2 > 2.5
        && s1 < 0.5 && s2 < 0.7 * s1 && r1 < 0.5 && r1 / r2 > 3.5;
    report(10, ok,
           "reflection: involution error " + fnum(inv_err)
               + " (tol 1e-13), double-transform error " + fnum(e1) + " -> "
               + fnum(e2) + " under refinement, sphere mismatch " + fnum(s1)
               + " -> " + fnum(s2) + ", harmonicity residual ratio "
               + fnum(r1 / r2) + " (need > 3.5, second order)");
}

// ---------------------------------------------------------------------------
// 11. chain propagation with solved fields on two geometries

struct ChainGeometry {
    std::string name;
    std::function<bool(const Vec3&)> in_Omega;
    std::function<double(const Vec3&)> clearance;
    Vec3 x0;
    double r0 = 0.0;
    std::vector<Vec3> targets;
    std::function<std::vector<Polyline>(const Vec3&)> oracle;
    BoxGrid grid;
    Mask interior;
};

bool run_chain_geometry(const ChainGeometry& geo, std::string& note) {
    const GCResult gc = check_GC(geo.in_Omega, geo.clearance, geo.targets,
                                 geo.oracle);
    if (!gc.all_ok) {
        note += geo.name + ": path certification failed; ";
        return false;
    }

    // harmonic samples on the domain
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u01(-1.0, 1.0);
    std::vector<BoxField> fields;
    std::vector<double> omega_norms;
    Potentials pot;  // no lower-order terms: the samples are harmonic
    for (int f = 0; f < 5; ++f) {
        std::vector<double> a(7);
        for (auto& c : a) c = u01(rng);
        const auto bd = [&](const Vec3& x) { return harmonic_basis(x, a); };
        const SolveResult sol =
            solve_elliptic(geo.grid, geo.interior, pot, bd);
        if (!sol.converged) {
            note += geo.name + ": solve stalled; ";
            return false;
        }
        omega_norms.push_back(box_h1_norm(sol.u, geo.interior));
        fields.push_back(sol.u);
    }

    bool ok = true;
    for (std::size_t ti = 0; ti < geo.targets.size(); ++ti) {
        const PathCert& cert = gc.certs[ti];
        // probe composition with the unit-step constants first, then rerun
        // with the empirical per-step constant measured on the samples
        const ChainResult probe = chain_propagate(cert, geo.r0, 1.5, 0.5);
        ok = ok && probe.alpha > 0.0 && probe.alpha < 1.0 && !probe.capped;

        const double Ry = probe.R_y;
        double C_emp = 1.0;
        std::vector<std::vector<double>> ball_h1(fields.size());
        for (std::size_t s = 0; s < fields.size(); ++s) {
            for (const Vec3& c : probe.centers)
                ball_h1[s].push_back(
                    box_h1_norm(fields[s], ball_weights(geo.grid, c, Ry)));
            for (std::size_t j = 0; j + 1 < probe.centers.size(); ++j) {
                const double step = ball_h1[s][j + 1]
                    / std::sqrt(ball_h1[s][j] * omega_norms[s]);
                C_emp = std::max(C_emp, step);
            }
        }
        const ChainResult comp = chain_propagate(cert, geo.r0, C_emp, 0.5);
        for (std::size_t s = 0; s < fields.size(); ++s) {
            const double lhs = ball_h1[s].back();
            const double rhs = comp.C
                * std::pow(ball_h1[s].front(), comp.alpha)
                * std::pow(omega_norms[s], 1.0 - comp.alpha);
            if (!(lhs <= rhs * (1.0 + 1e-9))) ok = false;
        }
        if (ti == 0)
            note += geo.name + ": N = " + std::to_string(comp.N) + ", alpha = "
                + fnum(comp.alpha) + ", step constant " + fnum(C_emp) + "; ";
    }
    return ok;
}

void criterion_11() {
    std::string note;

    ChainGeometry ball;
    ball.name = "concentric";
    ball.in_Omega = [](const Vec3& x) { return norm3(x) < 1.0; };
    ball.clearance = [](const Vec3& x) { return 1.0 - norm3(x); };
    ball.x0 = {0.0, 0.0, 0.0};
    ball.r0 = 0.25;
    ball.targets = {{0.4, 0.0, 0.0}, {0.0, 0.4, 0.0}, {0.28, 0.28, 0.0}};
    const Vec3 bx0 = ball.x0;
    ball.oracle = [bx0](const Vec3& y) {
        return std::vector<Polyline>{Polyline{{bx0, y}}};
    };
    ball.grid = BoxGrid{81, -1.05, 1.05};
    ball.interior = ball_mask(ball.grid, {0, 0, 0}, 1.0);
    const bool ok_ball = run_chain_geometry(ball, note);

    ChainGeometry ann;
    ann.name = "annulus";
    const double ri = 0.15, ro = 1.2;
    ann.in_Omega = [ri, ro](const Vec3& x) {
        const double r = norm3(x);
        return r > ri && r < ro;
    };
    ann.clearance = [ri, ro](const Vec3& x) {
        const double r = norm3(x);
        return std::min(r - ri, ro - r);
    };
    ann.x0 = {0.675, 0.0, 0.0};
    ann.r0 = 0.2;
    ann.targets = {{0.0, 0.675, 0.0}, {-0.675, 0.0, 0.0}};
    const Vec3 ax0 = ann.x0;
    ann.oracle = [ax0](const Vec3& y) {
        std::vector<Polyline> cands;
        cands.push_back(Polyline{{ax0, y}});
        for (double sgn : {1.0, -1.0}) {
            cands.push_back(Polyline{{ax0, Vec3{0.0, sgn * 0.675, 0.0}, y}});
            cands.push_back(Polyline{{ax0, Vec3{0.0, 0.0, sgn * 0.675}, y}});
        }
        return cands;
    };
    ann.grid = BoxGrid{91, -1.25, 1.25};
    ann.interior = annulus_mask(ann.grid, {0, 0, 0}, ri, ro);
    const bool ok_ann = run_chain_geometry(ann, note);

    report(11, ok_ball && ok_ann,
           "chain propagation with solved harmonic samples: " + note
               + "composed estimate verified on every sample");
}

} // namespace

int main() {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    try {
        criterion_1();
        criterion_2();
        criterion_3();
        criterion_4();
        criterion_5();
        criterion_6();
        criterion_7();
        criterion_8();
        criterion_9();
        criterion_10();
        criterion_11();
    } catch (const std::exception& e) {
        std::cerr << "acceptance aborted: " << e.what() << "\n";
        return 2;
    }
    const double secs =
        std::chrono::duration<double>(clock::now() - t0).count();
    std::printf("%d of 11 criteria passed in %.1f s\n", 11 - g_failures, secs);
    return g_failures == 0 ? 0 : 1;
}
