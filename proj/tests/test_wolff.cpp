#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "ucl/carleman.hpp"
#include "ucl/grid.hpp"
#include "ucl/wolff.hpp"

using namespace ucl;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

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

DiscreteMeasure cloud_measure(int npts, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> ux(-1.6, -0.4);
    std::uniform_real_distribution<double> up(-1.0, 1.0);
    std::uniform_real_distribution<double> uw(-1.0, 1.0);
    DiscreteMeasure mu;
    for (int i = 0; i < npts; ++i) {
        mu.points.push_back({ux(rng), up(rng), up(rng)});
        mu.log_weights.push_back(uw(rng));
    }
    return mu;
}

} // namespace

TEST_CASE("exponent formulas match the closed forms") {
    for (int d : {3, 4, 5})
        CHECK(gamma_exponent(kInf, d) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(gamma_exponent(3.0, 3) == doctest::Approx(12.0 / 11.0).epsilon(1e-14));
    // both branches meet at q = d with value 1/(3/4 + 1/(2d))
    for (int d : {3, 4, 5}) {
        const double high = 1.0 / (1.5 * (1.0 - 0.5) + 1.0 / (2.0 * d));
        const double low = 1.0 / ((0.75 + 0.5 / d) * 1.0);
        CHECK(std::fabs(high - low) < 1e-14);
        CHECK(gamma_exponent(double(d), d) == doctest::Approx(high).epsilon(1e-14));
        CHECK(std::fabs(gamma_exponent(double(d) + 1e-9, d)
                        - gamma_exponent(double(d) - 1e-9, d)) < 1e-7);
    }
    CHECK(delta_exponent(6.0, 3) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(delta_exponent(kInf, 3) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(delta_prev_exponent(kInf, 3) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(gamma_pair_exponent(kInf, kInf, 3) == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("exponent domains are enforced") {
    CHECK_THROWS_AS(gamma_exponent(1.5, 3), std::domain_error);
    CHECK_THROWS_AS(gamma_exponent(1.0, 3), std::domain_error);
    CHECK_THROWS_AS(delta_exponent(3.0, 3), std::domain_error);
    CHECK_THROWS_AS(delta_prev_exponent(3.5, 3), std::domain_error);
    CHECK_THROWS_AS(gamma_pair_exponent(3.5, 3.5, 3), std::domain_error);
    CHECK_NOTHROW(gamma_pair_exponent(50.0, 50.0, 3));
}

TEST_CASE("gamma and delta decrease toward their limits and beat the older rate") {
    for (int d : {3, 4, 5}) {
        double prev_g = kInf;
        for (double q = 0.51 * d; q < 40.0 * d; q *= 1.17) {
            const double g = gamma_exponent(q, d);
            CHECK(g > 2.0 / 3.0);
            CHECK(g < prev_g);
            prev_g = g;
        }
        CHECK(gamma_exponent(1e9, d) == doctest::Approx(2.0 / 3.0).epsilon(1e-6));

        double prev_d = kInf;
        for (double q = 1.02 * d; q < 60.0 * d; q *= 1.2) {
            const double dl = delta_exponent(q, d);
            CHECK(dl > 2.0);
            CHECK(dl < prev_d);
            prev_d = dl;
            if (q > 0.5 * (3.0 * d - 2.0) + 0.1)
                CHECK(dl < delta_prev_exponent(q, d));
        }
    }
}

TEST_CASE("tilting reweights without moving points") {
    DiscreteMeasure mu;
    mu.points = {{-0.5, 0.3, 0.1}, {-1.2, -0.4, 0.6}};
    mu.log_weights = {0.2, -0.7};

    const DiscreteMeasure same = tilt_measure(mu, {0.0, 0.0, 0.0});
    for (std::size_t i = 0; i < mu.size(); ++i) {
        CHECK(same.points[i] == mu.points[i]);
        CHECK(same.log_weights[i] == doctest::Approx(mu.log_weights[i]));
    }

    const std::vector<double> k = {2.0, -1.0, 0.5};
    const DiscreteMeasure tk = tilt_measure(mu, k);
    double dot0 = 0.0, dot1 = 0.0;
    for (int c = 0; c < 3; ++c) {
        dot0 += k[c] * mu.points[0][c];
        dot1 += k[c] * mu.points[1][c];
    }
    CHECK(tk.log_weights[0] - mu.log_weights[0] == doctest::Approx(dot0).epsilon(1e-14));
    // mass ratio of the two points scales as e^{k.(x0 - x1)}
    const double lr = (tk.log_weights[0] - tk.log_weights[1])
        - (mu.log_weights[0] - mu.log_weights[1]);
    CHECK(lr == doctest::Approx(dot0 - dot1).epsilon(1e-14));

    // enormous tilts stay representable in log form
    const DiscreteMeasure huge = tilt_measure(mu, {1000.0, 0.0, 0.0});
    for (double lw : huge.log_weights) CHECK(std::isfinite(lw));
    CHECK(mass_fraction_outside(huge, quantile_box(huge, 1.0 / 12.0)) <= 0.5);
}

TEST_CASE("pushforward squares the first coordinate on the left half space") {
    DiscreteMeasure mu;
    mu.points = {{-0.5, 0.7, -0.2}, {-1.5, 0.0, 0.3}};
    mu.log_weights = {0.1, 0.4};
    const DiscreteMeasure muy = pushforward_Y(mu);
    CHECK(muy.points[0][0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(muy.points[0][1] == doctest::Approx(0.7));
    CHECK(muy.points[0][2] == doctest::Approx(-0.2));
    CHECK(muy.points[1][0] == doctest::Approx(2.25).epsilon(1e-15));
    for (std::size_t i = 0; i < mu.size(); ++i)
        CHECK(muy.log_weights[i] == mu.log_weights[i]);

    DiscreteMeasure bad = mu;
    bad.points[1][0] = 0.2;
    CHECK_THROWS_AS(pushforward_Y(bad), std::invalid_argument);

    AxisBox yb;
    yb.lo = {1.0 / 9.0, -1.0, -1.0};
    yb.hi = {0.25, 1.0, 1.0};
    const AxisBox xb = pullback_box_X(yb);
    CHECK(xb.lo[0] == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(xb.hi[0] == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
    CHECK(xb.lo[1] == -1.0);
    CHECK(xb.hi[2] == 1.0);
}

TEST_CASE("quantile boxes chase the tilt along a segment") {
    DiscreteMeasure mu;
    const int m = 200;
    for (int j = 0; j <= m; ++j) {
        mu.points.push_back({double(j) / m, 0.0, 0.0});
        mu.log_weights.push_back(0.0);
    }
    double prev_lo = -1.0, prev_width = kInf;
    for (double kappa : {0.0, 10.0, 40.0, 160.0}) {
        const DiscreteMeasure tk = tilt_measure(mu, {kappa, 0.0, 0.0});
        const AxisBox box = quantile_box(tk, 1.0 / 12.0);
        CHECK(mass_fraction_outside(tk, box) <= 0.5);
        CHECK(box.lo[0] > prev_lo);
        const double width = box.hi[0] - box.lo[0];
        if (kappa > 0.0) CHECK(width < prev_width);
        prev_lo = box.lo[0];
        prev_width = width;
    }
}

TEST_CASE("single point mass gives a one-box family with zero outside mass") {
    DiscreteMeasure mu;
    mu.points = {{-0.75, 0.25, -0.125}};
    mu.log_weights = {0.0};
    const ConcentrationFamily fam = concentration_search(mu, 5.0, 0.2, 3);
    REQUIRE(fam.entries.size() == 1);
    const auto& e = fam.entries.front();
    CHECK(e.outside_fraction == 0.0);
    CHECK(e.box_y.volume() == 0.0);
    CHECK(std::isinf(e.inv_volume_y));
    CHECK(e.box_x.contains(mu.points.front()));
}

TEST_CASE("concentration family is disjoint and concentrated") {
    const DiscreteMeasure mu = cloud_measure(300, 20260823u);
    const ConcentrationFamily fam = concentration_search(mu, 4.0, 0.3, 4);
    REQUIRE(!fam.entries.empty());
    CHECK(fam.ratio > 0.0);
    double acc = 0.0;
    for (std::size_t a = 0; a < fam.entries.size(); ++a) {
        const auto& e = fam.entries[a];
        CHECK(e.outside_fraction <= 0.5);
        CHECK(e.inv_volume_y > 0.0);
        acc += e.inv_volume_y;
        // the y-box pulls back onto the support half space
        CHECK(e.box_x.hi[0] <= 0.0);
        for (std::size_t b = a + 1; b < fam.entries.size(); ++b)
            CHECK(!e.box_y.intersects(fam.entries[b].box_y));
        // spot-check the mass bound independently of the search bookkeeping
        const DiscreteMeasure tk = tilt_measure(pushforward_Y(mu), e.k);
        CHECK(mass_fraction_outside(tk, e.box_y)
              == doctest::Approx(e.outside_fraction).epsilon(1e-12));
    }
    CHECK(fam.sum_inv_volume == doctest::Approx(acc).epsilon(1e-12));
}

TEST_CASE("family quality is stable under k-grid doubling") {
    const DiscreteMeasure mu = cloud_measure(300, 77u);
    const double s1 = concentration_search(mu, 4.0, 0.3, 4).sum_inv_volume;
    const double s2 = concentration_search(mu, 4.0, 0.3, 8).sum_inv_volume;
    CHECK(s2 / s1 > 0.7);
    CHECK(s2 / s1 < 1.3);
}

TEST_CASE("level-set split reconstructs the potentials exactly") {
    std::mt19937 rng(11u);
    const GridField V = random_scalar(17, 8, -1.0, 1.0, 2.0, rng, 3.0);
    const auto W1 = random_vector(17, 8, -1.0, 1.0, 2.0, rng, 2.0);
    const auto W2 = random_vector(17, 8, -1.0, 1.0, 2.0, rng, 2.0);

    for (double q0 : {2.0, 6.0}) {
        const PotentialSplit s = split_potentials(V, W1, W2, q0, 4.0, 6.0, 3.0);
        if (q0 < 3.0) {
            for (const auto& z : s.V_inf.v) CHECK(std::abs(z) == 0.0);
        } else {
            for (const auto& z : s.V_half.v) CHECK(std::abs(z) == 0.0);
        }
        double worst = 0.0;
        for (std::size_t i = 0; i < V.v.size(); ++i) {
            const cplx sum = s.V_half.v[i] + s.V_d.v[i] + s.V_inf.v[i];
            worst = std::max(worst, std::abs(sum - V.v[i]));
            // one part vanishes at every point: disjoint level sets
            CHECK(std::abs(s.V_d.v[i]) * std::abs(q0 < 3.0 ? s.V_half.v[i]
                                                           : s.V_inf.v[i]) == 0.0);
        }
        CHECK(worst == 0.0);

        CHECK(vec_lp_norm(s.W1_inf, kInf) <= s.lambda1);
        CHECK(vec_lp_norm(s.W2_inf, kInf) <= s.lambda2);
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < V.v.size(); ++i) {
                CHECK(std::abs(s.W1_d[c].v[i] + s.W1_inf[c].v[i] - W1[c].v[i]) == 0.0);
                CHECK(std::abs(s.W1_d[c].v[i]) * std::abs(s.W1_inf[c].v[i]) == 0.0);
            }
    }
}

TEST_CASE("everything below threshold stays in the bounded part") {
    std::mt19937 rng(5u);
    const GridField V = random_scalar(9, 4, -1.0, 1.0, 2.0, rng, 0.1);
    const auto W1 = random_vector(9, 4, -1.0, 1.0, 2.0, rng, 0.1);
    const auto W2 = random_vector(9, 4, -1.0, 1.0, 2.0, rng, 0.1);
    // lambda_1 = ||W1||_4 n^{3/8} comfortably dominates a 0.1-amplitude field
    const PotentialSplit s = split_potentials(V, W1, W2, 6.0, 4.0, 4.0, 50.0);
    CHECK(s.lambda1 > vec_lp_norm(W1, kInf));
    for (int c = 0; c < 3; ++c)
        for (const auto& z : s.W1_d[c].v) CHECK(std::abs(z) == 0.0);
}

TEST_CASE("spike tails obey the Chebyshev bound at the threshold") {
    for (unsigned seed : {1u, 2u, 3u, 4u}) {
        std::mt19937 rng(seed);
        const GridField V = random_scalar(17, 8, -1.0, 1.0, 2.0, rng, 4.0);
        const auto W1 = random_vector(17, 8, -1.0, 1.0, 2.0, rng, 4.0);
        const auto W2 = random_vector(17, 8, -1.0, 1.0, 2.0, rng, 4.0);
        const double q1 = 5.0;
        const PotentialSplit s = split_potentials(V, W1, W2, 6.0, q1, 6.0, 2.0);
        const double lhs = std::pow(vec_lp_norm(s.W1_d, 3.0), 3.0);
        const double rhs = std::pow(s.lambda1, 3.0 - q1)
            * std::pow(vec_lp_norm(W1, q1), q1);
        CHECK(lhs <= rhs * (1.0 + 1e-12));
    }
}

TEST_CASE("thresholds grow with n at the stated rate") {
    std::mt19937 rng(9u);
    const GridField V = random_scalar(9, 4, -1.0, 1.0, 2.0, rng);
    const auto W1 = random_vector(9, 4, -1.0, 1.0, 2.0, rng);
    const auto W2 = random_vector(9, 4, -1.0, 1.0, 2.0, rng);
    const double q1 = 5.0;
    const PotentialSplit a = split_potentials(V, W1, W2, 6.0, q1, 6.0, 4.0);
    const PotentialSplit b = split_potentials(V, W1, W2, 6.0, q1, 6.0, 8.0);
    CHECK(b.lambda1 / a.lambda1
          == doctest::Approx(std::pow(2.0, 1.5 / q1)).epsilon(1e-12));
    CHECK(b.lambda1 > a.lambda1);
}

TEST_CASE("constraint report flags oversized spikes") {
    std::mt19937 rng(13u);
    const GridField V = random_scalar(17, 8, -1.0, 1.0, 2.0, rng, 1e-3);
    const auto W1 = random_vector(17, 8, -1.0, 1.0, 2.0, rng, 1e-3);
    const auto W2 = random_vector(17, 8, -1.0, 1.0, 2.0, rng, 1e-3);
    ConstraintConstants cc;

    const PotentialSplit small = split_potentials(V, W1, W2, 6.0, 4.0, 4.0, 4.0);
    const ConstraintReport ok = check_split_constraints(small, cc);
    CHECK(ok.bounded_parts_ok);
    CHECK(ok.spike_parts_ok);
    CHECK(ok.smallness_ok);
    CHECK(ok.all_ok);
    CHECK(ok.bulk_V_lhs <= ok.bulk_V_rhs);
    CHECK(ok.smallness_lhs < ok.smallness_rhs);

    // uniform rescaling also rescales the thresholds, so spikes only appear
    // for heavy-tailed fields: plant sparse tall peaks over a tiny background
    auto W1b = W1;
    for (std::size_t i = 0; i < W1b[0].v.size(); i += 200) W1b[0].v[i] = 10.0;
    const PotentialSplit big = split_potentials(V, W1b, W2, 6.0, 4.0, 4.0, 4.0);
    CHECK(vec_lp_norm(big.W1_d, 3.0) > 0.0);
    const ConstraintReport bad = check_split_constraints(big, cc);
    CHECK(!bad.smallness_ok);
    CHECK(!bad.all_ok);
}

TEST_CASE("tau3 threshold arithmetic") {
    CHECK(tau3(0.0, 6.0, 0.0, 6.0, 0.0, 6.0, 3, 2.5) == doctest::Approx(2.5));
    // q = 2d at d = 3 applies the exponent 4
    CHECK(tau3(0.0, 6.0, 2.0, 6.0, 0.0, 6.0, 3, 1.0) == doctest::Approx(17.0));
    // large-amplitude scaling is governed by the potential exponent
    const double g = gamma_exponent(6.0, 3);
    const double s = 1e6;
    const double t = tau3(s, 6.0, 0.0, 6.0, 0.0, 6.0, 3, 1.0);
    CHECK(t / std::pow(s, g) == doctest::Approx(1.0).epsilon(1e-2));
}

namespace {

ConcentrationFamily slab_family(int m, double n, double X0, double X1) {
    ConcentrationFamily fam;
    const double w = (X1 - X0) / m;
    for (int j = 0; j < m; ++j) {
        ConcentrationEntry e;
        e.k = {n, 0.0, 0.0};
        e.box_x.lo = {X0 + j * w + 0.01, -1.0, -1.0};
        e.box_x.hi = {X0 + (j + 1) * w - 0.01, 1.0, 1.0};
        fam.entries.push_back(e);
    }
    return fam;
}

} // namespace

TEST_CASE("jstar picks the first admissible box when spikes vanish") {
    const ConcentrationFamily fam = slab_family(3, 4.0, -2.0, -1.0);
    std::vector<GridField> zero;
    for (int c = 0; c < 3; ++c)
        zero.push_back(make_field(3, 17, 8, -2.0, -1.0, 2.0));
    ConstraintConstants cc;
    const JstarResult res = select_jstar(fam, zero, zero, 4.0, cc);
    CHECK(res.precondition_ok);
    CHECK(res.found);
    CHECK(res.jstar == 0);
    for (double v : res.rule_lhs) CHECK(v == 0.0);
}

TEST_CASE("jstar failure produces the contradiction audit") {
    // one big box, huge tilt: the admissibility threshold 1/(|k| |E|^{1/d})
    // is tiny while the local spike norm stays at its (small) global value
    ConcentrationFamily fam;
    ConcentrationEntry e;
    e.k = {100.0, 0.0, 0.0};
    e.box_x.lo = {-2.0, -1.0, -1.0};
    e.box_x.hi = {-1.0, 1.0, 1.0};
    fam.entries.push_back(e);

    std::mt19937 rng(3u);
    auto W1 = random_vector(17, 8, -2.0, -1.0, 2.0, rng, 1.0);
    const double g = vec_lp_norm(W1, 3.0);
    for (auto& comp : W1)
        for (auto& z : comp.v) z *= 0.05 / g;
    std::vector<GridField> zero;
    for (int c = 0; c < 3; ++c)
        zero.push_back(make_field(3, 17, 8, -2.0, -1.0, 2.0));

    ConstraintConstants cc;
    const JstarResult res = select_jstar(fam, W1, zero, 100.0, cc);
    CHECK(res.precondition_ok);
    CHECK(!res.found);
    CHECK(res.jstar == -1);
    CHECK(res.rule_lhs.front() > res.rule_rhs.front());
    CHECK(res.audit_sum_inv > 0.0);
    CHECK(res.audit_bound > res.audit_sum_inv);  // summation property absent
    CHECK(res.message.find("no admissible box") != std::string::npos);

    // and an oversized spike trips the precondition instead
    auto W1big = W1;
    for (auto& comp : W1big)
        for (auto& z : comp.v) z *= 100.0;
    const JstarResult pre = select_jstar(fam, W1big, zero, 100.0, cc);
    CHECK(!pre.precondition_ok);
    CHECK(!pre.found);
}

TEST_CASE("jstar exists on every admissible random instance") {
    ConstraintConstants cc;
    const double r = (1.0 + cc.eps) / (1.0 - cc.eps);
    int found = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        std::mt19937 rng(1000u + t);
        std::uniform_int_distribution<int> un(2, 10);
        const double n = un(rng);
        auto W1 = random_vector(25, 8, -2.0, -1.0, 2.0, rng, 1.0);
        auto W2 = random_vector(25, 8, -2.0, -1.0, 2.0, rng, 1.0);
        const ConcentrationFamily fam = slab_family(4, n, -2.0, -1.0);
        double sum_inv = 0.0;
        for (const auto& e : fam.entries) sum_inv += 1.0 / e.box_x.volume();

        // scale the spikes so the summation property dominates the
        // failure-forced bound with a factor-2 margin; the pigeonhole
        // argument then guarantees an admissible box
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
        REQUIRE(res.precondition_ok);
        if (res.found) ++found;
    }
    CHECK(found == trials);
}
