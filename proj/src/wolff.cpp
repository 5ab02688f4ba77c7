#include "ucl/wolff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ucl/carleman.hpp"

namespace ucl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::domain_error(msg);
}

} // namespace

double gamma_exponent(double q, int d) {
    require(d >= 3, "gamma exponent: dimension must be >= 3");
    require(q > 0.5 * d, "gamma exponent: domain is q > d/2");
    if (std::isinf(q)) return 2.0 / 3.0;
    if (q >= double(d))
        return 1.0 / (1.5 * (1.0 - d / (2.0 * q)) + 1.0 / (2.0 * q));
    return 1.0 / ((0.75 + 1.0 / (2.0 * d)) * (2.0 - d / q));
}

double delta_exponent(double q, int d) {
    require(d >= 3, "delta exponent: dimension must be >= 3");
    require(q > double(d), "delta exponent: domain is q > d");
    if (std::isinf(q)) return 2.0;
    return 2.0 / (1.0 - d / q);
}

double delta_prev_exponent(double q, int d) {
    require(d >= 3, "previous delta exponent: dimension must be >= 3");
    require(q > 0.5 * (3.0 * d - 2.0),
            "previous delta exponent: domain is q > (3d-2)/2");
    if (std::isinf(q)) return 2.0;
    return 2.0 / (1.0 - (3.0 * d - 2.0) / (2.0 * q));
}

double gamma_pair_exponent(double q1, double q2, int d) {
    require(d >= 3, "pair exponent: dimension must be >= 3");
    require(q1 > 0.0 && q2 > 0.0, "pair exponent: exponents must be positive");
    const double a = std::isinf(q1) ? 0.0 : d / q1;
    const double b = std::isinf(q2) ? 0.0 : d / q2;
    const double den = (1.0 - 1.0 / d) - (0.75 - 1.0 / (2.0 * d)) * (a + b);
    require(den > 0.0,
            "pair exponent: domain is d/q1 + d/q2 < (1 - 1/d)/(3/4 - 1/(2d))");
    return 1.0 / den;
}

void DiscreteMeasure::validate() const {
    if (points.size() != log_weights.size())
        throw std::invalid_argument("discrete measure: points/weights size mismatch");
    if (points.empty())
        throw std::invalid_argument("discrete measure: empty");
    const std::size_t dd = points.front().size();
    if (dd == 0) throw std::invalid_argument("discrete measure: zero-dimensional point");
    for (const auto& p : points) {
        if (p.size() != dd)
            throw std::invalid_argument("discrete measure: inconsistent point dimension");
        for (double c : p)
            if (!std::isfinite(c))
                throw std::invalid_argument("discrete measure: non-finite coordinate");
    }
    for (double lw : log_weights)
        if (!std::isfinite(lw))
            throw std::invalid_argument("discrete measure: non-finite log weight");
}

DiscreteMeasure tilt_measure(const DiscreteMeasure& mu, const std::vector<double>& k) {
    mu.validate();
    if (int(k.size()) != mu.dim())
        throw std::invalid_argument("tilt: vector dimension mismatch");
    DiscreteMeasure out = mu;
    for (std::size_t i = 0; i < out.size(); ++i)
        out.log_weights[i] += std::inner_product(k.begin(), k.end(),
                                                 out.points[i].begin(), 0.0);
    return out;
}

double AxisBox::volume() const {
    double v = 1.0;
    for (std::size_t c = 0; c < lo.size(); ++c) v *= (hi[c] - lo[c]);
    return v;
}

bool AxisBox::contains(const std::vector<double>& x) const {
    for (std::size_t c = 0; c < lo.size(); ++c)
        if (x[c] < lo[c] || x[c] > hi[c]) return false;
    return true;
}

bool AxisBox::intersects(const AxisBox& o) const {
    for (std::size_t c = 0; c < lo.size(); ++c)
        if (hi[c] < o.lo[c] || o.hi[c] < lo[c]) return false;
    return true;
}

DiscreteMeasure pushforward_Y(const DiscreteMeasure& mu) {
    mu.validate();
    DiscreteMeasure out = mu;
    for (auto& p : out.points) {
        if (p[0] >= 0.0)
            throw std::invalid_argument("pushforward: requires x1 < 0 at every point");
        p[0] = p[0] * p[0];
    }
    return out;
}

AxisBox pullback_box_X(const AxisBox& ybox) {
    if (ybox.lo.empty()) throw std::invalid_argument("pullback: empty box");
    if (ybox.lo[0] < 0.0)
        throw std::invalid_argument("pullback: y1 range must be nonnegative");
    AxisBox out = ybox;
    out.lo[0] = -std::sqrt(ybox.hi[0]);
    out.hi[0] = -std::sqrt(ybox.lo[0]);
    return out;
}

AxisBox quantile_box(const DiscreteMeasure& mu, double margin) {
    mu.validate();
    if (margin <= 0.0 || margin >= 0.5)
        throw std::invalid_argument("quantile box: margin must be in (0, 1/2)");
    const int d = mu.dim();
    const std::size_t np = mu.size();

    // normalized weights; the shift keeps the exponentials representable
    const double lmax = *std::max_element(mu.log_weights.begin(), mu.log_weights.end());
    std::vector<double> w(np);
    double total = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
        w[i] = std::exp(mu.log_weights[i] - lmax);
        total += w[i];
    }

    AxisBox box;
    box.lo.assign(d, 0.0);
    box.hi.assign(d, 0.0);
    std::vector<std::size_t> order(np);
    for (int c = 0; c < d; ++c) {
        std::iota(order.begin(), order.end(), std::size_t(0));
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return mu.points[a][c] < mu.points[b][c];
        });
        const double thresh = margin * total;
        double cum = 0.0;
        std::size_t ilo = np - 1;
        for (std::size_t r = 0; r < np; ++r) {
            cum += w[order[r]];
            if (cum >= thresh) { ilo = r; break; }
        }
        cum = 0.0;
        std::size_t ihi = 0;
        for (std::size_t r = np; r-- > 0;) {
            cum += w[order[r]];
            if (cum >= thresh) { ihi = r; break; }
        }
        if (ihi < ilo) ihi = ilo;  // all mass in one cut: degenerate interval
        box.lo[c] = mu.points[order[ilo]][c];
        box.hi[c] = mu.points[order[ihi]][c];
    }
    return box;
}

double mass_fraction_outside(const DiscreteMeasure& mu, const AxisBox& box) {
    mu.validate();
    const double lmax = *std::max_element(mu.log_weights.begin(), mu.log_weights.end());
    double total = 0.0, outside = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double w = std::exp(mu.log_weights[i] - lmax);
        total += w;
        if (!box.contains(mu.points[i])) outside += w;
    }
    return outside / total;
}

ConcentrationFamily concentration_search(const DiscreteMeasure& mu, double n,
                                         double eps, int kgrid,
                                         double quantile_margin) {
    mu.validate();
    if (n <= 0.0 || eps <= 0.0 || eps >= 1.0)
        throw std::invalid_argument("concentration search: need n > 0 and eps in (0,1)");
    if (kgrid < 1)
        throw std::invalid_argument("concentration search: kgrid must be >= 1");
    const int d = mu.dim();
    const double margin = quantile_margin > 0.0 ? quantile_margin : 1.0 / (4.0 * d);

    const DiscreteMeasure muy = pushforward_Y(mu);

    // lattice over the bounding cube of the tilt ball, restricted to the ball
    const double rad = n * eps;
    std::vector<std::vector<double>> ks;
    std::vector<int> iv(d, 0);
    const std::size_t nlat = std::size_t(std::pow(double(kgrid), d) + 0.5);
    for (std::size_t flat = 0; flat < nlat; ++flat) {
        std::size_t r = flat;
        for (int c = d - 1; c >= 0; --c) { iv[c] = int(r % kgrid); r /= kgrid; }
        std::vector<double> k(d, 0.0);
        double dist2 = 0.0;
        for (int c = 0; c < d; ++c) {
            const double t = (kgrid == 1) ? 0.0
                : -rad + 2.0 * rad * double(iv[c]) / double(kgrid - 1);
            k[c] = t + (c == 0 ? n : 0.0);
            dist2 += t * t;
        }
        if (dist2 <= rad * rad * (1.0 + 1e-12)) ks.push_back(std::move(k));
    }

    std::vector<ConcentrationEntry> cand;
    for (const auto& k : ks) {
        const DiscreteMeasure tilted = tilt_measure(muy, k);
        ConcentrationEntry e;
        e.k = k;
        e.box_y = quantile_box(tilted, margin);
        e.outside_fraction = mass_fraction_outside(tilted, e.box_y);
        if (e.outside_fraction > 0.5) continue;  // verified, not assumed
        e.box_x = pullback_box_X(e.box_y);
        const double vol = e.box_y.volume();
        e.inv_volume_y = vol > 0.0 ? 1.0 / vol : kInf;
        cand.push_back(std::move(e));
    }
    if (cand.empty())
        throw std::runtime_error("concentration search: no tilt produced a valid box");

    std::stable_sort(cand.begin(), cand.end(),
                     [](const ConcentrationEntry& a, const ConcentrationEntry& b) {
                         return a.inv_volume_y > b.inv_volume_y;
                     });

    ConcentrationFamily fam;
    for (auto& e : cand) {
        bool clash = false;
        for (const auto& kept : fam.entries)
            if (kept.box_y.intersects(e.box_y)) { clash = true; break; }
        if (!clash) fam.entries.push_back(std::move(e));
    }
    if (fam.entries.empty())
        throw std::runtime_error("concentration search: empty selection");

    for (const auto& e : fam.entries) fam.sum_inv_volume += e.inv_volume_y;
    // volume of the d-ball of radius n*eps
    fam.ref_volume = std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0)
        * std::pow(rad, double(d));
    fam.ratio = fam.sum_inv_volume / fam.ref_volume;
    return fam;
}

namespace {

GridField magnitude_of(const std::vector<GridField>& F) {
    if (F.empty()) throw std::invalid_argument("magnitude: empty field list");
    GridField m = F.front();
    for (std::size_t i = 0; i < m.v.size(); ++i) {
        double s = 0.0;
        for (const auto& comp : F) s += std::norm(comp.v[i]);
        m.v[i] = std::sqrt(s);
    }
    return m;
}

// level-set split of a scalar field at lambda: (above, at-or-below)
void split_scalar(const GridField& f, double lambda, GridField& above, GridField& below) {
    above = f;
    below = f;
    for (std::size_t i = 0; i < f.v.size(); ++i) {
        if (std::abs(f.v[i]) > lambda) below.v[i] = 0.0;
        else above.v[i] = 0.0;
    }
}

// same split for a vector field, gated by the pointwise magnitude
void split_vector(const std::vector<GridField>& F, double lambda,
                  std::vector<GridField>& above, std::vector<GridField>& below) {
    const GridField mag = magnitude_of(F);
    above = F;
    below = F;
    for (std::size_t i = 0; i < mag.v.size(); ++i) {
        if (mag.v[i].real() > lambda)
            for (auto& comp : below) comp.v[i] = 0.0;
        else
            for (auto& comp : above) comp.v[i] = 0.0;
    }
}

} // namespace

PotentialSplit split_potentials(const GridField& V,
                                const std::vector<GridField>& W1,
                                const std::vector<GridField>& W2,
                                double q0, double q1, double q2, double n) {
    const int d = V.d;
    if (!(q0 > 0.5 * d))
        throw std::domain_error("split: q0 must exceed d/2");
    if (!(q1 >= double(d)) || !(q2 >= double(d)))
        throw std::domain_error("split: q1 and q2 must be at least d");
    if (!(n >= 1.0)) throw std::domain_error("split: n must be at least 1");
    for (const auto& c : W1)
        if (!c.compatible(V)) throw std::invalid_argument("split: W1 grid mismatch");
    for (const auto& c : W2)
        if (!c.compatible(V)) throw std::invalid_argument("split: W2 grid mismatch");

    PotentialSplit s;
    s.n = n; s.q0 = q0; s.q1 = q1; s.q2 = q2;

    const double nv = lp_norm(V, q0);
    const double nw1 = vec_lp_norm(W1, q1);
    const double nw2 = vec_lp_norm(W2, q2);

    s.lambda1 = std::isinf(q1) ? nw1 : nw1 * std::pow(n, 0.5 * d / q1);
    s.lambda2 = std::isinf(q2) ? nw2 : nw2 * std::pow(n, 0.5 * d / q2);
    split_vector(W1, s.lambda1, s.W1_d, s.W1_inf);
    split_vector(W2, s.lambda2, s.W2_d, s.W2_inf);

    GridField zero = V;
    for (auto& z : zero.v) z = 0.0;
    if (q0 < double(d)) {
        s.lambda0 = nv * std::pow(n, (0.75 + 0.5 / d) * d / q0);
        s.V_inf = zero;
        split_scalar(V, s.lambda0, s.V_half, s.V_d);
    } else {
        s.lambda0 = std::isinf(q0)
            ? nv  // truncation level at the sup: nothing exceeds it
            : std::pow(nv, q0 / d) * std::pow(n, (0.75 - 0.5 / d) * d / q0);
        s.V_half = zero;
        split_scalar(V, s.lambda0, s.V_d, s.V_inf);
    }
    return s;
}

ConstraintReport check_split_constraints(const PotentialSplit& s,
                                         const ConstraintConstants& cc) {
    const int d = s.V_d.d;
    const double n = s.n;
    const double r = (1.0 + cc.eps) / (1.0 - cc.eps);

    ConstraintReport rep;
    rep.bulk_V_lhs = lp_norm(s.V_inf, kInf)
        + std::pow(n, 0.75 - 0.5 / d) * lp_norm(s.V_d, double(d));
    rep.bulk_V_rhs = cc.c0 * std::pow(n, 1.5);
    rep.bulk_W_lhs = vec_lp_norm(s.W1_inf, kInf) + vec_lp_norm(s.W2_inf, kInf);
    rep.bulk_W_rhs = cc.c0 * std::sqrt(n);
    rep.bounded_parts_ok = rep.bulk_V_lhs <= rep.bulk_V_rhs
        && rep.bulk_W_lhs <= rep.bulk_W_rhs;

    rep.spike_V_half = lp_norm(s.V_half, 0.5 * d);
    rep.spike_V_d = lp_norm(s.V_d, double(d));
    rep.spike_V_d_rhs = cc.c1 * std::pow(n, 0.75 + 0.5 / d);
    rep.spike_W2 = vec_lp_norm(s.W2_d, double(d));
    rep.spike_parts_ok = rep.spike_V_half <= cc.c1
        && rep.spike_V_d <= rep.spike_V_d_rhs && rep.spike_W2 <= cc.c1;

    const double w1 = vec_lp_norm(s.W1_d, double(d));
    const double w2 = vec_lp_norm(s.W2_d, double(d));
    rep.smallness_lhs = std::pow(w1, double(d)) + std::pow(r * w2, double(d));
    rep.smallness_rhs = std::pow(2.0 * d / (d + 2.0), double(d))
        / (cc.CW * std::pow(16.0 * cc.C2 * (1.0 + cc.eps), double(d)));
    rep.pair_lhs = 8.0 * cc.C2 * (w1 + r * w2);
    rep.smallness_ok = rep.smallness_lhs < rep.smallness_rhs && rep.pair_lhs <= 1.0;

    rep.all_ok = rep.bounded_parts_ok && rep.spike_parts_ok && rep.smallness_ok;
    return rep;
}

double tau3(double normV, double q0, double normW1, double q1,
            double normW2, double q2, int d, double C) {
    if (!(C > 0.0)) throw std::domain_error("tau3: C must be positive");
    double acc = 1.0 + std::pow(normV, gamma_exponent(q0, d));
    if (normW1 > 0.0) acc += std::pow(normW1, delta_exponent(q1, d));
    if (normW2 > 0.0) acc += std::pow(normW2, delta_exponent(q2, d));
    return C * acc;
}

double vec_lp_norm_box(const std::vector<GridField>& F, double p,
                       const AxisBox& box) {
    if (F.empty()) throw std::invalid_argument("box norm: empty field list");
    const GridField& f = F.front();
    if (int(box.lo.size()) != f.d)
        throw std::invalid_argument("box norm: box dimension mismatch");
    const std::size_t nt = f.nt();
    double wt = 1.0;
    for (int a = 1; a < f.d; ++a) wt *= f.hperp();
    std::vector<double> x(f.d);
    double acc = 0.0;
    for (int i1 = 0; i1 < f.n1; ++i1) {
        const double w1 = (i1 == 0 || i1 == f.n1 - 1) ? 0.5 * f.h1() : f.h1();
        for (std::size_t it = 0; it < nt; ++it) {
            field_point(f, i1, it, x);
            if (!box.contains(x)) continue;
            double s = 0.0;
            for (const auto& comp : F) s += std::norm(comp.v[f.idx(i1, it)]);
            acc += w1 * wt * std::pow(s, 0.5 * p);
        }
    }
    return std::pow(acc, 1.0 / p);
}

JstarResult select_jstar(const ConcentrationFamily& fam,
                         const std::vector<GridField>& W1d,
                         const std::vector<GridField>& W2d,
                         double n, const ConstraintConstants& cc) {
    if (fam.entries.empty())
        throw std::invalid_argument("jstar: empty concentration family");
    if (W1d.empty() || W2d.empty())
        throw std::invalid_argument("jstar: potential components missing");
    const int d = W1d.front().d;
    const double r = (1.0 + cc.eps) / (1.0 - cc.eps);

    JstarResult res;

    // global smallness first: the pigeonhole argument needs it
    const double g1 = vec_lp_norm(W1d, double(d));
    const double g2 = vec_lp_norm(W2d, double(d));
    const double small_lhs = std::pow(g1, double(d)) + std::pow(r * g2, double(d));
    const double small_rhs = std::pow(2.0 * d / (d + 2.0), double(d))
        / (cc.CW * std::pow(16.0 * cc.C2 * (1.0 + cc.eps), double(d)));
    const double pair = 8.0 * cc.C2 * (g1 + r * g2);
    res.precondition_ok = small_lhs < small_rhs && pair <= 1.0;
    if (!res.precondition_ok) {
        std::ostringstream os;
        os << "smallness precondition fails: " << small_lhs << " !< " << small_rhs
           << " or 8 C2 pairing " << pair << " > 1";
        res.message = os.str();
        return res;
    }

    for (std::size_t j = 0; j < fam.entries.size(); ++j) {
        const auto& e = fam.entries[j];
        const double kmag = std::sqrt(std::inner_product(
            e.k.begin(), e.k.end(), e.k.begin(), 0.0));
        const double vol = e.box_x.volume();
        const double lhs = 8.0 * cc.C2
            * (vec_lp_norm_box(W1d, double(d), e.box_x)
               + r * vec_lp_norm_box(W2d, double(d), e.box_x));
        const double rhs = vol > 0.0 && kmag > 0.0
            ? 1.0 / (kmag * std::pow(vol, 1.0 / d)) : kInf;
        res.rule_lhs.push_back(lhs);
        res.rule_rhs.push_back(rhs);
        if (!res.found && lhs <= rhs) {
            res.found = true;
            res.jstar = int(j);
        }
    }
    if (res.found) return res;

    // contradiction audit: failure at every j forces |E_j|^{-1} below the
    // tilted-norm bound; summed over the disjoint family this must undercut
    // the summation property, else the input data were inconsistent
    for (const auto& e : fam.entries) {
        const double vol = e.box_x.volume();
        res.audit_sum_inv += vol > 0.0 ? 1.0 / vol : kInf;
    }
    res.audit_bound = std::pow(16.0 * cc.C2 * (1.0 + cc.eps) * n, double(d))
        * (std::pow(g1, double(d)) + std::pow(r * g2, double(d)));
    std::ostringstream os;
    os << "no admissible box: sum |E_j|^-1 = " << res.audit_sum_inv
       << " versus failure-forced bound " << res.audit_bound << "; ";
    if (res.audit_sum_inv <= res.audit_bound)
        os << "family lacks the summation property, selection can fail";
    else
        os << "summation property holds yet selection failed: inconsistent inputs";
    res.message = os.str();
    return res;
}

} // namespace ucl
