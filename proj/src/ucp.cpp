#include "ucl/ucp.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace ucl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot3(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

double norm3(const Vec3& a) { return std::sqrt(dot3(a, a)); }

// quintic smoothstep ramp: 1 for x <= a, 0 for x >= b, C^2 in between
double ramp(double x, double a, double b) {
    const double t = std::clamp((x - a) / (b - a), 0.0, 1.0);
    return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double ramp_d1(double x, double a, double b) {
    const double t = (x - a) / (b - a);
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return -30.0 * t * t * (1.0 - t) * (1.0 - t) / (b - a);
}

double ramp_d2(double x, double a, double b) {
    const double t = (x - a) / (b - a);
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / ((b - a) * (b - a));
}

double field_at(const BoxField& f, std::size_t i) {
    return f.empty() ? 0.0 : f.v[i];
}

} // namespace

BoxField make_box_field(const BoxGrid& g) {
    BoxField f;
    f.g = g;
    f.v.assign(g.size(), 0.0);
    return f;
}

Mask mask_from(const BoxGrid& g, const std::function<bool(const Vec3&)>& pred) {
    Mask m(g.size(), 0);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k)
                m[g.idx(i, j, k)] = pred(g.point(i, j, k)) ? 1 : 0;
    return m;
}

Mask ball_mask(const BoxGrid& g, const Vec3& c, double r) {
    return mask_from(g, [&](const Vec3& x) {
        const Vec3 d = {x[0] - c[0], x[1] - c[1], x[2] - c[2]};
        return norm3(d) < r;
    });
}

Mask annulus_mask(const BoxGrid& g, const Vec3& c, double r1, double r2) {
    return mask_from(g, [&](const Vec3& x) {
        const Vec3 d = {x[0] - c[0], x[1] - c[1], x[2] - c[2]};
        const double r = norm3(d);
        return r > r1 && r < r2;
    });
}

namespace {

// per-node quadrature weight: trapezoid halving on every axis whose
// neighbor leaves the mask (or the grid)
double node_weight(const BoxGrid& g, const Mask& m, int i, int j, int k) {
    auto inm = [&](int a, int b, int c) {
        return a >= 0 && b >= 0 && c >= 0 && a < g.n && b < g.n && c < g.n
            && m[g.idx(a, b, c)];
    };
    double w = 1.0;
    if (!inm(i - 1, j, k) || !inm(i + 1, j, k)) w *= 0.5;
    if (!inm(i, j - 1, k) || !inm(i, j + 1, k)) w *= 0.5;
    if (!inm(i, j, k - 1) || !inm(i, j, k + 1)) w *= 0.5;
    return w;
}

} // namespace

double box_lp_norm(const BoxField& f, double p, const Mask& mask) {
    if (mask.size() != f.v.size())
        throw std::invalid_argument("box norm: mask size mismatch");
    const BoxGrid& g = f.g;
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t i = 0; i < f.v.size(); ++i)
            if (mask[i]) m = std::max(m, std::fabs(f.v[i]));
        return m;
    }
    const double cell = std::pow(g.h(), 3.0);
    double s = 0.0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) {
                const std::size_t id = g.idx(i, j, k);
                if (!mask[id]) continue;
                s += cell * node_weight(g, mask, i, j, k)
                    * std::pow(std::fabs(f.v[id]), p);
            }
    return std::pow(s, 1.0 / p);
}

namespace {

// masked centered/one-sided difference along one axis
double masked_diff(const BoxField& f, const Mask& m, int i, int j, int k, int axis) {
    const BoxGrid& g = f.g;
    const double h = g.h();
    int di[3] = {0, 0, 0};
    di[axis] = 1;
    auto inm = [&](int a, int b, int c) {
        return a >= 0 && b >= 0 && c >= 0 && a < g.n && b < g.n && c < g.n
            && m[g.idx(a, b, c)];
    };
    const bool hp = inm(i + di[0], j + di[1], k + di[2]);
    const bool hm = inm(i - di[0], j - di[1], k - di[2]);
    const double fc = f.v[g.idx(i, j, k)];
    if (hp && hm)
        return (f.v[g.idx(i + di[0], j + di[1], k + di[2])]
                - f.v[g.idx(i - di[0], j - di[1], k - di[2])]) / (2.0 * h);
    if (hp) return (f.v[g.idx(i + di[0], j + di[1], k + di[2])] - fc) / h;
    if (hm) return (fc - f.v[g.idx(i - di[0], j - di[1], k - di[2])]) / h;
    return 0.0;
}

} // namespace

double box_h1_norm(const BoxField& f, const Mask& mask) {
    if (mask.size() != f.v.size())
        throw std::invalid_argument("h1 norm: mask size mismatch");
    const BoxGrid& g = f.g;
    const double cell = std::pow(g.h(), 3.0);
    double s = 0.0;
    bool any = false;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) {
                const std::size_t id = g.idx(i, j, k);
                if (!mask[id]) continue;
                any = true;
                double gr = 0.0;
                for (int a = 0; a < 3; ++a) {
                    const double d = masked_diff(f, mask, i, j, k, a);
                    gr += d * d;
                }
                s += cell * node_weight(g, mask, i, j, k)
                    * (f.v[id] * f.v[id] + gr);
            }
    if (!any) throw std::invalid_argument("h1 norm: empty mask");
    return std::sqrt(s);
}

std::vector<double> ball_weights(const BoxGrid& g, const Vec3& c, double r) {
    std::vector<double> w(g.size());
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) {
                const Vec3 x = g.point(i, j, k);
                const Vec3 d = {x[0] - c[0], x[1] - c[1], x[2] - c[2]};
                const double t = (r - norm3(d)) / g.h() + 0.5;
                w[g.idx(i, j, k)] = std::clamp(t, 0.0, 1.0);
            }
    return w;
}

double box_lp_norm(const BoxField& f, double p, const std::vector<double>& w) {
    if (w.size() != f.v.size())
        throw std::invalid_argument("box norm: weight size mismatch");
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t i = 0; i < f.v.size(); ++i)
            if (w[i] > 0.0) m = std::max(m, std::fabs(f.v[i]));
        return m;
    }
    const double cell = std::pow(f.g.h(), 3.0);
    double s = 0.0;
    for (std::size_t i = 0; i < f.v.size(); ++i)
        if (w[i] > 0.0) s += cell * w[i] * std::pow(std::fabs(f.v[i]), p);
    return std::pow(s, 1.0 / p);
}

double box_h1_norm(const BoxField& f, const std::vector<double>& w) {
    if (w.size() != f.v.size())
        throw std::invalid_argument("h1 norm: weight size mismatch");
    const BoxGrid& g = f.g;
    const double h = g.h();
    const double cell = h * h * h;
    double s = 0.0;
    bool any = false;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) {
                const std::size_t id = g.idx(i, j, k);
                if (w[id] == 0.0) continue;
                any = true;
                double gr = 0.0;
                for (int a = 0; a < 3; ++a) {
                    int lo[3] = {i, j, k}, hi[3] = {i, j, k};
                    --lo[a];
                    ++hi[a];
                    double d;
                    if (lo[a] >= 0 && hi[a] < g.n)
                        d = (f.v[g.idx(hi[0], hi[1], hi[2])]
                             - f.v[g.idx(lo[0], lo[1], lo[2])]) / (2.0 * h);
                    else if (hi[a] < g.n)
                        d = (f.v[g.idx(hi[0], hi[1], hi[2])] - f.v[id]) / h;
                    else if (lo[a] >= 0)
                        d = (f.v[id] - f.v[g.idx(lo[0], lo[1], lo[2])]) / h;
                    else
                        d = 0.0;
                    gr += d * d;
                }
                s += cell * w[id] * (f.v[id] * f.v[id] + gr);
            }
    if (!any) throw std::invalid_argument("h1 norm: empty weight");
    return std::sqrt(s);
}

SolveResult solve_elliptic(const BoxGrid& g, const Mask& interior,
                           const Potentials& pot,
                           const std::function<double(const Vec3&)>& boundary,
                           double tol, int max_iter) {
    if (interior.size() != g.size())
        throw std::invalid_argument("solve: interior mask size mismatch");
    const double h = g.h();
    const double h2 = h * h;

    // unknown numbering; interior nodes must have all six neighbors on grid
    std::vector<int> num(g.size(), -1);
    int nun = 0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) {
                const std::size_t id = g.idx(i, j, k);
                if (!interior[id]) continue;
                if (i == 0 || j == 0 || k == 0 || i == g.n - 1 || j == g.n - 1
                    || k == g.n - 1)
                    throw std::invalid_argument("solve: interior touches the grid face");
                num[id] = nun++;
            }
    if (nun == 0) throw std::invalid_argument("solve: empty interior");

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nun);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(std::size_t(nun) * 9);

    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) {
                const std::size_t id = g.idx(i, j, k);
                const int row = num[id];
                if (row < 0) continue;
                double diag = -6.0 / h2 - field_at(pot.V, id);
                auto couple = [&](int ii, int jj, int kk, double coef) {
                    const std::size_t nid = g.idx(ii, jj, kk);
                    if (num[nid] >= 0)
                        trip.emplace_back(row, num[nid], coef);
                    else
                        rhs[row] -= coef * boundary(g.point(ii, jj, kk));
                };
                for (int a = 0; a < 3; ++a) {
                    int dp[3] = {0, 0, 0};
                    dp[a] = 1;
                    const int ip = i + dp[0], jp = j + dp[1], kp = k + dp[2];
                    const int im = i - dp[0], jm = j - dp[1], km = k - dp[2];
                    const std::size_t idp = g.idx(ip, jp, kp);
                    const std::size_t idm = g.idx(im, jm, km);
                    const double w1 = field_at(pot.W1[a], id);
                    const double w2c = field_at(pot.W2[a], id);
                    const double w2p = field_at(pot.W2[a], idp);
                    const double w2m = field_at(pot.W2[a], idm);
                    // Laplacian, advection, and conservative flux couplings
                    double cp = 1.0 / h2 - w1 / (2.0 * h)
                        - 0.25 * (w2c + w2p) / h;
                    double cm = 1.0 / h2 + w1 / (2.0 * h)
                        + 0.25 * (w2m + w2c) / h;
                    diag += -0.25 * (w2c + w2p) / h + 0.25 * (w2m + w2c) / h;
                    couple(ip, jp, kp, cp);
                    couple(im, jm, km, cm);
                }
                trip.emplace_back(row, row, diag);
            }

    Eigen::SparseMatrix<double> A(nun, nun);
    A.setFromTriplets(trip.begin(), trip.end());

    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>> solver;
    solver.setTolerance(tol);
    if (max_iter > 0) solver.setMaxIterations(max_iter);
    solver.compute(A);
    const Eigen::VectorXd x = solver.solve(rhs);

    SolveResult res;
    res.u = make_box_field(g);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) {
                const std::size_t id = g.idx(i, j, k);
                res.u.v[id] = num[id] >= 0 ? x[num[id]]
                                           : boundary(g.point(i, j, k));
            }
    res.residual = solver.error();
    res.iterations = int(solver.iterations());
    res.converged = solver.info() == Eigen::Success;
    return res;
}

CutoffSource cutoff_source(const BoxField& u, const Potentials& pot, double R) {
    const BoxGrid& g = u.g;
    // eta = A(|x|) B(x1): radial decay across the observation shell, x1
    // decay inside the transition slab, stopping short of the boundary
    const double ra = 1.5 * R, rb = 1.75 * R;
    const double xa = -7.0 * R / 24.0, xb = -13.0 * R / 48.0;

    const Mask omega_mask = mask_from(g, [&](const Vec3& x) {
        return norm3(x) < 2.0 * R && x[0] < -0.25 * R;
    });

    CutoffSource out;
    out.f = make_box_field(g);
    out.eta = make_box_field(g);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) {
                const std::size_t id = g.idx(i, j, k);
                const Vec3 x = g.point(i, j, k);
                const double r = norm3(x);
                const double A = ramp(r, ra, rb);
                const double B = ramp(x[0], xa, xb);
                out.eta.v[id] = A * B;
                if (!omega_mask[id]) continue;

                const double A1 = ramp_d1(r, ra, rb);
                const double A2 = ramp_d2(r, ra, rb);
                const double B1 = ramp_d1(x[0], xa, xb);
                const double B2 = ramp_d2(x[0], xa, xb);
                Vec3 grad_eta = {A1 * x[0] / r * B + A * B1,
                                 A1 * x[1] / r * B, A1 * x[2] / r * B};
                const double lap_eta = (A2 + 2.0 * A1 / r) * B
                    + 2.0 * A1 * (x[0] / r) * B1 + A * B2;

                Vec3 grad_u;
                for (int a = 0; a < 3; ++a)
                    grad_u[a] = masked_diff(u, omega_mask, i, j, k, a);

                double wdot = 0.0;
                for (int a = 0; a < 3; ++a)
                    wdot += (field_at(pot.W1[a], id) + field_at(pot.W2[a], id))
                        * grad_eta[a];
                out.f.v[id] = 2.0 * dot3(grad_eta, grad_u)
                    + lap_eta * u.v[id] - wdot * u.v[id];
            }

    // support audit: nonzero source only on the shell or the slab
    double fmax = 0.0;
    for (double v : out.f.v) fmax = std::max(fmax, std::fabs(v));
    out.support_ok = true;
    const double slack = g.h();
    for (int i = 0; i < g.n && out.support_ok; ++i)
        for (int j = 0; j < g.n && out.support_ok; ++j)
            for (int k = 0; k < g.n; ++k) {
                const std::size_t id = g.idx(i, j, k);
                if (std::fabs(out.f.v[id]) <= 1e-12 * fmax) continue;
                const Vec3 x = g.point(i, j, k);
                const double r = norm3(x);
                const bool in_shell = r > R - slack && r < 2.0 * R + slack
                    && x[0] < -0.25 * R + slack;
                const bool in_slab = x[0] > -7.0 * R / 24.0 - slack
                    && x[0] < -0.25 * R + slack && r < 2.0 * R + slack;
                if (!in_shell && !in_slab) { out.support_ok = false; break; }
            }
    return out;
}

double trilinear(const BoxField& f, const Vec3& x) {
    const BoxGrid& g = f.g;
    const double h = g.h();
    double t[3];
    int base[3];
    for (int a = 0; a < 3; ++a) {
        const double s = (x[a] - g.lo) / h;
        if (s < 0.0 || s > double(g.n - 1))
            throw std::out_of_range("trilinear: point outside the grid box");
        base[a] = std::min(int(s), g.n - 2);
        t[a] = s - base[a];
    }
    double acc = 0.0;
    for (int di = 0; di < 2; ++di)
        for (int dj = 0; dj < 2; ++dj)
            for (int dk = 0; dk < 2; ++dk) {
                const double w = (di ? t[0] : 1.0 - t[0])
                    * (dj ? t[1] : 1.0 - t[1]) * (dk ? t[2] : 1.0 - t[2]);
                acc += w * f.v[g.idx(base[0] + di, base[1] + dj, base[2] + dk)];
            }
    return acc;
}

Vec3 kelvin_T(const Vec3& x, double R) {
    const double r2 = dot3(x, x);
    if (r2 == 0.0) throw std::domain_error("reflection undefined at the origin");
    const double s = R * R / r2;
    return {s * x[0], s * x[1], s * x[2]};
}

BoxField kelvin_scalar(const BoxField& u, double R, const BoxGrid& target,
                       const Mask& where) {
    BoxField out = make_box_field(target);
    for (int i = 0; i < target.n; ++i)
        for (int j = 0; j < target.n; ++j)
            for (int k = 0; k < target.n; ++k) {
                const std::size_t id = target.idx(i, j, k);
                if (!where[id]) continue;
                const Vec3 x = target.point(i, j, k);
                out.v[id] = (R / norm3(x)) * trilinear(u, kelvin_T(x, R));
            }
    return out;
}

std::array<BoxField, 3> kelvin_vector(const std::array<BoxField, 3>& W, double R,
                                      const BoxGrid& target, const Mask& where) {
    std::array<BoxField, 3> out = {make_box_field(target), make_box_field(target),
                                   make_box_field(target)};
    for (int i = 0; i < target.n; ++i)
        for (int j = 0; j < target.n; ++j)
            for (int k = 0; k < target.n; ++k) {
                const std::size_t id = target.idx(i, j, k);
                if (!where[id]) continue;
                const Vec3 x = target.point(i, j, k);
                const double r2 = dot3(x, x);
                const Vec3 tx = kelvin_T(x, R);
                Vec3 w;
                for (int a = 0; a < 3; ++a)
                    w[a] = W[a].empty() ? 0.0 : trilinear(W[a], tx);
                const double xw = dot3(x, w);
                for (int a = 0; a < 3; ++a)
                    out[a].v[id] = (R * R / r2) * (w[a] - 2.0 * xw * x[a] / r2);
            }
    return out;
}

BoxField kelvin_potential_V(const BoxField& V, const std::array<BoxField, 3>& W1,
                            const std::array<BoxField, 3>& W2, double R,
                            const BoxGrid& target, const Mask& where) {
    const auto tw1 = kelvin_vector(W1, R, target, where);
    const auto tw2 = kelvin_vector(W2, R, target, where);
    BoxField out = make_box_field(target);
    for (int i = 0; i < target.n; ++i)
        for (int j = 0; j < target.n; ++j)
            for (int k = 0; k < target.n; ++k) {
                const std::size_t id = target.idx(i, j, k);
                if (!where[id]) continue;
                const Vec3 x = target.point(i, j, k);
                const double r2 = dot3(x, x);
                double corr = 0.0;
                for (int a = 0; a < 3; ++a)
                    corr += x[a] * (tw1[a].v[id] + tw2[a].v[id]);
                const double vsrc = V.empty() ? 0.0 : trilinear(V, kelvin_T(x, R));
                out.v[id] = std::pow(R * R / r2, 2.0) * vsrc + corr / r2;
            }
    return out;
}

double cap_density(double r, double R) {
    if (r <= 0.0) return 0.0;
    const double c = R / (3.0 * r);
    if (c >= 1.0) return 0.0;
    return 2.0 * M_PI * (1.0 - c);
}

double cap_density_quad(double r, double R, int nquad) {
    if (nquad < 1) throw std::invalid_argument("cap quadrature: nquad >= 1");
    double acc = 0.0;
    for (int m = 0; m < nquad; ++m) {
        const double mu = -1.0 + 2.0 * (m + 0.5) / nquad;
        if (r * mu < -R / 3.0) acc += 1.0;
    }
    return 4.0 * M_PI * acc / nquad;
}

double annulus_from_caps(const std::function<double(const Vec3&)>& cap_estimate,
                         double R, int nquad) {
    if (nquad < 2) throw std::invalid_argument("annulus average: nquad >= 2");
    const double rho = cap_density(0.5 * R, R);
    if (rho <= 0.0) throw std::domain_error("annulus average: density vanishes");
    double acc = 0.0;
    for (int m = 0; m < nquad; ++m) {
        const double mu = -1.0 + 2.0 * (m + 0.5) / nquad;
        const double sn = std::sqrt(std::max(0.0, 1.0 - mu * mu));
        for (int p = 0; p < nquad; ++p) {
            const double phi = 2.0 * M_PI * (p + 0.5) / nquad;
            const Vec3 x0 = {mu, sn * std::cos(phi), sn * std::sin(phi)};
            const double e = cap_estimate(x0);
            acc += e * e * (2.0 / nquad) * (2.0 * M_PI / nquad);
        }
    }
    return std::sqrt(acc / rho);
}

double three_balls_C(const std::vector<ThreeBallsSample>& samples, double alpha) {
    if (samples.empty())
        throw std::invalid_argument("three balls fit: no samples");
    double c = 0.0;
    for (const auto& s : samples) {
        if (s.nw <= 0.0 || s.nOmega <= 0.0)
            throw std::invalid_argument("three balls fit: degenerate sample norms");
        c = std::max(c, s.nO / (std::pow(s.nw, alpha)
                                * std::pow(s.nOmega, 1.0 - alpha)));
    }
    return c;
}

ThreeBallsFit three_balls_fit(const std::vector<ThreeBallsSample>& samples,
                              double C_cap) {
    ThreeBallsFit fit;
    for (int ka = 99; ka >= 1; --ka) {
        const double alpha = ka / 100.0;
        const double c = three_balls_C(samples, alpha);
        if (c <= C_cap) {
            fit.C = c;
            fit.alpha = alpha;
            fit.feasible = true;
            for (std::size_t i = 0; i < samples.size(); ++i) {
                const double denom = std::pow(samples[i].nw, alpha)
                    * std::pow(samples[i].nOmega, 1.0 - alpha);
                if (samples[i].nO / denom == c) fit.active_sample = int(i);
            }
            return fit;
        }
    }
    return fit;  // no alpha on the grid meets the cap
}

double Polyline::length() const {
    double L = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const Vec3 d = {pts[i][0] - pts[i - 1][0], pts[i][1] - pts[i - 1][1],
                        pts[i][2] - pts[i - 1][2]};
        L += norm3(d);
    }
    return L;
}

Vec3 Polyline::at_arclength(double s) const {
    if (pts.empty()) throw std::invalid_argument("polyline: empty");
    if (s <= 0.0) return pts.front();
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const Vec3 d = {pts[i][0] - pts[i - 1][0], pts[i][1] - pts[i - 1][1],
                        pts[i][2] - pts[i - 1][2]};
        const double seg = norm3(d);
        if (s <= seg && seg > 0.0) {
            const double t = s / seg;
            return {pts[i - 1][0] + t * d[0], pts[i - 1][1] + t * d[1],
                    pts[i - 1][2] + t * d[2]};
        }
        s -= seg;
    }
    return pts.back();
}

PathCert certify_path(const Polyline& path,
                      const std::function<bool(const Vec3&)>& in_Omega,
                      const std::function<double(const Vec3&)>& clearance,
                      int nsamples) {
    PathCert cert;
    cert.path = path;
    if (path.pts.size() < 2 || nsamples < 2) return cert;
    const double L = path.length();
    double clear = kInf;
    for (int s = 0; s <= nsamples; ++s) {
        const Vec3 x = path.at_arclength(L * s / nsamples);
        if (!in_Omega(x)) return cert;  // path leaves the domain
        clear = std::min(clear, clearance(x));
    }
    if (!(clear > 0.0)) return cert;
    cert.r_y = 0.5 * clear;

    // re-verify the dilation with the predicate, independent of the
    // clearance callback: sample ball directions around each path point
    std::vector<Vec3> dirs;
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
            for (int c = -1; c <= 1; ++c) {
                if (!a && !b && !c) continue;
                Vec3 d = {double(a), double(b), double(c)};
                const double nd = norm3(d);
                dirs.push_back({d[0] / nd, d[1] / nd, d[2] / nd});
            }
    for (int s = 0; s <= nsamples; ++s) {
        const Vec3 x = path.at_arclength(L * s / nsamples);
        for (const Vec3& d : dirs) {
            const Vec3 y = {x[0] + cert.r_y * d[0], x[1] + cert.r_y * d[1],
                            x[2] + cert.r_y * d[2]};
            if (!in_Omega(y)) return cert;
        }
    }
    cert.ok = true;
    return cert;
}

GCResult check_GC(const std::function<bool(const Vec3&)>& in_Omega,
                  const std::function<double(const Vec3&)>& clearance,
                  const std::vector<Vec3>& targets,
                  const std::function<std::vector<Polyline>(const Vec3&)>& oracle) {
    GCResult res;
    res.all_ok = true;
    for (const Vec3& y : targets) {
        PathCert best;
        for (const Polyline& cand : oracle(y)) {
            best = certify_path(cand, in_Omega, clearance);
            if (best.ok) break;
        }
        if (!best.ok) res.all_ok = false;
        res.certs.push_back(std::move(best));
    }
    return res;
}

ChainResult chain_propagate(const PathCert& cert, double r0, double C_step,
                            double alpha_step, int step_cap) {
    if (!cert.ok) throw std::invalid_argument("chain: path not certified");
    if (!(r0 > 0.0)) throw std::invalid_argument("chain: r0 must be positive");
    if (!(alpha_step > 0.0 && alpha_step < 1.0))
        throw std::invalid_argument("chain: step exponent must lie in (0,1)");

    ChainResult res;
    res.R_y = std::min(cert.r_y / 4.0, r0);
    const double L = cert.path.length();
    double s = 0.0;
    Vec3 cur = cert.path.at_arclength(0.0);
    res.centers.push_back(cur);
    const double ds = res.R_y / 64.0;
    while (s < L) {
        // first arclength past s where the path exits the current ball
        double lo = s, hi = -1.0;
        for (double t = s + ds; t <= L + 0.5 * ds; t += ds) {
            const double tc = std::min(t, L);
            const Vec3 p = cert.path.at_arclength(tc);
            const Vec3 d = {p[0] - cur[0], p[1] - cur[1], p[2] - cur[2]};
            if (norm3(d) >= res.R_y) { hi = tc; break; }
            lo = tc;
            if (tc >= L) break;
        }
        if (hi < 0.0) {
            s = L;  // the rest of the path stays inside: jump to the end
        } else {
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const Vec3 p = cert.path.at_arclength(mid);
                const Vec3 d = {p[0] - cur[0], p[1] - cur[1], p[2] - cur[2]};
                (norm3(d) >= res.R_y ? hi : lo) = mid;
            }
            s = hi;
        }
        cur = cert.path.at_arclength(s);
        res.centers.push_back(cur);
        ++res.N;
        if (res.N >= step_cap) { res.capped = true; break; }
        if (s >= L) break;
    }

    res.alpha = std::pow(alpha_step, double(res.N));
    double geo = 0.0;
    for (int j = 0; j <= res.N; ++j) geo += std::pow(alpha_step, double(j));
    res.C = std::pow(std::max(C_step, 1.0), geo);
    return res;
}

BoxField synth_potential(const BoxGrid& g, const Mask& mask, unsigned seed,
                         double target_norm, double q) {
    if (!(target_norm >= 0.0))
        throw std::invalid_argument("potential synthesis: bad target norm");
    BoxField f = make_box_field(g);
    if (target_norm == 0.0) return f;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uc(g.lo, g.hi);
    std::uniform_real_distribution<double> ua(0.5, 1.0);
    std::bernoulli_distribution sign(0.5);
    const double span = g.hi - g.lo;
    for (double scale : {0.25 * span, 0.12 * span, 0.06 * span}) {
        for (int b = 0; b < 6; ++b) {
            const Vec3 c = {uc(rng), uc(rng), uc(rng)};
            const double amp = (sign(rng) ? 1.0 : -1.0) * ua(rng);
            for (int i = 0; i < g.n; ++i)
                for (int j = 0; j < g.n; ++j)
                    for (int k = 0; k < g.n; ++k) {
                        const Vec3 x = g.point(i, j, k);
                        const Vec3 d = {x[0] - c[0], x[1] - c[1], x[2] - c[2]};
                        f.v[g.idx(i, j, k)] +=
                            amp * std::exp(-dot3(d, d) / (2.0 * scale * scale));
                    }
        }
    }
    const double cur = box_lp_norm(f, q, mask);
    if (cur <= 0.0)
        throw std::runtime_error("potential synthesis: degenerate field");
    for (auto& v : f.v) v *= target_norm / cur;
    return f;
}

} // namespace ucl
