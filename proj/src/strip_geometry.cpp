#include "ucl/strip_geometry.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ucl {

bool StripConfig::flat() const {
    for (double l : lambdas)
        if (l != 0.0) return false;
    return true;
}

double psi_eval(const StripConfig& cfg, double x1, const std::vector<double>& xi_perp) {
    if ((int)xi_perp.size() != cfg.d - 1)
        throw std::invalid_argument("xi' must have d-1 components");
    double s = 0.0;
    for (int j = 2; j <= cfg.d; ++j) {
        const double a = 1.0 - x1 * cfg.lambdas[j - 1];
        if (a <= 0.0)
            throw std::domain_error("coercivity violated: 1 - x1*lambda_j <= 0 at j=" +
                                    std::to_string(j));
        const double xij = xi_perp[j - 2];
        s += a * xij * xij;
    }
    return std::sqrt(s);
}

double psi_dx1(const StripConfig& cfg, double x1, const std::vector<double>& xi_perp) {
    const double p = psi_eval(cfg, x1, xi_perp);
    if (p == 0.0) return 0.0;
    double s = 0.0;
    for (int j = 2; j <= cfg.d; ++j) {
        const double xij = xi_perp[j - 2];
        s += cfg.lambdas[j - 1] * xij * xij;
    }
    return -s / (2.0 * p);
}

CoercivityResult check_coercivity(const StripConfig& cfg, int n_samples) {
    CoercivityResult res;
    if (n_samples < 2) n_samples = 2;
    double worst = 1.0;
    // the factors are affine in x1, so the most negative value sits at an
    // endpoint; report that one on failure
    CoercivityFailure bad{0.0, 0, 1.0};
    for (int s = 0; s < n_samples; ++s) {
        const double x1 = cfg.X0 + (cfg.X1 - cfg.X0) * double(s) / double(n_samples - 1);
        for (int j = 1; j <= cfg.d; ++j) {
            const double a = 1.0 - x1 * cfg.lambdas[j - 1];
            if (a < bad.value) bad = CoercivityFailure{x1, j, a};
            if (a > 0.0) worst = std::max(worst, std::max(a, 1.0 / a));
        }
    }
    if (bad.value <= 0.0) {
        res.ok = false;
        res.failure = bad;
        return res;
    }
    res.ok = true;
    res.c0 = std::sqrt(worst);
    return res;
}

PseudoconvexityResult check_pseudoconvexity(const StripConfig& cfg) {
    PseudoconvexityResult res;
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (int j = 2; j <= cfg.d; ++j) {
        const double l = cfg.lambdas[j - 1];
        if (l <= 0.0) res.bad_indices.push_back(j);
        if (first) {
            lo = hi = l;
            first = false;
        } else {
            lo = std::min(lo, l);
            hi = std::max(hi, l);
        }
    }
    res.ok = res.bad_indices.empty();
    res.m_star = lo;
    res.M_star = hi;
    return res;
}

EllipsoidCoords ellipsoid_coords(const StripConfig& cfg, double a,
                                 const std::vector<double>& xi_perp) {
    const double lambda = psi_eval(cfg, a, xi_perp);
    if (lambda == 0.0) throw std::invalid_argument("xi' = 0 has no ellipsoid coordinates");
    EllipsoidCoords ec;
    ec.lambda = lambda;
    ec.omega.resize(xi_perp.size());
    for (size_t i = 0; i < xi_perp.size(); ++i) ec.omega[i] = xi_perp[i] / lambda;
    return ec;
}

std::vector<double> ellipsoid_coords_inverse(const EllipsoidCoords& ec) {
    std::vector<double> xi(ec.omega.size());
    for (size_t i = 0; i < xi.size(); ++i) xi[i] = ec.lambda * ec.omega[i];
    return xi;
}

StripCoefficients strip_coefficients_from_weight(const WeightOracle& w,
                                                 const std::vector<double>& x0) {
    const int d = (int)x0.size();
    const std::vector<double> g = w.grad(x0);
    Eigen::VectorXd L1(d);
    for (int i = 0; i < d; ++i) L1(i) = g[i];
    const double n1 = L1.norm();
    if (n1 == 0.0) throw std::invalid_argument("weight gradient vanishes at x0");

    const auto hv = w.hess(x0);
    Eigen::MatrixXd H(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) H(i, j) = hv[i][j];

    // Orthonormal basis Q of L1-perp via a full QR of [L1 | I].
    Eigen::MatrixXd M(d, d + 1);
    M.col(0) = L1;
    M.block(0, 1, d, d).setIdentity();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
    Eigen::MatrixXd Qfull = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd Q = Qfull.rightCols(d - 1);  // spans L1-perp

    // Diagonalize the Hessian form restricted to L1-perp.  Eigen returns
    // ascending eigenvalues; the sign of each eigenvector is normalized so
    // that its first nonzero component (in the ambient coordinates) is
    // positive, which makes the construction deterministic under ties.
    Eigen::MatrixXd B = Q.transpose() * H * Q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    Eigen::MatrixXd V = es.eigenvectors();

    StripCoefficients out;
    out.L.assign(d, std::vector<double>(d));
    for (int i = 0; i < d; ++i) out.L[0][i] = L1(i);

    std::vector<Eigen::VectorXd> Lv(d);
    Lv[0] = L1;
    for (int j = 1; j < d; ++j) {
        Eigen::VectorXd v = Q * V.col(j - 1);
        for (int i = 0; i < d; ++i) {
            if (std::fabs(v(i)) > 1e-12) {
                if (v(i) < 0) v = -v;
                break;
            }
        }
        Lv[j] = n1 * v;  // |L_j| = |L_1|
        for (int i = 0; i < d; ++i) out.L[j][i] = Lv[j](i);
    }

    // mu_j and alpha_j from Hess L_j = mu_j L_j + alpha_j L_1, j >= 2.
    std::vector<double> mu(d, 0.0), alpha(d, 0.0);
    const double nn = n1 * n1;
    for (int j = 1; j < d; ++j) {
        Eigen::VectorXd HLj = H * Lv[j];
        mu[j] = HLj.dot(Lv[j]) / nn;
        alpha[j] = HLj.dot(Lv[0]) / nn;
    }

    // lambda_j = (2/|L_1|^2) (Hess L1 . L1 + Hess Lj . Lj).
    out.lambdas.assign(d, 0.0);
    const double h11 = (H * Lv[0]).dot(Lv[0]);
    for (int j = 1; j < d; ++j) {
        const double hjj = (H * Lv[j]).dot(Lv[j]);
        out.lambdas[j] = 2.0 * (h11 + hjj) / nn;
    }

    // A_j determined by its action on the frame; assemble via A_j = N_j P^{-1}
    // with P = [L_1 ... L_d] and N_j = [A_j L_1 ... A_j L_d].
    Eigen::MatrixXd P(d, d);
    for (int j = 0; j < d; ++j) P.col(j) = Lv[j];
    Eigen::MatrixXd Pinv = P.inverse();
    out.A.resize(d - 1);
    for (int j = 1; j < d; ++j) {
        Eigen::MatrixXd N(d, d);
        N.col(0) = -alpha[j] * Lv[0] - mu[j] * Lv[j];
        for (int k = 1; k < d; ++k) {
            if (k == j) {
                Eigen::VectorXd v = -mu[j] * Lv[0];
                for (int m = 1; m < d; ++m) v += alpha[m] * Lv[m];
                N.col(k) = v;
            } else {
                N.col(k) = alpha[k] * Lv[j] - alpha[j] * Lv[k];
            }
        }
        Eigen::MatrixXd Aj = N * Pinv;
        // Symmetrize away the O(eps) asymmetry from the solve.
        Aj = 0.5 * (Aj + Aj.transpose().eval());
        out.A[j - 1].assign(d, std::vector<double>(d));
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) out.A[j - 1][r][c] = Aj(r, c);
    }
    return out;
}

std::string strip_to_config(const StripConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << "[strip]\n";
    os << "d = " << cfg.d << "\n";
    os << "x0 = " << cfg.X0 << "\n";
    os << "x1 = " << cfg.X1 << "\n";
    os << "lambdas = ";
    for (size_t i = 0; i < cfg.lambdas.size(); ++i)
        os << (i ? "," : "") << cfg.lambdas[i];
    os << "\n";
    return os.str();
}

StripConfig strip_from_config(const std::string& body) {
    StripConfig cfg;
    cfg.lambdas.clear();
    std::istringstream is(body);
    std::string line;
    while (std::getline(is, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            s.erase(0, s.find_first_not_of(" \t"));
            auto p = s.find_last_not_of(" \t\r");
            if (p != std::string::npos) s.erase(p + 1);
        };
        trim(key);
        trim(val);
        if (key == "d") cfg.d = std::stoi(val);
        else if (key == "x0") cfg.X0 = std::stod(val);
        else if (key == "x1") cfg.X1 = std::stod(val);
        else if (key == "lambdas") {
            std::istringstream vs(val);
            std::string tok;
            while (std::getline(vs, tok, ',')) cfg.lambdas.push_back(std::stod(tok));
        }
    }
    if (cfg.lambdas.empty()) cfg.lambdas.assign(cfg.d, 0.0);
    auto pc = check_pseudoconvexity(cfg);
    cfg.m_star = pc.m_star;
    cfg.M_star = pc.M_star;
    auto cc = check_coercivity(cfg);
    if (cc.ok) cfg.c0 = cc.c0;
    return cfg;
}

} // namespace ucl
