#include "ucl/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace ucl {

std::size_t GridField::nt() const {
    std::size_t n = 1;
    for (int a = 1; a < d; ++a) n *= std::size_t(nperp);
    return n;
}

bool GridField::compatible(const GridField& o) const {
    return d == o.d && n1 == o.n1 && nperp == o.nperp && X0 == o.X0 &&
           X1 == o.X1 && Lperp == o.Lperp;
}

GridField make_field(int d, int n1, int nperp, double X0, double X1, double Lperp) {
    if (d < 2 || n1 < 2 || nperp < 1) throw std::invalid_argument("bad grid shape");
    GridField f;
    f.d = d;
    f.n1 = n1;
    f.nperp = nperp;
    f.X0 = X0;
    f.X1 = X1;
    f.Lperp = Lperp;
    f.v.assign(f.size(), cplx(0.0, 0.0));
    return f;
}

void axpy(GridField& y, cplx a, const GridField& x) {
    if (!y.compatible(x)) throw std::invalid_argument("axpy: incompatible fields");
    for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] += a * x.v[i];
}

void scale(GridField& f, cplx a) {
    for (auto& z : f.v) z *= a;
}

namespace {

GridField transverse_dft(const GridField& f, int sign) {
    GridField out = f;
    const int rank = f.d - 1;
    std::vector<int> dims(rank, f.nperp);
    const std::size_t nt = f.nt();
    fftw_plan plan = fftw_plan_dft(
        rank, dims.data(),
        reinterpret_cast<fftw_complex*>(out.v.data()),
        reinterpret_cast<fftw_complex*>(out.v.data()),
        sign, FFTW_ESTIMATE);
    for (int i1 = 0; i1 < f.n1; ++i1) {
        fftw_complex* slice = reinterpret_cast<fftw_complex*>(out.v.data() + f.idx(i1, 0));
        fftw_execute_dft(plan, slice, slice);
    }
    fftw_destroy_plan(plan);
    if (sign == FFTW_BACKWARD) {
        const double s = 1.0 / double(nt);
        for (auto& z : out.v) z *= s;
    }
    return out;
}

} // namespace

GridField to_modes(const GridField& f) { return transverse_dft(f, FFTW_FORWARD); }
GridField from_modes(const GridField& fhat) { return transverse_dft(fhat, FFTW_BACKWARD); }

double mode_frequency(int m, int nperp, double Lperp) {
    const int k = (m <= nperp / 2) ? m : m - nperp;
    return 2.0 * M_PI * double(k) / Lperp;
}

void mode_xi(const GridField& f, std::size_t it, std::vector<double>& xi) {
    xi.resize(f.d - 1);
    for (int a = f.d - 2; a >= 0; --a) {
        const int m = int(it % std::size_t(f.nperp));
        it /= std::size_t(f.nperp);
        xi[a] = mode_frequency(m, f.nperp, f.Lperp);
    }
}

double lp_norm(const GridField& f, double p) {
    const std::size_t nt = f.nt();
    if (std::isinf(p)) {
        double m = 0.0;
        for (const auto& z : f.v) m = std::max(m, std::abs(z));
        return m;
    }
    double s = 0.0;
    double wt = 1.0;
    for (int a = 1; a < f.d; ++a) wt *= f.hperp();
    for (int i1 = 0; i1 < f.n1; ++i1) {
        const double w1 = (i1 == 0 || i1 == f.n1 - 1) ? 0.5 * f.h1() : f.h1();
        double row = 0.0;
        for (std::size_t it = 0; it < nt; ++it)
            row += std::pow(std::abs(f.v[f.idx(i1, it)]), p);
        s += w1 * wt * row;
    }
    return std::pow(s, 1.0 / p);
}

double lp_norm_masked(const GridField& f, double p, const std::vector<char>& mask) {
    if (mask.size() != f.size()) throw std::invalid_argument("mask size mismatch");
    const std::size_t nt = f.nt();
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t i = 0; i < f.v.size(); ++i)
            if (mask[i]) m = std::max(m, std::abs(f.v[i]));
        return m;
    }
    double s = 0.0;
    double wt = 1.0;
    for (int a = 1; a < f.d; ++a) wt *= f.hperp();
    for (int i1 = 0; i1 < f.n1; ++i1) {
        const double w1 = (i1 == 0 || i1 == f.n1 - 1) ? 0.5 * f.h1() : f.h1();
        for (std::size_t it = 0; it < nt; ++it) {
            const std::size_t i = f.idx(i1, it);
            if (mask[i]) s += w1 * wt * std::pow(std::abs(f.v[i]), p);
        }
    }
    return std::pow(s, 1.0 / p);
}

bool check_margin(const GridField& f, int cells) {
    const std::size_t nt = f.nt();
    std::vector<int> sub(f.d - 1);
    for (int i1 = 0; i1 < f.n1; ++i1) {
        const bool x1_margin = (i1 < cells) || (i1 >= f.n1 - cells);
        for (std::size_t it = 0; it < nt; ++it) {
            std::size_t r = it;
            bool perp_margin = false;
            for (int a = f.d - 2; a >= 0; --a) {
                const int m = int(r % std::size_t(f.nperp));
                r /= std::size_t(f.nperp);
                if (m < cells || m >= f.nperp - cells) perp_margin = true;
            }
            if ((x1_margin || perp_margin) && std::abs(f.v[f.idx(i1, it)]) != 0.0)
                return false;
        }
    }
    return true;
}

std::vector<GridField> gradient(const GridField& f) {
    std::vector<GridField> g(f.d, make_field(f.d, f.n1, f.nperp, f.X0, f.X1, f.Lperp));
    const std::size_t nt = f.nt();
    const double h = f.h1();
    for (std::size_t it = 0; it < nt; ++it) {
        for (int i1 = 0; i1 < f.n1; ++i1) {
            cplx dv;
            if (i1 == 0)
                dv = (f.v[f.idx(1, it)] - f.v[f.idx(0, it)]) / h;
            else if (i1 == f.n1 - 1)
                dv = (f.v[f.idx(i1, it)] - f.v[f.idx(i1 - 1, it)]) / h;
            else
                dv = (f.v[f.idx(i1 + 1, it)] - f.v[f.idx(i1 - 1, it)]) / (2.0 * h);
            g[0].v[f.idx(i1, it)] = dv;
        }
    }
    GridField fhat = to_modes(f);
    std::vector<double> xi;
    for (int a = 1; a < f.d; ++a) {
        GridField comp = fhat;
        for (std::size_t it = 0; it < nt; ++it) {
            mode_xi(f, it, xi);
            const cplx mult(0.0, xi[a - 1]);
            for (int i1 = 0; i1 < f.n1; ++i1) comp.v[f.idx(i1, it)] *= mult;
        }
        g[a] = from_modes(comp);
    }
    return g;
}

GridField div_perp(const std::vector<GridField>& Fperp) {
    if (Fperp.empty()) throw std::invalid_argument("empty field list");
    const GridField& ref = Fperp[0];
    if ((int)Fperp.size() != ref.d - 1)
        throw std::invalid_argument("div_perp wants d-1 components");
    GridField acc = make_field(ref.d, ref.n1, ref.nperp, ref.X0, ref.X1, ref.Lperp);
    std::vector<double> xi;
    const std::size_t nt = ref.nt();
    for (int a = 0; a < ref.d - 1; ++a) {
        GridField chat = to_modes(Fperp[a]);
        for (std::size_t it = 0; it < nt; ++it) {
            mode_xi(ref, it, xi);
            const cplx mult(0.0, xi[a]);
            for (int i1 = 0; i1 < ref.n1; ++i1)
                acc.v[acc.idx(i1, it)] += mult * chat.v[chat.idx(i1, it)];
        }
    }
    return from_modes(acc);
}

} // namespace ucl
