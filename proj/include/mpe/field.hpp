#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "mpe/grid.hpp"

namespace mpe {

/// Fields share ownership of their grid so that states can outlive the
/// engine that produced them (pullback experiments keep endpoint states
/// around after the per-branch simulators are gone).
using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(int nt, int np, int nx, double r0 = 0.5, double rs = 1.0) {
    return std::make_shared<const Grid>(nt, np, nx, r0, rs);
}

/// Vertical boundary treatment of a scalar variable. Neumann means
/// d_xi f = 0 at both ends; robin_top means
/// d_xi f = 0 at xi=0 and d_xi f = -coef * f at xi=1.
enum class VerticalBC { neumann, robin_top };

struct ScalarField {
    GridPtr g;
    VerticalBC bc = VerticalBC::neumann;
    double robin = 0.0;   // alpha or beta for robin_top, ignored otherwise
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(GridPtr grid, VerticalBC b = VerticalBC::neumann, double coef = 0.0)
        : g(std::move(grid)), bc(b), robin(coef), v(g->size(), 0.0) {}

    double& operator()(int i, int j, int k) { return v[g->idx(i, j, k)]; }
    double operator()(int i, int j, int k) const { return v[g->idx(i, j, k)]; }

    void fill(const std::function<double(double, double, double)>& f) {
        for (int i = 0; i < g->ntheta; ++i)
            for (int j = 0; j < g->nphi; ++j)
                for (int k = 0; k < g->nxi; ++k)
                    v[g->idx(i, j, k)] = f(g->theta[i], g->phi[j], g->xi[k]);
    }
};

/// Horizontal tangent vector field, components in the orthonormal frame
/// (e_theta, e_phi). Vertical BC is Neumann at both ends.
struct TangentField {
    GridPtr g;
    std::vector<double> vt, vp;

    TangentField() = default;
    explicit TangentField(GridPtr grid)
        : g(std::move(grid)), vt(g->size(), 0.0), vp(g->size(), 0.0) {}

    void fill(const std::function<double(double, double, double)>& ft,
              const std::function<double(double, double, double)>& fp) {
        for (int i = 0; i < g->ntheta; ++i)
            for (int j = 0; j < g->nphi; ++j)
                for (int k = 0; k < g->nxi; ++k) {
                    int id = g->idx(i, j, k);
                    vt[id] = ft(g->theta[i], g->phi[j], g->xi[k]);
                    vp[id] = fp(g->theta[i], g->phi[j], g->xi[k]);
                }
    }
};

struct SurfaceScalar {
    GridPtr g;
    std::vector<double> v;
    SurfaceScalar() = default;
    explicit SurfaceScalar(GridPtr grid) : g(std::move(grid)), v(g->surface_size(), 0.0) {}
    double& operator()(int i, int j) { return v[g->sidx(i, j)]; }
    double operator()(int i, int j) const { return v[g->sidx(i, j)]; }
};

struct SurfaceVector {
    GridPtr g;
    std::vector<double> vt, vp;
    SurfaceVector() = default;
    explicit SurfaceVector(GridPtr grid)
        : g(std::move(grid)), vt(g->surface_size(), 0.0), vp(g->surface_size(), 0.0) {}
};

/// Prognostic state U = (v, T, q) plus the diagnosed surface geopotential.
struct State {
    TangentField v;
    ScalarField T;   // robin_top with alpha
    ScalarField q;   // robin_top with beta
    SurfaceScalar phis;

    State() = default;
    State(const GridPtr& grid, double alpha, double beta)
        : v(grid),
          T(grid, VerticalBC::robin_top, alpha),
          q(grid, VerticalBC::robin_top, beta),
          phis(grid) {}
};

// ---- elementwise helpers -------------------------------------------------

inline void axpy(double a, const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t n = 0; n < y.size(); ++n) y[n] += a * x[n];
}

inline void scale(std::vector<double>& x, double a) {
    for (double& e : x) e *= a;
}

inline bool all_finite(const std::vector<double>& x) {
    for (double e : x)
        if (!std::isfinite(e)) return false;
    return true;
}

inline double max_abs(const std::vector<double>& x) {
    double m = 0.0;
    for (double e : x) m = std::max(m, std::abs(e));
    return m;
}

// ---- quadrature ----------------------------------------------------------

inline double integrate_volume(const ScalarField& f) {
    const Grid& g = *f.g;
    double s = 0.0;
    for (int i = 0; i < g.ntheta; ++i) {
        double wi = g.wtheta[i] * g.dphi;
        for (int j = 0; j < g.nphi; ++j)
            for (int k = 0; k < g.nxi; ++k)
                s += f.v[g.idx(i, j, k)] * wi * g.wxi[k];
    }
    return s;
}

/// Integral of f over the horizontal slab xi = level (level in {0,1}).
inline double integrate_surface(const ScalarField& f, int level) {
    if (level != 0 && level != 1)
        throw std::invalid_argument("integrate_surface: level must be 0 or 1");
    const Grid& g = *f.g;
    int k = level == 0 ? 0 : g.nxi - 1;
    double s = 0.0;
    for (int i = 0; i < g.ntheta; ++i)
        for (int j = 0; j < g.nphi; ++j)
            s += f.v[g.idx(i, j, k)] * g.surf_weight(i);
    return s;
}

inline double integrate_surface(const SurfaceScalar& f) {
    const Grid& g = *f.g;
    double s = 0.0;
    for (int i = 0; i < g.ntheta; ++i)
        for (int j = 0; j < g.nphi; ++j) s += f.v[g.sidx(i, j)] * g.surf_weight(i);
    return s;
}

// L2 inner products under the discrete quadrature.

inline double ip(const ScalarField& a, const ScalarField& b) {
    const Grid& g = *a.g;
    double s = 0.0;
    for (int i = 0; i < g.ntheta; ++i)
        for (int j = 0; j < g.nphi; ++j) {
            int base = g.idx(i, j, 0);
            double wi = g.wtheta[i] * g.dphi;
            for (int k = 0; k < g.nxi; ++k)
                s += a.v[base + k] * b.v[base + k] * wi * g.wxi[k];
        }
    return s;
}

inline double ip(const TangentField& a, const TangentField& b) {
    const Grid& g = *a.g;
    double s = 0.0;
    for (int i = 0; i < g.ntheta; ++i)
        for (int j = 0; j < g.nphi; ++j) {
            int base = g.idx(i, j, 0);
            double wi = g.wtheta[i] * g.dphi;
            for (int k = 0; k < g.nxi; ++k)
                s += (a.vt[base + k] * b.vt[base + k] + a.vp[base + k] * b.vp[base + k]) *
                     wi * g.wxi[k];
        }
    return s;
}

inline double ip_surface(const SurfaceScalar& a, const SurfaceScalar& b) {
    const Grid& g = *a.g;
    double s = 0.0;
    for (std::size_t n = 0; n < a.v.size(); ++n)
        s += a.v[n] * b.v[n] * g.surf_weight(int(n) / g.nphi);
    return s;
}

inline double ip_surface(const SurfaceVector& a, const SurfaceVector& b) {
    const Grid& g = *a.g;
    double s = 0.0;
    for (std::size_t n = 0; n < a.vt.size(); ++n)
        s += (a.vt[n] * b.vt[n] + a.vp[n] * b.vp[n]) * g.surf_weight(int(n) / g.nphi);
    return s;
}

inline double norm_l2(const ScalarField& f) { return std::sqrt(ip(f, f)); }
inline double norm_l2(const TangentField& f) { return std::sqrt(ip(f, f)); }
inline double norm_l2_surface(const SurfaceScalar& f) { return std::sqrt(ip_surface(f, f)); }

inline double norm_l4(const ScalarField& f) {
    const Grid& g = *f.g;
    double s = 0.0;
    for (int i = 0; i < g.ntheta; ++i)
        for (int j = 0; j < g.nphi; ++j) {
            int base = g.idx(i, j, 0);
            double wi = g.wtheta[i] * g.dphi;
            for (int k = 0; k < g.nxi; ++k) {
                double x = f.v[base + k];
                s += x * x * x * x * wi * g.wxi[k];
            }
        }
    return std::pow(s, 0.25);
}

inline double norm_l4(const TangentField& f) {
    const Grid& g = *f.g;
    double s = 0.0;
    for (int i = 0; i < g.ntheta; ++i)
        for (int j = 0; j < g.nphi; ++j) {
            int base = g.idx(i, j, 0);
            double wi = g.wtheta[i] * g.dphi;
            for (int k = 0; k < g.nxi; ++k) {
                double x2 = f.vt[base + k] * f.vt[base + k] + f.vp[base + k] * f.vp[base + k];
                s += x2 * x2 * wi * g.wxi[k];
            }
        }
    return std::pow(s, 0.25);
}

/// L2 norm of the trace at xi = level; p = 2 or 4 selects the trace norm.
inline double trace_norm(const ScalarField& f, int level, int p = 2) {
    const Grid& g = *f.g;
    int k = level == 0 ? 0 : g.nxi - 1;
    double s = 0.0;
    for (int i = 0; i < g.ntheta; ++i)
        for (int j = 0; j < g.nphi; ++j) {
            double x = f.v[g.idx(i, j, k)];
            s += (p == 2 ? x * x : x * x * x * x) * g.surf_weight(i);
        }
    return p == 2 ? std::sqrt(s) : std::pow(s, 0.25);
}

}  // namespace mpe
