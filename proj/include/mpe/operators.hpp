#pragma once

#include <stdexcept>
#include <utility>

#include "mpe/field.hpp"

namespace mpe {

/// Model parameters entering the differential operators.
struct OperatorParams {
    double R0 = 1.0;      // Rossby number
    double nu = 1.0;      // horizontal diffusivity
    double mu = 1.0;      // vertical diffusivity
    double alpha = 1.0;   // Robin coefficient for T at xi=1
    double beta = 1.0;    // Robin coefficient for q at xi=1
};

namespace detail {

// Centered theta derivative, second-order one-sided at the first/last ring.
template <class Get>
inline double dtheta_at(const Grid& g, int i, Get f) {
    if (i == 0) return (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * g.dtheta);
    if (i == g.ntheta - 1)
        return (3.0 * f(i) - 4.0 * f(i - 1) + f(i - 2)) / (2.0 * g.dtheta);
    return (f(i + 1) - f(i - 1)) / (2.0 * g.dtheta);
}

}  // namespace detail

// ---- horizontal gradient ---------------------------------------------------

inline TangentField grad_h(const ScalarField& T) {
    const Grid& g = *T.g;
    TangentField out(T.g);
    for (int j = 0; j < g.nphi; ++j) {
        int jl = g.jm(j), jr = g.jp(j);
        for (int i = 0; i < g.ntheta; ++i)
            for (int k = 0; k < g.nxi; ++k) {
                auto fth = [&](int ii) { return T.v[g.idx(ii, j, k)]; };
                int id = g.idx(i, j, k);
                out.vt[id] = detail::dtheta_at(g, i, fth);
                out.vp[id] = (T.v[g.idx(i, jr, k)] - T.v[g.idx(i, jl, k)]) /
                             (2.0 * g.dphi) * g.inv_sin_t[i];
            }
    }
    return out;
}

inline SurfaceVector grad_h(const SurfaceScalar& T) {
    const Grid& g = *T.g;
    SurfaceVector out(T.g);
    for (int j = 0; j < g.nphi; ++j) {
        int jl = g.jm(j), jr = g.jp(j);
        for (int i = 0; i < g.ntheta; ++i) {
            auto fth = [&](int ii) { return T.v[g.sidx(ii, j)]; };
            int id = g.sidx(i, j);
            out.vt[id] = detail::dtheta_at(g, i, fth);
            out.vp[id] = (T.v[g.sidx(i, jr)] - T.v[g.sidx(i, jl)]) /
                         (2.0 * g.dphi) * g.inv_sin_t[i];
        }
    }
    return out;
}

// ---- divergence (flux form in theta; total flux through the poles is zero) --

inline ScalarField div_h(const TangentField& u) {
    const Grid& g = *u.g;
    ScalarField out(u.g);
    for (int i = 0; i < g.ntheta; ++i) {
        double slo = g.sin_edge[i], shi = g.sin_edge[i + 1];
        double c = 1.0 / (g.sin_t[i] * g.dtheta);
        for (int j = 0; j < g.nphi; ++j) {
            int jl = g.jm(j), jr = g.jp(j);
            for (int k = 0; k < g.nxi; ++k) {
                int id = g.idx(i, j, k);
                double fh = (i + 1 < g.ntheta)
                                ? shi * 0.5 * (u.vt[id] + u.vt[g.idx(i + 1, j, k)])
                                : 0.0;
                double fl = (i > 0) ? slo * 0.5 * (u.vt[g.idx(i - 1, j, k)] + u.vt[id])
                                    : 0.0;
                out.v[id] = (fh - fl) * c +
                            (u.vp[g.idx(i, jr, k)] - u.vp[g.idx(i, jl, k)]) /
                                (2.0 * g.dphi) * g.inv_sin_t[i];
            }
        }
    }
    return out;
}

inline SurfaceScalar div_h(const SurfaceVector& u) {
    const Grid& g = *u.g;
    SurfaceScalar out(u.g);
    for (int i = 0; i < g.ntheta; ++i) {
        double slo = g.sin_edge[i], shi = g.sin_edge[i + 1];
        double c = 1.0 / (g.sin_t[i] * g.dtheta);
        for (int j = 0; j < g.nphi; ++j) {
            int jl = g.jm(j), jr = g.jp(j);
            int id = g.sidx(i, j);
            double fh = (i + 1 < g.ntheta) ? shi * 0.5 * (u.vt[id] + u.vt[g.sidx(i + 1, j)])
                                           : 0.0;
            double fl = (i > 0) ? slo * 0.5 * (u.vt[g.sidx(i - 1, j)] + u.vt[id]) : 0.0;
            out.v[id] = (fh - fl) * c + (u.vp[g.sidx(i, jr)] - u.vp[g.sidx(i, jl)]) /
                                            (2.0 * g.dphi) * g.inv_sin_t[i];
        }
    }
    return out;
}

// ---- covariant derivatives --------------------------------------------------

/// Covariant derivatives of u along the frame vectors:
///   nabla_{e_theta} u = (d_theta u_t, d_theta u_p)
///   nabla_{e_phi}   u = (d_phi u_t / sin - u_p cot, d_phi u_p / sin + u_t cot)
inline std::pair<TangentField, TangentField> covariant_frame_derivs(const TangentField& u) {
    const Grid& g = *u.g;
    TangentField dth(u.g), dph(u.g);
    for (int j = 0; j < g.nphi; ++j) {
        int jl = g.jm(j), jr = g.jp(j);
        for (int i = 0; i < g.ntheta; ++i)
            for (int k = 0; k < g.nxi; ++k) {
                int id = g.idx(i, j, k);
                auto ut = [&](int ii) { return u.vt[g.idx(ii, j, k)]; };
                auto up = [&](int ii) { return u.vp[g.idx(ii, j, k)]; };
                dth.vt[id] = detail::dtheta_at(g, i, ut);
                dth.vp[id] = detail::dtheta_at(g, i, up);
                double dpt = (u.vt[g.idx(i, jr, k)] - u.vt[g.idx(i, jl, k)]) / (2.0 * g.dphi);
                double dpp = (u.vp[g.idx(i, jr, k)] - u.vp[g.idx(i, jl, k)]) / (2.0 * g.dphi);
                dph.vt[id] = dpt * g.inv_sin_t[i] - u.vp[id] * g.cot_t[i];
                dph.vp[id] = dpp * g.inv_sin_t[i] + u.vt[id] * g.cot_t[i];
            }
    }
    return {std::move(dth), std::move(dph)};
}

/// nabla_v u with the cot(theta) coupling terms.
inline TangentField advect_vector(const TangentField& v, const TangentField& u) {
    const Grid& g = *v.g;
    TangentField out(v.g);
    for (int j = 0; j < g.nphi; ++j) {
        int jl = g.jm(j), jr = g.jp(j);
        for (int i = 0; i < g.ntheta; ++i)
            for (int k = 0; k < g.nxi; ++k) {
                int id = g.idx(i, j, k);
                auto ut = [&](int ii) { return u.vt[g.idx(ii, j, k)]; };
                auto up = [&](int ii) { return u.vp[g.idx(ii, j, k)]; };
                double dt_ut = detail::dtheta_at(g, i, ut);
                double dt_up = detail::dtheta_at(g, i, up);
                double dp_ut = (u.vt[g.idx(i, jr, k)] - u.vt[g.idx(i, jl, k)]) / (2.0 * g.dphi);
                double dp_up = (u.vp[g.idx(i, jr, k)] - u.vp[g.idx(i, jl, k)]) / (2.0 * g.dphi);
                double vt = v.vt[id], vp = v.vp[id];
                out.vt[id] = vt * dt_ut + vp * (dp_ut * g.inv_sin_t[i] - u.vp[id] * g.cot_t[i]);
                out.vp[id] = vt * dt_up + vp * (dp_up * g.inv_sin_t[i] + u.vt[id] * g.cot_t[i]);
            }
    }
    return out;
}

/// nabla_v T = v_t d_theta T + (v_p / sin) d_phi T.
inline ScalarField advect_scalar(const TangentField& v, const ScalarField& T) {
    const Grid& g = *v.g;
    ScalarField out(T.g, T.bc, T.robin);
    for (int j = 0; j < g.nphi; ++j) {
        int jl = g.jm(j), jr = g.jp(j);
        for (int i = 0; i < g.ntheta; ++i)
            for (int k = 0; k < g.nxi; ++k) {
                int id = g.idx(i, j, k);
                auto f = [&](int ii) { return T.v[g.idx(ii, j, k)]; };
                double dp = (T.v[g.idx(i, jr, k)] - T.v[g.idx(i, jl, k)]) / (2.0 * g.dphi);
                out.v[id] = v.vt[id] * detail::dtheta_at(g, i, f) +
                            v.vp[id] * dp * g.inv_sin_t[i];
            }
    }
    return out;
}

// ---- Laplace-Beltrami --------------------------------------------------------

namespace detail {

// Flux-form theta part of the scalar Laplacian at (i,j,k)/(i,j). The edge
// sines vanish at the poles, so no one-sided stencil is needed and the
// operator is exactly self-adjoint under the cell quadrature.
template <class Get>
inline double lap_theta(const Grid& g, int i, Get f) {
    double hi = (i + 1 < g.ntheta) ? g.sin_edge[i + 1] * (f(i + 1) - f(i)) : 0.0;
    double lo = (i > 0) ? g.sin_edge[i] * (f(i) - f(i - 1)) : 0.0;
    return (hi - lo) / (g.sin_t[i] * g.dtheta * g.dtheta);
}

}  // namespace detail

inline ScalarField laplace_scalar(const ScalarField& T) {
    const Grid& g = *T.g;
    ScalarField out(T.g, T.bc, T.robin);
    double idp2 = 1.0 / (g.dphi * g.dphi);
    for (int j = 0; j < g.nphi; ++j) {
        int jl = g.jm(j), jr = g.jp(j);
        for (int i = 0; i < g.ntheta; ++i) {
            double is2 = g.inv_sin_t[i] * g.inv_sin_t[i];
            for (int k = 0; k < g.nxi; ++k) {
                int id = g.idx(i, j, k);
                auto f = [&](int ii) { return T.v[g.idx(ii, j, k)]; };
                double pp = (T.v[g.idx(i, jr, k)] - 2.0 * T.v[id] + T.v[g.idx(i, jl, k)]) * idp2;
                out.v[id] = detail::lap_theta(g, i, f) + pp * is2;
            }
        }
    }
    return out;
}

inline SurfaceScalar laplace_scalar(const SurfaceScalar& T) {
    const Grid& g = *T.g;
    SurfaceScalar out(T.g);
    double idp2 = 1.0 / (g.dphi * g.dphi);
    for (int j = 0; j < g.nphi; ++j) {
        int jl = g.jm(j), jr = g.jp(j);
        for (int i = 0; i < g.ntheta; ++i) {
            double is2 = g.inv_sin_t[i] * g.inv_sin_t[i];
            int id = g.sidx(i, j);
            auto f = [&](int ii) { return T.v[g.sidx(ii, j)]; };
            double pp = (T.v[g.sidx(i, jr)] - 2.0 * T.v[id] + T.v[g.sidx(i, jl)]) * idp2;
            out.v[id] = detail::lap_theta(g, i, f) + pp * is2;
        }
    }
    return out;
}

/// Vector Laplace-Beltrami with the metric coupling terms
///   (Delta v)_t = Delta v_t - (2cos/sin^2) d_phi v_p - v_t/sin^2
///   (Delta v)_p = Delta v_p + (2cos/sin^2) d_phi v_t - v_p/sin^2
inline TangentField laplace_vector(const TangentField& u) {
    const Grid& g = *u.g;
    TangentField out(u.g);
    double idp2 = 1.0 / (g.dphi * g.dphi);
    for (int j = 0; j < g.nphi; ++j) {
        int jl = g.jm(j), jr = g.jp(j);
        for (int i = 0; i < g.ntheta; ++i) {
            double is2 = g.inv_sin_t[i] * g.inv_sin_t[i];
            double cpl = 2.0 * g.cos_t[i] * is2;
            for (int k = 0; k < g.nxi; ++k) {
                int id = g.idx(i, j, k);
                auto ft = [&](int ii) { return u.vt[g.idx(ii, j, k)]; };
                auto fp = [&](int ii) { return u.vp[g.idx(ii, j, k)]; };
                double tr = u.vt[g.idx(i, jr, k)], tl = u.vt[g.idx(i, jl, k)];
                double pr = u.vp[g.idx(i, jr, k)], pl = u.vp[g.idx(i, jl, k)];
                double lap_t = detail::lap_theta(g, i, ft) + (tr - 2.0 * u.vt[id] + tl) * idp2 * is2;
                double lap_p = detail::lap_theta(g, i, fp) + (pr - 2.0 * u.vp[id] + pl) * idp2 * is2;
                double dpt = (tr - tl) / (2.0 * g.dphi);
                double dpp = (pr - pl) / (2.0 * g.dphi);
                out.vt[id] = lap_t - cpl * dpp - u.vt[id] * is2;
                out.vp[id] = lap_p + cpl * dpt - u.vp[id] * is2;
            }
        }
    }
    return out;
}

// ---- vertical derivatives ------------------------------------------------------

namespace detail {

// Ghost value one past the top (k = nxi), from the field's declared BC.
inline double ghost_top(const Grid& g, const std::vector<double>& v, int base,
                        VerticalBC bc, double coef) {
    int n = g.nxi;
    double mirror = v[base + n - 2];
    if (bc == VerticalBC::robin_top) return mirror - 2.0 * g.dxi * coef * v[base + n - 1];
    return mirror;
}

}  // namespace detail

/// Centered d/dxi with ghost values enforcing the field's vertical BC.
inline void d_xi_column(const Grid& g, const std::vector<double>& v, int base,
                        VerticalBC bc, double coef, double* out) {
    int n = g.nxi;
    double h2 = 2.0 * g.dxi;
    out[0] = 0.0;  // mirror ghost at xi = 0
    for (int k = 1; k < n - 1; ++k) out[k] = (v[base + k + 1] - v[base + k - 1]) / h2;
    double ghost = detail::ghost_top(g, v, base, bc, coef);
    out[n - 1] = (ghost - v[base + n - 2]) / h2;
}

/// Centered d2/dxi2 with the same ghost treatment.
inline void d2_xi_column(const Grid& g, const std::vector<double>& v, int base,
                         VerticalBC bc, double coef, double* out) {
    int n = g.nxi;
    double ih2 = 1.0 / (g.dxi * g.dxi);
    out[0] = 2.0 * (v[base + 1] - v[base]) * ih2;
    for (int k = 1; k < n - 1; ++k)
        out[k] = (v[base + k + 1] - 2.0 * v[base + k] + v[base + k - 1]) * ih2;
    double ghost = detail::ghost_top(g, v, base, bc, coef);
    out[n - 1] = (ghost - 2.0 * v[base + n - 1] + v[base + n - 2]) * ih2;
}

// BC-free one-sided column derivative; used by norms and diagnostics, which
// must not assume the stored values satisfy any boundary relation.
inline void d_xi_free_column(const Grid& g, const std::vector<double>& v, int base,
                             double* out) {
    int n = g.nxi;
    double h2 = 2.0 * g.dxi;
    out[0] = (-3.0 * v[base] + 4.0 * v[base + 1] - v[base + 2]) / h2;
    for (int k = 1; k < n - 1; ++k) out[k] = (v[base + k + 1] - v[base + k - 1]) / h2;
    out[n - 1] = (3.0 * v[base + n - 1] - 4.0 * v[base + n - 2] + v[base + n - 3]) / h2;
}

namespace detail {

template <class ColOp>
inline ScalarField map_columns(const ScalarField& f, ColOp op) {
    const Grid& g = *f.g;
    ScalarField out(f.g, f.bc, f.robin);
    for (int i = 0; i < g.ntheta; ++i)
        for (int j = 0; j < g.nphi; ++j) {
            int base = g.idx(i, j, 0);
            op(g, f.v, base, &out.v[base]);
        }
    return out;
}

}  // namespace detail

inline ScalarField d_xi(const ScalarField& f) {
    return detail::map_columns(f, [&](const Grid& g, const std::vector<double>& v, int b,
                                      double* o) { d_xi_column(g, v, b, f.bc, f.robin, o); });
}

inline ScalarField d2_xi(const ScalarField& f) {
    return detail::map_columns(f, [&](const Grid& g, const std::vector<double>& v, int b,
                                      double* o) { d2_xi_column(g, v, b, f.bc, f.robin, o); });
}

/// Variant with an explicit BC argument; rejects a mismatch with the field tag.
inline ScalarField d_xi(const ScalarField& f, VerticalBC bc) {
    if (bc != f.bc) throw std::invalid_argument("d_xi: BC does not match field tag");
    return d_xi(f);
}

inline ScalarField d2_xi(const ScalarField& f, VerticalBC bc) {
    if (bc != f.bc) throw std::invalid_argument("d2_xi: BC does not match field tag");
    return d2_xi(f);
}

inline ScalarField d_xi_free(const ScalarField& f) {
    return detail::map_columns(
        f, [](const Grid& g, const std::vector<double>& v, int b, double* o) {
            d_xi_free_column(g, v, b, o);
        });
}

inline TangentField d_xi(const TangentField& u) {
    const Grid& g = *u.g;
    TangentField out(u.g);
    for (int i = 0; i < g.ntheta; ++i)
        for (int j = 0; j < g.nphi; ++j) {
            int base = g.idx(i, j, 0);
            d_xi_column(g, u.vt, base, VerticalBC::neumann, 0.0, &out.vt[base]);
            d_xi_column(g, u.vp, base, VerticalBC::neumann, 0.0, &out.vp[base]);
        }
    return out;
}

inline TangentField d2_xi(const TangentField& u) {
    const Grid& g = *u.g;
    TangentField out(u.g);
    for (int i = 0; i < g.ntheta; ++i)
        for (int j = 0; j < g.nphi; ++j) {
            int base = g.idx(i, j, 0);
            d2_xi_column(g, u.vt, base, VerticalBC::neumann, 0.0, &out.vt[base]);
            d2_xi_column(g, u.vp, base, VerticalBC::neumann, 0.0, &out.vp[base]);
        }
    return out;
}

inline TangentField d_xi_free(const TangentField& u) {
    const Grid& g = *u.g;
    TangentField out(u.g);
    for (int i = 0; i < g.ntheta; ++i)
        for (int j = 0; j < g.nphi; ++j) {
            int base = g.idx(i, j, 0);
            d_xi_free_column(g, u.vt, base, &out.vt[base]);
            d_xi_free_column(g, u.vp, base, &out.vp[base]);
        }
    return out;
}

// ---- Coriolis --------------------------------------------------------------------

/// (f/R0) k x v with f = 2 cos(theta) and k x v = (-v_p, v_t).
/// Pointwise orthogonal to v, so exactly energy-neutral.
inline TangentField coriolis(const TangentField& v, double R0) {
    const Grid& g = *v.g;
    TangentField out(v.g);
    for (int i = 0; i < g.ntheta; ++i) {
        double c = 2.0 * g.cos_t[i] / R0;
        for (int j = 0; j < g.nphi; ++j)
            for (int k = 0; k < g.nxi; ++k) {
                int id = g.idx(i, j, k);
                out.vt[id] = -c * v.vp[id];
                out.vp[id] = c * v.vt[id];
            }
    }
    return out;
}

}  // namespace mpe
