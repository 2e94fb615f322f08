#pragma once

#include "mpe/operators.hpp"

namespace mpe {

/// Squared V2/V3 norm: |grad_h f|^2 + |d_xi f|^2 integrated over the shell,
/// plus the Robin trace term coef * int_{S^2} f(xi=1)^2. The xi derivative is
/// the BC-free one-sided stencil so the norm is defined for arbitrary fields.
inline double norm_h1_sq(const ScalarField& f) {
    TangentField gh = grad_h(f);
    ScalarField fx = d_xi_free(f);
    double s = ip(gh, gh) + ip(fx, fx);
    if (f.bc == VerticalBC::robin_top) {
        double tr = trace_norm(f, 1, 2);
        s += f.robin * tr * tr;
    }
    return s;
}

/// Squared V1 norm of a velocity field:
/// int (|nabla_etheta v|^2 + |nabla_ephi v|^2 + |d_xi v|^2 + |v|^2).
inline double norm_h1_sq(const TangentField& v) {
    auto [dth, dph] = covariant_frame_derivs(v);
    TangentField vx = d_xi_free(v);
    return ip(dth, dth) + ip(dph, dph) + ip(vx, vx) + ip(v, v);
}

inline double norm_h1(const ScalarField& f) { return std::sqrt(norm_h1_sq(f)); }
inline double norm_h1(const TangentField& v) { return std::sqrt(norm_h1_sq(v)); }

inline double norm_l2_sq(const State& U) {
    return ip(U.v, U.v) + ip(U.T, U.T) + ip(U.q, U.q);
}

inline double norm_l2(const State& U) { return std::sqrt(norm_l2_sq(U)); }

inline double norm_h1_sq(const State& U) {
    return norm_h1_sq(U.v) + norm_h1_sq(U.T) + norm_h1_sq(U.q);
}

inline double norm_h1(const State& U) { return std::sqrt(norm_h1_sq(U)); }

/// Distance in the discrete V (H^1) phase space norm.
inline double dist_v(const State& a, const State& b) {
    State d(a.v.g, a.T.robin, a.q.robin);
    for (std::size_t n = 0; n < d.v.vt.size(); ++n) {
        d.v.vt[n] = a.v.vt[n] - b.v.vt[n];
        d.v.vp[n] = a.v.vp[n] - b.v.vp[n];
        d.T.v[n] = a.T.v[n] - b.T.v[n];
        d.q.v[n] = a.q.v[n] - b.q.v[n];
    }
    return norm_h1(d);
}

inline double dist_l2(const State& a, const State& b) {
    State d(a.v.g, a.T.robin, a.q.robin);
    for (std::size_t n = 0; n < d.v.vt.size(); ++n) {
        d.v.vt[n] = a.v.vt[n] - b.v.vt[n];
        d.v.vp[n] = a.v.vp[n] - b.v.vp[n];
        d.T.v[n] = a.T.v[n] - b.T.v[n];
        d.q.v[n] = a.q.v[n] - b.q.v[n];
    }
    return norm_l2(d);
}

}  // namespace mpe
