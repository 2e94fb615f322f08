#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "mpe/diagnostics.hpp"

namespace mpe {

/// One row of the energy ledger: every norm and trace the a-priori estimates
/// monitor, as named CSV columns.
struct EnergyRecord {
    std::int64_t step = 0;

    double v_l2 = 0, T_l2 = 0, q_l2 = 0;
    double v_h1 = 0, T_h1 = 0, q_h1 = 0;
    double T_l4 = 0, q_l4 = 0, vtilde_l4 = 0;
    double T_mean = 0;  // volume mean of T
    double T_trace_l2 = 0, q_trace_l2 = 0, T_trace_l4 = 0, q_trace_l4 = 0;

    // squared dissipation terms
    double grad_etheta_v_sq = 0, grad_ephi_v_sq = 0, dxi_v_sq = 0;
    double grad_T_sq = 0, dxi_T_sq = 0, grad_q_sq = 0, dxi_q_sq = 0;

    // barotropic-part surface gradients and xi-derivative norms
    double vbar_grad_etheta_l2 = 0, vbar_grad_ephi_l2 = 0;
    double v_xi_l2 = 0, T_xi_l2 = 0, q_xi_l2 = 0;

    double constraint_resid = 0;
    std::array<double, 3> z_h3 = {0, 0, 0};  // H^3 surrogates of Z1, Z2, Z3

    static std::string csv_header() {
        return "step,v_l2,T_l2,q_l2,v_h1,T_h1,q_h1,T_l4,q_l4,vtilde_l4,T_mean,"
               "T_trace_l2,q_trace_l2,T_trace_l4,q_trace_l4,"
               "grad_etheta_v_sq,grad_ephi_v_sq,dxi_v_sq,grad_T_sq,dxi_T_sq,"
               "grad_q_sq,dxi_q_sq,vbar_grad_etheta_l2,vbar_grad_ephi_l2,"
               "v_xi_l2,T_xi_l2,q_xi_l2,constraint_resid,Z1_h3,Z2_h3,Z3_h3";
    }

    std::string csv_row() const;
};

/// Pure ledger computation; identical states give identical records.
inline EnergyRecord make_energy_record(const State& U, std::int64_t step) {
    EnergyRecord r;
    r.step = step;
    const Grid& g = *U.v.g;

    r.v_l2 = norm_l2(U.v);
    r.T_l2 = norm_l2(U.T);
    r.q_l2 = norm_l2(U.q);

    auto [dth, dph] = covariant_frame_derivs(U.v);
    TangentField vxi = d_xi_free(U.v);
    r.grad_etheta_v_sq = ip(dth, dth);
    r.grad_ephi_v_sq = ip(dph, dph);
    r.dxi_v_sq = ip(vxi, vxi);
    r.v_xi_l2 = std::sqrt(r.dxi_v_sq);
    r.v_h1 = std::sqrt(r.grad_etheta_v_sq + r.grad_ephi_v_sq + r.dxi_v_sq + r.v_l2 * r.v_l2);

    TangentField gT = grad_h(U.T);
    ScalarField Txi = d_xi_free(U.T);
    r.grad_T_sq = ip(gT, gT);
    r.dxi_T_sq = ip(Txi, Txi);
    r.T_xi_l2 = std::sqrt(r.dxi_T_sq);
    r.T_trace_l2 = trace_norm(U.T, 1, 2);
    r.T_trace_l4 = trace_norm(U.T, 1, 4);
    r.T_h1 = std::sqrt(r.grad_T_sq + r.dxi_T_sq + U.T.robin * r.T_trace_l2 * r.T_trace_l2);

    TangentField gq = grad_h(U.q);
    ScalarField qxi = d_xi_free(U.q);
    r.grad_q_sq = ip(gq, gq);
    r.dxi_q_sq = ip(qxi, qxi);
    r.q_xi_l2 = std::sqrt(r.dxi_q_sq);
    r.q_trace_l2 = trace_norm(U.q, 1, 2);
    r.q_trace_l4 = trace_norm(U.q, 1, 4);
    r.q_h1 = std::sqrt(r.grad_q_sq + r.dxi_q_sq + U.q.robin * r.q_trace_l2 * r.q_trace_l2);

    r.T_l4 = norm_l4(U.T);
    r.q_l4 = norm_l4(U.q);
    r.T_mean = integrate_volume(U.T) / (4.0 * kPi);

    auto [vbar, vtilde] = baro_split(U.v);
    r.vtilde_l4 = norm_l4(vtilde);
    // surface covariant derivatives of vbar via a xi-constant embedding
    TangentField vb3(U.v.g);
    for (int i = 0; i < g.ntheta; ++i)
        for (int j = 0; j < g.nphi; ++j) {
            int sid = g.sidx(i, j), base = g.idx(i, j, 0);
            for (int k = 0; k < g.nxi; ++k) {
                vb3.vt[base + k] = vbar.vt[sid];
                vb3.vp[base + k] = vbar.vp[sid];
            }
        }
    auto [bdth, bdph] = covariant_frame_derivs(vb3);
    r.vbar_grad_etheta_l2 = std::sqrt(ip(bdth, bdth));
    r.vbar_grad_ephi_l2 = std::sqrt(ip(bdph, bdph));

    r.constraint_resid = constraint_residual(U.v);
    return r;
}

inline std::string EnergyRecord::csv_row() const {
    char buf[1400];
    std::snprintf(buf, sizeof buf,
                  "%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                  static_cast<long long>(step), v_l2, T_l2, q_l2, v_h1, T_h1, q_h1, T_l4,
                  q_l4, vtilde_l4, T_mean, T_trace_l2, q_trace_l2, T_trace_l4, q_trace_l4,
                  grad_etheta_v_sq, grad_ephi_v_sq, dxi_v_sq, grad_T_sq, dxi_T_sq,
                  grad_q_sq, dxi_q_sq, vbar_grad_etheta_l2, vbar_grad_ephi_l2, v_xi_l2,
                  T_xi_l2, q_xi_l2, constraint_resid, z_h3[0], z_h3[1], z_h3[2]);
    return buf;
}

}  // namespace mpe
