#pragma once

#include "mpe/solver.hpp"

namespace mpe {

// ---- advection cancellation suite -------------------------------------------

struct SkewReport {
    double scalar_T = 0, scalar_q = 0, vector_u = 0;
    double max_abs() const {
        return std::max({std::abs(scalar_T), std::abs(scalar_q), std::abs(vector_u)});
    }
};

/// Paired quadratures <nabla_v x + w(v) d_xi x, x> for x in {T, q, test
/// velocity}. Zero in the continuum when the barotropic constraint holds;
/// discretely O(h^2) * |v| * |x|^2.
inline SkewReport check_skew_suite(const State& U, const TangentField& utest) {
    SkewReport rep;
    ScalarField w = w_of_v(U.v);

    auto scalar_case = [&](const ScalarField& x) {
        ScalarField adv = advect_scalar(U.v, x);
        ScalarField xxi = d_xi(x);
        ScalarField tot(x.g, x.bc, x.robin);
        for (std::size_t m = 0; m < tot.v.size(); ++m)
            tot.v[m] = adv.v[m] + w.v[m] * xxi.v[m];
        return ip(tot, x);
    };
    rep.scalar_T = scalar_case(U.T);
    rep.scalar_q = scalar_case(U.q);

    TangentField adv = advect_vector(U.v, utest);
    TangentField uxi = d_xi(utest);
    TangentField tot(utest.g);
    for (std::size_t m = 0; m < tot.vt.size(); ++m) {
        tot.vt[m] = adv.vt[m] + w.v[m] * uxi.vt[m];
        tot.vp[m] = adv.vp[m] + w.v[m] * uxi.vp[m];
    }
    rep.vector_u = ip(tot, utest);
    return rep;
}

// ---- vertical Poincare trace inequality ----------------------------------------

struct PoincareReport {
    double lhs = 0;    // |p|_2^2
    double rhs = 0;    // 2 |p(xi=1)|_2^2 + 4 |d_xi p|_2^2
    double slack = 0;  // allowed factor - 1
    bool pass = false;
    double margin() const { return rhs * (1.0 + slack) - lhs; }
};

/// |p|_2^2 <= 2 |p(xi=1)|_2^2 + 4 |d_xi p|_2^2 within a 1 + O(dxi) factor.
inline PoincareReport check_poincare_trace(const ScalarField& p) {
    PoincareReport r;
    double l2 = norm_l2(p);
    double tr = trace_norm(p, 1, 2);
    ScalarField px = d_xi_free(p);
    double dx2 = ip(px, px);
    r.lhs = l2 * l2;
    r.rhs = 2.0 * tr * tr + 4.0 * dx2;
    r.slack = 4.0 * p.g->dxi;
    r.pass = r.lhs <= r.rhs * (1.0 + r.slack);
    return r;
}

// ---- dissipation / boundedness checks -------------------------------------------

struct DissipationReport {
    bool monotone = true;           // zero-input strict decay (asserted)
    std::int64_t first_violation = -1;
    double worst_rel_increase = 0;  // most positive per-record relative change
    bool bounded_flag = true;       // second-half max <= 2x first-half max (flag only)
    bool constants_ok = true;       // b rs / r0 <= min(1/2, alpha, beta)
    std::string warning;
};

/// (a) zero-input monotone decay of |v|^2+|T|^2+|q|^2 along the record
/// sequence, relative slack per comparison; (b) boundedness heuristic over
/// the two halves (flagged, not asserted); (c) the small-coupling condition
/// for the attractor regime, warned when violated.
inline DissipationReport check_dissipation(const Trajectory& traj, const RunConfig& cfg,
                                           bool expect_decay, double rel_slack = 1e-12) {
    DissipationReport rep;
    PhysicalConstants pc = cfg.constants();
    rep.constants_ok = pc.attractor_condition(cfg.alpha, cfg.beta);
    if (!rep.constants_ok)
        rep.warning = "coupling b*rs/r0 exceeds min(1/2, alpha, beta); "
                      "uniform absorption estimates are not in force";

    std::vector<double> e2;
    e2.reserve(traj.records.size());
    for (const EnergyRecord& r : traj.records)
        e2.push_back(r.v_l2 * r.v_l2 + r.T_l2 * r.T_l2 + r.q_l2 * r.q_l2);

    if (expect_decay) {
        for (std::size_t i = 1; i < e2.size(); ++i) {
            double rel = (e2[i] - e2[i - 1]) / std::max(e2[i - 1], 1e-300);
            rep.worst_rel_increase = std::max(rep.worst_rel_increase, rel);
            if (rel > rel_slack && rep.first_violation < 0) {
                rep.monotone = false;
                rep.first_violation = traj.records[i].step;
            }
        }
    }

    if (e2.size() >= 4) {
        std::size_t half = e2.size() / 2;
        double m1 = 0, m2 = 0;
        for (std::size_t i = 0; i < half; ++i) m1 = std::max(m1, e2[i]);
        for (std::size_t i = half; i < e2.size(); ++i) m2 = std::max(m2, e2[i]);
        rep.bounded_flag = m2 <= 2.0 * m1 + 1e-300;
    }
    return rep;
}

}  // namespace mpe
