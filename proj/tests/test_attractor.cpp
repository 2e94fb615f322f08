#include <catch2/catch_amalgamated.hpp>

#include "mpe/attractor.hpp"

using namespace mpe;

namespace {

RunConfig desk8() {
    RunConfig cfg;
    cfg.ntheta = cfg.nphi = 8;
    cfg.nxi = 5;
    cfg.dt = 5e-4;
    cfg.alpha = cfg.beta = 2.0;
    cfg.seed = 21;
    cfg.record_every = 0;
    cfg.noise.Lmax = 1;
    cfg.noise.Kmax = 1;
    return cfg;
}

}  // namespace

TEST_CASE("smooth initial states: radius, constraint, reproducibility") {
    RunConfig cfg = desk8();
    Simulator sim(cfg);
    State a = make_smooth_state(sim, 5, 0, 1.7);
    CHECK(norm_h1(a) == Catch::Approx(1.7).epsilon(1e-12));
    CHECK(constraint_residual(a.v) < 1e-11);
    State a2 = make_smooth_state(sim, 5, 0, 1.7);
    CHECK(a.v.vt == a2.v.vt);
    State b = make_smooth_state(sim, 5, 1, 1.7);
    CHECK(dist_v(a, b) > 0.1);
}

TEST_CASE("pullback: degenerate families") {
    RunConfig cfg = desk8();
    SECTION("start indices must decrease") {
        PullbackPlan bad;
        bad.starts = {-10, -10};
        CHECK_THROWS_AS(pullback_run(cfg, bad), std::invalid_argument);
    }
    SECTION("two bit-identical initial states stay bit-identical") {
        // determinism: same (s, state) run twice lands on the same endpoint
        RunConfig c = cfg;
        c.t_start = -50;
        c.t_end = 0;
        Simulator sim(c);
        State u = make_smooth_state(sim, 3, 0, 1.0);
        Trajectory t1 = sim.run(u);
        Trajectory t2 = sim.run(u);
        CHECK(t1.final_state.v.vt == t2.final_state.v.vt);
        CHECK(t1.final_state.T.v == t2.final_state.T.v);
        CHECK(dist_v(t1.final_state, t2.final_state) == 0.0);
    }
}

TEST_CASE("pullback smoke: diameters contract, same omega shared", "[slow]") {
    RunConfig cfg = desk8();
    PullbackPlan plan;
    plan.starts = {-200, -800, -3200};
    plan.n_states = 3;
    plan.radius = 1.0;
    plan.seed = 21;
    double d0 = initial_diameter(cfg, plan);
    PullbackResult res = pullback_run(cfg, plan);
    REQUIRE_FALSE(res.blowup.has_value());
    REQUIRE(res.rows.size() == 3);
    CHECK(res.monotone);
    CHECK(res.rows.back().diameter < d0);
    CHECK(res.rows.back().diameter < res.rows.front().diameter);
    for (const PullbackRow& row : res.rows)
        CHECK(row.pair_dist.size() == 3);  // 3 choose 2
}

TEST_CASE("pullback nesting is a bit-exact cocycle corollary") {
    RunConfig cfg = desk8();
    cfg.t_start = -120;
    cfg.t_end = 0;
    Simulator whole(cfg);
    State u0 = make_smooth_state(whole, 9, 2, 1.0);
    Trajectory direct = whole.run(u0);

    RunConfig c1 = cfg;
    c1.t_start = -120;
    c1.t_end = -40;
    RunConfig c2 = cfg;
    c2.t_start = -40;
    c2.t_end = 0;
    Simulator s1(c1), s2(c2);
    Trajectory first = s1.run(u0);
    Trajectory second = s2.run(first.final_state);
    CHECK(second.final_state.v.vt == direct.final_state.v.vt);
    CHECK(second.final_state.T.v == direct.final_state.T.v);
    CHECK(second.final_state.q.v == direct.final_state.q.v);
}

TEST_CASE("absorbing radius: zero-input decay and omega-dependence") {
    SECTION("zero noise, zero forcing: radius decays to zero") {
        RunConfig cfg = desk8();
        cfg.noise_enabled = false;
        AbsorbResult res = absorbing_radius(cfg, {0.5, 1.0}, {-3000, -12000}, 3);
        CHECK(res.radius < 5e-3);
        CHECK(res.converged);  // spread is tiny relative to the rho scale
    }
    SECTION("two seeds give different but reproducible radii", "[slow]") {
        RunConfig cfg = desk8();
        AbsorbResult r1 = absorbing_radius(cfg, {1.0}, {-2000}, 100);
        AbsorbResult r1b = absorbing_radius(cfg, {1.0}, {-2000}, 100);
        AbsorbResult r2 = absorbing_radius(cfg, {1.0}, {-2000}, 200);
        CHECK(r1.radius == r1b.radius);  // bit-exact per omega
        CHECK(r1.radius != r2.radius);
        CHECK(r1.radius > 0.0);
    }
}

TEST_CASE("empirical measure: trivial and stochastic smoke", "[slow]") {
    SECTION("zero inputs: all observables decay to zero") {
        RunConfig cfg = desk8();
        cfg.noise_enabled = false;
        MeasureResult res = empirical_measure(cfg, 6000, 12000, 20);
        REQUIRE_FALSE(res.rows.empty());
        // trivially stationary in the sense that everything is near zero;
        // the sigma test is meaningless on a deterministic decay
        for (const MeasureEstimate& m : res.rows) CHECK(std::abs(m.mean) < 1e-3);
    }
    SECTION("noisy run: two windows overlap within 3 SE") {
        RunConfig cfg = desk8();
        cfg.QT = {Forcing::Kind::costheta, 0.05};
        MeasureResult res = empirical_measure(cfg, 8000, 24000, 10);
        INFO("worst two-window gap " << res.worst_sigma << " sigma");
        CHECK(res.stationary);
        // full, first, second windows present for each of the 4 observables
        CHECK(res.rows.size() == 12);
        for (const MeasureEstimate& m : res.rows)
            if (m.observable == "U_l2_sq" && m.window == 0) CHECK(m.mean > 0.0);
    }
    SECTION("initial-condition invariance flag (ergodicity heuristic)") {
        RunConfig cfg = desk8();
        cfg.t_end = 4000;
        Simulator sim(cfg);
        State a = make_smooth_state(sim, 500, 0, 0.5);
        State b = make_smooth_state(sim, 500, 1, 1.5);
        // same omega, different U0: after burn-in the window means should
        // agree within a few combined standard errors (flagged, not asserted)
        MeasureResult ra = empirical_measure(cfg, 1500, 4000, 10, &a);
        MeasureResult rb = empirical_measure(cfg, 1500, 4000, 10, &b);
        double ma = 0, sa = 0, mb = 0, sb = 0;
        for (const MeasureEstimate& m : ra.rows)
            if (m.observable == "U_l2_sq" && m.window == 0) ma = m.mean, sa = m.stderr_;
        for (const MeasureEstimate& m : rb.rows)
            if (m.observable == "U_l2_sq" && m.window == 0) mb = m.mean, sb = m.stderr_;
        bool overlap = std::abs(ma - mb) < 5 * std::sqrt(sa * sa + sb * sb);
        INFO("invariance flag: |" << ma << " - " << mb << "| vs SE " << std::sqrt(sa * sa + sb * sb));
        CHECK((overlap || true));  // heuristic flag only, never asserted
    }
}
