// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria are property-based (identity refinement, exact replay,
// scheme consistency, contraction and stationarity at pinned seeds); pinned
// numbers are regression anchors recorded at the first green run.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <vector>

#include "mpe/attractor.hpp"
#include "mpe/checks.hpp"

using namespace mpe;

namespace {

int g_failures = 0;

void report(int crit, bool pass, const std::string& detail) {
    std::printf("%s criterion %2d: %s\n", pass ? "PASS" : "FAIL", crit, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig desk_config() {
    RunConfig cfg;
    cfg.ntheta = cfg.nphi = 16;
    cfg.nxi = 9;
    cfg.dt = 7e-5;
    cfg.alpha = cfg.beta = 2.0;
    cfg.seed = 7;
    cfg.record_every = 0;
    cfg.noise.Lmax = 2;
    cfg.noise.Kmax = 2;
    cfg.QT = {Forcing::Kind::costheta, 0.05};
    return cfg;
}

State smooth_state(const Simulator& sim, double amp) {
    State U = sim.zero_state();
    U.v.fill([amp](double t, double p, double) {
        return amp * std::cos(t) * std::cos(p) - 0.8 * amp * std::sin(t);
    },
             [amp](double t, double p, double) {
                 return -amp * std::sin(p) + 0.5 * amp * std::sin(t);
             });
    U.T.fill([amp](double t, double p, double xi) {
        return amp * std::cos(t) + 0.4 * amp * std::sin(t) * std::sin(p) * std::cos(kPi * xi);
    });
    U.q.fill([amp](double t, double p, double) { return 0.6 * amp * std::sin(t) * std::cos(p); });
    return U;
}

// --- criterion 1 + 2: operator identities and eigenrelations -----------------

void criterion_1_2() {
    auto t0 = std::chrono::steady_clock::now();
    IdentityResiduals c = identity_residuals(make_grid(16, 16, 9));
    IdentityResiduals f = identity_residuals(make_grid(32, 32, 17));
    double rt = seconds_since(t0);

    struct Item {
        const char* name;
        double coarse, fine;
    } items[] = {
        {"adjointness", c.adjointness, f.adjointness},
        {"veclap_form", c.veclap_form, f.veclap_form},
        {"skew_scalar", c.skew_scalar, f.skew_scalar},
        {"skew_vector", c.skew_vector, f.skew_vector},
    };
    bool pass = rt < 30.0;
    std::string detail;
    for (const Item& it : items) {
        double ratio = it.coarse / it.fine;
        bool ok = ratio >= 3.0 && it.fine <= 1e-3;
        pass = pass && ok;
        detail += fmt("%s %.2e->%.2e (x%.1f) ", it.name, it.coarse, it.fine, ratio);
    }
    detail += fmt("runtime %.1fs", rt);
    report(1, pass, "operator identity suite: " + detail);

    bool p2 = f.eigen_l1 <= 0.02 && f.eigen_l2 <= 0.02;
    report(2, p2,
           fmt("eigenrelations at 32x32: l=1 err %.3f%%, l=2 err %.3f%% (tol 2%%)",
               100 * f.eigen_l1, 100 * f.eigen_l2));
}

// --- criterion 3: constraint preservation ------------------------------------

void criterion_3() {
    RunConfig cfg = desk_config();
    Simulator sim(cfg);
    NoisePath p = sim.path();
    State U = smooth_state(sim, 0.3);
    sim.projector().project(U.v);
    double worst = 0;
    for (int n = 0; n < 1000; ++n) {
        U = sim.step_em(U, p, n);
        double scale = std::max(1e-6, std::max(max_abs(U.v.vt), max_abs(U.v.vp)));
        worst = std::max(worst, constraint_residual(U.v) / scale);
    }
    report(3, worst <= 1e-10,
           fmt("constraint after every step over 1000 noisy steps: worst %.2e (tol 1e-10)",
               worst));
}

// --- criterion 4: OU statistics ------------------------------------------------

void criterion_4() {
    Grid g(16, 16, 9);
    NoiseConfig nc;
    nc.Lmax = 1;
    nc.Kmax = 1;
    ModeSpectrum sp = build_spectrum(g, nc, 1.0, 1.0);
    double gamma = 1.0;
    NoisePath p{31, 5e-2, 1, 0};
    OUState st = ou_stationary_init(sp, gamma, p, 0);
    int j = 1, i = 0;
    const Mode& md = sp.comp[j][i];
    double theta = md.gamma + gamma;
    const long N = 100000;
    double s2 = 0, sc = 0, prev = st.z[j][i];
    for (long n = 0; n < N; ++n) {
        ou_step(st, sp, p);
        double z = st.z[j][i];
        s2 += z * z;
        sc += z * prev;
        prev = z;
    }
    double var = s2 / N, want_var = md.lambda / (2 * theta);
    double ac = sc / s2, want_ac = std::exp(-theta * p.dt());
    ErgodicReport er = ergodic_average_check(sp, gamma, p, 100000);
    bool pass = std::abs(var / want_var - 1) <= 0.05 && std::abs(ac / want_ac - 1) <= 0.02 &&
                er.rel_gap <= 0.10;
    report(4, pass,
           fmt("OU statistics: var err %.2f%% (tol 5%%), lag-1 err %.3f%% (tol 2%%), "
               "ergodic gap %.2f%% (tol 10%%)",
               100 * std::abs(var / want_var - 1), 100 * std::abs(ac / want_ac - 1),
               100 * er.rel_gap));
}

// --- criterion 5: deterministic dissipativity ----------------------------------

void criterion_5() {
    RunConfig cfg;
    cfg.ntheta = cfg.nphi = 12;
    cfg.nxi = 7;
    cfg.dt = 2.2e-4;
    cfg.noise_enabled = false;
    cfg.record_every = 0;
    Simulator sim(cfg);
    State U = smooth_state(sim, 0.3);
    sim.projector().project(U.v);
    NoisePath p = sim.path();
    double prev = norm_l2_sq(U);
    double worst = -1e300;
    std::int64_t bad_step = -1;
    for (int n = 0; n < 10000; ++n) {
        U = sim.step_em(U, p, n);
        double e2 = norm_l2_sq(U);
        double rel = (e2 - prev) / std::max(prev, 1e-300);
        if (rel > worst) worst = rel;
        if (rel > 1e-12 && bad_step < 0) bad_step = n;
        prev = e2;
    }
    report(5, bad_step < 0,
           fmt("zero-input energy strictly non-increasing over 10^4 steps: worst per-step "
               "relative change %.2e (slack 1e-12)%s",
               worst, bad_step < 0 ? "" : fmt(", first violation at step %lld",
                                              (long long)bad_step).c_str()));
}

// --- criterion 6: scheme consistency ---------------------------------------------

void criterion_6() {
    std::vector<double> gaps;
    for (int stride : {4, 2, 1}) {
        RunConfig cfg;
        cfg.ntheta = cfg.nphi = 8;
        cfg.nxi = 5;
        cfg.seed = 3;
        cfg.record_every = 0;
        cfg.noise.Lmax = 2;
        cfg.noise.Kmax = 1;
        cfg.gamma = 1.0;
        double dt_fine = 2e-4;
        cfg.dt = dt_fine * stride;
        cfg.stride = stride;
        cfg.t_end = 512 / stride;

        cfg.scheme = Scheme::em_direct;
        Simulator se(cfg);
        Trajectory te = se.run(smooth_state(se, 0.1));
        cfg.scheme = Scheme::ou_decomposed;
        Simulator sd(cfg);
        Trajectory td = sd.run(smooth_state(sd, 0.1));
        gaps.push_back(dist_l2(te.final_state, td.final_state));
    }
    double r1 = gaps[0] / gaps[1], r2 = gaps[1] / gaps[2];
    bool pass = r1 >= 1.4 && r1 <= 2.6 && r2 >= 1.4 && r2 <= 2.6;
    report(6, pass,
           fmt("|U_em - (Uhat+Z)| gaps %.3e / %.3e / %.3e, halving ratios %.2f, %.2f "
               "(want 2.0 +/- 30%%)",
               gaps[0], gaps[1], gaps[2], r1, r2));
}

// --- criterion 7: cocycle and shift exactness --------------------------------------

void criterion_7() {
    bool pass = true;
    std::string detail;
    for (Scheme scheme : {Scheme::em_direct, Scheme::ou_decomposed}) {
        RunConfig cfg;
        cfg.ntheta = cfg.nphi = 8;
        cfg.nxi = 5;
        cfg.dt = 2e-4;
        cfg.seed = 9;
        cfg.record_every = 0;
        cfg.scheme = scheme;
        cfg.noise.Lmax = 1;
        cfg.noise.Kmax = 1;
        cfg.t_start = -100;
        cfg.t_end = 100;
        Simulator sim(cfg);
        State U0 = smooth_state(sim, 0.1);
        Trajectory full = sim.run(U0);

        RunConfig c1 = cfg;
        c1.t_end = 0;
        RunConfig c2 = cfg;
        c2.t_start = 0;
        Simulator s1(c1), s2(c2);
        Trajectory h1 = s1.run(U0);
        Trajectory h2 = (scheme == Scheme::ou_decomposed)
                            ? s2.run_continued({*h1.final_uhat, *h1.final_ou})
                            : s2.run(h1.final_state);
        bool coc = h2.final_state.v.vt == full.final_state.v.vt &&
                   h2.final_state.v.vp == full.final_state.v.vp &&
                   h2.final_state.T.v == full.final_state.T.v &&
                   h2.final_state.q.v == full.final_state.q.v;

        RunConfig c3 = cfg;
        c3.t_start = 0;
        c3.t_end = 200;
        c3.path_shift = -100;
        Simulator s3(c3);
        Trajectory sh = s3.run(U0);
        bool shift = sh.final_state.v.vt == full.final_state.v.vt &&
                     sh.final_state.T.v == full.final_state.T.v &&
                     sh.final_state.q.v == full.final_state.q.v;
        pass = pass && coc && shift;
        detail += fmt("%s: composition %s, shift %s; ",
                      scheme == Scheme::em_direct ? "EM" : "OU",
                      coc ? "bit-identical" : "MISMATCH", shift ? "bit-identical" : "MISMATCH");
    }
    report(7, pass, "cocycle/shift over a 200-step window: " + detail);
}

// --- criterion 8: Lipschitz in the initial data -------------------------------------

void criterion_8() {
    RunConfig cfg = desk_config();
    cfg.t_end = 1000;
    Simulator sim(cfg);
    State base = smooth_state(sim, 0.3);
    State dir = make_smooth_state(sim, 99, 5, 1.0);
    auto gap_ratio = [&](double delta) {
        State a = base, b = base;
        for (std::size_t m = 0; m < a.v.vt.size(); ++m) {
            b.v.vt[m] += delta * dir.v.vt[m];
            b.v.vp[m] += delta * dir.v.vp[m];
            b.T.v[m] += delta * dir.T.v[m];
            b.q.v[m] += delta * dir.q.v[m];
        }
        double g0 = dist_v(a, b);
        Trajectory ta = sim.run(std::move(a));
        Trajectory tb = sim.run(std::move(b));
        return dist_v(ta.final_state, tb.final_state) / g0;
    };
    double r6 = gap_ratio(1e-6), r7 = gap_ratio(1e-7);
    bool pass = std::isfinite(r6) && std::isfinite(r7) &&
                std::abs(r6 / r7 - 1.0) <= 0.10;
    report(8, pass,
           fmt("H1 gap ratios at t=10^3 steps: %.6f (delta 1e-6) vs %.6f (delta 1e-7), "
               "agreement %.2f%% (tol 10%%)",
               r6, r7, 100 * std::abs(r6 / r7 - 1.0)));
}

// --- criterion 9: pullback contraction regression ------------------------------------

void criterion_9() {
    auto t0 = std::chrono::steady_clock::now();
    RunConfig cfg = desk_config();
    PullbackPlan plan;
    plan.starts = {-1024, -4096, -16384, -32768};
    plan.n_states = 3;
    plan.radius = 1.0;
    plan.seed = 7;

    double d0 = initial_diameter(cfg, plan);
    PullbackResult res = pullback_run(cfg, plan);
    double rt = seconds_since(t0);
    if (res.blowup) {
        report(9, false, "pullback run blew up: " + res.blowup->what());
        return;
    }
    double deepest = res.rows.back().diameter;
    bool pass = res.monotone && deepest <= 0.1 * d0 && rt < 600.0;
    std::string detail = fmt("initial %.4f; diameters", d0);
    for (const PullbackRow& r : res.rows) detail += fmt(" %.4e", r.diameter);
    detail += fmt("; deepest/initial %.4f (tol 0.1), monotone %s, runtime %.0fs (budget 600s)",
                  deepest / d0, res.monotone ? "yes" : "NO", rt);
    report(9, pass, detail);

    // regression anchors pinned at the first green run (seed 7, this config)
    const double baseline[4] = {8.1637e-01, 4.2347e-01, 8.7121e-02, 1.7465e-02};
    bool anchored = true;
    std::string bd = "pullback diameters vs pinned baselines:";
    for (int k = 0; k < 4; ++k) {
        double rel = std::abs(res.rows[k].diameter / baseline[k] - 1.0);
        anchored = anchored && rel < 1e-3;
        bd += fmt(" %.1e", rel);
    }
    report(9, anchored, bd + " (band 1e-3)");
}

// --- criterion 10: invariant-measure stationarity --------------------------------------

void criterion_10() {
    RunConfig cfg = desk_config();
    cfg.seed = 7;
    MeasureResult res = empirical_measure(cfg, 50000, 200000, 25);
    double m1 = 0, s1 = 0, m2 = 0, s2 = 0;
    for (const MeasureEstimate& m : res.rows) {
        if (m.observable != "U_l2_sq") continue;
        if (m.window == 1) m1 = m.mean, s1 = m.stderr_;
        if (m.window == 2) m2 = m.mean, s2 = m.stderr_;
    }
    double se = std::sqrt(s1 * s1 + s2 * s2);
    double sig = std::abs(m1 - m2) / std::max(se, 1e-300);
    report(10, sig <= 3.0,
           fmt("two-window |U|_2^2 means over 2e5 steps: %.6e vs %.6e, gap %.2f sigma "
               "(tol 3)",
               m1, m2, sig));
}

}  // namespace

int main() {
    auto t0 = std::chrono::steady_clock::now();
    criterion_1_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    std::printf("acceptance: %s (%d failure%s, %.0f s total)\n",
                g_failures == 0 ? "ALL CRITERIA PASS" : "FAILURES PRESENT", g_failures,
                g_failures == 1 ? "" : "s", seconds_since(t0));
    return g_failures == 0 ? 0 : 1;
}
