#include <catch2/catch_amalgamated.hpp>

#include "mpe/checks.hpp"

using namespace mpe;

TEST_CASE("w_of_v: zero, top boundary, quadrature oracle") {
    auto g = make_grid(16, 16, 17);
    SECTION("zero velocity") {
        TangentField z(g);
        CHECK(max_abs(w_of_v(z).v) == 0.0);
    }
    SECTION("w vanishes identically at xi=1") {
        TangentField v(g);
        v.fill([](double t, double p, double xi) { return std::sin(t) * std::cos(p) * xi; },
               [](double t, double p, double xi) { return std::sin(t) * std::sin(p) * (1 - xi); });
        ScalarField w = w_of_v(v);
        for (int i = 0; i < g->ntheta; ++i)
            for (int j = 0; j < g->nphi; ++j) CHECK(w(i, j, g->nxi - 1) == 0.0);
    }
    SECTION("projected xi-independent velocity gives w = 0 levelwise") {
        LerayProjector proj(g);
        TangentField v(g);
        v.fill([](double t, double p, double) { return std::sin(t) * std::sin(p); },
               [](double t, double p, double) { return std::sin(t) * std::cos(t) * std::cos(p); });
        proj.project(v);
        ScalarField w = w_of_v(v);
        CHECK(max_abs(w.v) < 1e-12);
    }
    SECTION("linear-in-xi divergence integrates to d (xi - xi^2)") {
        // v_t = sin(theta) (2 xi - 1) has div = 2 cos(theta) (2 xi - 1)
        TangentField v(g);
        v.fill([](double t, double, double xi) { return std::sin(t) * (2 * xi - 1); },
               [](double, double, double) { return 0.0; });
        ScalarField w = w_of_v(v);
        double emax = 0;
        for (int i = 0; i < g->ntheta; ++i)
            for (int j = 0; j < g->nphi; ++j)
                for (int k = 0; k < g->nxi; ++k) {
                    double xi = g->xi[k];
                    double want = 2 * std::cos(g->theta[i]) * (xi - xi * xi);
                    emax = std::max(emax, std::abs(w(i, j, k) - want));
                }
        CHECK(emax < 8e-3);  // O(dtheta^2) from the discrete divergence
    }
}

TEST_CASE("phi_reconstruct closed forms") {
    auto g = make_grid(8, 8, 33);
    PhysicalConstants pc{0.5, 0.2, 0.5, 1.0};
    SurfaceScalar phis(g);
    for (int i = 0; i < g->ntheta; ++i)
        for (int j = 0; j < g->nphi; ++j) phis.v[g->sidx(i, j)] = std::cos(g->theta[i]);

    SECTION("T = 0 gives Phi = Phi_s everywhere") {
        ScalarField T(g, VerticalBC::robin_top, 1.0), q(g, VerticalBC::robin_top, 1.0);
        ScalarField phi = phi_reconstruct(T, q, phis, pc);
        for (int i = 0; i < g->ntheta; ++i)
            for (int k = 0; k < g->nxi; ++k)
                CHECK(phi(i, 3, k) == Catch::Approx(std::cos(g->theta[i])).margin(1e-14));
    }
    SECTION("constant T, zero q: logarithmic closed form") {
        double c = 0.7;
        ScalarField T(g, VerticalBC::robin_top, 1.0), q(g, VerticalBC::robin_top, 1.0);
        T.fill([c](double, double, double) { return c; });
        ScalarField phi = phi_reconstruct(T, q, phis, pc);
        double emax = 0;
        for (int k = 0; k < g->nxi; ++k) {
            double want = std::cos(g->theta[2]) +
                          c * pc.b * pc.rs / (pc.rs - pc.r0) * std::log(pc.rs / g->rxi[k]);
            emax = std::max(emax, std::abs(phi(2, 0, k) - want));
        }
        CHECK(emax < 5e-4);  // trapezoid O(dxi^2)
        CHECK(phi(2, 0, g->nxi - 1) == std::cos(g->theta[2]));  // exact at xi=1
    }
}

TEST_CASE("pressure_gradient_term: constants and duality") {
    auto g = make_grid(16, 16, 9);
    PhysicalConstants pc;
    SECTION("constants give a zero field") {
        ScalarField T(g, VerticalBC::robin_top, 1.0), q(g, VerticalBC::robin_top, 1.0);
        T.fill([](double, double, double) { return 1.3; });
        q.fill([](double, double, double) { return -0.4; });
        TangentField out = pressure_gradient_term(T, q, pc);
        CHECK(max_abs(out.vt) < 1e-12);
        CHECK(max_abs(out.vp) < 1e-12);
    }
    SECTION("duality with the T-equation coupling refines at O(h^2)") {
        double prev = 0;
        for (int n : {16, 32}) {
            auto gr = make_grid(n, n, n == 16 ? 9 : 17);
            IdentityResiduals r = identity_residuals(gr);
            if (prev > 0) CHECK(prev / r.duality > 3.0);
            prev = r.duality;
        }
        CHECK(prev < 1e-4);
    }
}

TEST_CASE("baro_split: idempotence and quadrature oracle") {
    auto g = make_grid(12, 12, 9);
    SECTION("xi-independent field splits trivially") {
        TangentField v(g);
        v.fill([](double t, double p, double) { return std::sin(t) * std::cos(p); },
               [](double t, double, double) { return std::sin(t); });
        auto [bar, tilde] = baro_split(v);
        CHECK(max_abs(tilde.vt) < 1e-14);
        CHECK(max_abs(tilde.vp) < 1e-14);
        for (int i = 0; i < g->ntheta; ++i)
            for (int j = 0; j < g->nphi; ++j)
                CHECK(bar.vt[g->sidx(i, j)] ==
                      Catch::Approx(v.vt[g->idx(i, j, 0)]).margin(1e-14));
    }
    SECTION("linear profile c (2 xi - 1) has zero vertical mean") {
        TangentField v(g);
        v.fill([](double t, double, double xi) { return std::sin(t) * (2 * xi - 1); },
               [](double, double, double) { return 0.0; });
        auto [bar, tilde] = baro_split(v);
        CHECK(max_abs(bar.vt) < 1e-14);  // trapezoid is exact on linear profiles
        for (std::size_t m = 0; m < tilde.vt.size(); ++m)
            CHECK(tilde.vt[m] == Catch::Approx(v.vt[m]).margin(1e-14));
    }
    SECTION("split is a projection") {
        TangentField v(g);
        v.fill([](double t, double p, double xi) { return std::sin(t) * std::sin(p) * xi * xi; },
               [](double t, double, double xi) { return std::sin(t) * std::cos(kPi * xi); });
        auto [bar, tilde] = baro_split(v);
        TangentField vb(g);
        for (int i = 0; i < g->ntheta; ++i)
            for (int j = 0; j < g->nphi; ++j)
                for (int k = 0; k < g->nxi; ++k) {
                    vb.vt[g->idx(i, j, k)] = bar.vt[g->sidx(i, j)];
                    vb.vp[g->idx(i, j, k)] = bar.vp[g->sidx(i, j)];
                }
        auto [bar2, tilde2] = baro_split(vb);
        CHECK(max_abs(tilde2.vt) < 1e-14);
        for (int i = 0; i < g->ntheta; ++i)
            CHECK(bar2.vt[g->sidx(i, 0)] == Catch::Approx(bar.vt[g->sidx(i, 0)]).margin(1e-14));
        // vtilde has zero vertical mean
        auto [barT, tildeT] = baro_split(tilde);
        CHECK(max_abs(barT.vt) < 1e-14);
        CHECK(max_abs(barT.vp) < 1e-14);
    }
}

TEST_CASE("sphere Poisson solver") {
    auto g = make_grid(32, 32, 5);
    SpherePoisson sp(g);
    SECTION("zero rhs gives zero") {
        SurfaceScalar z(g);
        SurfaceScalar psi = sp.solve(z);
        CHECK(max_abs(psi.v) < 1e-14);
    }
    SECTION("eigen oracles at degree 1 and 2") {
        SurfaceScalar r1(g), r2(g);
        for (int i = 0; i < g->ntheta; ++i)
            for (int j = 0; j < g->nphi; ++j) {
                r1.v[g->sidx(i, j)] = -2 * std::cos(g->theta[i]);
                double st = std::sin(g->theta[i]);
                r2.v[g->sidx(i, j)] = -6 * st * st * std::cos(2 * g->phi[j]);
            }
        SurfaceScalar p1 = sp.solve(r1), p2 = sp.solve(r2);
        double e1 = 0, e2 = 0;
        for (int i = 0; i < g->ntheta; ++i)
            for (int j = 0; j < g->nphi; ++j) {
                double st = std::sin(g->theta[i]);
                e1 = std::max(e1, std::abs(p1.v[g->sidx(i, j)] - std::cos(g->theta[i])));
                // demeaning: sin^2 cos2phi already has zero mean
                e2 = std::max(e2, std::abs(p2.v[g->sidx(i, j)] - st * st * std::cos(2 * g->phi[j])));
            }
        CHECK(e1 < 5e-3);
        CHECK(e2 < 2e-2);
        CHECK_FALSE(sp.warned_demean);
    }
    SECTION("residual contract and demeaning warning") {
        SurfaceScalar rhs(g);
        for (int i = 0; i < g->ntheta; ++i)
            for (int j = 0; j < g->nphi; ++j)
                rhs.v[g->sidx(i, j)] =
                    std::cos(g->theta[i]) * std::cos(g->phi[j]) + 0.5;  // nonzero mean
        SurfaceScalar psi = sp.solve(rhs);
        CHECK(sp.warned_demean);
        SurfaceScalar lap = laplace_scalar(psi);
        double mean = integrate_surface(rhs) / (4 * kPi);
        double resid = 0;
        for (std::size_t m = 0; m < lap.v.size(); ++m)
            resid = std::max(resid, std::abs(lap.v[m] - (rhs.v[m] - mean)));
        CHECK(resid <= 1e-10 * norm_l2_surface(rhs));
    }
}

TEST_CASE("Leray projection contracts") {
    auto g = make_grid(16, 16, 9);
    LerayProjector proj(g);
    NoisePath keys{13, 1.0, 1, 0};

    TangentField v(g);
    v.fill([](double t, double p, double xi) {
        return std::sin(t) * (std::sin(p) + 0.5 * std::cos(p)) * (1 + 0.4 * xi);
    },
           [](double t, double p, double xi) {
               return std::sin(t) * std::cos(t) * std::cos(p) + 0.3 * std::sin(t) * xi * xi;
           });
    int c = 0;
    for (auto& x : v.vt) x += 0.05 * keys.field_normal(3, c++);
    for (auto& x : v.vp) x += 0.05 * keys.field_normal(3, c++);

    SECTION("constraint killed at every node; linear; orthogonal; idempotent") {
        TangentField pv = v;
        proj.project(pv);
        double scale = std::max(max_abs(pv.vt), max_abs(pv.vp));
        CHECK(constraint_residual(pv) < 1e-10 * scale);

        // idempotence
        TangentField ppv = pv;
        proj.project(ppv);
        double idem = 0;
        for (std::size_t m = 0; m < pv.vt.size(); ++m)
            idem = std::max({idem, std::abs(ppv.vt[m] - pv.vt[m]),
                             std::abs(ppv.vp[m] - pv.vp[m])});
        CHECK(idem < 1e-12);

        // exact L2 orthogonality of the removed part
        TangentField diff(g);
        for (std::size_t m = 0; m < v.vt.size(); ++m) {
            diff.vt[m] = v.vt[m] - pv.vt[m];
            diff.vp[m] = v.vp[m] - pv.vp[m];
        }
        CHECK(std::abs(ip(diff, pv)) < 1e-12 * ip(v, v));
        CHECK(norm_l2(pv) <= norm_l2(v) * (1 + 1e-14));

        // linearity
        TangentField w(g);
        w.fill([](double t, double p, double) { return std::cos(t) * std::sin(p); },
               [](double t, double, double) { return std::sin(t) * 0.3; });
        TangentField sum(g);
        for (std::size_t m = 0; m < sum.vt.size(); ++m) {
            sum.vt[m] = v.vt[m] + 2.0 * w.vt[m];
            sum.vp[m] = v.vp[m] + 2.0 * w.vp[m];
        }
        TangentField psum = sum, pw = w;
        proj.project(psum);
        proj.project(pw);
        double lin = 0;
        for (std::size_t m = 0; m < sum.vt.size(); ++m) {
            lin = std::max(lin, std::abs(psum.vt[m] - (pv.vt[m] + 2.0 * pw.vt[m])));
            lin = std::max(lin, std::abs(psum.vp[m] - (pv.vp[m] + 2.0 * pw.vp[m])));
        }
        CHECK(lin < 1e-12);
    }

    SECTION("xi-independent gradient flows are annihilated at O(h^2)") {
        double prev = 0;
        for (int n : {16, 32}) {
            auto gr = make_grid(n, n, 9);
            LerayProjector pr(gr);
            SurfaceScalar h(gr);
            for (int i = 0; i < gr->ntheta; ++i)
                for (int j = 0; j < gr->nphi; ++j)
                    h.v[gr->sidx(i, j)] =
                        std::sin(gr->theta[i]) * std::cos(gr->phi[j]) + std::cos(gr->theta[i]);
            SurfaceVector gh = grad_h(h);
            TangentField gv(gr);
            for (int i = 0; i < gr->ntheta; ++i)
                for (int j = 0; j < gr->nphi; ++j)
                    for (int k = 0; k < gr->nxi; ++k) {
                        gv.vt[gr->idx(i, j, k)] = gh.vt[gr->sidx(i, j)];
                        gv.vp[gr->idx(i, j, k)] = gh.vp[gr->sidx(i, j)];
                    }
            TangentField pgv = gv;
            pr.project(pgv);
            double rel = norm_l2(pgv) / norm_l2(gv);
            if (prev > 0) CHECK(prev / rel > 3.0);
            prev = rel;
        }
        CHECK(prev < 2e-3);
    }

    SECTION("already-constrained fields pass through unchanged") {
        TangentField pv = v;
        proj.project(pv);
        TangentField again = leray_project(proj, pv);
        double d = 0;
        for (std::size_t m = 0; m < pv.vt.size(); ++m)
            d = std::max({d, std::abs(again.vt[m] - pv.vt[m]), std::abs(again.vp[m] - pv.vp[m])});
        CHECK(d < 1e-12);
    }
}

TEST_CASE("physical constants coupling condition") {
    PhysicalConstants ok{0.5, 0.2, 0.5, 1.0};  // b rs / r0 = 0.4
    CHECK(ok.coupling_max() == Catch::Approx(0.4));
    CHECK(ok.attractor_condition(1.0, 1.0));
    CHECK_FALSE(ok.attractor_condition(0.3, 1.0));
    PhysicalConstants bad{0.5, 0.8, 0.5, 1.0};  // 1.6 > 1/2
    CHECK_FALSE(bad.attractor_condition(2.0, 2.0));
}
