#pragma once

#include <memory>
#include <optional>
#include <string>

#include "mpe/monitor_record.hpp"
#include "mpe/noise.hpp"

namespace mpe {

enum class Scheme { em_direct, ou_decomposed };

struct Forcing {
    enum class Kind { zero, constant, costheta } kind = Kind::zero;
    double c = 0.0;
};

inline ScalarField make_forcing(const GridPtr& g, const Forcing& f) {
    ScalarField out(g);
    switch (f.kind) {
        case Forcing::Kind::zero:
            break;
        case Forcing::Kind::constant:
            for (double& x : out.v) x = f.c;
            break;
        case Forcing::Kind::costheta:
            out.fill([c = f.c](double t, double, double) { return c * std::cos(t); });
            break;
    }
    return out;
}

struct RunConfig {
    int ntheta = 16, nphi = 16, nxi = 9;
    double dt = 5e-5;
    std::int64_t t_start = 0, t_end = 1000;
    double a = 0.5, b = 0.2, r0 = 0.5, rs = 1.0, R0 = 1.0;
    double alpha = 1.0, beta = 1.0;
    double gamma = 1.0;
    Forcing QT, Qq;
    NoiseConfig noise;
    bool noise_enabled = true;
    Scheme scheme = Scheme::em_direct;
    std::uint64_t seed = 1;
    int stride = 1;                // dt-refinement stride on the fine noise lattice
    std::int64_t path_shift = 0;   // run on theta_s omega instead of omega
    int record_every = 100;

    PhysicalConstants constants() const { return {a, b, r0, rs}; }

    /// Explicit-horizontal-diffusion stability bound.
    double dt_bound() const {
        Grid g(ntheta, nphi, nxi, r0, std::max(rs, r0));
        double hphi = g.dphi * g.sin_t[0];  // smallest azimuthal arc, first ring
        double h2 = std::min(g.dtheta * g.dtheta, hphi * hphi);
        return 0.2 * h2 / 4.0;
    }
};

struct BlowUp {
    std::int64_t step = 0;
    double max_v = 0, max_T = 0, max_q = 0;
    std::string what() const {
        return "blow-up at step " + std::to_string(step) + " (max |v|=" + std::to_string(max_v) +
               ", |T|=" + std::to_string(max_T) + ", |q|=" + std::to_string(max_q) + ")";
    }
};

struct Trajectory {
    std::vector<EnergyRecord> records;
    std::vector<std::pair<std::int64_t, State>> snapshots;
    State final_state;
    std::optional<State> final_uhat;  // decomposed scheme internal state
    std::optional<OUState> final_ou;
    std::optional<BlowUp> blowup;
};

/// Restart point for the decomposed scheme, carrying the internal (Uhat, z)
/// representation so that composed runs are bit-identical to single runs.
struct Continuation {
    State uhat;
    OUState ou;
};

namespace detail {

// Precomputed Thomas factorization of (I - dt D2) for one column BC type.
// The matrix is the same for every column, so only the sweeps vary.
struct VerticalSolve {
    std::vector<double> sub, diag, sup, cp;  // cp: forward-eliminated superdiag
    int n = 0;

    VerticalSolve() = default;
    VerticalSolve(const Grid& g, double dt, VerticalBC bc, double coef) : n(g.nxi) {
        double r = dt / (g.dxi * g.dxi);
        sub.assign(n, 0.0);
        diag.assign(n, 0.0);
        sup.assign(n, 0.0);
        diag[0] = 1.0 + 2.0 * r;
        sup[0] = -2.0 * r;
        for (int k = 1; k < n - 1; ++k) {
            sub[k] = -r;
            diag[k] = 1.0 + 2.0 * r;
            sup[k] = -r;
        }
        sub[n - 1] = -2.0 * r;
        diag[n - 1] = (bc == VerticalBC::robin_top)
                          ? 1.0 + (2.0 + 2.0 * g.dxi * coef) * r
                          : 1.0 + 2.0 * r;
        cp.assign(n, 0.0);
        cp[0] = sup[0] / diag[0];
        for (int k = 1; k < n; ++k) cp[k] = sup[k] / (diag[k] - sub[k] * cp[k - 1]);
    }

    void solve(double* x) const {
        // forward sweep reusing the precomputed eliminated superdiagonal
        double prev = x[0] / diag[0];
        x[0] = prev;
        for (int k = 1; k < n; ++k) {
            double den = diag[k] - sub[k] * cp[k - 1];
            prev = (x[k] - sub[k] * prev) / den;
            x[k] = prev;
        }
        for (int k = n - 2; k >= 0; --k) x[k] -= cp[k] * x[k + 1];
    }
};

}  // namespace detail

/// Time integrator for the stochastic primitive equations: direct
/// Euler-Maruyama on the abstract system, or pathwise integration of the
/// OU-shifted system with U = Uhat + Z. Horizontal terms are explicit,
/// vertical diffusion is implicit per column, and the barotropic constraint
/// is re-enforced by projection after every update.
class Simulator {
  public:
    struct Terms {  // debug switches used by the test suites
        bool advection = true;
        bool pressure = true;
        bool coriolis = true;
        bool forcing = true;
        bool hdiff = true;
        bool z_sources = true;
    };

    explicit Simulator(const RunConfig& cfg)
        : cfg_(cfg),
          grid_(make_grid(cfg.ntheta, cfg.nphi, cfg.nxi, cfg.r0, cfg.rs)),
          proj_(grid_),
          pc_(cfg.constants()),
          qt_field_(make_forcing(grid_, cfg.QT)),
          qq_field_(make_forcing(grid_, cfg.Qq)),
          vsolve_v_(*grid_, cfg.dt, VerticalBC::neumann, 0.0),
          vsolve_T_(*grid_, cfg.dt, VerticalBC::robin_top, cfg.alpha),
          vsolve_q_(*grid_, cfg.dt, VerticalBC::robin_top, cfg.beta) {
        if (cfg.noise_enabled) {
            spectrum_ = build_spectrum(*grid_, cfg.noise, cfg.alpha, cfg.beta);
            assembler_ = std::make_unique<NoiseAssembler>(grid_, spectrum_, proj_);
        }
    }

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const ModeSpectrum& spectrum() const { return spectrum_; }
    const LerayProjector& projector() const { return proj_; }
    const RunConfig& config() const { return cfg_; }
    Terms& terms() { return terms_; }

    NoisePath path() const {
        return NoisePath{cfg_.seed, cfg_.dt / cfg_.stride, cfg_.stride, 0}.shifted(cfg_.path_shift);
    }

    /// Projects only when the constraint is actually violated, so restarting
    /// from an already-constrained state replays bit-identically.
    void project_if_needed(State& U) const {
        double scale = std::max(1.0, std::max(max_abs(U.v.vt), max_abs(U.v.vp)));
        if (constraint_residual(U.v) > 1e-12 * scale) proj_.project(U.v);
    }

    State zero_state() const { return State(grid_, cfg_.alpha, cfg_.beta); }

    /// Spatial part of the tendency at a full state W: every term of the
    /// momentum/temperature/moisture equations except vertical diffusion,
    /// noise, and the surface-pressure gradient (handled by projection).
    void spatial_tendency(const State& W, TangentField& dv, ScalarField& dT,
                          ScalarField& dq) const {
        const Grid& g = *grid_;
        ScalarField w = w_of_v(W.v);

        if (terms_.hdiff) {
            dv = laplace_vector(W.v);
            dT = laplace_scalar(W.T);
            dq = laplace_scalar(W.q);
        } else {
            dv = TangentField(grid_);
            dT = ScalarField(grid_, W.T.bc, W.T.robin);
            dq = ScalarField(grid_, W.q.bc, W.q.robin);
        }

        if (terms_.advection) {
            TangentField adv_v = advect_vector(W.v, W.v);
            TangentField v_xi = d_xi(W.v);
            ScalarField adv_T = advect_scalar(W.v, W.T);
            ScalarField T_xi = d_xi(W.T);
            ScalarField adv_q = advect_scalar(W.v, W.q);
            ScalarField q_xi = d_xi(W.q);
            for (std::size_t m = 0; m < dv.vt.size(); ++m) {
                dv.vt[m] -= adv_v.vt[m] + w.v[m] * v_xi.vt[m];
                dv.vp[m] -= adv_v.vp[m] + w.v[m] * v_xi.vp[m];
                dT.v[m] -= adv_T.v[m] + w.v[m] * T_xi.v[m];
                dq.v[m] -= adv_q.v[m] + w.v[m] * q_xi.v[m];
            }
        }

        if (terms_.coriolis) {
            TangentField cor = coriolis(W.v, cfg_.R0);
            for (std::size_t m = 0; m < dv.vt.size(); ++m) {
                dv.vt[m] -= cor.vt[m];
                dv.vp[m] -= cor.vp[m];
            }
        }

        if (terms_.pressure) {
            TangentField pgt = pressure_gradient_term(W.T, W.q, pc_);
            for (int i = 0; i < g.ntheta; ++i)
                for (int j = 0; j < g.nphi; ++j) {
                    int base = g.idx(i, j, 0);
                    for (int k = 0; k < g.nxi; ++k) {
                        int id = base + k;
                        dv.vt[id] -= pgt.vt[id];
                        dv.vp[id] -= pgt.vp[id];
                        // T-equation coupling (b rs / r)(1 + a q) w(v)
                        dT.v[id] += pc_.b * pc_.rs / g.rxi[k] * (1.0 + pc_.a * W.q.v[id]) * w.v[id];
                    }
                }
        }

        if (terms_.forcing) {
            for (std::size_t m = 0; m < dT.v.size(); ++m) {
                dT.v[m] += qt_field_.v[m];
                dq.v[m] += qq_field_.v[m];
            }
        }
    }

    /// One Euler-Maruyama step of the direct system at step index n.
    State step_em(const State& U, const NoisePath& path, std::int64_t n) const {
        TangentField dv;
        ScalarField dT, dq;
        spatial_tendency(U, dv, dT, dq);

        State next = U;
        double dt = cfg_.dt;
        for (std::size_t m = 0; m < next.v.vt.size(); ++m) {
            next.v.vt[m] += dt * dv.vt[m];
            next.v.vp[m] += dt * dv.vp[m];
            next.T.v[m] += dt * dT.v[m];
            next.q.v[m] += dt * dq.v[m];
        }

        if (cfg_.noise_enabled) add_wiener_fields(next, path, n);
        implicit_vertical(next);
        SurfaceScalar psi = proj_.project(next.v);
        for (std::size_t m = 0; m < psi.v.size(); ++m) next.phis.v[m] = psi.v[m] / dt;
        check_finite(next, n);
        return next;
    }

    /// One step of the OU-decomposed (pathwise) system. Uhat is advanced by
    /// the same IMEX scheme with nonlinear terms frozen at Uhat + Z; Z is
    /// advanced exactly in mode space. The mode-space decay (gamma_mode +
    /// gamma) Z is re-added so that Uhat + Z is consistent with the direct
    /// scheme independently of the surrogate quality of the mode profiles.
    void step_decomposed(State& Uhat, OUState& ou, const NoisePath& path) const {
        const Grid& g = *grid_;
        double dt = cfg_.dt;

        ZFields Z = assemble_Z(*assembler_, ou, cfg_.alpha, cfg_.beta);
        const TangentField& Z1 = Z.Z1;
        const ScalarField& Z2 = Z.Z2;
        const ScalarField& Z3 = Z.Z3;

        State W = Uhat;
        for (std::size_t m = 0; m < W.v.vt.size(); ++m) {
            W.v.vt[m] += Z1.vt[m];
            W.v.vp[m] += Z1.vp[m];
            W.T.v[m] += Z2.v[m];
            W.q.v[m] += Z3.v[m];
        }

        TangentField dv;
        ScalarField dT, dq;
        spatial_tendency(W, dv, dT, dq);

        if (terms_.z_sources) {
            // explicit vertical diffusion of Z plus the mode-space counter-term
            TangentField z1xx = d2_xi(Z1);
            ScalarField z2xx = d2_xi(Z2);
            ScalarField z3xx = d2_xi(Z3);
            std::vector<double> c0(ou.z[0].size()), c1(ou.z[1].size()), c2(ou.z[2].size());
            for (std::size_t i = 0; i < c0.size(); ++i)
                c0[i] = (spectrum_.comp[0][i].gamma + ou.gamma) * ou.z[0][i];
            for (std::size_t i = 0; i < c1.size(); ++i)
                c1[i] = (spectrum_.comp[1][i].gamma + ou.gamma) * ou.z[1][i];
            for (std::size_t i = 0; i < c2.size(); ++i)
                c2[i] = (spectrum_.comp[2][i].gamma + ou.gamma) * ou.z[2][i];
            TangentField src_v(grid_);
            assembler_->add_velocity(c0, src_v);
            ScalarField src_T(grid_), src_q(grid_);
            assembler_->add_scalar(1, c1, src_T);
            assembler_->add_scalar(2, c2, src_q);
            for (std::size_t m = 0; m < dv.vt.size(); ++m) {
                dv.vt[m] += z1xx.vt[m] + src_v.vt[m];
                dv.vp[m] += z1xx.vp[m] + src_v.vp[m];
                dT.v[m] += z2xx.v[m] + src_T.v[m];
                dq.v[m] += z3xx.v[m] + src_q.v[m];
            }
        }

        for (std::size_t m = 0; m < Uhat.v.vt.size(); ++m) {
            Uhat.v.vt[m] += dt * dv.vt[m];
            Uhat.v.vp[m] += dt * dv.vp[m];
            Uhat.T.v[m] += dt * dT.v[m];
            Uhat.q.v[m] += dt * dq.v[m];
        }
        implicit_vertical(Uhat);
        SurfaceScalar psi = proj_.project(Uhat.v);
        for (std::size_t m = 0; m < psi.v.size(); ++m) Uhat.phis.v[m] = psi.v[m] / dt;
        ou_step(ou, spectrum_, path);
        check_finite(Uhat, ou.n);
    }

    /// Reconstruct U = Uhat + Z at the OU state's current time.
    State reconstruct(const State& Uhat, const OUState& ou) const {
        State U = Uhat;
        ZFields Z = assemble_Z(*assembler_, ou, cfg_.alpha, cfg_.beta);
        for (std::size_t m = 0; m < U.v.vt.size(); ++m) {
            U.v.vt[m] += Z.Z1.vt[m];
            U.v.vp[m] += Z.Z1.vp[m];
            U.T.v[m] += Z.Z2.v[m];
            U.q.v[m] += Z.Z3.v[m];
        }
        return U;
    }

    /// Integrate from t_start to t_end. Bit-deterministic given (config,
    /// seed). For the decomposed scheme the OU state is stationary-initialized
    /// at t_start; use run_continued to compose runs bit-exactly.
    Trajectory run(State U0, int snapshot_every = 0) const {
        project_if_needed(U0);
        OUState ou;
        State Uhat = std::move(U0);
        if (cfg_.scheme == Scheme::ou_decomposed && cfg_.noise_enabled) {
            ou = ou_stationary_init(spectrum_, cfg_.gamma, path(), cfg_.t_start);
            // Uhat(t0) = U0 - Z(t0)
            State Z0 = reconstruct(zero_state(), ou);
            for (std::size_t m = 0; m < Uhat.v.vt.size(); ++m) {
                Uhat.v.vt[m] -= Z0.v.vt[m];
                Uhat.v.vp[m] -= Z0.v.vp[m];
                Uhat.T.v[m] -= Z0.T.v[m];
                Uhat.q.v[m] -= Z0.q.v[m];
            }
        }
        return integrate(std::move(Uhat), std::move(ou), snapshot_every);
    }

    Trajectory run_continued(Continuation c, int snapshot_every = 0) const {
        return integrate(std::move(c.uhat), std::move(c.ou), snapshot_every);
    }

  private:
    Trajectory integrate(State Uhat, OUState ou, int snapshot_every) const {
        Trajectory tr;
        NoisePath p = path();

        auto current = [&]() -> State {
            if (cfg_.scheme == Scheme::ou_decomposed && cfg_.noise_enabled)
                return reconstruct(Uhat, ou);
            return Uhat;
        };

        auto record = [&](std::int64_t n) {
            State U = current();
            EnergyRecord r = make_energy_record(U, n);
            if (cfg_.scheme == Scheme::ou_decomposed && cfg_.noise_enabled)
                for (int j = 0; j < 3; ++j)
                    r.z_h3[j] = std::sqrt(z_norm_surrogate_sq(spectrum_, ou, j, 3.0));
            tr.records.push_back(r);
        };

        record(cfg_.t_start);
        if (snapshot_every > 0) tr.snapshots.emplace_back(cfg_.t_start, current());

        try {
            for (std::int64_t n = cfg_.t_start; n < cfg_.t_end; ++n) {
                if (cfg_.scheme == Scheme::ou_decomposed && cfg_.noise_enabled) {
                    // commit only on success so a blow-up leaves the last
                    // valid state in the trajectory
                    State next = Uhat;
                    OUState ou_next = ou;
                    step_decomposed(next, ou_next, p);
                    Uhat = std::move(next);
                    ou = std::move(ou_next);
                } else {
                    Uhat = step_em(Uhat, p, n);
                }
                std::int64_t done = n + 1;
                if (cfg_.record_every > 0 &&
                    ((done - cfg_.t_start) % cfg_.record_every == 0 || done == cfg_.t_end))
                    record(done);
                if (snapshot_every > 0 && (done - cfg_.t_start) % snapshot_every == 0)
                    tr.snapshots.emplace_back(done, current());
            }
        } catch (const BlowUp& b) {
            tr.blowup = b;
        }
        tr.final_state = current();
        if (cfg_.scheme == Scheme::ou_decomposed && cfg_.noise_enabled) {
            tr.final_uhat = Uhat;
            tr.final_ou = ou;
        }
        return tr;
    }

    void add_wiener_fields(State& U, const NoisePath& path, std::int64_t n) const {
        std::vector<double> c(spectrum_.comp[0].size());
        for (std::size_t i = 0; i < c.size(); ++i)
            c[i] = std::sqrt(spectrum_.comp[0][i].lambda) * path.increment(0, int(i), n);
        assembler_->add_velocity(c, U.v);  // projection of the update follows
        std::vector<double> cT(spectrum_.comp[1].size());
        for (std::size_t i = 0; i < cT.size(); ++i)
            cT[i] = std::sqrt(spectrum_.comp[1][i].lambda) * path.increment(1, int(i), n);
        assembler_->add_scalar(1, cT, U.T);
        std::vector<double> cq(spectrum_.comp[2].size());
        for (std::size_t i = 0; i < cq.size(); ++i)
            cq[i] = std::sqrt(spectrum_.comp[2][i].lambda) * path.increment(2, int(i), n);
        assembler_->add_scalar(2, cq, U.q);
    }

    void implicit_vertical(State& U) const {
        const Grid& g = *grid_;
        for (int i = 0; i < g.ntheta; ++i)
            for (int j = 0; j < g.nphi; ++j) {
                int base = g.idx(i, j, 0);
                vsolve_v_.solve(&U.v.vt[base]);
                vsolve_v_.solve(&U.v.vp[base]);
                vsolve_T_.solve(&U.T.v[base]);
                vsolve_q_.solve(&U.q.v[base]);
            }
    }

    void check_finite(const State& U, std::int64_t step) const {
        double mv = std::max(max_abs(U.v.vt), max_abs(U.v.vp));
        double mT = max_abs(U.T.v), mq = max_abs(U.q.v);
        constexpr double cap = 1e8;
        if (!std::isfinite(mv) || !std::isfinite(mT) || !std::isfinite(mq) || mv > cap ||
            mT > cap || mq > cap)
            throw BlowUp{step, mv, mT, mq};
    }

    RunConfig cfg_;
    GridPtr grid_;
    LerayProjector proj_;
    PhysicalConstants pc_;
    ScalarField qt_field_, qq_field_;
    detail::VerticalSolve vsolve_v_, vsolve_T_, vsolve_q_;
    ModeSpectrum spectrum_;
    std::unique_ptr<NoiseAssembler> assembler_;
    Terms terms_;
};

}  // namespace mpe
