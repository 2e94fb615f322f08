#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "mpe/diagnostics.hpp"
#include "mpe/rng.hpp"

namespace mpe {

struct NoiseConfig {
    int Lmax = 2;
    int Kmax = 2;
    double rho = 2.0;    // lambda = gamma_mode^(-rho)
    double sigma = 0.1;  // summability exponent
};

/// One forcing mode: real spherical-harmonic surrogate (l,m) times the k-th
/// discrete vertical eigenvector of -d2_xi under the component's BC.
/// For the velocity component, slot selects which frame component carries
/// the scalar profile (the assembled field is Leray-projected afterwards).
struct Mode {
    int l = 0, m = 0, k = 0, slot = 0;
    double gamma = 0.0;   // l(l+1) + 1 + mu_k
    double lambda = 0.0;  // gamma^(-rho)
};

/// Discrete vertical eigenpairs of -d2_xi with ghost-cell BCs, orthonormal
/// under the trapezoid xi-quadrature.
struct VerticalModes {
    std::vector<double> mu;               // ascending eigenvalues
    std::vector<std::vector<double>> ev;  // ev[k] over xi nodes, sum w ev^2 = 1
};

inline VerticalModes vertical_eigenmodes(const Grid& g, VerticalBC bc, double coef, int kmax) {
    int n = g.nxi;
    double ih2 = 1.0 / (g.dxi * g.dxi);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    M(0, 0) = 2.0 * ih2;
    M(0, 1) = -2.0 * ih2;
    for (int k = 1; k < n - 1; ++k) {
        M(k, k - 1) = -ih2;
        M(k, k) = 2.0 * ih2;
        M(k, k + 1) = -ih2;
    }
    M(n - 1, n - 2) = -2.0 * ih2;
    M(n - 1, n - 1) = (bc == VerticalBC::robin_top) ? (2.0 + 2.0 * g.dxi * coef) * ih2 : 2.0 * ih2;

    // W-symmetrize: B = W^{1/2} M W^{-1/2} with W the trapezoid weights
    Eigen::VectorXd ws(n), wi(n);
    for (int k = 0; k < n; ++k) {
        ws(k) = std::sqrt(g.wxi[k]);
        wi(k) = 1.0 / ws(k);
    }
    Eigen::MatrixXd B = ws.asDiagonal() * M * wi.asDiagonal();
    B = 0.5 * (B + B.transpose());  // clean symmetrization of roundoff
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);

    VerticalModes vm;
    int kk = std::min(kmax, n);
    for (int k = 0; k < kk; ++k) {
        vm.mu.push_back(std::max(0.0, es.eigenvalues()(k)));
        Eigen::VectorXd y = es.eigenvectors().col(k);
        std::vector<double> e(n);
        double norm2 = 0.0;
        for (int q = 0; q < n; ++q) {
            e[q] = y(q) * wi(q);
            norm2 += g.wxi[q] * e[q] * e[q];
        }
        double s = 1.0 / std::sqrt(norm2);
        if (e[0] < 0) s = -s;  // fixed sign convention for reproducibility
        for (double& x : e) x *= s;
        vm.ev.push_back(std::move(e));
    }
    return vm;
}

/// Real orthonormal spherical harmonic sampled at a grid node.
inline double real_sph_harmonic(int l, int m, double theta, double phi) {
    if (m == 0) return std::sph_legendre(l, 0, theta);
    int am = m > 0 ? m : -m;
    double base = std::sqrt(2.0) * std::sph_legendre(l, am, theta);
    return m > 0 ? base * std::cos(am * phi) : base * std::sin(am * phi);
}

struct SummabilityReport {
    double sum_lambda_g2s[3] = {0, 0, 0};   // sum lambda   * gamma^(2+sigma)
    double sum_lambda2_g2s[3] = {0, 0, 0};  // sum lambda^2 * gamma^(2+sigma)
    bool tail_ok = false;                   // continuum tail bound for lambda^2 form
};

struct ModeSpectrum {
    NoiseConfig cfg;
    std::array<std::vector<Mode>, 3> comp;  // j = 0 velocity, 1 temperature, 2 moisture
    std::array<VerticalModes, 3> vert;

    std::size_t total_modes() const {
        return comp[0].size() + comp[1].size() + comp[2].size();
    }

    SummabilityReport summability() const {
        SummabilityReport r;
        for (int j = 0; j < 3; ++j)
            for (const Mode& md : comp[j]) {
                double g2s = std::pow(md.gamma, 2.0 + cfg.sigma);
                r.sum_lambda_g2s[j] += md.lambda * g2s;
                r.sum_lambda2_g2s[j] += md.lambda * md.lambda * g2s;
            }
        // mode count below gamma ~ Lambda grows like Lambda^{3/2}; the
        // squared form converges iff 2*rho - (2+sigma) > 3/2
        r.tail_ok = 2.0 * cfg.rho - (2.0 + cfg.sigma) > 1.5;
        return r;
    }
};

/// Enumerates modes and their (gamma, lambda). Velocity surrogates start at
/// l = 1 (tangent fields have no l = 0 harmonic); scalars include l = 0.
inline ModeSpectrum build_spectrum(const Grid& g, const NoiseConfig& cfg, double alpha,
                                   double beta) {
    if (cfg.Lmax < 1) throw std::invalid_argument("noise: Lmax must be >= 1");
    if (cfg.Kmax < 1) throw std::invalid_argument("noise: Kmax must be >= 1");
    if (cfg.rho < (3.0 + cfg.sigma) / 2.0 + 0.2)
        throw std::invalid_argument("noise: rho too small for the summability condition");
    if (g.ntheta < 2 * cfg.Lmax + 2)
        throw std::invalid_argument("noise: grid too coarse, need ntheta >= 2*Lmax+2");

    ModeSpectrum sp;
    sp.cfg = cfg;
    sp.vert[0] = vertical_eigenmodes(g, VerticalBC::neumann, 0.0, cfg.Kmax);
    sp.vert[1] = vertical_eigenmodes(g, VerticalBC::robin_top, alpha, cfg.Kmax);
    sp.vert[2] = vertical_eigenmodes(g, VerticalBC::robin_top, beta, cfg.Kmax);

    for (int j = 0; j < 3; ++j) {
        int lmin = (j == 0) ? 1 : 0;
        for (int l = lmin; l <= cfg.Lmax; ++l)
            for (int m = -l; m <= l; ++m)
                for (int k = 0; k < int(sp.vert[j].mu.size()); ++k) {
                    double gamma = l * (l + 1) + 1.0 + sp.vert[j].mu[k];
                    double lambda = std::pow(gamma, -cfg.rho);
                    int slots = (j == 0) ? 2 : 1;
                    for (int s = 0; s < slots; ++s)
                        sp.comp[j].push_back({l, m, k, s, gamma, lambda});
                }
    }
    return sp;
}

/// Caches sampled mode profiles and assembles coefficient combinations into
/// fields. Velocity assemblies are passed through the Leray projection.
class NoiseAssembler {
  public:
    NoiseAssembler(GridPtr grid, const ModeSpectrum& sp, const LerayProjector& proj)
        : g_(std::move(grid)), sp_(&sp), proj_(&proj) {
        const Grid& g = *g_;
        for (int j = 0; j < 3; ++j) {
            surf_[j].resize(sp.comp[j].size());
            for (std::size_t i = 0; i < sp.comp[j].size(); ++i) {
                const Mode& md = sp.comp[j][i];
                std::vector<double>& y = surf_[j][i];
                y.resize(g.surface_size());
                for (int it = 0; it < g.ntheta; ++it)
                    for (int jp = 0; jp < g.nphi; ++jp)
                        y[g.sidx(it, jp)] =
                            real_sph_harmonic(md.l, md.m, g.theta[it], g.phi[jp]);
            }
        }
    }

    /// Z1 component: sum_i c[i] * profile_i into a tangent field, projected.
    TangentField assemble_velocity(std::span<const double> c) const {
        TangentField out(g_);
        add_velocity(c, out);
        proj_->project(out);
        return out;
    }

    /// Unprojected accumulation (the caller projects the full update).
    void add_velocity(std::span<const double> c, TangentField& out) const {
        const Grid& g = *g_;
        const auto& modes = sp_->comp[0];
        for (std::size_t i = 0; i < modes.size(); ++i) {
            if (c[i] == 0.0) continue;
            const Mode& md = modes[i];
            const std::vector<double>& y = surf_[0][i];
            const std::vector<double>& e = sp_->vert[0].ev[md.k];
            std::vector<double>& dst = md.slot == 0 ? out.vt : out.vp;
            for (int it = 0; it < g.ntheta; ++it)
                for (int jp = 0; jp < g.nphi; ++jp) {
                    double a = c[i] * y[g.sidx(it, jp)];
                    int base = g.idx(it, jp, 0);
                    for (int k = 0; k < g.nxi; ++k) dst[base + k] += a * e[k];
                }
        }
    }

    ScalarField assemble_scalar(int j, std::span<const double> c, VerticalBC bc,
                                double robin) const {
        ScalarField out(g_, bc, robin);
        add_scalar(j, c, out);
        return out;
    }

    void add_scalar(int j, std::span<const double> c, ScalarField& out) const {
        const Grid& g = *g_;
        const auto& modes = sp_->comp[j];
        for (std::size_t i = 0; i < modes.size(); ++i) {
            if (c[i] == 0.0) continue;
            const Mode& md = modes[i];
            const std::vector<double>& y = surf_[j][i];
            const std::vector<double>& e = sp_->vert[j].ev[md.k];
            for (int it = 0; it < g.ntheta; ++it)
                for (int jp = 0; jp < g.nphi; ++jp) {
                    double a = c[i] * y[g.sidx(it, jp)];
                    int base = g.idx(it, jp, 0);
                    for (int k = 0; k < g.nxi; ++k) out.v[base + k] += a * e[k];
                }
        }
    }

  private:
    GridPtr g_;
    const ModeSpectrum* sp_;
    const LerayProjector* proj_;
    std::array<std::vector<std::vector<double>>, 3> surf_;
};

struct ZFields {
    TangentField Z1;
    ScalarField Z2, Z3;
};

/// Per-mode coefficients of the modified OU convolution
/// dZ + (A + gamma) Z dt = dW, advanced by the exact scalar recursion.
struct OUState {
    double gamma = 1.0;
    std::int64_t n = 0;  // current time index
    std::array<std::vector<double>, 3> z;
};

/// Stationary initialization: z ~ N(0, lambda / (2 (gamma_mode + gamma))),
/// drawn from the init stream keyed by the start index.
inline OUState ou_stationary_init(const ModeSpectrum& sp, double gamma, const NoisePath& path,
                                  std::int64_t t0) {
    if (!(gamma >= 0.0)) throw std::invalid_argument("ou: gamma must be >= 0");
    OUState st;
    st.gamma = gamma;
    st.n = t0;
    for (int j = 0; j < 3; ++j) {
        st.z[j].resize(sp.comp[j].size());
        for (std::size_t i = 0; i < sp.comp[j].size(); ++i) {
            const Mode& md = sp.comp[j][i];
            double var = md.lambda / (2.0 * (md.gamma + gamma));
            st.z[j][i] = std::sqrt(var) * path.init_normal(j, int(i), t0);
        }
    }
    return st;
}

/// Exact one-step update z <- e^{-theta dt} z + eta with
/// eta ~ N(0, lambda (1 - e^{-2 theta dt}) / (2 theta)), theta = gamma_mode + gamma,
/// driven by the same Wiener increment stream the EM scheme consumes.
inline void ou_step(OUState& st, const ModeSpectrum& sp, const NoisePath& path) {
    double dt = path.dt();
    for (int j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < sp.comp[j].size(); ++i) {
            const Mode& md = sp.comp[j][i];
            double theta = md.gamma + st.gamma;
            double a = std::exp(-theta * dt);
            double sd = std::sqrt(md.lambda * (1.0 - a * a) / (2.0 * theta));
            st.z[j][i] = a * st.z[j][i] + sd * path.normal01(j, int(i), st.n);
        }
    st.n += 1;
}

/// Current OU fields (Z1, Z2, Z3); Z1 passes through the Leray projection.
inline ZFields assemble_Z(const NoiseAssembler& as, const OUState& st, double alpha,
                          double beta) {
    return {as.assemble_velocity(st.z[0]),
            as.assemble_scalar(1, st.z[1], VerticalBC::robin_top, alpha),
            as.assemble_scalar(2, st.z[2], VerticalBC::robin_top, beta)};
}

/// Spectrally weighted surrogate for |Z_j|_{H^s}^2: sum gamma^s z^2.
inline double z_norm_surrogate_sq(const ModeSpectrum& sp, const OUState& st, int j, double s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < sp.comp[j].size(); ++i)
        acc += std::pow(sp.comp[j][i].gamma, s) * st.z[j][i] * st.z[j][i];
    return acc;
}

/// Analytic stationary expectation of the same surrogate.
inline double z_norm_surrogate_expect(const ModeSpectrum& sp, double gamma, int j, double s) {
    double acc = 0.0;
    for (const Mode& md : sp.comp[j])
        acc += std::pow(md.gamma, s) * md.lambda / (2.0 * (md.gamma + gamma));
    return acc;
}

struct ErgodicReport {
    double time_average = 0.0;
    double analytic = 0.0;
    double rel_gap = 0.0;
};

/// Running time-average of the H^1-surrogate of |Z|^2 against the per-mode
/// stationary expectation.
inline ErgodicReport ergodic_average_check(const ModeSpectrum& sp, double gamma,
                                           const NoisePath& path, std::int64_t horizon,
                                           std::int64_t t0 = 0) {
    OUState st = ou_stationary_init(sp, gamma, path, t0);
    double acc = 0.0;
    for (std::int64_t n = 0; n < horizon; ++n) {
        ou_step(st, sp, path);
        for (int j = 0; j < 3; ++j) acc += z_norm_surrogate_sq(sp, st, j, 1.0);
    }
    ErgodicReport r;
    r.time_average = acc / double(horizon);
    for (int j = 0; j < 3; ++j) r.analytic += z_norm_surrogate_expect(sp, gamma, j, 1.0);
    r.rel_gap = std::abs(r.time_average - r.analytic) / r.analytic;
    return r;
}

}  // namespace mpe
