#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "mpe/dft.hpp"
#include "mpe/norms.hpp"
#include "mpe/operators.hpp"

namespace mpe {

/// Model constants of the thermodynamic coupling.
struct PhysicalConstants {
    double a = 0.5;
    double b = 0.2;
    double r0 = 0.5;
    double rs = 1.0;

    // max over xi of |b*rs/r| is attained at r = r0
    double coupling_max() const { return b * rs / r0; }
    bool attractor_condition(double alpha, double beta) const {
        return coupling_max() <= std::min({0.5, alpha, beta});
    }
};

/// Diagnostic vertical velocity w(v)(xi) = int_xi^1 div v dxi'. Exactly zero
/// at xi = 1; at xi = 0 it returns the barotropic constraint residual.
inline ScalarField w_of_v(const TangentField& v) {
    const Grid& g = *v.g;
    ScalarField d = div_h(v);
    ScalarField w(v.g);
    for (int i = 0; i < g.ntheta; ++i)
        for (int j = 0; j < g.nphi; ++j) {
            int base = g.idx(i, j, 0);
            w.v[base + g.nxi - 1] = 0.0;
            for (int k = g.nxi - 2; k >= 0; --k)
                w.v[base + k] = w.v[base + k + 1] +
                                0.5 * g.dxi * (d.v[base + k] + d.v[base + k + 1]);
        }
    return w;
}

/// Max over horizontal nodes of |int_0^1 div v dxi| (the constraint residual).
inline double constraint_residual(const TangentField& v) {
    const Grid& g = *v.g;
    ScalarField d = div_h(v);
    double m = 0.0;
    for (int i = 0; i < g.ntheta; ++i)
        for (int j = 0; j < g.nphi; ++j) {
            int base = g.idx(i, j, 0);
            double s = 0.0;
            for (int k = 0; k < g.nxi; ++k) s += g.wxi[k] * d.v[base + k];
            m = std::max(m, std::abs(s));
        }
    return m;
}

/// Hydrostatic reconstruction Phi = Phi_s + int_xi^1 (b rs / r)(1 + a q) T dxi'.
inline ScalarField phi_reconstruct(const ScalarField& T, const ScalarField& q,
                                   const SurfaceScalar& phis, const PhysicalConstants& pc) {
    const Grid& g = *T.g;
    ScalarField phi(T.g);
    for (int i = 0; i < g.ntheta; ++i)
        for (int j = 0; j < g.nphi; ++j) {
            int base = g.idx(i, j, 0);
            double ps = phis.v[g.sidx(i, j)];
            auto integrand = [&](int k) {
                return pc.b * pc.rs / g.rxi[k] * (1.0 + pc.a * q.v[base + k]) * T.v[base + k];
            };
            phi.v[base + g.nxi - 1] = ps;
            double acc = 0.0;
            for (int k = g.nxi - 2; k >= 0; --k) {
                acc += 0.5 * g.dxi * (integrand(k) + integrand(k + 1));
                phi.v[base + k] = ps + acc;
            }
        }
    return phi;
}

/// Momentum pressure source int_xi^1 (b rs / r) grad_h[(1 + a q) T] dxi'.
inline TangentField pressure_gradient_term(const ScalarField& T, const ScalarField& q,
                                           const PhysicalConstants& pc) {
    const Grid& g = *T.g;
    ScalarField prod(T.g);
    for (std::size_t n = 0; n < prod.v.size(); ++n)
        prod.v[n] = (1.0 + pc.a * q.v[n]) * T.v[n];
    TangentField gr = grad_h(prod);
    TangentField out(T.g);
    for (int i = 0; i < g.ntheta; ++i)
        for (int j = 0; j < g.nphi; ++j) {
            int base = g.idx(i, j, 0);
            double at = 0.0, ap = 0.0;
            out.vt[base + g.nxi - 1] = 0.0;
            out.vp[base + g.nxi - 1] = 0.0;
            for (int k = g.nxi - 2; k >= 0; --k) {
                double ck = pc.b * pc.rs / g.rxi[k];
                double ck1 = pc.b * pc.rs / g.rxi[k + 1];
                at += 0.5 * g.dxi * (ck * gr.vt[base + k] + ck1 * gr.vt[base + k + 1]);
                ap += 0.5 * g.dxi * (ck * gr.vp[base + k] + ck1 * gr.vp[base + k + 1]);
                out.vt[base + k] = at;
                out.vp[base + k] = ap;
            }
        }
    return out;
}

/// Barotropic/baroclinic split: vbar = int_0^1 v dxi (trapezoid), vtilde = v - vbar.
inline std::pair<SurfaceVector, TangentField> baro_split(const TangentField& v) {
    const Grid& g = *v.g;
    SurfaceVector bar(v.g);
    TangentField tilde(v.g);
    for (int i = 0; i < g.ntheta; ++i)
        for (int j = 0; j < g.nphi; ++j) {
            int base = g.idx(i, j, 0);
            double mt = 0.0, mp = 0.0;
            for (int k = 0; k < g.nxi; ++k) {
                mt += g.wxi[k] * v.vt[base + k];
                mp += g.wxi[k] * v.vp[base + k];
            }
            int sid = g.sidx(i, j);
            bar.vt[sid] = mt;
            bar.vp[sid] = mp;
            for (int k = 0; k < g.nxi; ++k) {
                tilde.vt[base + k] = v.vt[base + k] - mt;
                tilde.vp[base + k] = v.vp[base + k] - mp;
            }
        }
    return {std::move(bar), std::move(tilde)};
}

/// Quadrature-adjoint horizontal gradient: the unique G with
/// <div u, psi> = -<u, G psi> under the cell quadrature. Second-order
/// consistent with grad_h; the Leray projection subtracts G psi so that the
/// projected divergence vanishes to solver roundoff.
inline SurfaceVector adjoint_grad_h(const SurfaceScalar& psi) {
    const Grid& g = *psi.g;
    SurfaceVector out(psi.g);
    for (int i = 0; i < g.ntheta; ++i) {
        double slo = g.sin_edge[i], shi = g.sin_edge[i + 1];
        double c = 1.0 / (2.0 * g.sin_t[i] * g.dtheta);
        for (int j = 0; j < g.nphi; ++j) {
            int id = g.sidx(i, j);
            double hi = (i + 1 < g.ntheta) ? shi * (psi.v[g.sidx(i + 1, j)] - psi.v[id]) : 0.0;
            double lo = (i > 0) ? slo * (psi.v[id] - psi.v[g.sidx(i - 1, j)]) : 0.0;
            out.vt[id] = (hi + lo) * c;
            out.vp[id] = (psi.v[g.sidx(i, g.jp(j))] - psi.v[g.sidx(i, g.jm(j))]) /
                         (2.0 * g.dphi) * g.inv_sin_t[i];
        }
    }
    return out;
}

namespace detail {

// Dense theta-matrix of the flux-form divergence acting on the theta
// component of a zonal mode, and of the adjoint gradient. Both are
// independent of the zonal wavenumber.
inline Eigen::MatrixXd theta_div_matrix(const Grid& g) {
    int n = g.ntheta;
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double c = 1.0 / (g.sin_t[i] * g.dtheta);
        if (i + 1 < n) {
            D(i, i) += 0.5 * g.sin_edge[i + 1] * c;
            D(i, i + 1) += 0.5 * g.sin_edge[i + 1] * c;
        }
        if (i > 0) {
            D(i, i) -= 0.5 * g.sin_edge[i] * c;
            D(i, i - 1) -= 0.5 * g.sin_edge[i] * c;
        }
    }
    return D;
}

inline Eigen::MatrixXd theta_adjgrad_matrix(const Grid& g) {
    int n = g.ntheta;
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double c = 1.0 / (2.0 * g.sin_t[i] * g.dtheta);
        if (i + 1 < n) {
            G(i, i + 1) += g.sin_edge[i + 1] * c;
            G(i, i) -= g.sin_edge[i + 1] * c;
        }
        if (i > 0) {
            G(i, i) += g.sin_edge[i] * c;
            G(i, i - 1) -= g.sin_edge[i] * c;
        }
    }
    return G;
}

}  // namespace detail

/// Direct solver for the surface Poisson problem laplace_scalar(psi) = rhs
/// (flux-form Laplace-Beltrami), via DFT in phi and one LU-factored theta
/// system per zonal wavenumber. The zero mean mode is pinned and the result
/// demeaned. Residual contract: |laplace(psi) - rhs|_2 <= 1e-10 |rhs|_2.
class SpherePoisson {
  public:
    explicit SpherePoisson(GridPtr grid) : g_(std::move(grid)), dft_(g_->nphi) {
        const Grid& g = *g_;
        int n = g.ntheta;
        lu_.reserve(g.nphi);
        for (int m = 0; m < g.nphi; ++m) {
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
            double lam = (2.0 - 2.0 * std::cos(m * g.dphi)) / (g.dphi * g.dphi);
            for (int i = 0; i < n; ++i) {
                double c = 1.0 / (g.sin_t[i] * g.dtheta * g.dtheta);
                if (i + 1 < n) {
                    A(i, i + 1) += g.sin_edge[i + 1] * c;
                    A(i, i) -= g.sin_edge[i + 1] * c;
                }
                if (i > 0) {
                    A(i, i - 1) += g.sin_edge[i] * c;
                    A(i, i) -= g.sin_edge[i] * c;
                }
                A(i, i) -= lam * g.inv_sin_t[i] * g.inv_sin_t[i];
            }
            if (m == 0) A.row(0) = Eigen::RowVectorXd::Unit(n, 0);  // pin the mean mode
            lu_.emplace_back(A);
        }
    }

    /// Solves with automatic demeaning; sets warned_demean when the input
    /// mean was not already negligible.
    SurfaceScalar solve(const SurfaceScalar& rhs_in) {
        const Grid& g = *g_;
        SurfaceScalar rhs = rhs_in;
        double area = 4.0 * kPi;
        double mean = integrate_surface(rhs) / area;
        double scale = norm_l2_surface(rhs);
        warned_demean = std::abs(mean) * std::sqrt(area) > 1e-12 * std::max(scale, 1e-300);
        for (double& x : rhs.v) x -= mean;
        SurfaceScalar psi = solve_modal(rhs, lu_, true);
        // residual contract guard
        SurfaceScalar lap = laplace_scalar(psi);
        double resid = 0;
        for (std::size_t m = 0; m < lap.v.size(); ++m)
            resid = std::max(resid, std::abs(lap.v[m] - rhs.v[m]));
        if (!(resid <= 1e-10 * std::max(scale, 1e-300)))
            throw std::runtime_error("sphere poisson: solve residual exceeds contract");
        return psi;
    }

    bool warned_demean = false;

  protected:
    SurfaceScalar solve_modal(const SurfaceScalar& rhs,
                              std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>>& lus,
                              bool demean_out) const {
        const Grid& g = *g_;
        int nt = g.ntheta, np = g.nphi;
        std::vector<std::complex<double>> spec(std::size_t(nt) * np);
        for (int i = 0; i < nt; ++i) dft_.forward(&rhs.v[g.sidx(i, 0)], &spec[std::size_t(i) * np]);

        Eigen::VectorXd re(nt), im(nt);
        for (int m = 0; m < np; ++m) {
            for (int i = 0; i < nt; ++i) {
                re(i) = spec[std::size_t(i) * np + m].real();
                im(i) = spec[std::size_t(i) * np + m].imag();
            }
            if (m == 0) re(0) = im(0) = 0.0;  // pinned row
            Eigen::VectorXd xr = lus[m].solve(re);
            Eigen::VectorXd xi = lus[m].solve(im);
            for (int i = 0; i < nt; ++i) spec[std::size_t(i) * np + m] = {xr(i), xi(i)};
        }

        SurfaceScalar psi(g_);
        for (int i = 0; i < nt; ++i) dft_.inverse(&spec[std::size_t(i) * np], &psi.v[g.sidx(i, 0)]);
        if (demean_out) {
            double mean = integrate_surface(psi) / (4.0 * kPi);
            for (double& x : psi.v) x -= mean;
        }
        return psi;
    }

    GridPtr g_;
    Dft dft_;
    std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
};

/// Leray-type projection onto the barotropic-constraint space
/// { v : int_0^1 div v dxi = 0 at every horizontal node }.
///
/// Solves the Gram problem (div o G) psi = div(vbar) with G the
/// quadrature-adjoint gradient and subtracts G psi uniformly in xi. The
/// projection is exactly L2-orthogonal and kills the constraint residual to
/// factorization roundoff. The zonal mean mode and (for even nphi) the
/// Nyquist mode carry the one-dimensional null space of G; they are pinned,
/// which does not affect G psi.
class LerayProjector {
  public:
    explicit LerayProjector(GridPtr grid) : g_(std::move(grid)), dft_(g_->nphi) {
        const Grid& g = *g_;
        int n = g.ntheta, np = g.nphi;
        Eigen::MatrixXd D = detail::theta_div_matrix(g);
        Eigen::MatrixXd G = detail::theta_adjgrad_matrix(g);
        Eigen::MatrixXd P = D * G;
        lu_.reserve(np);
        for (int m = 0; m < np; ++m) {
            double sym = std::sin(m * g.dphi) / g.dphi;  // centered d_phi symbol
            Eigen::MatrixXd A = P;
            for (int i = 0; i < n; ++i)
                A(i, i) -= sym * sym * g.inv_sin_t[i] * g.inv_sin_t[i];
            bool singular = (m == 0) || (np % 2 == 0 && m == np / 2);
            if (singular) A.row(0) = Eigen::RowVectorXd::Unit(n, 0);
            pinned_.push_back(singular);
            lu_.emplace_back(A);
        }
    }

    /// Projects v in place; returns the multiplier psi (the discrete stand-in
    /// for the surface pressure potential).
    SurfaceScalar project(TangentField& v) const {
        const Grid& g = *g_;
        auto [bar, tilde] = baro_split(v);
        (void)tilde;
        SurfaceScalar rhs = div_h(bar);
        SurfaceScalar psi = solve_gram(rhs);
        SurfaceVector corr = adjoint_grad_h(psi);
        for (int i = 0; i < g.ntheta; ++i)
            for (int j = 0; j < g.nphi; ++j) {
                int sid = g.sidx(i, j);
                int base = g.idx(i, j, 0);
                for (int k = 0; k < g.nxi; ++k) {
                    v.vt[base + k] -= corr.vt[sid];
                    v.vp[base + k] -= corr.vp[sid];
                }
            }
        return psi;
    }

    SurfaceScalar solve_gram(const SurfaceScalar& rhs) const {
        const Grid& g = *g_;
        int nt = g.ntheta, np = g.nphi;
        std::vector<std::complex<double>> spec(std::size_t(nt) * np);
        for (int i = 0; i < nt; ++i) dft_.forward(&rhs.v[g.sidx(i, 0)], &spec[std::size_t(i) * np]);
        Eigen::VectorXd re(nt), im(nt);
        for (int m = 0; m < np; ++m) {
            for (int i = 0; i < nt; ++i) {
                re(i) = spec[std::size_t(i) * np + m].real();
                im(i) = spec[std::size_t(i) * np + m].imag();
            }
            if (pinned_[m]) re(0) = im(0) = 0.0;
            Eigen::VectorXd xr = lu_[m].solve(re);
            Eigen::VectorXd xi = lu_[m].solve(im);
            for (int i = 0; i < nt; ++i) spec[std::size_t(i) * np + m] = {xr(i), xi(i)};
        }
        SurfaceScalar psi(g_);
        for (int i = 0; i < nt; ++i) dft_.inverse(&spec[std::size_t(i) * np], &psi.v[g.sidx(i, 0)]);
        return psi;
    }

  private:
    GridPtr g_;
    Dft dft_;
    std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
    std::vector<bool> pinned_;
};

/// Convenience wrappers matching the operation-level interface.

inline SurfaceScalar solve_sphere_poisson(SpherePoisson& solver, const SurfaceScalar& rhs) {
    return solver.solve(rhs);
}

inline TangentField leray_project(const LerayProjector& proj, const TangentField& v) {
    TangentField out = v;
    proj.project(out);
    return out;
}

}  // namespace mpe
