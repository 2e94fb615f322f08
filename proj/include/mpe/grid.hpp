#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mpe {

inline constexpr double kPi = 3.14159265358979323846;

/// Discrete geometry of the shell S^2 x (0,1) in (theta, phi, xi) coordinates.
///
/// Colatitude nodes are cell-centered, theta_i = (i+1/2)*pi/ntheta, so both
/// poles are excluded and 1/sin(theta), cot(theta) stay finite. Longitude is
/// uniform periodic, xi includes both endpoints. The quadrature weight of a
/// cell is the exact integral of sin(theta) over the theta-cell times
/// dphi * w_k (trapezoid in xi), so constants integrate to 4*pi exactly.
struct Grid {
    int ntheta = 0, nphi = 0, nxi = 0;
    double r0 = 0.5, rs = 1.0;
    double dtheta = 0, dphi = 0, dxi = 0;

    std::vector<double> theta, phi, xi;
    std::vector<double> sin_t, cos_t, cot_t, inv_sin_t;
    std::vector<double> sin_edge;   // sin at theta edges i-1/2, size ntheta+1; pole edges exactly 0
    std::vector<double> wtheta;     // exact cell integral of sin(theta): 2*sin(dtheta/2)*sin_t[i]
    std::vector<double> wxi;        // trapezoid weights in xi, sum = 1
    std::vector<double> rxi;        // pressure r(xi_k)

    Grid() = default;

    Grid(int nt, int np, int nx, double r0_ = 0.5, double rs_ = 1.0)
        : ntheta(nt), nphi(np), nxi(nx), r0(r0_), rs(rs_) {
        if (nt < 4 || np < 4 || nx < 3)
            throw std::invalid_argument("grid: need ntheta>=4, nphi>=4, nxi>=3");
        if (!(r0 > 0.0) || !(rs >= r0))
            throw std::invalid_argument("grid: need 0 < r0 <= rs");
        dtheta = kPi / nt;
        dphi = 2.0 * kPi / np;
        dxi = 1.0 / (nx - 1);

        theta.resize(nt); sin_t.resize(nt); cos_t.resize(nt);
        cot_t.resize(nt); inv_sin_t.resize(nt); wtheta.resize(nt);
        for (int i = 0; i < nt; ++i) {
            theta[i] = (i + 0.5) * dtheta;
            sin_t[i] = std::sin(theta[i]);
            cos_t[i] = std::cos(theta[i]);
            cot_t[i] = cos_t[i] / sin_t[i];
            inv_sin_t[i] = 1.0 / sin_t[i];
            wtheta[i] = 2.0 * std::sin(0.5 * dtheta) * sin_t[i];
        }
        sin_edge.resize(nt + 1);
        sin_edge[0] = 0.0;      // analytic values at the poles
        sin_edge[nt] = 0.0;
        for (int i = 1; i < nt; ++i) sin_edge[i] = std::sin(i * dtheta);

        phi.resize(np);
        for (int j = 0; j < np; ++j) phi[j] = j * dphi;

        xi.resize(nx); wxi.resize(nx); rxi.resize(nx);
        for (int k = 0; k < nx; ++k) {
            xi[k] = k * dxi;
            wxi[k] = (k == 0 || k == nx - 1) ? 0.5 * dxi : dxi;
            rxi[k] = (rs - r0) * xi[k] + r0;
        }
    }

    std::size_t size() const { return std::size_t(ntheta) * nphi * nxi; }
    std::size_t surface_size() const { return std::size_t(ntheta) * nphi; }

    int idx(int i, int j, int k) const { return (i * nphi + j) * nxi + k; }
    int sidx(int i, int j) const { return i * nphi + j; }
    int jm(int j) const { return j == 0 ? nphi - 1 : j - 1; }
    int jp(int j) const { return j == nphi - 1 ? 0 : j + 1; }

    double r_of_xi(double x) const { return (rs - r0) * x + r0; }
    double cell_weight(int i, int k) const { return wtheta[i] * dphi * wxi[k]; }
    double surf_weight(int i) const { return wtheta[i] * dphi; }

    bool same_shape(const Grid& o) const {
        return ntheta == o.ntheta && nphi == o.nphi && nxi == o.nxi;
    }
};

}  // namespace mpe
