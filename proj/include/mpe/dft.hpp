#pragma once

#include <complex>
#include <vector>

namespace mpe {

/// Plain DFT with a precomputed twiddle table. Grid sizes here are tiny
/// (nphi <= 128), so the quadratic cost is irrelevant and the transform is
/// bitwise deterministic across runs.
struct Dft {
    int n = 0;
    std::vector<std::complex<double>> tw;  // tw[m*n+j] = exp(-2*pi*i*m*j/n)

    Dft() = default;
    explicit Dft(int n_) : n(n_), tw(std::size_t(n_) * n_) {
        for (int m = 0; m < n; ++m)
            for (int j = 0; j < n; ++j) {
                double ang = -2.0 * 3.14159265358979323846 * m * j / n;
                tw[std::size_t(m) * n + j] = {std::cos(ang), std::sin(ang)};
            }
    }

    void forward(const double* x, std::complex<double>* X) const {
        for (int m = 0; m < n; ++m) {
            std::complex<double> s{0.0, 0.0};
            const std::complex<double>* w = &tw[std::size_t(m) * n];
            for (int j = 0; j < n; ++j) s += x[j] * w[j];
            X[m] = s;
        }
    }

    void inverse(const std::complex<double>* X, double* x) const {
        for (int j = 0; j < n; ++j) {
            std::complex<double> s{0.0, 0.0};
            for (int m = 0; m < n; ++m) s += X[m] * std::conj(tw[std::size_t(m) * n + j]);
            x[j] = s.real() / n;
        }
    }
};

}  // namespace mpe
