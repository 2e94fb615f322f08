#pragma once

#include <atomic>
#include <future>
#include <thread>

#include "mpe/monitor.hpp"

namespace mpe {

/// Band-limited smooth random state scaled to a target V-norm. Velocity is
/// assembled from gradient/rotational harmonics (smooth tangent fields) and
/// projected; scalars from low-degree harmonics with gentle xi profiles.
inline State make_smooth_state(const Simulator& sim, std::uint64_t seed, int tag,
                               double radius) {
    const Grid& g = sim.grid();
    const RunConfig& cfg = sim.config();
    NoisePath keys{seed, 1.0, 1, 0};
    State U(sim.grid_ptr(), cfg.alpha, cfg.beta);

    int c = 0;
    auto coef = [&]() { return keys.field_normal(tag, c++); };

    for (int l = 1; l <= 3; ++l)
        for (int m = -l; m <= l; ++m) {
            double cg = coef() / (l * (l + 1));
            double cr = coef() / (l * (l + 1));
            double zp = 0.3 * coef();
            for (int i = 0; i < g.ntheta; ++i)
                for (int j = 0; j < g.nphi; ++j) {
                    // grad Y and k x grad Y sampled via one-sided-safe analytic forms
                    double t = g.theta[i], p = g.phi[j];
                    double eps = 1e-6;
                    double ytp = real_sph_harmonic(l, m, t + eps, p);
                    double ytm = real_sph_harmonic(l, m, t - eps, p);
                    double dyt = (ytp - ytm) / (2 * eps);
                    double dyp;
                    {
                        double ypp = real_sph_harmonic(l, m, t, p + eps);
                        double ypm = real_sph_harmonic(l, m, t, p - eps);
                        dyp = (ypp - ypm) / (2 * eps) / g.sin_t[i];
                    }
                    double gt = dyt, gp = dyp;          // grad Y
                    double rt = -dyp, rp = dyt;         // k x grad Y
                    int base = g.idx(i, j, 0);
                    for (int k = 0; k < g.nxi; ++k) {
                        double prof = 1.0 + zp * std::cos(kPi * g.xi[k]);
                        U.v.vt[base + k] += (cg * gt + cr * rt) * prof;
                        U.v.vp[base + k] += (cg * gp + cr * rp) * prof;
                    }
                }
        }

    for (int l = 0; l <= 3; ++l)
        for (int m = -l; m <= l; ++m) {
            double cT = coef() / (1.0 + l * (l + 1));
            double cq = coef() / (1.0 + l * (l + 1));
            double zT = 0.3 * coef(), zq = 0.3 * coef();
            for (int i = 0; i < g.ntheta; ++i)
                for (int j = 0; j < g.nphi; ++j) {
                    double y = real_sph_harmonic(l, m, g.theta[i], g.phi[j]);
                    int base = g.idx(i, j, 0);
                    for (int k = 0; k < g.nxi; ++k) {
                        double xi = g.xi[k];
                        U.T.v[base + k] += cT * y * (1.0 + zT * std::cos(kPi * xi));
                        U.q.v[base + k] += cq * y * (1.0 + zq * (1.0 - xi * xi));
                    }
                }
        }

    sim.projector().project(U.v);
    double n = norm_h1(U);
    double s = radius / n;
    for (std::size_t m = 0; m < U.v.vt.size(); ++m) {
        U.v.vt[m] *= s;
        U.v.vp[m] *= s;
        U.T.v[m] *= s;
        U.q.v[m] *= s;
    }
    return U;
}

// ---- pullback contraction experiment -----------------------------------------

struct PullbackPlan {
    std::vector<std::int64_t> starts;  // strictly decreasing, all negative
    int n_states = 3;
    double radius = 1.0;  // V-ball radius of the initial family
    std::uint64_t seed = 1;
};

struct PullbackRow {
    std::int64_t s = 0;
    std::vector<double> pair_dist;  // upper-triangle pairwise V-distances at t=0
    double diameter = 0;
};

struct PullbackResult {
    std::vector<PullbackRow> rows;
    bool monotone = false;       // diameters non-increasing in depth within slack
    double slack = 0.05;
    std::optional<BlowUp> blowup;
    std::string blowup_context;  // which (start, state) failed
};

namespace detail {

template <class F>
inline void parallel_for_tasks(int n, F&& body) {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::future<void>> fut;
    std::atomic<int> next{0};
    unsigned workers = std::min<unsigned>(hw, n);
    for (unsigned w = 0; w < workers; ++w)
        fut.push_back(std::async(std::launch::async, [&]() {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        }));
    for (auto& f : fut) f.get();
}

}  // namespace detail

/// Evolves a V-ball family of states from each start s to t=0 on one fixed
/// noise realization and reports the V-diameter of the image set.
inline PullbackResult pullback_run(const RunConfig& base, const PullbackPlan& plan) {
    PullbackResult res;
    for (std::size_t r = 1; r < plan.starts.size(); ++r)
        if (plan.starts[r] >= plan.starts[r - 1])
            throw std::invalid_argument("pullback: start indices must be strictly decreasing");

    int ns = int(plan.starts.size());
    int np = plan.n_states;
    std::vector<std::vector<State>> finals(ns, std::vector<State>(np));
    std::vector<std::optional<BlowUp>> blow(ns * np);

    detail::parallel_for_tasks(ns * np, [&](int idx) {
        int si = idx / np, pi = idx % np;
        RunConfig cfg = base;
        cfg.seed = plan.seed;
        cfg.t_start = plan.starts[si];
        cfg.t_end = 0;
        cfg.record_every = 0;
        Simulator sim(cfg);
        State U0 = make_smooth_state(sim, plan.seed, 100 + pi, plan.radius);
        Trajectory tr = sim.run(std::move(U0));
        if (tr.blowup) blow[idx] = tr.blowup;
        finals[si][pi] = std::move(tr.final_state);
    });

    for (int idx = 0; idx < ns * np; ++idx)
        if (blow[idx]) {
            res.blowup = blow[idx];
            res.blowup_context = "start s=" + std::to_string(plan.starts[idx / np]) +
                                 ", initial state #" + std::to_string(idx % np);
            return res;
        }

    for (int si = 0; si < ns; ++si) {
        PullbackRow row;
        row.s = plan.starts[si];
        for (int a = 0; a < np; ++a)
            for (int b = a + 1; b < np; ++b) {
                double d = dist_v(finals[si][a], finals[si][b]);
                row.pair_dist.push_back(d);
                row.diameter = std::max(row.diameter, d);
            }
        res.rows.push_back(std::move(row));
    }

    res.monotone = true;
    for (std::size_t r = 1; r < res.rows.size(); ++r)
        if (res.rows[r].diameter > res.rows[r - 1].diameter * (1.0 + res.slack))
            res.monotone = false;
    return res;
}

/// V-diameter of the initial family itself (reference for contraction ratios).
inline double initial_diameter(const RunConfig& base, const PullbackPlan& plan) {
    RunConfig cfg = base;
    cfg.seed = plan.seed;
    Simulator sim(cfg);
    std::vector<State> states;
    for (int p = 0; p < plan.n_states; ++p)
        states.push_back(make_smooth_state(sim, plan.seed, 100 + p, plan.radius));
    double d = 0;
    for (std::size_t a = 0; a < states.size(); ++a)
        for (std::size_t b = a + 1; b < states.size(); ++b)
            d = std::max(d, dist_v(states[a], states[b]));
    return d;
}

// ---- absorbing radius ----------------------------------------------------------

struct AbsorbRow {
    double rho = 0;
    std::int64_t s = 0;
    double final_l2 = 0;
};

struct AbsorbResult {
    std::vector<AbsorbRow> rows;
    double radius = 0;      // common |U(0)|_2 at the deepest start
    double spread = 0;      // relative spread across rho at the deepest start
    bool converged = false; // spread <= 5%
};

/// Pulls states of increasing initial norm back until |U(0)|_2 becomes
/// rho-independent; the common value estimates the absorbing radius r(omega).
inline AbsorbResult absorbing_radius(const RunConfig& base, const std::vector<double>& rho_list,
                                     const std::vector<std::int64_t>& starts,
                                     std::uint64_t seed) {
    AbsorbResult res;
    int nr = int(rho_list.size()), ns = int(starts.size());
    std::vector<double> out(nr * ns, 0.0);
    detail::parallel_for_tasks(nr * ns, [&](int idx) {
        int ri = idx / ns, si = idx % ns;
        RunConfig cfg = base;
        cfg.seed = seed;
        cfg.t_start = starts[si];
        cfg.t_end = 0;
        cfg.record_every = 0;
        Simulator sim(cfg);
        State U0 = make_smooth_state(sim, seed, 200 + ri, rho_list[ri]);
        Trajectory tr = sim.run(std::move(U0));
        out[idx] = norm_l2(tr.final_state);
    });
    for (int ri = 0; ri < nr; ++ri)
        for (int si = 0; si < ns; ++si)
            res.rows.push_back({rho_list[ri], starts[si], out[ri * ns + si]});

    double lo = 1e300, hi = 0, sum = 0;
    for (int ri = 0; ri < nr; ++ri) {
        double v = out[ri * ns + (ns - 1)];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
    }
    res.radius = sum / nr;
    // relative spread, measured against the larger of the estimate and a
    // tenth of the initial-ball scale so that full decay reads as converged
    double floor_ = 0.1 * *std::min_element(rho_list.begin(), rho_list.end());
    res.spread = (hi - lo) / std::max(res.radius, floor_);
    res.converged = res.spread <= 0.05;
    return res;
}

// ---- empirical invariant measure ----------------------------------------------

struct MeasureEstimate {
    std::string observable;
    int window = 0;  // 0 full, 1 first half, 2 second half
    double mean = 0;
    double stderr_ = 0;
    std::int64_t samples = 0;
};

struct MeasureResult {
    std::vector<MeasureEstimate> rows;
    bool stationary = true;  // two-window means within 3 combined SE, per observable
    double worst_sigma = 0;  // worst |mean1-mean2| / SE
};

namespace detail {

inline std::pair<double, double> batch_mean_se(std::span<const double> x, int nbatch = 16) {
    std::int64_t n = std::int64_t(x.size());
    nbatch = int(std::min<std::int64_t>(nbatch, std::max<std::int64_t>(2, n / 2)));
    std::int64_t bl = n / nbatch;
    double gm = 0;
    std::vector<double> bm(nbatch, 0.0);
    for (int b = 0; b < nbatch; ++b) {
        for (std::int64_t i = 0; i < bl; ++i) bm[b] += x[b * bl + i];
        bm[b] /= double(bl);
        gm += bm[b];
    }
    gm /= nbatch;
    double s2 = 0;
    for (int b = 0; b < nbatch; ++b) s2 += (bm[b] - gm) * (bm[b] - gm);
    s2 /= (nbatch - 1);
    return {gm, std::sqrt(s2 / nbatch)};
}

}  // namespace detail

/// Time averages of the named observables over [T1, T2] (step indices), with
/// a two-window stationarity comparison at 3 empirical standard errors.
inline MeasureResult empirical_measure(const RunConfig& base, std::int64_t T1, std::int64_t T2,
                                       int sample_every, const State* U0 = nullptr) {
    RunConfig cfg = base;
    cfg.t_start = 0;
    cfg.t_end = T2;
    cfg.record_every = sample_every;
    Simulator sim(cfg);
    State init = U0 ? *U0 : make_smooth_state(sim, cfg.seed, 300, 1.0);
    Trajectory tr = sim.run(std::move(init));

    std::vector<double> u2, h1, tmean, q44;
    for (const EnergyRecord& r : tr.records) {
        if (r.step < T1) continue;
        u2.push_back(r.v_l2 * r.v_l2 + r.T_l2 * r.T_l2 + r.q_l2 * r.q_l2);
        h1.push_back(r.v_h1 * r.v_h1 + r.T_h1 * r.T_h1 + r.q_h1 * r.q_h1);
        tmean.push_back(r.T_mean);
        q44.push_back(std::pow(r.q_l4, 4));
    }

    MeasureResult res;
    auto add = [&](const std::string& name, const std::vector<double>& x) {
        std::size_t n = x.size(), half = n / 2;
        auto [mf, sf] = detail::batch_mean_se(std::span(x));
        auto [m1, s1] = detail::batch_mean_se(std::span(x.data(), half));
        auto [m2, s2] = detail::batch_mean_se(std::span(x.data() + half, n - half));
        res.rows.push_back({name, 0, mf, sf, std::int64_t(n)});
        res.rows.push_back({name, 1, m1, s1, std::int64_t(half)});
        res.rows.push_back({name, 2, m2, s2, std::int64_t(n - half)});
        double se = std::sqrt(s1 * s1 + s2 * s2);
        double sig = std::abs(m1 - m2) / std::max(se, 1e-300);
        res.worst_sigma = std::max(res.worst_sigma, sig);
        if (sig > 3.0) res.stationary = false;
    };
    add("U_l2_sq", u2);
    add("U_h1_sq", h1);
    add("T_mean", tmean);
    add("q_l4_4", q44);
    return res;
}

}  // namespace mpe
