#pragma once

#include <charconv>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mpe/solver.hpp"

namespace mpe {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parsed `key = value` configuration with [grid] [physics] [noise] [run]
/// [experiment] sections. Unknown keys are rejected by name.
struct ParsedConfig {
    RunConfig run;
    std::optional<double> gamma;   // absent -> experiment-dependent default
    std::string experiment = "run";
    bool force_constants = false;  // downgrade the coupling check to a warning
    std::vector<std::string> warnings;
    std::vector<std::string> lines;  // raw config echo for the run manifest
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline double to_number(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw ConfigError("config: key '" + key + "' has non-numeric value '" + v + "'");
    }
}

inline Forcing to_forcing(const std::string& key, const std::string& v) {
    if (v == "zero") return {};
    auto colon = v.find(':');
    std::string head = v.substr(0, colon);
    if (colon != std::string::npos) {
        double c = to_number(key, v.substr(colon + 1));
        if (head == "const") return {Forcing::Kind::constant, c};
        if (head == "costheta") return {Forcing::Kind::costheta, c};
    }
    throw ConfigError("config: key '" + key +
                      "' must be zero, const:<c>, or costheta:<c>; got '" + v + "'");
}

}  // namespace detail

inline const std::map<std::string, std::set<std::string>>& config_schema() {
    static const std::map<std::string, std::set<std::string>> schema = {
        {"grid", {"ntheta", "nphi", "nxi"}},
        {"physics", {"a", "b", "r0", "rs", "R0", "alpha", "beta"}},
        {"noise", {"gamma", "Lmax", "Kmax", "rho", "sigma"}},
        {"run", {"dt", "steps", "seed", "scheme", "QT", "Qq", "record_every"}},
        {"experiment", {"experiment", "force_constants"}},
    };
    return schema;
}

inline ParsedConfig parse_config_text(const std::string& text) {
    ParsedConfig pc;
    std::map<std::string, std::string> kv;  // "section.key" -> value
    std::string section;
    std::istringstream is(text);
    std::string raw;
    const auto& schema = config_schema();

    while (std::getline(is, raw)) {
        pc.lines.push_back(raw);
        std::string line = detail::trim(raw);
        auto hash = line.find('#');
        if (hash != std::string::npos) line = detail::trim(line.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("config: malformed section line '" + line + "'");
            section = line.substr(1, line.size() - 2);
            if (!schema.count(section))
                throw ConfigError("config: unknown section '" + section + "'");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value, got '" + line + "'");
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        if (section.empty()) throw ConfigError("config: key '" + key + "' outside any section");
        if (!schema.at(section).count(key))
            throw ConfigError("config: unknown key '" + key + "' in section [" + section + "]");
        if (kv.count(section + "." + key))
            throw ConfigError("config: duplicate key '" + key + "'");
        kv[section + "." + key] = val;
    }

    auto need = [&](const std::string& sk) -> std::string {
        auto it = kv.find(sk);
        if (it == kv.end())
            throw ConfigError("config: missing required key '" + sk.substr(sk.find('.') + 1) +
                              "' (section [" + sk.substr(0, sk.find('.')) + "])");
        return it->second;
    };
    auto opt_num = [&](const std::string& sk, double dflt) {
        auto it = kv.find(sk);
        return it == kv.end() ? dflt : detail::to_number(sk, it->second);
    };

    RunConfig& rc = pc.run;
    rc.ntheta = int(detail::to_number("ntheta", need("grid.ntheta")));
    rc.nphi = int(detail::to_number("nphi", need("grid.nphi")));
    rc.nxi = int(detail::to_number("nxi", need("grid.nxi")));
    rc.dt = detail::to_number("dt", need("run.dt"));
    rc.t_start = 0;
    rc.t_end = std::int64_t(detail::to_number("steps", need("run.steps")));

    rc.a = opt_num("physics.a", rc.a);
    rc.b = opt_num("physics.b", rc.b);
    rc.r0 = opt_num("physics.r0", rc.r0);
    rc.rs = opt_num("physics.rs", rc.rs);
    rc.R0 = opt_num("physics.R0", rc.R0);
    rc.alpha = opt_num("physics.alpha", rc.alpha);
    rc.beta = opt_num("physics.beta", rc.beta);

    if (kv.count("noise.gamma")) pc.gamma = detail::to_number("gamma", kv["noise.gamma"]);
    rc.noise.Lmax = int(opt_num("noise.Lmax", rc.noise.Lmax));
    rc.noise.Kmax = int(opt_num("noise.Kmax", rc.noise.Kmax));
    rc.noise.rho = opt_num("noise.rho", rc.noise.rho);
    rc.noise.sigma = opt_num("noise.sigma", rc.noise.sigma);

    rc.seed = std::uint64_t(opt_num("run.seed", 1));
    rc.record_every = int(opt_num("run.record_every", rc.record_every));
    if (kv.count("run.scheme")) {
        std::string s = kv["run.scheme"];
        if (s == "EM-direct")
            rc.scheme = Scheme::em_direct;
        else if (s == "OU-decomposed")
            rc.scheme = Scheme::ou_decomposed;
        else
            throw ConfigError("config: key 'scheme' must be EM-direct or OU-decomposed, got '" +
                              s + "'");
    }
    if (kv.count("run.QT")) rc.QT = detail::to_forcing("QT", kv["run.QT"]);
    if (kv.count("run.Qq")) rc.Qq = detail::to_forcing("Qq", kv["run.Qq"]);

    if (kv.count("experiment.experiment")) {
        pc.experiment = kv["experiment.experiment"];
        static const std::set<std::string> known = {"run", "pullback", "absorb", "measure",
                                                    "checks"};
        if (!known.count(pc.experiment))
            throw ConfigError("config: unknown experiment '" + pc.experiment + "'");
    }
    if (kv.count("experiment.force_constants")) {
        std::string v = kv["experiment.force_constants"];
        if (v == "true" || v == "1")
            pc.force_constants = true;
        else if (v == "false" || v == "0")
            pc.force_constants = false;
        else
            throw ConfigError("config: key 'force_constants' must be true or false");
    }
    return pc;
}

inline ParsedConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str());
}

/// Post-parse validation: positivity, grid limits, the dt stability bound,
/// and the attractor-regime coupling condition for pullback-type experiments.
inline void validate_config(ParsedConfig& pc, const std::string& experiment) {
    const RunConfig& rc = pc.run;
    auto positive = [&](double v, const std::string& key) {
        if (!(v > 0)) throw ConfigError("config: key '" + key + "' must be positive");
    };
    if (rc.ntheta < 4) throw ConfigError("config: key 'ntheta' must be >= 4");
    if (rc.nphi < 4) throw ConfigError("config: key 'nphi' must be >= 4");
    if (rc.nxi < 3) throw ConfigError("config: key 'nxi' must be >= 3");
    positive(rc.dt, "dt");
    if (rc.t_end <= 0) throw ConfigError("config: key 'steps' must be positive");
    positive(rc.a, "a");
    positive(rc.b, "b");
    positive(rc.r0, "r0");
    positive(rc.rs, "rs");
    positive(rc.R0, "R0");
    positive(rc.alpha, "alpha");
    positive(rc.beta, "beta");
    if (rc.rs < rc.r0) throw ConfigError("config: key 'rs' must be >= r0");
    positive(rc.noise.rho, "rho");
    positive(rc.noise.sigma, "sigma");
    if (pc.gamma && !(*pc.gamma > 0)) throw ConfigError("config: key 'gamma' must be positive");

    double bound = rc.dt_bound();
    if (rc.dt > bound) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "config: key 'dt' = %g violates the stability bound "
                      "0.2*min(dtheta^2,(dphi*min sin)^2)/4 = %g",
                      rc.dt, bound);
        throw ConfigError(buf);
    }

    bool attractor_mode =
        experiment == "pullback" || experiment == "absorb" || experiment == "measure";
    if (attractor_mode) {
        PhysicalConstants p = rc.constants();
        if (!p.attractor_condition(rc.alpha, rc.beta)) {
            char buf[200];
            std::snprintf(buf, sizeof buf,
                          "coupling b*rs/r0 = %g exceeds min(1/2, alpha, beta) = %g; the "
                          "absorption estimates are not in force",
                          p.coupling_max(), std::min({0.5, rc.alpha, rc.beta}));
            if (pc.force_constants)
                pc.warnings.push_back(buf);
            else
                throw ConfigError(std::string("config: ") + buf +
                                  " (set force_constants = true to run anyway)");
        }
    }
}

/// gamma default: large in attractor-type experiments, 1 otherwise.
inline double resolve_gamma(const ParsedConfig& pc, const std::string& experiment,
                            const ModeSpectrum& sp) {
    if (pc.gamma) return *pc.gamma;
    bool attractor_mode =
        experiment == "pullback" || experiment == "absorb" || experiment == "measure";
    if (!attractor_mode) return 1.0;
    double gmax = 0;
    for (int j = 0; j < 3; ++j)
        for (const Mode& md : sp.comp[j]) gmax = std::max(gmax, md.gamma);
    return 10.0 * gmax;
}

}  // namespace mpe
