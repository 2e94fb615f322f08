#pragma once

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <string>

#include "mpe/field.hpp"

namespace mpe {

/// MPE1 binary field snapshot:
///   magic "MPE1"
///   u32 LE ntheta, nphi, nxi
///   u32 LE field count
///   per field: 16-byte ASCII name (space-padded), then f64 LE values in
///   theta-major, then phi, then xi order.
namespace snapshot {

static_assert(std::endian::native == std::endian::little,
              "snapshot writer assumes a little-endian host");

inline void write_u32(std::ostream& os, std::uint32_t x) {
    os.write(reinterpret_cast<const char*>(&x), 4);
}

inline std::uint32_t read_u32(std::istream& is) {
    std::uint32_t x = 0;
    is.read(reinterpret_cast<char*>(&x), 4);
    return x;
}

struct File {
    std::uint32_t ntheta = 0, nphi = 0, nxi = 0;
    std::map<std::string, std::vector<double>> fields;
};

inline void write(const std::string& path, const Grid& g,
                  const std::map<std::string, std::vector<double>>& fields) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("snapshot: cannot open " + path);
    os.write("MPE1", 4);
    write_u32(os, std::uint32_t(g.ntheta));
    write_u32(os, std::uint32_t(g.nphi));
    write_u32(os, std::uint32_t(g.nxi));
    write_u32(os, std::uint32_t(fields.size()));
    for (const auto& [name, vals] : fields) {
        char nm[16];
        std::memset(nm, ' ', 16);
        std::memcpy(nm, name.data(), std::min<std::size_t>(name.size(), 16));
        os.write(nm, 16);
        os.write(reinterpret_cast<const char*>(vals.data()),
                 std::streamsize(vals.size() * sizeof(double)));
    }
    if (!os) throw std::runtime_error("snapshot: write failed for " + path);
}

inline File read(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("snapshot: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (std::memcmp(magic, "MPE1", 4) != 0)
        throw std::runtime_error("snapshot: bad magic in " + path);
    File f;
    f.ntheta = read_u32(is);
    f.nphi = read_u32(is);
    f.nxi = read_u32(is);
    std::uint32_t nfields = read_u32(is);
    std::size_t n = std::size_t(f.ntheta) * f.nphi * f.nxi;
    for (std::uint32_t k = 0; k < nfields; ++k) {
        char nm[16];
        is.read(nm, 16);
        std::string name(nm, 16);
        while (!name.empty() && name.back() == ' ') name.pop_back();
        std::vector<double> vals(n);
        is.read(reinterpret_cast<char*>(vals.data()), std::streamsize(n * sizeof(double)));
        f.fields[name] = std::move(vals);
    }
    if (!is) throw std::runtime_error("snapshot: truncated file " + path);
    return f;
}

/// State snapshot: vtheta, vphi, T, q, Phis (Phis repeated along xi).
inline void write_state(const std::string& path, const State& U) {
    const Grid& g = *U.v.g;
    std::map<std::string, std::vector<double>> fields;
    fields["vtheta"] = U.v.vt;
    fields["vphi"] = U.v.vp;
    fields["T"] = U.T.v;
    fields["q"] = U.q.v;
    std::vector<double> ph(g.size());
    for (int i = 0; i < g.ntheta; ++i)
        for (int j = 0; j < g.nphi; ++j)
            for (int k = 0; k < g.nxi; ++k) ph[g.idx(i, j, k)] = U.phis.v[g.sidx(i, j)];
    fields["Phis"] = std::move(ph);
    write(path, g, fields);
}

inline State read_state(const std::string& path, const GridPtr& g, double alpha, double beta) {
    File f = read(path);
    if (int(f.ntheta) != g->ntheta || int(f.nphi) != g->nphi || int(f.nxi) != g->nxi)
        throw std::runtime_error("snapshot: grid shape mismatch in " + path);
    State U(g, alpha, beta);
    U.v.vt = f.fields.at("vtheta");
    U.v.vp = f.fields.at("vphi");
    U.T.v = f.fields.at("T");
    U.q.v = f.fields.at("q");
    const std::vector<double>& ph = f.fields.at("Phis");
    for (int i = 0; i < g->ntheta; ++i)
        for (int j = 0; j < g->nphi; ++j) U.phis.v[g->sidx(i, j)] = ph[g->idx(i, j, 0)];
    return U;
}

}  // namespace snapshot
}  // namespace mpe
