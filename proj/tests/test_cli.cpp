#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "mpe/config.hpp"
#include "mpe/snapshot.hpp"

using namespace mpe;

namespace {

std::string base_cfg(const std::string& extra = "") {
    return "[grid]\nntheta = 16\nnphi = 16\nnxi = 9\n"
           "[run]\ndt = 7e-5\nsteps = 100\n" +
           extra;
}

}  // namespace

TEST_CASE("config parser: happy path and echo") {
    std::string text =
        "# comment line\n"
        "[grid]\n"
        "ntheta = 16\n"
        "nphi = 20\n"
        "nxi = 9\n"
        "[physics]\n"
        "alpha = 1.5  # inline comment\n"
        "[noise]\n"
        "Lmax = 3\n"
        "gamma = 2.5\n"
        "[run]\n"
        "dt = 5e-5\n"
        "steps = 1234\n"
        "seed = 99\n"
        "scheme = OU-decomposed\n"
        "QT = costheta:0.25\n"
        "Qq = const:0.1\n"
        "[experiment]\n"
        "experiment = measure\n";
    ParsedConfig pc = parse_config_text(text);
    CHECK(pc.run.ntheta == 16);
    CHECK(pc.run.nphi == 20);
    CHECK(pc.run.alpha == 1.5);
    CHECK(pc.run.noise.Lmax == 3);
    CHECK(pc.gamma == 2.5);
    CHECK(pc.run.t_end == 1234);
    CHECK(pc.run.seed == 99);
    CHECK(pc.run.scheme == Scheme::ou_decomposed);
    CHECK(pc.run.QT.kind == Forcing::Kind::costheta);
    CHECK(pc.run.QT.c == 0.25);
    CHECK(pc.run.Qq.kind == Forcing::Kind::constant);
    CHECK(pc.experiment == "measure");
    CHECK(pc.lines.size() > 10);  // echo retained for the manifest
}

TEST_CASE("config parser rejects unknown and malformed input by name") {
    auto msg_of = [](const std::string& text) {
        try {
            parse_config_text(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(msg_of(base_cfg("[grid]\nbogus = 1\n")).find("bogus") != std::string::npos);
    CHECK(msg_of(base_cfg("[widgets]\n")).find("widgets") != std::string::npos);
    CHECK(msg_of("ntheta = 16\n").find("outside any section") != std::string::npos);
    CHECK(msg_of(base_cfg("[run]\ndt = abc\n")).find("duplicate") != std::string::npos);
    CHECK(msg_of(base_cfg("[physics]\nalpha = abc\n")).find("non-numeric") != std::string::npos);
    CHECK(msg_of(base_cfg("[run]\nscheme = euler\n")).find("scheme") != std::string::npos);
    CHECK(msg_of(base_cfg("[run]\nQT = sin:1\n")).find("QT") != std::string::npos);
    // missing required key names the key
    CHECK(msg_of("[grid]\nnphi = 16\nnxi = 9\n[run]\ndt = 1e-5\nsteps = 10\n")
              .find("ntheta") != std::string::npos);
}

TEST_CASE("config validation: positivity, stability bound, coupling condition") {
    SECTION("stability bound violation cites the bound") {
        ParsedConfig pc = parse_config_text(base_cfg());
        pc.run.dt = 1e-2;
        try {
            validate_config(pc, "run");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            std::string msg = e.what();
            CHECK(msg.find("dt") != std::string::npos);
            CHECK(msg.find("stability bound") != std::string::npos);
        }
    }
    SECTION("non-positive physics rejected") {
        ParsedConfig pc = parse_config_text(base_cfg("[physics]\nalpha = -1\n"));
        CHECK_THROWS_AS(validate_config(pc, "run"), ConfigError);
    }
    SECTION("coupling condition: error for attractor runs, warning with override") {
        std::string phys = "[physics]\nb = 0.8\n";
        ParsedConfig pc = parse_config_text(base_cfg(phys));
        validate_config(pc, "run");  // plain runs are unaffected
        CHECK(pc.warnings.empty());
        ParsedConfig pc2 = parse_config_text(base_cfg(phys));
        CHECK_THROWS_AS(validate_config(pc2, "pullback"), ConfigError);
        ParsedConfig pc3 =
            parse_config_text(base_cfg(phys + "[experiment]\nforce_constants = true\n"));
        validate_config(pc3, "pullback");
        REQUIRE(pc3.warnings.size() == 1);
        CHECK(pc3.warnings[0].find("coupling") != std::string::npos);
    }
    SECTION("gamma default depends on the experiment") {
        ParsedConfig pc = parse_config_text(base_cfg());
        Grid g(16, 16, 9);
        ModeSpectrum sp = build_spectrum(g, pc.run.noise, 1.0, 1.0);
        CHECK(resolve_gamma(pc, "run", sp) == 1.0);
        double gmax = 0;
        for (int j = 0; j < 3; ++j)
            for (const Mode& md : sp.comp[j]) gmax = std::max(gmax, md.gamma);
        CHECK(resolve_gamma(pc, "pullback", sp) == Catch::Approx(10 * gmax));
        ParsedConfig pc2 = parse_config_text(base_cfg("[noise]\ngamma = 3\n"));
        CHECK(resolve_gamma(pc2, "pullback", sp) == 3.0);
    }
}

TEST_CASE("MPE1 snapshot round trip") {
    namespace fs = std::filesystem;
    auto g = make_grid(8, 12, 5);
    State U(g, 1.0, 1.0);
    NoisePath keys{404, 1.0, 1, 0};
    int c = 0;
    for (auto& x : U.v.vt) x = keys.field_normal(0, c++);
    for (auto& x : U.v.vp) x = keys.field_normal(0, c++);
    for (auto& x : U.T.v) x = keys.field_normal(0, c++);
    for (auto& x : U.q.v) x = keys.field_normal(0, c++);
    for (auto& x : U.phis.v) x = keys.field_normal(0, c++);

    fs::path tmp = fs::temp_directory_path() / "mpe_snapshot_test.mpe1";
    snapshot::write_state(tmp.string(), U);

    SECTION("header layout is exactly as documented") {
        std::ifstream is(tmp, std::ios::binary);
        char magic[4];
        is.read(magic, 4);
        CHECK(std::string(magic, 4) == "MPE1");
        auto rd = [&]() {
            std::uint32_t x;
            is.read(reinterpret_cast<char*>(&x), 4);
            return x;
        };
        CHECK(rd() == 8u);
        CHECK(rd() == 12u);
        CHECK(rd() == 5u);
        CHECK(rd() == 5u);  // five fields
        char name[16];
        is.read(name, 16);
        CHECK(std::string(name, 16) == "Phis            ");  // map order, padded
    }
    SECTION("values survive bit-exactly") {
        State back = snapshot::read_state(tmp.string(), g, 1.0, 1.0);
        CHECK(back.v.vt == U.v.vt);
        CHECK(back.v.vp == U.v.vp);
        CHECK(back.T.v == U.T.v);
        CHECK(back.q.v == U.q.v);
        CHECK(back.phis.v == U.phis.v);
    }
    SECTION("shape mismatch and bad magic rejected") {
        auto g2 = make_grid(8, 12, 7);
        CHECK_THROWS(snapshot::read_state(tmp.string(), g2, 1.0, 1.0));
        fs::path junk = fs::temp_directory_path() / "mpe_junk.mpe1";
        std::ofstream(junk.string(), std::ios::binary) << "NOPE";
        CHECK_THROWS(snapshot::read(junk.string()));
        fs::remove(junk);
    }
    fs::remove(tmp);
}
