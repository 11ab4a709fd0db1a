#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "commands.hpp"
#include "config.hpp"
#include "output.hpp"

using namespace fqc;
using namespace fqc::app;

namespace {

std::string error_of(const std::string& text)
{
    try {
        parse_config(text, "cfg.yaml");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::filesystem::path scratch(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("fqc_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Config, EmptyTextGivesDefaults)
{
    EXPECT_EQ(parse_config(""), ExperimentConfig{});
    auto p = ExperimentConfig{}.spin_params();
    EXPECT_NEAR(p.delta, kTwoPi * 20000.0, 1e-9);
    EXPECT_NEAR(ExperimentConfig{}.rotor_config().theta, magic_angle(), 0.0);
}

TEST(Config, RoundTripsDefaultsAndEdits)
{
    ExperimentConfig c;
    EXPECT_EQ(parse_config(serialize_config(c)), c);
    c.spin.delta0_hz = 123.456789012345;
    c.spin.eta = 0.1;
    c.spin.larmor_mhz = 50.3;
    c.rotor.angle_deg = 54.7356;
    c.truncation.K = 7;
    c.powder.check_convergence = false;
    c.readout.detection = Detection::y;
    c.output_directory = "out dir: with colon";
    c.seed = 18446744073709551615ull >> 1;
    auto text = serialize_config(c);
    EXPECT_EQ(parse_config(text), c);
    EXPECT_EQ(serialize_config(parse_config(text)), text);
}

TEST(Config, RoundTripsRandomValues)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        ExperimentConfig c;
        c.spin.delta0_hz = (u(rng) - 0.5) * 1e4;
        c.spin.delta_hz = u(rng) * 3e4;
        c.spin.eta = u(rng);
        c.spin.alpha_deg = 360.0 * u(rng);
        c.rotor.spinning_hz = 1000.0 + 1e4 * u(rng);
        c.truncation.tolerance = 1e-12 + u(rng) * 1e-6;
        c.readout.broadening_hz = 100.0 * u(rng);
        EXPECT_EQ(parse_config(serialize_config(c)), c);
    }
}

TEST(Config, UnknownKeysNameKeyAndLine)
{
    auto msg = error_of("spin:\n  eta: 0.3\n  colour: red\n");
    EXPECT_NE(msg.find("cfg.yaml:3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("spin.colour"), std::string::npos) << msg;
    msg = error_of("seed: 3\nrotr:\n  spinning_hz: 1\n");
    EXPECT_NE(msg.find("cfg.yaml:2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'rotr'"), std::string::npos) << msg;
}

TEST(Config, BadValuesNameKeyAndLine)
{
    struct Case {
        std::string text, key, line;
    };
    std::vector<Case> cases{
        {"rotor:\n  spinning_hz: fast\n", "rotor.spinning_hz", ":2:"},
        {"rotor:\n  spinning_hz: -4000\n", "rotor.spinning_hz", ":2:"},
        {"spin:\n  eta: 1.5\n", "spin.eta", ":2:"},
        {"spin:\n  delta_hz: -1\n", "spin.delta_hz", ":2:"},
        {"truncation:\n  K: many\n", "truncation.K", ":2:"},
        {"truncation:\n  K: -1\n", "truncation.K", ":2:"},
        {"readout:\n  points: 1000\n", "readout.points", ":2:"},
        {"readout:\n  detection: z\n", "readout.detection", ":2:"},
        {"powder:\n  check_convergence: maybe\n", "powder.check_convergence", ":2:"},
        {"spin: 4\n", "spin", ":1:"},
        {"seed: -2\n", "seed", ":1:"},
        {"spin:\n  eta: 0.1\nspin:\n  eta: 0.2\n", "spin", ":3:"},
        {"spin:\n  delta_ppm: 100\n", "spin.larmor_mhz", ":2:"},
        {"spin:\n  larmor_mhz: 50\n  delta_hz: 1\n  delta_ppm: 100\n", "spin.delta_ppm", ":4:"},
    };
    for (const auto& c : cases) {
        auto msg = error_of(c.text);
        EXPECT_NE(msg.find("'" + c.key + "'"), std::string::npos) << c.text << " -> " << msg;
        EXPECT_NE(msg.find(c.line), std::string::npos) << c.text << " -> " << msg;
    }
}

TEST(Config, MalformedYamlReportsLine)
{
    auto msg = error_of("spin:\n  eta: [1, 2\n");
    EXPECT_NE(msg.find("cfg.yaml:"), std::string::npos) << msg;
    EXPECT_NE(msg.find("malformed"), std::string::npos) << msg;
}

TEST(Config, PpmConvertsAtTheBoundary)
{
    auto c = parse_config("spin:\n  larmor_mhz: 50.3\n  delta_ppm: 100\n  delta0_ppm: -2\n");
    EXPECT_DOUBLE_EQ(c.spin.delta_hz, 5030.0);
    EXPECT_DOUBLE_EQ(c.spin.delta0_hz, -100.6);
    EXPECT_EQ(parse_config(serialize_config(c)), c);
}

TEST(Config, DegreesAndHertzConvertOnce)
{
    auto c = parse_config("spin:\n  alpha_deg: 90\n  delta0_hz: 1\nrotor:\n  spinning_hz: 5000\n  angle_deg: 90\n");
    EXPECT_NEAR(c.spin_params().alpha, kPi / 2, 1e-15);
    EXPECT_NEAR(c.spin_params().delta0, kTwoPi, 1e-15);
    EXPECT_NEAR(c.rotor_config().omega_r, kTwoPi * 5000.0, 1e-9);
    EXPECT_NEAR(c.rotor_config().theta, kPi / 2, 1e-15);
}

TEST(Config, AutoTruncationMeetsTolerance)
{
    auto t = resolve_truncation(parse_config("truncation:\n  K: auto\n"));
    EXPECT_TRUE(t.automatic);
    EXPECT_TRUE(t.converged);
    EXPECT_NEAR(t.sum_A, 1.0, 1e-8);
    auto fixed = resolve_truncation(parse_config("truncation:\n  K: 1\n"));
    EXPECT_FALSE(fixed.automatic);
    EXPECT_FALSE(fixed.converged);
}

TEST(Config, AutoExhaustionNamesDeficit)
{
    try {
        resolve_truncation(parse_config("truncation:\n  k_max: 2\n"));
        FAIL() << "expected ScientificFailure";
    } catch (const ScientificFailure& e) {
        EXPECT_NE(std::string(e.what()).find("deficit"), std::string::npos);
    }
}

TEST(Output, Sha256KnownVector)
{
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Output, ManifestListsArtifactsSorted)
{
    auto dir = scratch("manifest");
    OutputDir out(dir);
    out.write("b.csv", "x\n", "fid");
    out.write("a.csv", "abc", "spectrum");
    out.finish("spectrum");
    auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
    EXPECT_EQ(m["schema_version"], 1);
    ASSERT_EQ(m["artifacts"].size(), 2u);
    EXPECT_EQ(m["artifacts"][0]["path"], "a.csv");
    EXPECT_EQ(m["artifacts"][0]["sha256"], sha256_hex("abc"));
    EXPECT_EQ(m["artifacts"][1]["bytes"], 2);
}

TEST(Commands, CrystalSticksSitOnRotorMultiples)
{
    auto dir = scratch("sticks");
    OutputDir out(dir);
    ExperimentConfig cfg;
    cfg.spin.delta0_hz = 500.0;
    EXPECT_EQ(cmd_spectrum(cfg, 1, 0, "crystal", out), 0);
    auto s = nlohmann::json::parse(slurp(dir / "summary.json"));
    EXPECT_EQ(s["schema_version"], 1);
    std::set<int> orders;
    for (const auto& st : s["sticks"]) {
        double off = st["offset_hz"].get<double>();
        EXPECT_NEAR(off / 4000.0, std::round(off / 4000.0), 1e-9);
        if (std::abs(st["re"].get<double>()) > 1e-3)
            orders.insert(static_cast<int>(std::lround(off / 4000.0)));
    }
    for (int n : {-1, 0, 1})
        EXPECT_TRUE(orders.count(n)) << n;
}

TEST(Commands, IsotropicSpectrumHasOneLine)
{
    auto dir = scratch("iso");
    OutputDir out(dir);
    ExperimentConfig cfg;
    cfg.spin.delta_hz = 0.0;
    cfg.spin.delta0_hz = 1000.0;
    cmd_spectrum(cfg, 1, 0, "crystal", out);
    std::ifstream in(dir / "spectrum.csv");
    auto spec = read_spectrum_csv(in);
    int lines = 0;
    for (const auto& a : spec.amplitude)
        lines += std::abs(a) > 1e-9;
    EXPECT_EQ(lines, 1);
}

TEST(Commands, RejectsBadArguments)
{
    auto dir = scratch("bad");
    OutputDir out(dir);
    ExperimentConfig cfg;
    cfg.truncation.K = 2;
    EXPECT_THROW(cmd_spectrum(cfg, 1, 3, "crystal", out), InvalidArgument);
    EXPECT_THROW(cmd_spectrum(cfg, 2, 0, "crystal", out), InvalidArgument);
    EXPECT_THROW(cmd_spectrum(cfg, 1, 0, "liquid", out), InvalidArgument);
    EXPECT_THROW(cmd_prepare(cfg, 0, 3, "gradient", out), InvalidArgument);
    EXPECT_THROW(cmd_grover(cfg, "4", false, out), InvalidArgument);
    EXPECT_THROW(cmd_grover(cfg, "1x", false, out), InvalidArgument);
}

TEST(Commands, PassScheduleMeetsResidual)
{
    auto dir = scratch("pass");
    OutputDir out(dir);
    ExperimentConfig cfg;
    cfg.prepare.pass_orders = 2;
    cfg.readout.rotor_phases = 16;
    EXPECT_EQ(cmd_prepare(cfg, 1, 1, "pass", out), 0);
    auto s = nlohmann::json::parse(slurp(dir / "summary.json"));
    EXPECT_LE(s["pass"]["max_timing_residual"].get<double>(), 1e-10);
    EXPECT_EQ(s["pass"]["schedule"].size(), 5u);
}

TEST(Commands, GroverAllIdentifiesEveryItem)
{
    auto dir = scratch("grover");
    OutputDir out(dir);
    EXPECT_EQ(cmd_grover(ExperimentConfig{}, "all", true, out), 0);
    auto s = nlohmann::json::parse(slurp(dir / "summary.json"));
    EXPECT_EQ(s["correct"], 4);
    for (const auto& r : s["runs"]) {
        EXPECT_EQ(r["identified"], r["marked"]);
        EXPECT_GE(r["fidelity"].get<double>(), 0.999);
    }
}
