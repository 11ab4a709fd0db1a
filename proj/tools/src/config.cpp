#include "config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace fqc::app {

namespace {

double deg2rad(double d) { return d * kPi / 180.0; }

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Mark& mark, const std::string& key, const std::string& what) const
    {
        std::ostringstream os;
        os << source_ << ":" << mark.line + 1 << ": key '" << key << "' " << what;
        throw ConfigError(os.str());
    }

    using Handler = std::function<void(const YAML::Node&, const std::string&)>;

    // Walks a mapping, rejecting anything without a handler.
    void section(const YAML::Node& node, const std::string& path, const std::map<std::string, Handler>& handlers)
    {
        if (!node.IsMap())
            fail(node.Mark(), path.empty() ? "<root>" : path, "must be a mapping");
        for (auto it = node.begin(); it != node.end(); ++it) {
            const auto name = it->first.as<std::string>();
            const auto full = path.empty() ? name : path + "." + name;
            auto h = handlers.find(name);
            if (h == handlers.end())
                fail(it->first.Mark(), full, "is not a recognized setting");
            if (!seen_.emplace(full).second)
                fail(it->first.Mark(), full, "appears twice");
            h->second(it->second, full);
        }
    }

    double number(const YAML::Node& n, const std::string& key)
    {
        if (!n.IsScalar())
            fail(n.Mark(), key, "expects a number");
        try {
            return n.as<double>();
        } catch (const YAML::Exception&) {
            fail(n.Mark(), key, "expects a number, got '" + n.Scalar() + "'");
        }
    }

    std::int64_t integer(const YAML::Node& n, const std::string& key)
    {
        if (!n.IsScalar())
            fail(n.Mark(), key, "expects an integer");
        try {
            return n.as<std::int64_t>();
        } catch (const YAML::Exception&) {
            fail(n.Mark(), key, "expects an integer, got '" + n.Scalar() + "'");
        }
    }

    bool boolean(const YAML::Node& n, const std::string& key)
    {
        if (!n.IsScalar())
            fail(n.Mark(), key, "expects true or false");
        try {
            return n.as<bool>();
        } catch (const YAML::Exception&) {
            fail(n.Mark(), key, "expects true or false, got '" + n.Scalar() + "'");
        }
    }

    std::string text(const YAML::Node& n, const std::string& key)
    {
        if (!n.IsScalar())
            fail(n.Mark(), key, "expects a string");
        return n.Scalar();
    }

    void require(bool ok, const YAML::Node& n, const std::string& key, const std::string& what)
    {
        if (!ok)
            fail(n.Mark(), key, what);
    }

    const std::string& source() const { return source_; }

private:
    std::string source_;
    std::set<std::string> seen_;
};

std::string fmt(double v)
{
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, r.ptr);
    // keep a float-looking scalar so the type survives a round trip through other tools
    if (s.find_first_of(".en") == std::string::npos)
        s += ".0";
    return s;
}

}  // namespace

SpinParams ExperimentConfig::spin_params() const
{
    SpinParams p;
    p.delta0 = kTwoPi * spin.delta0_hz;
    p.delta = kTwoPi * spin.delta_hz;
    p.eta = spin.eta;
    p.alpha = deg2rad(spin.alpha_deg);
    p.beta = deg2rad(spin.beta_deg);
    p.gamma = deg2rad(spin.gamma_deg);
    p.validate();
    return p;
}

RotorConfig ExperimentConfig::rotor_config() const
{
    RotorConfig r;
    r.omega_r = kTwoPi * rotor.spinning_hz;
    r.theta = rotor.angle_deg ? deg2rad(*rotor.angle_deg) : magic_angle();
    return r;
}

FidGrid ExperimentConfig::fid_grid() const { return FidGrid{readout.points, readout.dwell_s}; }

ExperimentConfig parse_config(const std::string& text, const std::string& source)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        std::ostringstream os;
        os << source << ":" << e.mark.line + 1 << ": malformed YAML: " << e.msg;
        throw ConfigError(os.str());
    }
    ExperimentConfig cfg;
    if (root.IsNull())
        return cfg;

    Reader r(source);
    std::optional<double> delta0_ppm, delta_ppm;
    YAML::Node ppm_node;
    bool delta0_hz_set = false, delta_hz_set = false;

    auto positive = [&](const YAML::Node& n, const std::string& k, double v) {
        r.require(v > 0.0, n, k, "must be positive");
        return v;
    };
    auto count = [&](const YAML::Node& n, const std::string& k, std::int64_t lo) {
        auto v = r.integer(n, k);
        r.require(v >= lo && v <= 1 << 24, n, k, "must be an integer >= " + std::to_string(lo));
        return static_cast<int>(v);
    };

    r.section(root, "",
        {{"spin",
          [&](const YAML::Node& s, const std::string& p) {
              r.section(s, p,
                  {{"delta0_hz", [&](auto& n, auto& k) { cfg.spin.delta0_hz = r.number(n, k); delta0_hz_set = true; }},
                   {"delta_hz",
                    [&](auto& n, auto& k) {
                        cfg.spin.delta_hz = r.number(n, k);
                        r.require(cfg.spin.delta_hz >= 0.0, n, k, "must be >= 0 (principal values are ordered)");
                        delta_hz_set = true;
                    }},
                   {"delta0_ppm", [&](auto& n, auto& k) { delta0_ppm = r.number(n, k); ppm_node = n; }},
                   {"delta_ppm",
                    [&](auto& n, auto& k) {
                        delta_ppm = r.number(n, k);
                        r.require(*delta_ppm >= 0.0, n, k, "must be >= 0 (principal values are ordered)");
                        ppm_node = n;
                    }},
                   {"larmor_mhz", [&](auto& n, auto& k) { cfg.spin.larmor_mhz = positive(n, k, r.number(n, k)); }},
                   {"eta",
                    [&](auto& n, auto& k) {
                        cfg.spin.eta = r.number(n, k);
                        r.require(cfg.spin.eta >= 0.0 && cfg.spin.eta <= 1.0, n, k, "must lie in [0, 1]");
                    }},
                   {"alpha_deg", [&](auto& n, auto& k) { cfg.spin.alpha_deg = r.number(n, k); }},
                   {"beta_deg", [&](auto& n, auto& k) { cfg.spin.beta_deg = r.number(n, k); }},
                   {"gamma_deg", [&](auto& n, auto& k) { cfg.spin.gamma_deg = r.number(n, k); }}});
          }},
         {"rotor",
          [&](const YAML::Node& s, const std::string& p) {
              r.section(s, p,
                  {{"spinning_hz", [&](auto& n, auto& k) { cfg.rotor.spinning_hz = positive(n, k, r.number(n, k)); }},
                   {"angle_deg", [&](auto& n, auto& k) { cfg.rotor.angle_deg = r.number(n, k); }}});
          }},
         {"truncation",
          [&](const YAML::Node& s, const std::string& p) {
              r.section(s, p,
                  {{"K",
                    [&](auto& n, auto& k) {
                        if (n.IsScalar() && n.Scalar() == "auto")
                            cfg.truncation.K.reset();
                        else
                            cfg.truncation.K = count(n, k, 0);
                    }},
                   {"tolerance",
                    [&](auto& n, auto& k) {
                        cfg.truncation.tolerance = r.number(n, k);
                        r.require(cfg.truncation.tolerance > 0.0 && cfg.truncation.tolerance < 1.0, n, k,
                                  "must lie in (0, 1)");
                    }},
                   {"k_max", [&](auto& n, auto& k) { cfg.truncation.k_max = count(n, k, 1); }}});
          }},
         {"powder",
          [&](const YAML::Node& s, const std::string& p) {
              r.section(s, p,
                  {{"beta_gamma_points", [&](auto& n, auto& k) { cfg.powder.beta_gamma_points = count(n, k, 1); }},
                   {"rotor_phases", [&](auto& n, auto& k) { cfg.powder.rotor_phases = count(n, k, 1); }},
                   {"check_convergence", [&](auto& n, auto& k) { cfg.powder.check_convergence = r.boolean(n, k); }}});
          }},
         {"readout",
          [&](const YAML::Node& s, const std::string& p) {
              r.section(s, p,
                  {{"points",
                    [&](auto& n, auto& k) {
                        cfg.readout.points = count(n, k, 2);
                        const int v = cfg.readout.points;
                        r.require((v & (v - 1)) == 0, n, k, "must be a power of two");
                    }},
                   {"dwell_s",
                    [&](auto& n, auto& k) {
                        cfg.readout.dwell_s = r.number(n, k);
                        r.require(cfg.readout.dwell_s >= 0.0, n, k, "must be >= 0 (0 selects period / 64)");
                    }},
                   {"broadening_hz",
                    [&](auto& n, auto& k) {
                        cfg.readout.broadening_hz = r.number(n, k);
                        r.require(cfg.readout.broadening_hz >= 0.0, n, k, "must be >= 0");
                    }},
                   {"detection",
                    [&](auto& n, auto& k) {
                        try {
                            cfg.readout.detection = parse_detection(r.text(n, k));
                        } catch (const InvalidArgument&) {
                            r.fail(n.Mark(), k, "must be one of x, y, quadrature");
                        }
                    }},
                   {"rotor_phases", [&](auto& n, auto& k) { cfg.readout.rotor_phases = count(n, k, 1); }}});
          }},
         {"prepare",
          [&](const YAML::Node& s, const std::string& p) {
              r.section(s, p,
                  {{"z_samples", [&](auto& n, auto& k) { cfg.prepare.z_samples = count(n, k, 1); }},
                   {"pass_orders", [&](auto& n, auto& k) { cfg.prepare.pass_orders = count(n, k, 0); }}});
          }},
         {"output",
          [&](const YAML::Node& s, const std::string& p) {
              r.section(s, p, {{"directory", [&](auto& n, auto& k) {
                                    cfg.output_directory = r.text(n, k);
                                    r.require(!cfg.output_directory.empty(), n, k, "must not be empty");
                                }}});
          }},
         {"seed", [&](const YAML::Node& n, const std::string& k) {
              auto v = r.integer(n, k);
              r.require(v >= 0, n, k, "must be >= 0");
              cfg.seed = static_cast<std::uint64_t>(v);
          }}});

    if (delta0_ppm || delta_ppm) {
        if (!cfg.spin.larmor_mhz)
            r.fail(ppm_node.Mark(), "spin.larmor_mhz", "is required when shifts are given in ppm");
        if ((delta0_ppm && delta0_hz_set) || (delta_ppm && delta_hz_set))
            r.fail(ppm_node.Mark(), delta_ppm ? "spin.delta_ppm" : "spin.delta0_ppm",
                   "conflicts with the same setting in Hz");
        // ppm x MHz = Hz
        if (delta0_ppm)
            cfg.spin.delta0_hz = *delta0_ppm * *cfg.spin.larmor_mhz;
        if (delta_ppm)
            cfg.spin.delta_hz = *delta_ppm * *cfg.spin.larmor_mhz;
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(path + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string serialize_config(const ExperimentConfig& cfg)
{
    std::ostringstream os;
    os << "spin:\n"
       << "  delta0_hz: " << fmt(cfg.spin.delta0_hz) << "\n"
       << "  delta_hz: " << fmt(cfg.spin.delta_hz) << "\n"
       << "  eta: " << fmt(cfg.spin.eta) << "\n"
       << "  alpha_deg: " << fmt(cfg.spin.alpha_deg) << "\n"
       << "  beta_deg: " << fmt(cfg.spin.beta_deg) << "\n"
       << "  gamma_deg: " << fmt(cfg.spin.gamma_deg) << "\n";
    if (cfg.spin.larmor_mhz)
        os << "  larmor_mhz: " << fmt(*cfg.spin.larmor_mhz) << "\n";
    os << "rotor:\n"
       << "  spinning_hz: " << fmt(cfg.rotor.spinning_hz) << "\n";
    if (cfg.rotor.angle_deg)
        os << "  angle_deg: " << fmt(*cfg.rotor.angle_deg) << "\n";
    os << "truncation:\n"
       << "  K: " << (cfg.truncation.K ? std::to_string(*cfg.truncation.K) : "auto") << "\n"
       << "  tolerance: " << fmt(cfg.truncation.tolerance) << "\n"
       << "  k_max: " << cfg.truncation.k_max << "\n"
       << "powder:\n"
       << "  beta_gamma_points: " << cfg.powder.beta_gamma_points << "\n"
       << "  rotor_phases: " << cfg.powder.rotor_phases << "\n"
       << "  check_convergence: " << (cfg.powder.check_convergence ? "true" : "false") << "\n"
       << "readout:\n"
       << "  points: " << cfg.readout.points << "\n"
       << "  dwell_s: " << fmt(cfg.readout.dwell_s) << "\n"
       << "  broadening_hz: " << fmt(cfg.readout.broadening_hz) << "\n"
       << "  detection: " << to_string(cfg.readout.detection) << "\n"
       << "  rotor_phases: " << cfg.readout.rotor_phases << "\n"
       << "prepare:\n"
       << "  z_samples: " << cfg.prepare.z_samples << "\n"
       << "  pass_orders: " << cfg.prepare.pass_orders << "\n"
       << "output:\n"
       << "  directory: " << YAML::Dump(YAML::Node(cfg.output_directory)) << "\n"
       << "seed: " << cfg.seed << "\n";
    return os.str();
}

ResolvedTruncation resolve_truncation(const ExperimentConfig& cfg)
{
    const auto params = cfg.spin_params();
    const auto rotor = cfg.rotor_config();
    ResolvedTruncation out;
    out.automatic = !cfg.truncation.K.has_value();
    out.K = out.automatic ? adaptive_truncation(params, rotor, cfg.truncation.tolerance, cfg.truncation.k_max)
                          : *cfg.truncation.K;
    auto sb = sideband_amplitudes(params, rotor, out.K);
    out.sum_A = sb.total;
    out.converged = std::abs(1.0 - sb.total) <= cfg.truncation.tolerance;
    return out;
}

}  // namespace fqc::app
