#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <fqc/readout.hpp>
#include <fqc/shift.hpp>

namespace fqc::app {

// Rejected config; the message carries "<source>:<line>: key '<path>' ...".
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

struct SpinSection {
    double delta0_hz = 0.0;
    double delta_hz = 20000.0;  // anisotropy
    double eta = 0.5;
    double alpha_deg = 30.0;
    double beta_deg = 60.0;
    double gamma_deg = 0.0;
    std::optional<double> larmor_mhz;  // enables the *_ppm spellings

    friend bool operator==(const SpinSection&, const SpinSection&) = default;
};

struct RotorSection {
    double spinning_hz = 4000.0;
    std::optional<double> angle_deg;  // unset: exact magic angle

    friend bool operator==(const RotorSection&, const RotorSection&) = default;
};

struct TruncationSection {
    std::optional<int> K;  // unset: auto
    double tolerance = 1e-8;
    int k_max = 400;

    friend bool operator==(const TruncationSection&, const TruncationSection&) = default;
};

struct PowderSection {
    int beta_gamma_points = 1154;
    int rotor_phases = 32;
    bool check_convergence = true;

    friend bool operator==(const PowderSection&, const PowderSection&) = default;
};

struct ReadoutSection {
    int points = 4096;
    double dwell_s = 0.0;  // 0: rotor period / 64
    double broadening_hz = 0.0;
    Detection detection = Detection::quadrature;
    int rotor_phases = 64;

    friend bool operator==(const ReadoutSection&, const ReadoutSection&) = default;
};

struct PrepareSection {
    int z_samples = 1024;
    int pass_orders = 4;  // profile weights cover orders -K..K with 2K + 1 pitches

    friend bool operator==(const PrepareSection&, const PrepareSection&) = default;
};

struct ExperimentConfig {
    SpinSection spin;
    RotorSection rotor;
    TruncationSection truncation;
    PowderSection powder;
    ReadoutSection readout;
    PrepareSection prepare;
    std::string output_directory = "fqc_out";
    std::uint64_t seed = 1;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

    SpinParams spin_params() const;
    RotorConfig rotor_config() const;
    FidGrid fid_grid() const;
};

ExperimentConfig parse_config(const std::string& text, const std::string& source = "config");
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

struct ResolvedTruncation {
    int K = 0;
    bool automatic = false;
    double sum_A = 0.0;
    bool converged = false;
};

// "auto" runs the adaptive search and throws ScientificFailure naming the deficit when it runs out.
ResolvedTruncation resolve_truncation(const ExperimentConfig& cfg);

}  // namespace fqc::app
