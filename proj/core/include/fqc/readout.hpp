#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fqc/floquet.hpp"
#include "fqc/shift.hpp"

namespace fqc {

enum class Detection { x, y, quadrature };

Detection parse_detection(const std::string& s);
std::string to_string(Detection d);

struct FidGrid {
    int n = 4096;
    double dwell = 0.0;  // s; 0 means rotor period / 64

    static FidGrid for_rotor(const RotorConfig& rotor, int n = 4096);
    double resolved_dwell(const RotorConfig& rotor) const;
};

struct FidTrace {
    double dwell = 0.0;
    std::vector<cplx> samples;
    Detection detection = Detection::quadrature;

    double time(std::size_t i) const { return dwell * double(i); }
};

struct Spectrum {
    std::vector<double> frequency_hz;  // ascending
    std::vector<cplx> amplitude;
    double broadening_hz = 0.0;

    // amplitude of the bin nearest to f
    cplx at(double f_hz) const;
    std::size_t nearest_bin(double f_hz) const;
};

// One term of a closed-form signal: amplitude * exp(-i omega t), omega in rad/s.
struct Stick {
    double omega = 0.0;
    cplx amplitude;
};

// Quadrature sticks: A_{k-m} eps_p at omega = eps_p (delta0 + (k - m) w_r), k in [-K, K].
std::vector<Stick> analytic_sticks(int p, int m, const SpinParams& params, const RotorConfig& rotor, int K);

// Same index structure with the rotor-phase dependent single-crystal amplitude conj(F_j) sum_l F_l in place of A_j.
std::vector<Stick> crystal_sticks(int p, int m, const SpinParams& params, const RotorConfig& rotor, int K);

FidTrace synthesize_fid(const std::vector<Stick>& sticks, Detection detection, const FidGrid& grid,
                        const RotorConfig& rotor);

FidTrace analytic_fid(int p, int m, const SpinParams& params, const RotorConfig& rotor, int K, Detection detection,
                      const FidGrid& grid);

struct SimulationOptions {
    int K = 0;              // 0 picks propagator_truncation()
    int rotor_phases = 64;  // carousel average over the Euler angle alpha
    int threads = 0;
};

// 90_x read pulse, Floquet free evolution, I_+ detection scaled by 2i.
FidTrace simulate_fid(const FloquetDensity& sigma0, const SpinParams& params, const RotorConfig& rotor,
                      const FidGrid& grid, const SimulationOptions& opts = {});

// Forward DFT scaled by 1/N, bins ordered by ascending frequency.
Spectrum spectrum_of(const FidTrace& fid, double broadening_hz = 0.0);

// Circular convolution with a unit-sum Lorentzian of the given full width at half maximum.
Spectrum lorentzian_broaden(const Spectrum& s, double fwhm_hz);

struct Orientation {
    double alpha, beta, gamma, weight;
};

struct PowderGrid {
    std::vector<Orientation> points;
    std::string scheme;

    // golden-spiral (beta, gamma) points times equally spaced alpha, equal weights
    static PowderGrid uniform(int n_beta_gamma, int n_alpha);
    static PowderGrid user(std::vector<Orientation> points);
    int beta_gamma_points = 0;
};

struct PowderResult {
    FidTrace fid;  // unbroadened
    Spectrum spectrum;
    std::optional<std::string> warning;
    double doubling_change = -1.0;  // relative change against the doubled grid, when checked
};

struct PowderOptions {
    double broadening_hz = 0.0;
    bool check_convergence = false;
    int threads = 0;
    Detection detection = Detection::quadrature;
};

PowderResult powder_spectrum(int p, int m, const SpinParams& params, const RotorConfig& rotor, int K,
                             const PowderGrid& grid, const FidGrid& fid_grid, const PowderOptions& opts = {});

// Largest adaptive truncation over a 5 x 10 degree (beta, gamma) scan.
int powder_truncation(const SpinParams& params, const RotorConfig& rotor, double tol = 1e-8);

// Zero-order phase from the largest bin, then max |Im| / max |Re|.
double imaginary_residue(const Spectrum& s);

// max |a - b| / max |b|
double relative_difference(const Spectrum& a, const Spectrum& b);

struct LibraryEntry {
    FloquetIndex label;
    Spectrum spectrum;
};

// Spectra of every (p, m) with |m| <= K; powder-averaged when a grid is given.
std::vector<LibraryEntry> reference_library(const SpinParams& params, const RotorConfig& rotor, int K,
                                            const FidGrid& grid, double broadening_hz = 0.0,
                                            const PowderGrid* powder = nullptr, int threads = 0);

struct Identification {
    FloquetIndex label;
    double confidence = 0.0;
    double margin = 0.0;
};

// Normalized cross-correlation Re<a, b> / (|a| |b|); throws ScientificFailure when the margin is below 0.1.
Identification identify_state(const Spectrum& s, const std::vector<LibraryEntry>& library);

void write_spectrum_csv(std::ostream& os, const Spectrum& s);
void write_fid_csv(std::ostream& os, const FidTrace& fid);
Spectrum read_spectrum_csv(std::istream& is);
FidTrace read_fid_csv(std::istream& is);

}  // namespace fqc
