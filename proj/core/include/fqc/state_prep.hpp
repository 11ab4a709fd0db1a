#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fqc/floquet.hpp"
#include "fqc/shift.hpp"

namespace fqc {

// ---- pseudo-pure states ----

struct PseudoPureSpec {
    FloquetIndex target;
    double alpha = 1.0;
    int n_spins = 1;
};

// [(1 - alpha) I + alpha |pm><pm|] / N, N the actual Floquet dimension
FloquetDensity make_pseudo_pure(const PseudoPureSpec& spec, ModeTruncation trunc);

enum class ThermalConvention {
    central_mode,  // <n|sigma|m> = delta_{n0} delta_{m0} sigma(0)
    all_modes      // <n|sigma|m> = delta_{nm} sigma(0) / (2K + 1)
};

// sigma(0) = (I + b 2 I_z) / 2
FloquetDensity thermal_density(ModeTruncation trunc, double polarization, ThermalConvention conv);

// Normalized overlap of the traceless parts of sigma and |pm><pm| inside the spin block of mode m.
double pseudo_pure_fidelity(const Mat& sigma, ModeTruncation trunc, FloquetIndex target);

// ---- temporal labeling (five-pi-pulse PASS) ----

struct PassSchedule {
    double Theta = 0.0;
    std::array<double, 5> positions{};  // rotor phases of the pi pulses, radians
    double theta_T = kTwoPi;
    int n_sidebands = 1;
    double residual = 0.0;
};

double pass_residual(const std::array<double, 5>& positions, double Theta, double theta_T);

// Throws ScientificFailure carrying the best residual when no seed converges.
PassSchedule solve_pass_timings(int n_sidebands, double Theta);

// Solves a Theta sweep by continuation from the previous solution.
std::vector<PassSchedule> solve_pass_sweep(int n_sidebands, const std::vector<double>& thetas);

// S(t2) = sum_k a_k e^{-i k Theta} e^{i (delta0 + k w) t2}
std::vector<cplx> pass_closed_form(double Theta, const SidebandProfile& a, double delta0, double omega_r,
                                   const std::vector<double>& t2);

struct PassFid {
    std::vector<cplx> closed_form;
    std::vector<cplx> simulated;
    double max_rel_diff = 0.0;
    bool flagged = false;
};

// Closed form against the Floquet density-matrix simulation of the pulse train, averaged over rotor phase.
PassFid simulate_pass_fid(const PassSchedule& schedule, const SpinParams& params, const RotorConfig& rotor,
                          const std::vector<double>& t2, int rotor_phases = 64, int threads = 0);

std::vector<double> equispaced_thetas(int n);

struct ProfileWeights {
    std::vector<double> thetas;
    std::vector<cplx> x;
    SidebandProfile target;
    double residual = 0.0;
    double condition = 0.0;
    bool realizable = false;  // all x real with |x| <= 1, so x = sin(theta_x) exists
};

// Solves sum_j a_k e^{-i k Theta_j} x_j = target_k for k in [-K, K].
ProfileWeights solve_profile_weights(const SidebandProfile& target, const std::vector<double>& thetas,
                                     const SidebandProfile& a);

// sum_j x_j S_{Theta_j}(t2) with the closed form
std::vector<cplx> resynthesize(const ProfileWeights& w, const SidebandProfile& a, double delta0, double omega_r,
                               const std::vector<double>& t2);

// ---- spatial labeling (gradients) ----

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d = 1);
    double value() const { return double(num) / double(den); }
    static Rational parse(const std::string& s);
    std::string str() const;

    friend Rational operator+(Rational a, Rational b);
    friend Rational operator*(Rational a, Rational b);
    friend bool operator==(const Rational& a, const Rational& b) = default;
};

struct GradientEvent {
    Rational strength;  // normalized G_z, multiplies z in [-1/2, 1/2]
    Rational duration;  // seconds
};

bool gradient_selection_survives(int p, int q, int k, int l, const GradientEvent& g1, const GradientEvent& g2,
                                 double omega_r);

// |s,n> -> exp(i eps_s z G t (delta0 + n w) / 2) |s,n>
FloquetOperator gradient_floquet_propagator(const GradientEvent& g, const SpinParams& params, const RotorConfig& rotor,
                                            ModeTruncation trunc, double z);

// Spatially averaged amplitude of the pathway |q,l><q,0| (during g1) -> |p,k><p,0| (during g2).
double pathway_amplitude(int p, int q, int k, int l, const GradientEvent& g1, const GradientEvent& g2,
                         const SpinParams& params, const RotorConfig& rotor, int z_samples);

FloquetDensity apply_gradient_sandwich(const FloquetDensity& rho, const GradientEvent& g1, const RfPulse& pulse,
                                       const GradientEvent& g2, const SpinParams& params, const RotorConfig& rotor,
                                       int z_samples, int threads = 0);

struct GradientPreparation {
    FloquetDensity input;
    FloquetDensity output;
    GradientEvent g1, g2;
    RfPulse pulse;
    double fidelity = 0.0;
    double input_coherence = 0.0;   // largest mode-coherence magnitude before the sandwich
    double output_coherence = 0.0;  // and after
};

// Labels (p, 0) from the thermal state after an unsynchronized free evolution.
GradientPreparation prepare_by_gradient(FloquetIndex target, const SpinParams& params, const RotorConfig& rotor,
                                        ModeTruncation trunc, int z_samples, int threads = 0);

}  // namespace fqc
