#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "fqc/floquet.hpp"

namespace fqc {

// Chemical-shift tensor. delta0, delta in rad/s; Euler angles tensor-to-rotor in radians.
struct SpinParams {
    double delta0 = 0.0;
    double delta = 0.0;
    double eta = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;

    // sigma11 >= sigma22 >= sigma33
    std::array<double, 3> principal() const;
    static SpinParams from_principal(double s11, double s22, double s33, double alpha, double beta, double gamma);
    void validate() const;
};

double magic_angle();

struct RotorConfig {
    double omega_r = kTwoPi * 4000.0;
    double theta = magic_angle();

    double period() const { return kTwoPi / omega_r; }
};

double legendre_p2(double x);

struct OrientationCoefficients {
    double C1 = 0.0;
    double S1 = 0.0;
    double C2 = 0.0;
    double S2 = 0.0;
};

OrientationCoefficients orientation_coefficients(const SpinParams& params, const RotorConfig& rotor);

// time-independent anisotropic part of the shift, rad/s (zero at the magic angle)
double static_anisotropy(const SpinParams& params, const RotorConfig& rotor);

// instantaneous shift frequency: H(t) = -I_z * shift_frequency(t)
double shift_frequency(const SpinParams& params, const RotorConfig& rotor, double t);

Mat2 cs_hamiltonian(const SpinParams& params, const RotorConfig& rotor, double t);

FourierBlocks cs_fourier_blocks(const SpinParams& params, const RotorConfig& rotor);

FloquetOperator cs_floquet_hamiltonian(const SpinParams& params, const RotorConfig& rotor, ModeTruncation trunc);

// accumulated sideband phase Phi(phi), phi = w_r t
double sideband_phase(const SpinParams& params, const RotorConfig& rotor, double phi);

enum class SidebandKind { field, intensity, target };

struct SidebandProfile {
    SidebandKind kind = SidebandKind::intensity;
    int K = 0;
    std::vector<cplx> values;  // index n + K

    cplx operator[](int n) const;
    cplx& at(int n);
    static SidebandProfile zeros(SidebandKind kind, int K);
};

struct SidebandResult {
    SidebandProfile F;
    SidebandProfile A;
    double total = 0.0;  // sum of A_n
    bool converged = false;
    std::string warning;
};

SidebandResult sideband_amplitudes(const SpinParams& params, const RotorConfig& rotor, int K, int quadrature_points = 512);

// smallest K with sum_{|n|<=K} A_n >= 1 - tol
int adaptive_truncation(const SpinParams& params, const RotorConfig& rotor, double tol = 1e-8, int k_max = 400);

// mode truncation for Floquet propagators (needs headroom over the sideband K)
int propagator_truncation(const SpinParams& params, const RotorConfig& rotor);

enum class RfPhase { x, minus_x, y, minus_y };

struct RfPulse {
    double omega1 = 0.0;  // rad/s
    double tp = 0.0;      // s
    RfPhase phase = RfPhase::x;

    double flip() const { return omega1 * tp; }
    // near-delta pulse used with the simplified Floquet form
    static RfPulse ideal(double flip, RfPhase phase);
};

double phase_angle(RfPhase phase);
RfPhase parse_phase(const std::string& s);
std::string to_string(RfPhase phase);

// exp(-i H_rf t_p) with H_rf = -w1 (cos ph I_x + sin ph I_y)
Mat2 rf_spin_propagator(const RfPulse& pulse);

FloquetOperator rf_floquet_propagator(const RfPulse& pulse, const RotorConfig& rotor, ModeTruncation trunc, bool exact);

// Shirley components U_n(t) = <.n|exp(-i H_F t)|.0> e^{i n w t}; sum_n U_n(t) = U(t, 0)
std::map<int, Mat2> cs_propagator_components(const SpinParams& params, const RotorConfig& rotor, double t, int K);

// Exact single-spin propagator U(t_b, t_a) for the chemical shift (commuting family)
Mat2 cs_exact_propagator(const SpinParams& params, const RotorConfig& rotor, double t_b, double t_a = 0.0);

}  // namespace fqc
