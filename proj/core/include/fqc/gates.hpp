#pragma once

#include <map>
#include <string>
#include <vector>

#include "fqc/readout.hpp"
#include "fqc/state_prep.hpp"

namespace fqc {

// (0,0), (1,0), (0,1), (1,1)
std::vector<FloquetIndex> default_working_states();

// <a|U|b> over the listed states
Mat subspace_matrix(const Mat& u, const std::vector<FloquetIndex>& states, ModeTruncation trunc);

// Embeds a subspace matrix; identity on the complement.
FloquetOperator lift(const Mat& sub, const std::vector<FloquetIndex>& states, ModeTruncation trunc, double omega_r);

// Swaps |reference> and |target>, identity elsewhere; maps the reference state onto the target.
FloquetOperator preparation_operator(FloquetIndex target, ModeTruncation trunc, double omega_r,
                                     FloquetIndex reference = {0, 0});

using PrepOperators = std::map<FloquetIndex, FloquetOperator>;

PrepOperators default_prep_operators(const std::vector<FloquetIndex>& states, ModeTruncation trunc, double omega_r);

// U = P_to P_from^{-1}
FloquetOperator state_transfer_unitary(FloquetIndex from, FloquetIndex to, const PrepOperators& prep,
                                       const std::vector<FloquetIndex>& working);

// Transfer and phase operators |i><j| over the first M states; needs M + 1 Floquet states unless strict is off.
std::vector<FloquetOperator> peak_manipulation_basis(const std::vector<FloquetIndex>& states, int M,
                                                     ModeTruncation trunc, double omega_r, bool strict = true);

struct BasisExpansion {
    std::vector<cplx> coefficients;
    double residual = 0.0;
};

// Least-squares coefficients of an M x M target over the basis restricted to the first M states.
BasisExpansion expand_in_basis(const Mat& target, const std::vector<FloquetOperator>& basis,
                               const std::vector<FloquetIndex>& states);

FloquetOperator hadamard_walsh(const std::vector<FloquetIndex>& working, ModeTruncation trunc, double omega_r);
FloquetOperator conditional_flip(FloquetIndex marked, const std::vector<FloquetIndex>& working, ModeTruncation trunc,
                                 double omega_r);
// 1/2 J - I on the working space
FloquetOperator inversion_about_mean(const std::vector<FloquetIndex>& working, ModeTruncation trunc, double omega_r);

enum class EventKind { pulse, selective, phase, free_evolution, asl, asl_inverse };

std::string to_string(EventKind k);

struct GateEvent {
    EventKind kind;
    std::string label;
    double duration = 0.0;  // s
    Mat unitary;
};

struct GateBlock {
    std::vector<GateEvent> events;
    FloquetOperator net_unitary;
    double asl_cancellation = 0.0;  // || U_ASL^{-1} U_ASL - I ||_max
};

// Five rotor-synchronized pi_x pulses with chemical-shift evolution in between, and its time reverse.
GateEvent asl_block(const SpinParams& params, const RotorConfig& rotor, ModeTruncation trunc);
GateEvent asl_inverse_block(const SpinParams& params, const RotorConfig& rotor, ModeTruncation trunc);

struct CompileOptions {
    double selective_omega1 = kTwoPi * 5e4;  // rad/s nutation rate of transition-selective pulses
};

// Givens factorization of the working-space target, each factor a transition-selective pulse exp(-i H t).
GateBlock compile_gate(const Mat& target, const std::vector<FloquetIndex>& working, const SpinParams& params,
                       const RotorConfig& rotor, ModeTruncation trunc, const CompileOptions& opts = {});

struct GroverInstance {
    int n_items = 4;
    FloquetIndex marked;
    int iterations = 1;
    std::vector<FloquetIndex> working = default_working_states();
};

// round(pi / (4 asin(1/sqrt(N))) - 1/2), which is 1 at N = 4
int grover_iterations(int n_items);

struct GroverResult {
    FloquetIndex marked;
    FloquetIndex identified;
    double fidelity = 0.0;  // <marked|sigma|marked> for the ideal-prepared pure input
    double margin = 0.0;
    std::vector<double> populations;  // working-state populations, in working order
    FloquetDensity final_state;
    Spectrum spectrum;
    std::vector<GateBlock> blocks;  // compiled run only
};

struct GroverOptions {
    bool compiled = false;
    FidGrid grid{1024, 0.0};
    double broadening_hz = 0.0;
};

GroverResult run_grover(const GroverInstance& inst, const SpinParams& params, const RotorConfig& rotor,
                        ModeTruncation trunc, const GroverOptions& opts = {});

// Population-weighted analytic spectra after removing the smallest population.
Spectrum population_spectrum(const std::vector<double>& populations, const std::vector<FloquetIndex>& working,
                             const SpinParams& params, const RotorConfig& rotor, int K, const FidGrid& grid,
                             double broadening_hz);

}  // namespace fqc
