#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fqc/types.hpp"

namespace fqc {

using FourierBlocks = std::map<int, Mat2>;

// <pm|H_F|qn> = h^{m-n}_{pq} + n w delta_pq delta_mn
FloquetOperator assemble_floquet_hamiltonian(const FourierBlocks& blocks, double omega_r, ModeTruncation trunc);

FloquetEigensystem diagonalize(const FloquetOperator& h);

// exp(-i H_F t) through the eigensystem
FloquetOperator floquet_propagator(const FloquetEigensystem& eig, double t);

// U_pq(t) = sum_n <pn|U|q0> e^{i n w t}
Mat2 contract_propagator(const FloquetOperator& u, double t);

// U(t_b, t_a) = sum_n e^{i n w t_b} <pn|u|q0> for u = exp(-i H_F (t_b - t_a))
Mat2 contract_propagator(const FloquetOperator& u, double t_b, double t_a);

// Time-ordered product of piecewise-constant exponentials, sampled at interval midpoints.
Mat2 stepped_propagator_oracle(const std::function<Mat2(double)>& h_of_t, double t, int steps);
Mat2 stepped_propagator_oracle(const std::function<Mat2(double)>& h_of_t, double t_a, double t_b, int steps);

Mat2 expm_hermitian(const Mat2& h, double t);  // exp(-i h t)
Mat expm_hermitian(const Mat& h, double t);

// A^F = sum_{n,m} A_{n-m} |n><m|; components beyond +-2K are dropped and reported in warnings.
FloquetOperator formalize_observable(const FourierBlocks& components, ModeTruncation trunc, double omega_r,
                                     std::vector<std::string>* warnings = nullptr);

// D^F(t) = sum_{n,m} D |n><n+m| e^{-i m w t}
FloquetOperator detection_operator(const Mat2& d, double t, ModeTruncation trunc, double omega_r);

FloquetDensity evolve(const FloquetDensity& sigma, const FloquetOperator& u);

// sigma(t) = sum_{n,m} <n|sigma^F|m> e^{-i (n-m) w t}
Mat2 hilbert_density(const Mat& sigma_f, ModeTruncation trunc, double omega_r, double t);

// Mode-space block <n|X|m> as a 2x2 matrix.
Mat2 mode_block(const Mat& x, ModeTruncation trunc, int n, int m);

// exp(-i H_F t) applied to a single Floquet vector
Vec propagate(const FloquetEigensystem& eig, const Vec& phi, double t);

// psi(t) = sum_n e^{i n w t} phi_n
Eigen::Vector2cd hilbert_state(const Vec& phi, ModeTruncation trunc, double omega_r, double t);

// <D>(t) for a Floquet density evolved in the frame where psi(t) = sum_n e^{i n w t} phi_n;
// equals Tr[detection_operator(D, -t) sigma^F]
cplx floquet_expectation(const Mat2& d, const Mat& sigma_f, ModeTruncation trunc, double omega_r, double t);

// Embed a truncation-K operator into the central block of a larger truncation.
Mat embed(const Mat& x, ModeTruncation from, ModeTruncation to);

}  // namespace fqc
