#pragma once

#include <random>

#include "fqc/shift.hpp"

namespace fqc::testing {

inline double deg(double d) { return d * kPi / 180.0; }

// delta_CS = 20 kHz, eta = 0.5, w_r = 4 kHz, (alpha, beta) = (30, 60) deg
inline SpinParams ref_params(double delta0_hz = 500.0)
{
    SpinParams p;
    p.delta0 = kTwoPi * delta0_hz;
    p.delta = kTwoPi * 20000.0;
    p.eta = 0.5;
    p.alpha = deg(30.0);
    p.beta = deg(60.0);
    p.gamma = 0.0;
    return p;
}

inline RotorConfig ref_rotor()
{
    RotorConfig r;
    r.omega_r = kTwoPi * 4000.0;
    return r;
}

inline SpinParams random_params(std::mt19937_64& rng, double max_delta_hz = 12000.0)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SpinParams p;
    p.delta0 = kTwoPi * (u(rng) - 0.5) * 2000.0;
    p.delta = kTwoPi * u(rng) * max_delta_hz;
    p.eta = u(rng);
    p.alpha = kTwoPi * u(rng);
    p.beta = kPi * u(rng);
    p.gamma = kTwoPi * u(rng);
    return p;
}

inline Mat random_hermitian(std::mt19937_64& rng, int dim)
{
    std::normal_distribution<double> g;
    Mat a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            a(i, j) = cplx(g(rng), g(rng));
    return 0.5 * (a + a.adjoint());
}

inline Mat random_unitary(std::mt19937_64& rng, int dim)
{
    std::normal_distribution<double> g;
    Mat a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            a(i, j) = cplx(g(rng), g(rng));
    Eigen::HouseholderQR<Mat> qr(a);
    return qr.householderQ();
}

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace fqc::testing
