#include <gtest/gtest.h>

#include "fqc/shift.hpp"
#include "helpers.hpp"

using namespace fqc;
using namespace fqc::testing;

namespace {

using M3 = Eigen::Matrix3d;

M3 rot_y(double a)
{
    M3 r;
    r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
    return r;
}

M3 rot_z(double a)
{
    M3 r;
    r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
    return r;
}

// lab zz element of the reduced anisotropy tensor at rotor phase phi
double lab_zz(const SpinParams& p, double theta, double phi)
{
    M3 pas = Eigen::Vector3d(-(1 + p.eta) / 2, -(1 - p.eta) / 2, 1.0).asDiagonal();
    M3 r = rot_y(theta) * rot_z(phi) * rot_z(p.alpha) * rot_y(p.beta) * rot_z(p.gamma);
    return (r * pas * r.transpose())(2, 2);
}

struct Projection {
    double mean, c1, s1, c2, s2;
};

Projection project(const SpinParams& p, double theta)
{
    const int M = 256;
    Projection out{0, 0, 0, 0, 0};
    for (int j = 0; j < M; ++j) {
        double phi = kTwoPi * j / M;
        double z = lab_zz(p, theta, phi);
        out.mean += z / M;
        out.c1 += 2 * z * std::cos(phi) / M;
        out.s1 += 2 * z * std::sin(phi) / M;
        out.c2 += 2 * z * std::cos(2 * phi) / M;
        out.s2 += 2 * z * std::sin(2 * phi) / M;
    }
    return out;
}

}  // namespace

TEST(SpinParamsTest, PrincipalRoundTrip)
{
    std::mt19937_64 rng(1);
    for (int i = 0; i < 20; ++i) {
        auto p = random_params(rng);
        auto s = p.principal();
        EXPECT_GE(s[0], s[1]);
        EXPECT_GE(s[1], s[2]);
        auto q = SpinParams::from_principal(s[0], s[1], s[2], p.alpha, p.beta, p.gamma);
        EXPECT_NEAR(q.delta0, p.delta0, 1e-12 * std::max(1.0, std::abs(p.delta)));
        EXPECT_NEAR(q.delta, p.delta, 1e-12 * std::max(1.0, std::abs(p.delta)));
        EXPECT_NEAR(q.eta, p.eta, 1e-12);
    }
    EXPECT_THROW(SpinParams::from_principal(1, 2, 3, 0, 0, 0), InvalidArgument);
}

TEST(SpinParamsTest, ValidateRejectsBadAsymmetry)
{
    SpinParams p;
    p.eta = 1.5;
    EXPECT_THROW(p.validate(), InvalidArgument);
    p.eta = 0.2;
    p.delta = -1.0;
    EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(RotorTest, MagicAngleNullsP2)
{
    EXPECT_LE(std::abs(legendre_p2(std::cos(magic_angle()))), 1e-15);
}

TEST(OrientationTest, VanishAtZeroTilt)
{
    std::mt19937_64 rng(2);
    RotorConfig r;
    r.theta = 0.0;
    for (int i = 0; i < 5; ++i) {
        auto c = orientation_coefficients(random_params(rng), r);
        EXPECT_EQ(c.C1, 0.0);
        EXPECT_EQ(c.S1, 0.0);
        EXPECT_EQ(c.C2, 0.0);
        EXPECT_EQ(c.S2, 0.0);
    }
}

TEST(OrientationTest, AxialPerpendicularKillsC1)
{
    SpinParams p;
    p.beta = kPi / 2;
    auto c = orientation_coefficients(p, RotorConfig{});
    EXPECT_NEAR(c.C1, 0.0, 1e-15);
}

TEST(OrientationTest, ReferenceFrozenValues)
{
    // independent Cartesian rotation, projected at 4096 points
    auto c = orientation_coefficients(ref_params(), ref_rotor());
    EXPECT_NEAR(c.C1, -0.6187184335382293, 1e-12);
    EXPECT_NEAR(c.S1, 0.35721725415588024, 1e-12);
    EXPECT_NEAR(c.C2, 0.13541666666666669, 1e-12);
    EXPECT_NEAR(c.S2, -0.23454854685828544, 1e-12);
}

TEST(OrientationTest, MatchesTensorRotationOracle)
{
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
        auto p = random_params(rng);
        RotorConfig r;
        r.theta = i % 2 ? magic_angle() : 0.3 + 0.1 * i;
        auto c = orientation_coefficients(p, r);
        auto ref = project(p, r.theta);
        EXPECT_NEAR(c.C1, ref.c1, 1e-12);
        EXPECT_NEAR(c.S1, ref.s1, 1e-12);
        EXPECT_NEAR(c.C2, ref.c2, 1e-12);
        EXPECT_NEAR(c.S2, ref.s2, 1e-12);
        EXPECT_NEAR(static_anisotropy(p, r), p.delta * ref.mean, 1e-9 * std::max(1.0, p.delta));
    }
}

TEST(OrientationTest, GammaPeriodPi)
{
    auto p = ref_params();
    p.gamma = 0.4;
    auto a = orientation_coefficients(p, RotorConfig{});
    p.gamma += kPi;
    auto b = orientation_coefficients(p, RotorConfig{});
    EXPECT_NEAR(a.C1, b.C1, 1e-14);
    EXPECT_NEAR(a.S1, b.S1, 1e-14);
    EXPECT_NEAR(a.C2, b.C2, 1e-14);
    EXPECT_NEAR(a.S2, b.S2, 1e-14);
}

TEST(CsHamiltonianTest, IsotropicOnly)
{
    SpinParams p;
    p.delta0 = 1234.0;
    Mat2 h = cs_hamiltonian(p, RotorConfig{}, 1e-4);
    EXPECT_NEAR(h(0, 0).real(), -617.0, 1e-12);
    EXPECT_NEAR(h(1, 1).real(), 617.0, 1e-12);
}

TEST(CsHamiltonianTest, RotorAverageIsIsotropic)
{
    auto p = ref_params();
    auto r = ref_rotor();
    Mat2 avg = Mat2::Zero();
    const int M = 64;
    for (int j = 0; j < M; ++j)
        avg += cs_hamiltonian(p, r, r.period() * j / M) / double(M);
    EXPECT_NEAR(avg(0, 0).real(), -p.delta0 / 2, 1e-8);
    EXPECT_NEAR(avg(1, 1).real(), p.delta0 / 2, 1e-8);
}

TEST(CsHamiltonianTest, ReferenceAtZeroMatchesRotation)
{
    auto p = ref_params();
    auto r = ref_rotor();
    double aniso = lab_zz(p, r.theta, 0.0) - project(p, r.theta).mean;
    double w = p.delta0 + 0.5 * std::sqrt(3.0) * p.delta * aniso;
    EXPECT_NEAR(cs_hamiltonian(p, r, 0.0)(0, 0).real(), -w / 2, 1e-8);
}

TEST(CsFloquetTest, ZeroAnisotropyMatchesLadder)
{
    SpinParams p;
    auto r = ref_rotor();
    auto h = cs_floquet_hamiltonian(p, r, {1});
    auto ref = assemble_floquet_hamiltonian({}, r.omega_r, {1});
    EXPECT_LT((h.matrix - ref.matrix).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CsFloquetTest, HermitianForRandomOrientations)
{
    std::mt19937_64 rng(4);
    for (int i = 0; i < 20; ++i) {
        auto h = cs_floquet_hamiltonian(random_params(rng), ref_rotor(), {6});
        EXPECT_LE(hermitian_defect(h.matrix), 1e-12 * max_abs(h.matrix));
    }
}

TEST(SidebandTest, NoAnisotropyGivesCenterband)
{
    SpinParams p;
    auto s = sideband_amplitudes(p, ref_rotor(), 4);
    EXPECT_NEAR(std::abs(s.F[0] - 1.0), 0.0, 1e-15);
    for (int n = 1; n <= 4; ++n) {
        EXPECT_LT(std::abs(s.F[n]), 1e-15);
        EXPECT_LT(std::abs(s.F[-n]), 1e-15);
    }
}

TEST(SidebandTest, ReferenceFrozenIntensities)
{
    // independent FFT of the rotated-tensor phase factor
    const double ref[] = {0.00020322500740685277, 0.04635819351705179, 0.34544412645542427, 0.19632794702073245,
                          0.06432902470563867,    0.008027076188300541, 0.11884852464307256, 0.12640604721028845,
                          0.06516444237786415};
    auto s = sideband_amplitudes(ref_params(), ref_rotor(), 24);
    for (int n = -4; n <= 4; ++n)
        EXPECT_NEAR(s.A[n].real(), ref[n + 4], 1e-12) << "n=" << n;
    for (int n = -24; n <= 24; ++n)
        EXPECT_NEAR(s.A[n].real(), std::norm(s.F[n]), 1e-15);
}

TEST(SidebandTest, ParsevalAtAdaptiveK)
{
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        auto p = random_params(rng, 25000.0);
        auto r = ref_rotor();
        int K = adaptive_truncation(p, r);
        auto s = sideband_amplitudes(p, r, K);
        EXPECT_NEAR(s.total, 1.0, 1e-8);
        EXPECT_TRUE(s.converged);
    }
}

TEST(SidebandTest, WarnsWhenUnderTruncated)
{
    auto s = sideband_amplitudes(ref_params(), ref_rotor(), 1);
    EXPECT_FALSE(s.converged);
    EXPECT_NE(s.warning.find("increase K"), std::string::npos);
}

TEST(SidebandTest, RejectsBadQuadrature)
{
    EXPECT_THROW(sideband_amplitudes(ref_params(), ref_rotor(), 4, 100), InvalidArgument);
    EXPECT_THROW(sideband_amplitudes(ref_params(), ref_rotor(), 4, 32), InvalidArgument);
}

TEST(SidebandTest, MatchesFidPhaseFactorFft)
{
    // F_n from the exact single-crystal coherence sampled over a rotor period
    auto p = ref_params(0.0);
    auto r = ref_rotor();
    const int M = 1024;
    auto s = sideband_amplitudes(p, r, 8);
    for (int n = -8; n <= 8; ++n) {
        cplx acc = 0.0;
        for (int j = 0; j < M; ++j) {
            double t = r.period() * j / M;
            cplx rho01 = cs_exact_propagator(p, r, t)(0, 0) * std::conj(cs_exact_propagator(p, r, t)(1, 1));
            acc += rho01 * std::exp(-kI * double(n) * r.omega_r * t);
        }
        acc /= double(M);
        // rho01 = e^{i Phi(wt)} e^{-i Phi(0)}
        cplx expect = s.F[n] * std::exp(-kI * sideband_phase(p, r, 0.0));
        EXPECT_LT(std::abs(acc - expect), 1e-12);
    }
}

TEST(SidebandTest, AlphaGammaReversalConjugates)
{
    // reversing alpha and gamma flips S1, S2 and maps F_n to conj(F_n); the pattern is not mirrored
    std::mt19937_64 rng(6);
    for (int i = 0; i < 10; ++i) {
        auto p = random_params(rng);
        auto q = p;
        q.alpha = -p.alpha;
        q.gamma = -p.gamma;
        auto a = sideband_amplitudes(p, ref_rotor(), 12);
        auto b = sideband_amplitudes(q, ref_rotor(), 12);
        for (int n = -12; n <= 12; ++n)
            EXPECT_LT(std::abs(b.F[n] - std::conj(a.F[n])), 1e-12);
    }
}

TEST(RfTest, ZeroWidthIsIdentity)
{
    RfPulse p{1e5, 0.0, RfPhase::x};
    auto u = rf_floquet_propagator(p, ref_rotor(), {3}, true);
    EXPECT_LT((u.matrix - Mat::Identity(14, 14)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RfTest, NinetyXOnZero)
{
    auto u = rf_spin_propagator(RfPulse::ideal(kPi / 2, RfPhase::x));
    Eigen::Vector2cd out = u * Eigen::Vector2cd(1, 0);
    EXPECT_NEAR(std::abs(out(0) - 1.0 / std::sqrt(2.0)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(out(1) - kI / std::sqrt(2.0)), 0.0, 1e-12);
    RfPulse p{kTwoPi * 62500.0, 4e-6, RfPhase::x};
    EXPECT_NEAR(p.flip(), kPi / 2, 1e-12);
}

TEST(RfTest, PhasesRotateGenerator)
{
    for (auto ph : {RfPhase::x, RfPhase::minus_x, RfPhase::y, RfPhase::minus_y}) {
        Mat2 u = rf_spin_propagator(RfPulse::ideal(0.7, ph));
        double a = phase_angle(ph);
        Mat2 gen = std::cos(a) * spin_x() + std::sin(a) * spin_y();
        EXPECT_LT((u - expm_hermitian(Mat2(-gen), 0.7)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_EQ(parse_phase(to_string(ph)), ph);
    }
}

TEST(RfTest, ExactVersusSimplifiedBound)
{
    auto r = ref_rotor();
    RfPulse p{kPi / 2 / 1e-6, 1e-6, RfPhase::x};
    // K = 5 puts K w_r t_p at 0.126, beyond the simplified-form guard
    EXPECT_THROW(rf_floquet_propagator(p, r, {5}, false), InvalidArgument);
    ModeTruncation tr{3};
    auto a = rf_floquet_propagator(p, r, tr, true);
    auto b = rf_floquet_propagator(p, r, tr, false);
    EXPECT_LE((a.matrix - b.matrix).cwiseAbs().maxCoeff(), tr.K * r.omega_r * p.tp);
    EXPECT_LT(unitarity_defect(a.matrix), 1e-12);
    RfPulse slow{kPi / 2 / 1e-4, 1e-4, RfPhase::x};
    EXPECT_THROW(rf_floquet_propagator(slow, r, tr, false), InvalidArgument);
}

TEST(PropagatorComponentsTest, ZeroTimeSumsToIdentity)
{
    auto comps = cs_propagator_components(ref_params(), ref_rotor(), 0.0, 20);
    Mat2 sum = Mat2::Zero();
    for (const auto& [n, u] : comps)
        sum += u;
    EXPECT_LT((sum - Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(PropagatorComponentsTest, IsotropicSingleComponent)
{
    SpinParams p;
    p.delta0 = kTwoPi * 700.0;
    const double t = 1.7e-4;
    auto comps = cs_propagator_components(p, ref_rotor(), t, 3);
    EXPECT_NEAR(std::abs(comps[0](0, 0) - std::exp(kI * p.delta0 * t / 2.0)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(comps[0](1, 1) - std::exp(-kI * p.delta0 * t / 2.0)), 0.0, 1e-14);
    for (int n : {-3, -1, 1, 2})
        EXPECT_LT(comps[n].cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PropagatorComponentsTest, ReconstructionMatchesOracle)
{
    auto p = ref_params();
    auto r = ref_rotor();
    auto h = [&](double t) { return cs_hamiltonian(p, r, t); };
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, r.period());
    std::vector<double> times{37e-6};
    for (int i = 0; i < 20; ++i)
        times.push_back(u(rng));
    for (double t : times) {
        auto comps = cs_propagator_components(p, r, t, 24);
        Mat2 sum = Mat2::Zero();
        for (const auto& [n, c] : comps)
            sum += c;
        EXPECT_LT((sum - stepped_propagator_oracle(h, t, 1 << 14)).cwiseAbs().maxCoeff(), 1e-6) << "t=" << t;
    }
}

TEST(PropagatorComponentsTest, AgreeWithFloquetPropagatorColumns)
{
    auto p = ref_params();
    auto r = ref_rotor();
    const int K = propagator_truncation(p, r);
    const double t = 0.41 * r.period();
    auto u = floquet_propagator(diagonalize(cs_floquet_hamiltonian(p, r, {K})), t);
    auto comps = cs_propagator_components(p, r, t, 12);
    for (int n = -12; n <= 12; ++n) {
        Mat2 blk = mode_block(u.matrix, u.trunc, n, 0) * std::exp(kI * double(n) * r.omega_r * t);
        EXPECT_LT((blk - comps[n]).cwiseAbs().maxCoeff(), 1e-8) << "n=" << n;
    }
}
