#include <gtest/gtest.h>

#include <cmath>

#include "fqc/state_prep.hpp"
#include "helpers.hpp"

using namespace fqc;
using namespace fqc::testing;

namespace {

std::vector<double> t2_grid(int n, double dt)
{
    std::vector<double> t(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        t[static_cast<size_t>(i)] = i * dt;
    return t;
}

Rational period_4k() { return Rational(1, 4000); }

}  // namespace

TEST(PseudoPure, AlphaZeroIsMaximallyMixed)
{
    ModeTruncation tr{3};
    auto s = make_pseudo_pure({{1, 2}, 0.0}, tr);
    EXPECT_LT(max_abs(s.matrix - Mat::Identity(tr.dim(), tr.dim()) / double(tr.dim())), 1e-15);
}

TEST(PseudoPure, AlphaOneIsProjector)
{
    ModeTruncation tr{2};
    auto s = make_pseudo_pure({{0, 0}, 1.0}, tr);
    Mat p = Mat::Zero(tr.dim(), tr.dim());
    p(flatten({0, 0}, tr), flatten({0, 0}, tr)) = 1.0;
    EXPECT_EQ(max_abs(s.matrix - p), 0.0);
}

TEST(PseudoPure, RejectsOverfullPurity)
{
    EXPECT_THROW(make_pseudo_pure({{0, 0}, 1.2}, ModeTruncation{1}), InvalidArgument);
    EXPECT_THROW(make_pseudo_pure({{0, 0}, -1.01}, ModeTruncation{1}), InvalidArgument);
}

TEST(PseudoPure, TracelessExpectationScalesWithAlpha)
{
    std::mt19937_64 rng(3);
    ModeTruncation tr{2};
    FloquetIndex idx{1, -1};
    int r = flatten(idx, tr);
    Mat d = random_hermitian(rng, tr.dim());
    d -= d.trace() / double(tr.dim()) * Mat::Identity(tr.dim(), tr.dim());
    auto s = make_pseudo_pure({idx, 0.3}, tr);
    EXPECT_NEAR(std::abs((d * s.matrix).trace() - 0.3 * d(r, r)), 0.0, 1e-13);
}

TEST(PseudoPure, CoryCriteriaOverRandomUnitaries)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ModeTruncation tr{2};
    const int dim = tr.dim();
    for (int trial = 0; trial < 20; ++trial) {
        FloquetIndex idx{trial % 2, trial % 5 - 2};
        double alpha = u(rng);
        auto s = make_pseudo_pure({idx, alpha}, tr);
        EXPECT_NEAR(std::abs(s.matrix.trace() - 1.0), 0.0, 1e-14);

        Mat uu = random_unitary(rng, dim);
        Vec phi = Vec::Zero(dim);
        phi(flatten(idx, tr)) = 1.0;
        Vec uphi = uu * phi;
        auto evolved = evolve(s, {uu, tr, kTwoPi * 4000.0});
        Mat expect = (1.0 - alpha) / dim * Mat::Identity(dim, dim) + alpha * uphi * uphi.adjoint();
        EXPECT_LT(max_abs(evolved.matrix - expect), 1e-13);

        Mat d = random_hermitian(rng, dim);
        d -= d.trace() / double(dim) * Mat::Identity(dim, dim);
        cplx lhs = (d * evolved.matrix).trace();
        cplx rhs = alpha * uphi.dot(d * uphi);
        EXPECT_LT(std::abs(lhs - rhs), 1e-12);
    }
}

TEST(Thermal, CentralModeConvention)
{
    ModeTruncation tr{3};
    auto s = thermal_density(tr, 0.2, ThermalConvention::central_mode);
    EXPECT_NEAR(s.matrix.trace().real(), 1.0, 1e-15);
    Mat2 c = mode_block(s.matrix, tr, 0, 0);
    EXPECT_NEAR(c(0, 0).real(), 0.6, 1e-15);
    EXPECT_NEAR(c(1, 1).real(), 0.4, 1e-15);
    EXPECT_EQ(mode_block(s.matrix, tr, 1, 1).norm(), 0.0);
}

TEST(Thermal, AllModesConvention)
{
    ModeTruncation tr{3};
    auto s = thermal_density(tr, 0.2, ThermalConvention::all_modes);
    EXPECT_NEAR(s.matrix.trace().real(), 1.0, 1e-15);
    for (int n = -3; n <= 3; ++n) {
        Mat2 b = mode_block(s.matrix, tr, n, n);
        EXPECT_NEAR(b(0, 0).real(), 0.6 / 7.0, 1e-15);
        EXPECT_NEAR(b(1, 1).real(), 0.4 / 7.0, 1e-15);
    }
    EXPECT_EQ(mode_block(s.matrix, tr, 0, 1).norm(), 0.0);
}

TEST(Pass, ThetaZeroSolves)
{
    auto s = solve_pass_timings(5, 0.0);
    EXPECT_LE(s.residual, 1e-10);
    EXPECT_LE(pass_residual(s.positions, 0.0, s.theta_T), 1e-10);
    EXPECT_GT(s.positions[0], 0.0);
    for (int i = 1; i < 5; ++i)
        EXPECT_GT(s.positions[static_cast<size_t>(i)], s.positions[static_cast<size_t>(i - 1)]);
    EXPECT_LT(s.positions[4], kTwoPi);
}

TEST(Pass, SixteenThetaSweepIsContinuous)
{
    auto thetas = equispaced_thetas(16);
    auto sweep = solve_pass_sweep(5, thetas);
    ASSERT_EQ(sweep.size(), 16u);
    for (size_t j = 0; j < sweep.size(); ++j)
        EXPECT_LE(pass_residual(sweep[j].positions, thetas[j], sweep[j].theta_T), 1e-10) << "Theta index " << j;
    // second differences stay small compared with the grid step
    double step = thetas[1] - thetas[0];
    for (size_t j = 2; j < sweep.size(); ++j)
        for (size_t q = 0; q < 5; ++q) {
            double extrap = 2 * sweep[j - 1].positions[q] - sweep[j - 2].positions[q];
            EXPECT_LT(std::abs(sweep[j].positions[q] - extrap), step) << "j=" << j << " q=" << q;
        }
}

TEST(Pass, RejectsBadPitch)
{
    EXPECT_THROW(solve_pass_timings(5, -0.1), InvalidArgument);
    EXPECT_THROW(solve_pass_timings(5, kTwoPi), InvalidArgument);
    EXPECT_THROW(solve_pass_timings(0, 1.0), InvalidArgument);
}

TEST(Pass, IsotropicClosedFormIsPlainPrecession)
{
    SpinParams p = ref_params();
    p.delta = 0.0;
    auto sb = sideband_amplitudes(p, ref_rotor(), 4);
    auto t2 = t2_grid(32, 13e-6);
    auto s = pass_closed_form(1.1, sb.A, p.delta0, ref_rotor().omega_r, t2);
    for (size_t i = 0; i < t2.size(); ++i)
        EXPECT_LT(std::abs(s[i] - std::exp(kI * p.delta0 * t2[i])), 1e-14);
}

TEST(Pass, ClosedFormMatchesSimulationReference)
{
    auto p = ref_params();
    auto rotor = ref_rotor();
    auto t2 = t2_grid(12, 17e-6);
    for (double Theta : {0.0, 1.3, 4.0}) {
        auto sched = solve_pass_timings(5, Theta);
        auto fid = simulate_pass_fid(sched, p, rotor, t2);
        EXPECT_LE(fid.max_rel_diff, 1e-4) << "Theta=" << Theta;
        EXPECT_FALSE(fid.flagged);
    }
}

TEST(Pass, ThetaTransformSeparatesOrders)
{
    SpinParams p = ref_params(0.0);
    p.delta = kTwoPi * 5000.0;
    auto rotor = ref_rotor();
    const int n = 16;
    auto thetas = equispaced_thetas(n);
    auto sweep = solve_pass_sweep(5, thetas);
    std::vector<double> t2{0.0};
    std::vector<cplx> s0(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j)
        s0[static_cast<size_t>(j)] = simulate_pass_fid(sweep[static_cast<size_t>(j)], p, rotor, t2, 32).simulated[0];
    auto sb = sideband_amplitudes(p, rotor, 6);
    for (int k = -3; k <= 3; ++k) {
        cplx ak = 0.0;
        for (int j = 0; j < n; ++j)
            ak += s0[static_cast<size_t>(j)] * std::exp(kI * double(k) * thetas[static_cast<size_t>(j)]);
        ak /= double(n);
        EXPECT_NEAR(std::abs(ak - sb.A[k]), 0.0, 1e-6) << "order " << k;
    }
}

TEST(ProfileWeights, SingleOrderIdentity)
{
    SidebandProfile a{SidebandKind::intensity, 0, {0.8}};
    auto w = solve_profile_weights(a, {0.0}, a);
    ASSERT_EQ(w.x.size(), 1u);
    EXPECT_NEAR(std::abs(w.x[0] - 1.0), 0.0, 1e-15);
    EXPECT_TRUE(w.realizable);
}

TEST(ProfileWeights, SingleSidebandResynthesis)
{
    auto p = ref_params();
    auto rotor = ref_rotor();
    const int K = 4;
    auto a = sideband_amplitudes(p, rotor, K).A;
    SidebandProfile target{SidebandKind::target, K, std::vector<cplx>(2 * K + 1, 0.0)};
    target.values[static_cast<size_t>(1 + K)] = a[1];
    auto w = solve_profile_weights(target, equispaced_thetas(2 * K + 1), a);
    EXPECT_LE(w.residual, 1e-9);
    auto t2 = t2_grid(64, 9e-6);
    auto got = resynthesize(w, a, p.delta0, rotor.omega_r, t2);
    for (size_t i = 0; i < t2.size(); ++i) {
        cplx want = a[1] * std::exp(kI * (p.delta0 + rotor.omega_r) * t2[i]);
        EXPECT_LT(std::abs(got[i] - want), 1e-6);
    }
}

TEST(ProfileWeights, LinearInTarget)
{
    auto a = sideband_amplitudes(ref_params(), ref_rotor(), 3).A;
    auto th = equispaced_thetas(7);
    SidebandProfile t2 = a;
    for (auto& v : t2.values)
        v *= 2.0;
    auto w1 = solve_profile_weights(a, th, a);
    auto w2 = solve_profile_weights(t2, th, a);
    for (size_t i = 0; i < w1.x.size(); ++i)
        EXPECT_EQ(w2.x[i], 2.0 * w1.x[i]);
}

TEST(ProfileWeights, RejectsSingularAndMisSized)
{
    auto a = sideband_amplitudes(ref_params(), ref_rotor(), 1).A;
    EXPECT_THROW(solve_profile_weights(a, {0.0, 0.0, 1.0}, a), ScientificFailure);
    EXPECT_THROW(solve_profile_weights(a, {0.0, 1.0}, a), InvalidArgument);
}

TEST(Rational, NormalizesAndParses)
{
    Rational r(6, -4);
    EXPECT_EQ(r.num, -3);
    EXPECT_EQ(r.den, 2);
    EXPECT_EQ(Rational::parse("10/4"), Rational(5, 2));
    EXPECT_EQ(Rational::parse("-7"), Rational(-7));
    EXPECT_EQ(Rational(1, 3) + Rational(1, 6), Rational(1, 2));
    EXPECT_EQ(Rational(2, 3) * Rational(9, 4), Rational(3, 2));
    EXPECT_EQ(Rational(5, 2).str(), "5/2");
    EXPECT_THROW(Rational::parse("x/2"), InvalidArgument);
    EXPECT_THROW(Rational(1, 0), InvalidArgument);
}

TEST(Gradient, ZeroOrdersAlwaysSurvive)
{
    GradientEvent g1{Rational(3), Rational(1, 7)}, g2{Rational(-5), Rational(2, 9)};
    EXPECT_TRUE(gradient_selection_survives(0, 1, 0, 0, g1, g2, kTwoPi * 4000.0));
}

TEST(Gradient, MatchedAreasRefocusOppositeOrders)
{
    GradientEvent g{Rational(2), period_4k()};
    EXPECT_TRUE(gradient_selection_survives(0, 0, 1, -1, g, g, kTwoPi * 4000.0));
    EXPECT_TRUE(gradient_selection_survives(0, 1, 2, 2, g, g, kTwoPi * 4000.0));
    EXPECT_FALSE(gradient_selection_survives(0, 0, 1, 1, g, g, kTwoPi * 4000.0));
}

TEST(Gradient, PredicateMatchesSpatialAverage)
{
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> bit(0, 1), ord(-3, 3), gi(1, 4);
    auto p = ref_params();
    auto rotor = ref_rotor();
    int survived = 0;
    for (int trial = 0; trial < 100; ++trial) {
        int pp = bit(rng), qq = bit(rng), k = ord(rng), l = ord(rng);
        GradientEvent g1{Rational(2 * gi(rng)), period_4k()};
        GradientEvent g2{Rational(2 * gi(rng)), period_4k()};
        if (trial % 3 == 0) {  // force a refocusing pair
            g2 = g1;
            l = -eps(pp) * eps(qq) * k;
        }
        bool pred = gradient_selection_survives(pp, qq, k, l, g1, g2, rotor.omega_r);
        double amp = pathway_amplitude(pp, qq, k, l, g1, g2, p, rotor, 1024);
        survived += pred;
        if (pred)
            EXPECT_GE(amp, 0.99) << "trial " << trial;
        else
            EXPECT_LE(amp, 1e-3) << "trial " << trial;
    }
    EXPECT_GT(survived, 20);
}

TEST(Gradient, SpatialAverageConvergesWithSamples)
{
    // non-integer winding: midpoint averages approach the continuum sinc
    auto p = ref_params();
    auto rotor = ref_rotor();
    GradientEvent g1{Rational(1), Rational(1, 11000)}, g2{Rational(0), Rational(1)};
    double c = rotor.omega_r * g1.strength.value() * g1.duration.value() / 2.0;
    double exact = std::abs(std::sin(c / 2) / (c / 2));
    double e64 = std::abs(pathway_amplitude(0, 0, 0, 1, g1, g2, p, rotor, 64) - exact);
    double e128 = std::abs(pathway_amplitude(0, 0, 0, 1, g1, g2, p, rotor, 128) - exact);
    EXPECT_LT(e128, e64);
    EXPECT_LT(e128, 1e-4);
}

TEST(Gradient, ZeroGradientsReduceToPulse)
{
    ModeTruncation tr{2};
    auto rho = thermal_density(tr, 0.1, ThermalConvention::all_modes);
    GradientEvent none{Rational(0), Rational(1)};
    auto pulse = RfPulse::ideal(kPi / 2, RfPhase::x);
    auto out = apply_gradient_sandwich(rho, none, pulse, none, ref_params(), ref_rotor(), 64);
    auto ref = evolve(rho, rf_floquet_propagator(pulse, ref_rotor(), tr, false));
    EXPECT_LT(max_abs(out.matrix - ref.matrix), 1e-15);
}

TEST(Gradient, SandwichIsThreadCountIndependent)
{
    ModeTruncation tr{3};
    auto rho = make_pseudo_pure({{0, 1}, 0.5}, tr);
    rho.matrix = 0.5 * (rho.matrix + Mat::Constant(tr.dim(), tr.dim(), 0.01));
    GradientEvent g1{Rational(2), period_4k()}, g2{Rational(3), Rational(1, 5000)};
    auto pulse = RfPulse::ideal(kPi / 2, RfPhase::y);
    auto a = apply_gradient_sandwich(rho, g1, pulse, g2, ref_params(), ref_rotor(), 1024, 1);
    auto b = apply_gradient_sandwich(rho, g1, pulse, g2, ref_params(), ref_rotor(), 1024, 3);
    EXPECT_TRUE(a.matrix == b.matrix);
}

TEST(Gradient, RejectsTooFewSamples)
{
    ModeTruncation tr{1};
    auto rho = thermal_density(tr, 0.1, ThermalConvention::central_mode);
    GradientEvent g{Rational(2), period_4k()};
    EXPECT_THROW(apply_gradient_sandwich(rho, g, RfPulse::ideal(kPi, RfPhase::x), g, ref_params(), ref_rotor(), 32),
                 InvalidArgument);
}

TEST(Gradient, PreparesModeZeroStates)
{
    auto p = ref_params();
    auto rotor = ref_rotor();
    ModeTruncation tr{propagator_truncation(p, rotor)};
    for (int spin : {0, 1}) {
        auto prep = prepare_by_gradient({spin, 0}, p, rotor, tr, 1024);
        EXPECT_GE(prep.fidelity, 0.999) << "p=" << spin;
        EXPECT_GT(prep.input_coherence, 1e-3);
        EXPECT_LT(prep.output_coherence, 1e-12);
        EXPECT_NEAR(prep.output.matrix.trace().real(), prep.input.matrix.trace().real(), 1e-12);
    }
    EXPECT_THROW(prepare_by_gradient({0, 1}, p, rotor, tr, 1024), InvalidArgument);
}
