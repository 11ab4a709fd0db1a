#include "validate.hpp"

#include <cmath>
#include <functional>
#include <random>

#include <fqc/gates.hpp>
#include <fqc/state_prep.hpp>

#include "output.hpp"

namespace fqc::app {

namespace {

struct Context {
    ExperimentConfig cfg;
    SpinParams params;
    RotorConfig rotor;
    Suite suite;
    std::mt19937_64 rng;

    bool full() const { return suite == Suite::full; }
};

SpinParams random_params(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SpinParams p;
    p.delta0 = kTwoPi * (u(rng) - 0.5) * 2000.0;
    p.delta = kTwoPi * u(rng) * 12000.0;
    p.eta = u(rng);
    p.alpha = kTwoPi * u(rng);
    p.beta = kPi * u(rng);
    p.gamma = kTwoPi * u(rng);
    return p;
}

Mat random_unitary(std::mt19937_64& rng, int dim)
{
    std::normal_distribution<double> g;
    Mat a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            a(i, j) = cplx(g(rng), g(rng));
    Eigen::HouseholderQR<Mat> qr(a);
    return qr.householderQ();
}

double max_diff(const FidTrace& a, const FidTrace& b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        d = std::max(d, std::abs(a.samples[i] - b.samples[i]));
    return d;
}

FloquetDensity pure(int p, int m, int K) { return make_pseudo_pure({{p, m}, 1.0}, ModeTruncation{K}); }

Rational period_of(const RotorConfig& rotor)
{
    return Rational(1000000, std::llround(rotor.omega_r / kTwoPi * 1e6));
}

double oracle_gap(const SpinParams& p, const RotorConfig& r)
{
    const int K = propagator_truncation(p, r);
    auto eig = diagonalize(cs_floquet_hamiltonian(p, r, {K}));
    auto h = [&](double t) { return cs_hamiltonian(p, r, t); };
    double worst = 0.0;
    for (int i = 1; i <= 8; ++i) {
        const double t = 2.0 * r.period() * i / 8.0;
        Mat2 ref = stepped_propagator_oracle(h, t, 1 << 14);
        Mat2 got = contract_propagator(floquet_propagator(eig, t), t);
        worst = std::max(worst, (ref - got).cwiseAbs().maxCoeff());
    }
    return worst;
}

using Measure = std::function<double(std::string&)>;

void run(std::vector<Check>& out, const std::string& name, const std::string& cmp, double limit, const Measure& fn)
{
    Check c;
    c.name = name;
    c.comparison = cmp;
    c.limit = limit;
    try {
        c.measured = fn(c.detail);
        c.passed = cmp == "<=" ? c.measured <= limit : c.measured >= limit;
    } catch (const std::exception& e) {
        c.passed = false;
        c.measured = std::nan("");
        c.detail = e.what();
    }
    out.push_back(std::move(c));
}

void sideband_checks(Context& ctx, std::vector<Check>& out)
{
    run(out, "parseval", "<=", 1e-8, [&](std::string& detail) {
        auto K = resolve_truncation(ctx.cfg);
        detail = "K=" + std::to_string(K.K) + (K.automatic ? " (auto)" : " (fixed)");
        return std::abs(1.0 - K.sum_A);
    });
    run(out, "propagator_oracle", "<=", 1e-6, [&](std::string& detail) {
        const int draws = ctx.full() ? 20 : 4;
        double worst = oracle_gap(ctx.params, ctx.rotor);
        for (int d = 0; d < draws; ++d)
            worst = std::max(worst, oracle_gap(random_params(ctx.rng), ctx.rotor));
        detail = "config parameters and " + std::to_string(draws) + " random draws, two rotor periods";
        return worst;
    });
}

void readout_checks(Context& ctx, std::vector<Check>& out)
{
    run(out, "readout_simulation_p1", "<=", 1e-6, [&](std::string& detail) {
        const int K = adaptive_truncation(ctx.params, ctx.rotor);
        FidGrid g{128, 0.0};
        double worst = 0.0;
        for (int m : {-1, 0, 1}) {
            auto sim = simulate_fid(pure(1, m, 1), ctx.params, ctx.rotor, g);
            worst = std::max(worst, max_diff(sim, analytic_fid(1, m, ctx.params, ctx.rotor, K, Detection::quadrature, g)));
        }
        if (ctx.full()) {
            FidGrid small{64, 0.0};
            for (int d = 0; d < 5; ++d) {
                auto p = random_params(ctx.rng);
                const int Kd = adaptive_truncation(p, ctx.rotor) + 2;
                for (int m : {-2, 0, 2}) {
                    auto sim = simulate_fid(pure(1, m, 2), p, ctx.rotor, small, {0, 32, 0});
                    worst = std::max(worst, max_diff(sim, analytic_fid(1, m, p, ctx.rotor, Kd, Detection::quadrature, small)));
                }
            }
        }
        detail = "simulated FID against the closed form, spin index 1";
        return worst;
    });
    run(out, "readout_spin_flip", "<=", 1e-10, [&](std::string& detail) {
        FidGrid g{64, 0.0};
        double worst = 0.0;
        for (int m : {-1, 0, 1}) {
            auto up = simulate_fid(pure(0, m, 1), ctx.params, ctx.rotor, g, {0, 16, 0});
            auto down = simulate_fid(pure(1, m, 1), ctx.params, ctx.rotor, g, {0, 16, 0});
            for (std::size_t i = 0; i < up.samples.size(); ++i)
                worst = std::max(worst, std::abs(up.samples[i] + down.samples[i]));
        }
        detail = "simulated spin-up FID is the negated spin-down FID";
        return worst;
    });
    run(out, "stick_support", "<=", 1e-10, [&](std::string& detail) {
        SpinParams p = ctx.params;
        p.delta0 = 0.0;
        const int K = 3;
        const double fr = ctx.rotor.omega_r / kTwoPi;
        double worst = 0.0;
        for (int spin : {0, 1})
            for (int m = -K; m <= K; ++m) {
                auto s = spectrum_of(analytic_fid(spin, m, p, ctx.rotor, K, Detection::quadrature, {1024, 0.0}));
                for (std::size_t i = 0; i < s.amplitude.size(); ++i) {
                    const double idx = s.frequency_hz[i] / fr;
                    const bool on_grid = std::abs(idx - std::round(idx)) < 1e-9;
                    const int j = static_cast<int>(std::lround(idx * eps(spin)));
                    if (!(on_grid && j >= -K + m && j <= K + m))
                        worst = std::max(worst, std::abs(s.amplitude[i]));
                }
            }
        detail = "largest amplitude outside the index set, K=3";
        return worst;
    });
    run(out, "phase_dichotomy", "<=", 0.0, [&](std::string& detail) {
        const int K = std::min(resolve_truncation(ctx.cfg).K, 16);
        double worst = 0.0;
        for (int m = -1; m <= 1; ++m) {
            auto a = analytic_sticks(0, m, ctx.params, ctx.rotor, K);
            auto b = analytic_sticks(1, m, ctx.params, ctx.rotor, K);
            for (std::size_t i = 0; i < a.size(); ++i)
                worst = std::max({worst, std::abs(a[i].amplitude + b[i].amplitude), std::abs(a[i].omega + b[i].omega)});
        }
        detail = "spin index 0 sticks are the sign-flipped spin index 1 sticks";
        return worst;
    });
    if (ctx.full()) {
        const FidGrid g = FidGrid::for_rotor(ctx.rotor, 1024);
        PowderResult res;
        std::string err;
        try {
            const int K = powder_truncation(ctx.params, ctx.rotor);
            res = powder_spectrum(1, 0, ctx.params, ctx.rotor, K,
                                  PowderGrid::uniform(ctx.cfg.powder.beta_gamma_points, ctx.cfg.powder.rotor_phases), g,
                                  {0.0, true, 0});
        } catch (const std::exception& e) {
            err = e.what();
        }
        auto rethrow = [&] {
            if (!err.empty())
                throw ScientificFailure(err);
        };
        run(out, "powder_imaginary_residue", "<=", 1e-3, [&](std::string&) {
            rethrow();
            return imaginary_residue(res.spectrum);
        });
        run(out, "powder_grid_doubling", "<=", 1e-2, [&](std::string&) {
            rethrow();
            return res.doubling_change;
        });
    }
}

void prep_checks(Context& ctx, std::vector<Check>& out)
{
    const int n_thetas = 16;
    run(out, "pass_timings", "<=", 1e-10, [&](std::string& detail) {
        auto thetas = equispaced_thetas(n_thetas);
        auto sweep = solve_pass_sweep(5, thetas);
        double worst = 0.0;
        for (std::size_t j = 0; j < sweep.size(); ++j)
            worst = std::max(worst, pass_residual(sweep[j].positions, thetas[j], sweep[j].theta_T));
        detail = std::to_string(n_thetas) + "-point pitch sweep";
        return worst;
    });
    run(out, "pass_resynthesis", "<=", 1e-6, [&](std::string& detail) {
        const int K = 4;
        auto a = sideband_amplitudes(ctx.params, ctx.rotor, K).A;
        SidebandProfile target{SidebandKind::target, K, std::vector<cplx>(2 * K + 1, 0.0)};
        target.at(1) = a[1];
        auto w = solve_profile_weights(target, equispaced_thetas(2 * K + 1), a);
        std::vector<double> t2;
        for (int i = 0; i < 64; ++i)
            t2.push_back(i * 9e-6);
        auto got = resynthesize(w, a, ctx.params.delta0, ctx.rotor.omega_r, t2);
        double worst = 0.0;
        for (std::size_t i = 0; i < t2.size(); ++i)
            worst = std::max(worst, std::abs(got[i] - a[1] * std::exp(kI * (ctx.params.delta0 + ctx.rotor.omega_r) * t2[i])));
        detail = "single first-order sideband target, K=4";
        return worst;
    });
    // Fraction of predicate/simulation disagreements.
    run(out, "gradient_predicate", "<=", 0.0, [&](std::string& detail) {
        std::uniform_int_distribution<int> bit(0, 1), ord(-3, 3), gi(1, 4);
        const Rational T = period_of(ctx.rotor);
        int bad = 0, survived = 0;
        for (int trial = 0; trial < 100; ++trial) {
            int pp = bit(ctx.rng), qq = bit(ctx.rng), k = ord(ctx.rng), l = ord(ctx.rng);
            GradientEvent g1{Rational(2 * gi(ctx.rng)), T};
            GradientEvent g2{Rational(2 * gi(ctx.rng)), T};
            if (trial % 3 == 0) {
                g2 = g1;
                l = -eps(pp) * eps(qq) * k;
            }
            const bool pred = gradient_selection_survives(pp, qq, k, l, g1, g2, ctx.rotor.omega_r);
            const double amp = pathway_amplitude(pp, qq, k, l, g1, g2, ctx.params, ctx.rotor, 1024);
            survived += pred;
            bad += pred ? amp < 0.99 : amp > 1e-3;
        }
        detail = "100 random pathways, " + std::to_string(survived) + " predicted to survive";
        return bad / 100.0;
    });
    run(out, "gradient_preparation", ">=", 0.999, [&](std::string& detail) {
        ModeTruncation tr{propagator_truncation(ctx.params, ctx.rotor)};
        double worst = 1.0;
        for (int spin : ctx.full() ? std::vector<int>{0, 1} : std::vector<int>{0})
            worst = std::min(worst, prepare_by_gradient({spin, 0}, ctx.params, ctx.rotor, tr, ctx.cfg.prepare.z_samples).fidelity);
        detail = std::to_string(ctx.cfg.prepare.z_samples) + " z-samples";
        return worst;
    });
}

void gate_checks(Context& ctx, std::vector<Check>& out)
{
    const ModeTruncation tr{1};
    run(out, "grover_ideal", "<=", 1e-12, [&](std::string& detail) {
        double worst = 0.0;
        int found = 0;
        for (auto marked : default_working_states()) {
            GroverInstance inst;
            inst.marked = marked;
            auto r = run_grover(inst, ctx.params, ctx.rotor, tr);
            worst = std::max(worst, 1.0 - r.fidelity);
            found += r.identified == marked;
        }
        detail = std::to_string(found) + "/4 identified";
        if (found != 4)
            throw ScientificFailure(detail);
        return worst;
    });
    run(out, "grover_compiled", ">=", 0.999, [&](std::string& detail) {
        double worst = 1.0;
        int found = 0;
        GroverOptions o;
        o.compiled = true;
        for (auto marked : default_working_states()) {
            GroverInstance inst;
            inst.marked = marked;
            auto r = run_grover(inst, ctx.params, ctx.rotor, tr, o);
            worst = std::min(worst, r.fidelity);
            found += r.identified == marked;
        }
        detail = std::to_string(found) + "/4 identified";
        if (found != 4)
            throw ScientificFailure(detail);
        return worst;
    });
    run(out, "gate_completeness", "<=", 1e-8, [&](std::string& detail) {
        std::vector<FloquetIndex> five{{0, 0}, {1, 0}, {0, 1}, {1, 1}, {0, -1}};
        auto basis = peak_manipulation_basis(five, 4, ModeTruncation{2}, ctx.rotor.omega_r);
        double worst = 0.0;
        for (int i = 0; i < 20; ++i)
            worst = std::max(worst, expand_in_basis(random_unitary(ctx.rng, 4), basis, five).residual);
        detail = "20 random 4x4 unitaries";
        return worst;
    });
}

}  // namespace

Suite parse_suite(const std::string& s)
{
    if (s == "fast")
        return Suite::fast;
    if (s == "full")
        return Suite::full;
    throw InvalidArgument("unknown suite '" + s + "' (fast or full)");
}

std::string to_string(Suite s) { return s == Suite::fast ? "fast" : "full"; }

bool ValidationReport::passed() const
{
    for (const auto& c : checks)
        if (!c.passed)
            return false;
    return true;
}

nlohmann::json ValidationReport::to_json() const
{
    nlohmann::json j;
    j["schema_version"] = 1;
    j["suite"] = to_string(suite);
    j["seed"] = seed;
    j["config_sha256"] = config_sha256;
    j["passed"] = passed();
    auto arr = nlohmann::json::array();
    for (const auto& c : checks) {
        nlohmann::json e{{"name", c.name}, {"passed", c.passed}, {"comparison", c.comparison}, {"limit", c.limit},
                         {"detail", c.detail}};
        // NaN is not valid JSON
        e["measured"] = std::isfinite(c.measured) ? nlohmann::json(c.measured) : nlohmann::json(nullptr);
        arr.push_back(std::move(e));
    }
    j["checks"] = arr;
    return j;
}

ValidationReport run_validation(const ExperimentConfig& cfg, Suite suite)
{
    ValidationReport rep;
    rep.suite = suite;
    rep.seed = cfg.seed;
    ExperimentConfig hashed = cfg;
    hashed.output_directory.clear();  // where the report lands does not change what it says
    rep.config_sha256 = sha256_hex(serialize_config(hashed));
    Context ctx{cfg, cfg.spin_params(), cfg.rotor_config(), suite, std::mt19937_64(cfg.seed)};
    sideband_checks(ctx, rep.checks);
    readout_checks(ctx, rep.checks);
    prep_checks(ctx, rep.checks);
    gate_checks(ctx, rep.checks);
    return rep;
}

}  // namespace fqc::app
