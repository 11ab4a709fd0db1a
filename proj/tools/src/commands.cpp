#include "commands.hpp"

#include <cmath>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <fqc/gates.hpp>
#include <fqc/parallel.hpp>
#include <fqc/state_prep.hpp>

namespace fqc::app {

using nlohmann::json;

namespace {

json parameters_json(const ExperimentConfig& cfg)
{
    const auto rotor = cfg.rotor_config();
    return {{"delta0_hz", cfg.spin.delta0_hz},
            {"delta_hz", cfg.spin.delta_hz},
            {"eta", cfg.spin.eta},
            {"alpha_deg", cfg.spin.alpha_deg},
            {"beta_deg", cfg.spin.beta_deg},
            {"gamma_deg", cfg.spin.gamma_deg},
            {"spinning_hz", cfg.rotor.spinning_hz},
            {"rotor_angle_deg", rotor.theta * 180.0 / kPi}};
}

json truncation_json(const ResolvedTruncation& t)
{
    return {{"K", t.K}, {"mode", t.automatic ? "auto" : "fixed"}, {"sum_A", t.sum_A}, {"deficit", 1.0 - t.sum_A},
            {"converged", t.converged}};
}

json summary_head(const std::string& command, const ExperimentConfig& cfg)
{
    return {{"schema_version", 1}, {"command", command}, {"seed", cfg.seed}, {"parameters", parameters_json(cfg)}};
}

std::string csv(const Spectrum& s)
{
    std::ostringstream os;
    write_spectrum_csv(os, s);
    return os.str();
}

std::string csv(const FidTrace& f)
{
    std::ostringstream os;
    write_fid_csv(os, f);
    return os.str();
}

void check_spin(int p)
{
    if (p != 0 && p != 1)
        throw InvalidArgument("spin index p must be 0 or 1, got " + std::to_string(p));
}

void check_mode(int m, int K)
{
    if (std::abs(m) > K)
        throw InvalidArgument("mode m=" + std::to_string(m) + " lies outside the truncation K=" + std::to_string(K));
}

void save_config(const ExperimentConfig& cfg, OutputDir& out)
{
    out.write("config.yaml", serialize_config(cfg), "config");
}

}  // namespace

int cmd_spectrum(const ExperimentConfig& cfg, int p, int m, const std::string& mode, OutputDir& out)
{
    if (mode != "crystal" && mode != "powder")
        throw InvalidArgument("unknown spectrum mode '" + mode + "' (crystal or powder)");
    check_spin(p);
    const auto params = cfg.spin_params();
    const auto rotor = cfg.rotor_config();
    const auto trunc = resolve_truncation(cfg);
    check_mode(m, trunc.K);
    const auto grid = cfg.fid_grid();

    json s = summary_head("spectrum", cfg);
    s["mode"] = mode;
    s["state"] = {{"p", p}, {"m", m}};
    s["truncation"] = truncation_json(trunc);
    s["grid"] = {{"points", grid.n}, {"dwell_s", grid.resolved_dwell(rotor)}};
    s["detection"] = to_string(cfg.readout.detection);
    s["broadening_hz"] = cfg.readout.broadening_hz;

    int code = 0;
    FidTrace fid;
    Spectrum spec;
    if (mode == "crystal") {
        fid = analytic_fid(p, m, params, rotor, trunc.K, cfg.readout.detection, grid);
        spec = spectrum_of(fid, cfg.readout.broadening_hz);
        // a stick at omega shows up at -omega / 2pi
        const double center = -eps(p) * params.delta0 / kTwoPi;
        json sticks = json::array();
        for (const auto& st : analytic_sticks(p, m, params, rotor, trunc.K)) {
            const double f = -st.omega / kTwoPi;
            // sideband index n of A_n: omega = eps_p (delta0 + n w_r)
            const int n = static_cast<int>(std::lround((eps(p) * st.omega - params.delta0) / rotor.omega_r));
            sticks.push_back({{"order", n},
                              {"frequency_hz", f},
                              {"offset_hz", f - center},
                              {"re", st.amplitude.real()},
                              {"im", st.amplitude.imag()}});
        }
        s["center_hz"] = center;
        s["sticks"] = sticks;
    } else {
        // the configured orientation says nothing about the widest crystallite
        const int K = trunc.automatic ? std::max(trunc.K, powder_truncation(params, rotor, cfg.truncation.tolerance))
                                      : trunc.K;
        s["truncation"]["powder_K"] = K;
        auto pg = PowderGrid::uniform(cfg.powder.beta_gamma_points, cfg.powder.rotor_phases);
        PowderOptions o;
        o.broadening_hz = cfg.readout.broadening_hz;
        o.check_convergence = cfg.powder.check_convergence;
        o.detection = cfg.readout.detection;
        auto res = powder_spectrum(p, m, params, rotor, K, pg, grid, o);
        fid = res.fid;
        spec = res.spectrum;
        s["powder"] = {{"beta_gamma_points", cfg.powder.beta_gamma_points},
                       {"rotor_phases", cfg.powder.rotor_phases},
                       {"orientations", pg.points.size()},
                       {"imaginary_residue", imaginary_residue(res.spectrum)},
                       {"doubling_change", cfg.powder.check_convergence ? json(res.doubling_change) : json(nullptr)},
                       {"converged", !res.warning.has_value()}};
        if (res.warning) {
            s["powder"]["warning"] = *res.warning;
            std::cerr << "fqc: " << *res.warning << "\n";
            code = 1;
        }
    }
    out.write("fid.csv", csv(fid), "fid");
    out.write("spectrum.csv", csv(spec), "spectrum");
    s["files"] = {{"fid", "fid.csv"}, {"spectrum", "spectrum.csv"}};
    s["converged"] = trunc.converged && code == 0;
    out.write_json("summary.json", s, "summary");
    save_config(cfg, out);
    std::cout << "spectrum " << mode << " (p=" << p << ", m=" << m << ") K=" << trunc.K << " sum_A="
              << std::setprecision(12) << trunc.sum_A << "\n";
    return code;
}

int cmd_prepare(const ExperimentConfig& cfg, int p, int m, const std::string& method, OutputDir& out)
{
    if (method != "pass" && method != "gradient")
        throw InvalidArgument("unknown preparation method '" + method + "' (pass or gradient)");
    check_spin(p);
    const auto params = cfg.spin_params();
    const auto rotor = cfg.rotor_config();
    const auto trunc = resolve_truncation(cfg);
    check_mode(m, trunc.K);

    json s = summary_head("prepare", cfg);
    s["method"] = method;
    s["target"] = {{"p", p}, {"m", m}};
    s["truncation"] = truncation_json(trunc);

    double fidelity = 0.0;
    if (method == "gradient") {
        ModeTruncation tr{std::max(propagator_truncation(params, rotor), std::abs(m))};
        auto prep = prepare_by_gradient({p, m}, params, rotor, tr, cfg.prepare.z_samples);
        fidelity = prep.fidelity;
        auto ev = [](const GradientEvent& g) {
            return json{{"strength", g.strength.str()}, {"duration_s", g.duration.str()}};
        };
        s["gradient"] = {{"g1", ev(prep.g1)},
                         {"g2", ev(prep.g2)},
                         {"pulse", {{"flip_deg", prep.pulse.flip() * 180.0 / kPi}, {"phase", to_string(prep.pulse.phase)}}},
                         {"z_samples", cfg.prepare.z_samples},
                         {"propagator_K", tr.K},
                         {"input_coherence", prep.input_coherence},
                         {"output_coherence", prep.output_coherence}};
        std::ostringstream os;
        os << "p,n,population\n" << std::setprecision(12);
        for (int r = 0; r < tr.dim(); ++r) {
            auto idx = unflatten(r, tr);
            os << idx.p << "," << idx.n << "," << prep.output.matrix(r, r).real() << "\n";
        }
        out.write("populations.csv", os.str(), "populations");
        s["files"] = {{"populations", "populations.csv"}};
    } else {
        const int Kw = cfg.prepare.pass_orders;
        check_mode(m, Kw);
        auto thetas = equispaced_thetas(2 * Kw + 1);
        auto sweep = solve_pass_sweep(5, thetas);
        double worst = 0.0;
        for (std::size_t j = 0; j < sweep.size(); ++j)
            worst = std::max(worst, sweep[j].residual);
        if (worst > 1e-10) {
            std::ostringstream os;
            os << "PASS timing residual " << worst << " exceeds 1e-10";
            throw ScientificFailure(os.str());
        }
        auto a = sideband_amplitudes(params, rotor, Kw).A;
        SidebandProfile target{SidebandKind::target, Kw, std::vector<cplx>(2 * Kw + 1, 0.0)};
        target.at(m) = a[m];
        auto w = solve_profile_weights(target, thetas, a);

        // one rotor period of t2 keeps the sideband harmonics orthogonal
        std::vector<double> t2;
        for (int i = 0; i < 64; ++i)
            t2.push_back(rotor.period() * i / 64.0);
        std::vector<cplx> sim(t2.size(), 0.0);
        double model_gap = 0.0;
        for (std::size_t j = 0; j < sweep.size(); ++j) {
            auto f = simulate_pass_fid(sweep[j], params, rotor, t2, cfg.readout.rotor_phases);
            model_gap = std::max(model_gap, f.max_rel_diff);
            for (std::size_t i = 0; i < t2.size(); ++i)
                sim[i] += w.x[j] * f.simulated[i];
        }
        cplx overlap = 0.0;
        double ns = 0.0, nt = 0.0;
        for (std::size_t i = 0; i < t2.size(); ++i) {
            const cplx want = a[m] * std::exp(kI * (params.delta0 + m * rotor.omega_r) * t2[i]);
            overlap += std::conj(want) * sim[i];
            ns += std::norm(sim[i]);
            nt += std::norm(want);
        }
        fidelity = ns > 0.0 && nt > 0.0 ? std::norm(overlap) / (ns * nt) : 0.0;

        std::ostringstream os;
        os << "theta,tau1,tau2,tau3,tau4,tau5,residual,weight_re,weight_im\n" << std::setprecision(12);
        json sched = json::array();
        for (std::size_t j = 0; j < sweep.size(); ++j) {
            os << thetas[j];
            for (double x : sweep[j].positions)
                os << "," << x;
            os << "," << sweep[j].residual << "," << w.x[j].real() << "," << w.x[j].imag() << "\n";
            sched.push_back({{"theta", thetas[j]}, {"positions_rad", sweep[j].positions}, {"residual", sweep[j].residual},
                             {"weight", {w.x[j].real(), w.x[j].imag()}}});
        }
        out.write("pass_schedule.csv", os.str(), "schedule");
        s["pass"] = {{"orders", Kw},
                     {"theta_T", sweep.front().theta_T},
                     {"max_timing_residual", worst},
                     {"schedule", sched},
                     {"weight_residual", w.residual},
                     {"weight_condition", w.condition},
                     {"realizable", w.realizable},
                     {"closed_form_gap", model_gap}};
        s["files"] = {{"schedule", "pass_schedule.csv"}};
    }
    s["fidelity"] = fidelity;
    out.write_json("summary.json", s, "summary");
    save_config(cfg, out);
    std::cout << "prepare " << method << " (p=" << p << ", m=" << m << ") fidelity=" << std::setprecision(12)
              << fidelity << "\n";
    return 0;
}

int cmd_grover(const ExperimentConfig& cfg, const std::string& marked, bool compiled, OutputDir& out)
{
    const auto working = default_working_states();
    std::vector<int> items;
    if (marked == "all") {
        for (int i = 0; i < static_cast<int>(working.size()); ++i)
            items.push_back(i);
    } else {
        std::size_t used = 0;
        int v = -1;
        try {
            v = std::stoi(marked, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != marked.size() || v < 0 || v >= static_cast<int>(working.size()))
            throw InvalidArgument("marked item must be 0.." + std::to_string(working.size() - 1) + " or all, got '" +
                                  marked + "'");
        items.push_back(v);
    }
    const auto params = cfg.spin_params();
    const auto rotor = cfg.rotor_config();
    GroverOptions opts;
    opts.compiled = compiled;
    opts.grid = cfg.fid_grid();
    opts.broadening_hz = cfg.readout.broadening_hz;

    struct Outcome {
        GroverResult result;
        std::string error;
    };
    std::vector<Outcome> outcomes(items.size());
    // independent searches; results land by index and are written afterwards in order
    for_each_chunk(items.size(), 1, 0, [&](std::size_t, std::size_t b, std::size_t) {
        GroverInstance inst;
        inst.marked = working[static_cast<std::size_t>(items[b])];
        try {
            outcomes[b].result = run_grover(inst, params, rotor, ModeTruncation{1}, opts);
        } catch (const ScientificFailure& e) {
            outcomes[b].error = e.what();
        }
    });

    auto index_of = [&](FloquetIndex f) {
        for (std::size_t i = 0; i < working.size(); ++i)
            if (working[i] == f)
                return static_cast<int>(i);
        return -1;
    };
    json s = summary_head("grover", cfg);
    s["compiled"] = compiled;
    s["iterations"] = grover_iterations(static_cast<int>(working.size()));
    json runs = json::array();
    int correct = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto label = working[static_cast<std::size_t>(items[i])];
        json r{{"marked", items[i]}, {"marked_state", {{"p", label.p}, {"m", label.n}}}};
        if (!outcomes[i].error.empty()) {
            r["identified"] = nullptr;
            r["error"] = outcomes[i].error;
            std::cerr << "fqc: marked " << items[i] << ": " << outcomes[i].error << "\n";
        } else {
            const auto& g = outcomes[i].result;
            const std::string file = "grover_" + std::to_string(items[i]) + "_spectrum.csv";
            out.write(file, csv(g.spectrum), "spectrum");
            const int id = index_of(g.identified);
            correct += id == items[i];
            r["identified"] = id;
            r["identified_state"] = {{"p", g.identified.p}, {"m", g.identified.n}};
            r["fidelity"] = g.fidelity;
            r["margin"] = g.margin;
            r["populations"] = g.populations;
            r["spectrum"] = file;
            if (compiled) {
                json blocks = json::array();
                for (const auto& blk : g.blocks) {
                    json ev = json::array();
                    for (const auto& e : blk.events)
                        ev.push_back({{"kind", to_string(e.kind)}, {"label", e.label}, {"duration_s", e.duration}});
                    blocks.push_back({{"events", ev}, {"asl_cancellation", blk.asl_cancellation}});
                }
                r["blocks"] = blocks;
            }
        }
        runs.push_back(r);
        std::cout << "grover marked=" << items[i] << " identified="
                  << (r["identified"].is_null() ? std::string("none") : std::to_string(r["identified"].get<int>()))
                  << "\n";
    }
    s["runs"] = runs;
    s["correct"] = correct;
    out.write_json("summary.json", s, "summary");
    save_config(cfg, out);
    return correct == static_cast<int>(items.size()) ? 0 : 1;
}

int cmd_validate(const ExperimentConfig& cfg, Suite suite, OutputDir& out)
{
    auto rep = run_validation(cfg, suite);
    out.write_json("report.json", rep.to_json(), "report");
    save_config(cfg, out);
    for (const auto& c : rep.checks)
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " measured=" << std::setprecision(6) << c.measured
                  << " " << c.comparison << " " << c.limit << "\n";
    return rep.passed() ? 0 : 1;
}

}  // namespace fqc::app
