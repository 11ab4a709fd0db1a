#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <fqc/parallel.hpp>

#include "commands.hpp"

using namespace fqc;
using namespace fqc::app;

namespace {

constexpr int kOk = 0;
constexpr int kScientific = 1;
constexpr int kUsage = 2;

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Floquet MAS NMR quantum-computing simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    app.add_option("--config", config_path, "YAML experiment config")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides output.directory)");
    app.add_option("--seed", seed, "seed for randomized checks (overrides seed)");
    app.add_option("--threads", threads, "worker threads, 0 = hardware")->check(CLI::NonNegativeNumber);

    int p = 1, m = 0;
    std::string mode = "crystal", method = "gradient", marked = "all", suite = "fast";
    bool compiled = false;

    auto* spectrum = app.add_subcommand("spectrum", "FID and spectrum of a Floquet state");
    spectrum->add_option("--p", p, "spin index (0 or 1)");
    spectrum->add_option("--m", m, "mode index");
    spectrum->add_option("--mode", mode, "crystal or powder")->check(CLI::IsMember({"crystal", "powder"}));

    auto* prepare = app.add_subcommand("prepare", "prepare a pseudo-pure Floquet state");
    prepare->add_option("--p", p, "spin index (0 or 1)");
    prepare->add_option("--m", m, "mode index");
    prepare->add_option("--method", method, "pass or gradient")->check(CLI::IsMember({"pass", "gradient"}));

    auto* grover = app.add_subcommand("grover", "two-qubit search over the working states");
    grover->add_option("--marked", marked, "working-state index 0..3, or all");
    grover->add_flag("--compiled", compiled, "realize gates as pulse blocks");

    auto* validate = app.add_subcommand("validate", "run the invariant suite");
    validate->add_option("--suite", suite, "fast or full")->check(CLI::IsMember({"fast", "full"}));

    for (auto* sub : {spectrum, prepare, grover, validate})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
        if (seed)
            cfg.seed = *seed;
        if (!out_dir.empty())
            cfg.output_directory = out_dir;
        if (threads > 0)
            set_default_threads(threads);

        OutputDir out(cfg.output_directory);
        int rc = kOk;
        std::string verb;
        if (*spectrum) {
            verb = "spectrum";
            rc = cmd_spectrum(cfg, p, m, mode, out);
        } else if (*prepare) {
            verb = "prepare";
            rc = cmd_prepare(cfg, p, m, method, out);
        } else if (*grover) {
            verb = "grover";
            rc = cmd_grover(cfg, marked, compiled, out);
        } else {
            verb = "validate";
            rc = cmd_validate(cfg, parse_suite(suite), out);
        }
        out.finish(verb);
        return rc;
    } catch (const InvalidArgument& e) {
        std::cerr << "fqc: error: " << e.what() << "\n";
        return kUsage;
    } catch (const ScientificFailure& e) {
        std::cerr << "fqc: failed: " << e.what() << "\n";
        return kScientific;
    } catch (const std::exception& e) {
        std::cerr << "fqc: failed: " << e.what() << "\n";
        return kScientific;
    }
}
