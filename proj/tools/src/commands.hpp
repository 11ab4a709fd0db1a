#pragma once

#include <string>

#include "config.hpp"
#include "output.hpp"
#include "validate.hpp"

namespace fqc::app {

// Each returns the process exit code for outcomes it reports itself (0 or 1). Bad input throws
// InvalidArgument, numerical dead ends throw ScientificFailure; main() maps those to 2 and 1.

int cmd_spectrum(const ExperimentConfig& cfg, int p, int m, const std::string& mode, OutputDir& out);
int cmd_prepare(const ExperimentConfig& cfg, int p, int m, const std::string& method, OutputDir& out);
// marked: working-state index 0..3 or "all"
int cmd_grover(const ExperimentConfig& cfg, const std::string& marked, bool compiled, OutputDir& out);
int cmd_validate(const ExperimentConfig& cfg, Suite suite, OutputDir& out);

}  // namespace fqc::app
