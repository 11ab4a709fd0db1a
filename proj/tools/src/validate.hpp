#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"

namespace fqc::app {

enum class Suite { fast, full };

Suite parse_suite(const std::string& s);
std::string to_string(Suite s);

struct Check {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double limit = 0.0;
    std::string comparison;  // "<=" or ">="
    std::string detail;
};

struct ValidationReport {
    Suite suite = Suite::fast;
    std::uint64_t seed = 0;
    std::string config_sha256;
    std::vector<Check> checks;

    bool passed() const;
    // No timings or host details, so equal inputs give equal bytes.
    nlohmann::json to_json() const;
};

ValidationReport run_validation(const ExperimentConfig& cfg, Suite suite);

}  // namespace fqc::app
