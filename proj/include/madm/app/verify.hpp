#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace madm::app {

const std::vector<std::string>& verify_suites();

/// Runs one property suite. The verdict has "suite", "pass" and the measured
/// quantities; an unknown name raises ConfigError.
nlohmann::json run_verify_suite(const std::string& name, std::uint64_t seed);

}  // namespace madm::app
