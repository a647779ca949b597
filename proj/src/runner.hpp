#pragma once
#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>

#include "flow.hpp"
#include "gk.hpp"
#include "models.hpp"

namespace gkpot {

constexpr int kConfigSchemaVersion = 1;
constexpr int kReportSchemaVersion = 1;
const char* library_version();

struct RunConfig {
    nlohmann::json raw;
    std::optional<uint64_t> seed;
    int threads = 1;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
// threads from the config, then GKPOT_THREADS, then an explicit override (> 0)
int resolve_threads(const RunConfig& cfg, int override_threads);

struct Report {
    nlohmann::json doc;
    int exit_code = 0;
    std::string csv;
};

Report run_command(const RunConfig& cfg, const std::string& command);
Report cmd_verify(const RunConfig& cfg);
Report cmd_flow(const RunConfig& cfg);
Report cmd_scan(const RunConfig& cfg);
Report cmd_golden(const RunConfig& cfg, const std::string& golden_path);

void write_report(const Report& r, const std::string& dir, const std::string& prefix);

// pieces shared with the C API
MoritaModel build_model(const nlohmann::json& spec);
PotentialFn build_potential(const nlohmann::json& spec, int n);
BraneBisection build_brane(const RunConfig& cfg, const MoritaModel& m);

}  // namespace gkpot
