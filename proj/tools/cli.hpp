#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aivsim/allocation.hpp"
#include "aivsim/config.hpp"
#include "aivsim/simulation.hpp"

namespace aivsim::cli {

enum class Format { Table, Csv, Json };

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kConfigError = 2,
    kRoutingError = 3,
    kFaulted = 4,
};

struct RunRequest {
    std::vector<allocation::Scenario> scenarios;
    int replications = 1;
    sim::SimConfig config;
    Format format = Format::Table;
    std::optional<std::filesystem::path> out;
    std::optional<std::filesystem::path> trace;
    bool compare = false;
    int jobs = 1;
};

/// Parses the command line into a request: shipped defaults, then the config
/// file, then --set overrides, then the dedicated flags. Returns nullopt
/// after printing help. Throws sim::ConfigError (or CLI11 errors) on bad
/// input.
std::optional<RunRequest> parse_request(int argc, const char* const* argv);

struct RunRecord {
    allocation::Scenario scenario;
    int replication = 0;
    std::uint64_t seed = 0;
    sim::Metrics metrics;
};

/// Runs replications x scenarios. Results come back ordered by (scenario,
/// replication) whatever the number of worker threads.
std::vector<RunRecord> execute(const RunRequest& req);

void write_report(const RunRequest& req, const std::vector<RunRecord>& runs, std::ostream& out);

/// Executes the request and writes the report to --out or `out`.
int run_and_report(const RunRequest& req, std::ostream& out, std::ostream& err);

/// Whole entry point; maps errors to exit codes.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aivsim::cli
