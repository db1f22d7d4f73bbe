#pragma once

// wclass-sim front end: argument parsing and command dispatch.
//
// Exit codes: 0 success, 1 insufficient data, 2 usage error (nothing
// written), 3 I/O failure.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "wclass/errors.hpp"
#include "wclass/protocol.hpp"
#include "wclass/report.hpp"

namespace wclass::cli {

enum ExitCode : int { kOk = 0, kInsufficientData = 1, kUsage = 2, kIo = 3 };

enum class Command { epr, w_state, teleport, scaling_sweep };
enum class Format { json, csv_summary };

class UsageError : public Error {
  public:
    using Error::Error;
};

// --help; carries the help text.
class HelpRequested : public Error {
  public:
    using Error::Error;
};

struct ExperimentSpec {
    Command command = Command::w_state;
    ProtocolConfig config;
    Complex alpha = 1.0;
    Complex beta = 0.0;
    std::uint64_t trials = 1000;
    unsigned n_min = 3;
    unsigned n_max = 5;
    // Empty writes to stdout.
    std::string output_path;
    Format format = Format::json;
    unsigned workers = 0;
    bool seed_auto = false;
};

std::string command_name(Command c);

// Throws UsageError or HelpRequested.
ExperimentSpec parse_args(const std::vector<std::string>& args);
ExperimentSpec parse_args(int argc, const char* const* argv);

// The report's config object; also accepted by --config.
report::Json spec_config_json(const ExperimentSpec& spec);

// Runs the experiment and returns the report text.
struct RunOutput {
    std::string text;
    int exit_code = kOk;
    // Human-readable lines for the diagnostic stream.
    std::vector<std::string> summary;
};
RunOutput execute(const ExperimentSpec& spec);

// Executes and writes the report.
int run(const ExperimentSpec& spec, std::ostream& out, std::ostream& err);

// Full entry point used by the wclass-sim binary.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wclass::cli
