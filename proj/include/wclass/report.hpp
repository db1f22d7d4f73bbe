#pragma once

// Report serialization. A JSON report has the top-level keys schema_version,
// command, config, results and timing. The config object doubles as the
// config-file format. Complex numbers are written as [re, im].

#include <string>
#include <vector>

#include <json.hpp>

#include "wclass/montecarlo.hpp"
#include "wclass/protocol.hpp"

namespace wclass::report {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::ordered_json;

Json to_json(const Proportion& p);
Json to_json(const Estimate& e);
Json to_json(Complex z);
Complex complex_from_json(const Json& j);

Json protocol_config_json(const ProtocolConfig& cfg);
// Overwrites the fields present in `j`; unknown keys and bad values throw PreconditionError.
void apply_protocol_config(const Json& j, ProtocolConfig& cfg);

Json run_report_json(const RunReport& r);
Json sweep_json(const std::vector<SweepRow>& rows);
Json teleport_report_json(const TeleportReport& r);

// Attempt totals for the timing block.
Json run_timing_json(const RunReport& r);

Json envelope(const std::string& command, Json config, Json results, Json timing);

// Columns n, p_c_hat, mean_time_s, predicted_time_s, ratio_to_prev, c_n_hat, fidelity_mean.
std::string sweep_csv(const std::vector<SweepRow>& rows);

// Indented JSON with a trailing newline.
std::string dump(const Json& j);

}  // namespace wclass::report
