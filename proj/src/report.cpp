#include "wclass/report.hpp"

#include <cstdio>
#include <sstream>

#include "wclass/errors.hpp"

namespace wclass::report {

namespace {

template <typename T>
T read(const Json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw PreconditionError(std::string("config key '") + key + "': " + e.what());
    }
}

std::string csv_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

Json to_json(const Proportion& p) {
    return Json{{"value", p.value}, {"std_error", p.std_error}, {"wilson_lower", p.lower}, {"wilson_upper", p.upper}};
}

Json to_json(const Estimate& e) { return Json{{"value", e.value}, {"std_error", e.std_error}}; }

Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from_json(const Json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw PreconditionError("complex values are written as [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

Json protocol_config_json(const ProtocolConfig& cfg) {
    Json j;
    j["n"] = cfg.n;
    j["p_e"] = cfg.p_e;
    j["eta"] = cfg.eta;
    j["phases"] = cfg.phases;
    j["n_a"] = cfg.n_a ? Json(*cfg.n_a) : Json(nullptr);
    j["t0"] = cfg.t0;
    j["truncation_cap"] = cfg.truncation_cap;
    j["max_attempts"] = cfg.max_attempts;
    j["seed"] = cfg.seed;
    j["double_pairs"] = cfg.double_pairs;
    return j;
}

void apply_protocol_config(const Json& j, ProtocolConfig& cfg) {
    if (!j.is_object()) throw PreconditionError("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "n") cfg.n = read<unsigned>(j, "n");
        else if (key == "p_e") cfg.p_e = read<double>(j, "p_e");
        else if (key == "eta") cfg.eta = read<double>(j, "eta");
        else if (key == "phases") cfg.phases = read<std::vector<double>>(j, "phases");
        else if (key == "n_a") cfg.n_a = value.is_null() ? std::nullopt : std::optional(read<std::uint64_t>(j, "n_a"));
        else if (key == "t0") cfg.t0 = read<double>(j, "t0");
        else if (key == "truncation_cap") cfg.truncation_cap = read<unsigned>(j, "truncation_cap");
        else if (key == "max_attempts") cfg.max_attempts = read<std::uint64_t>(j, "max_attempts");
        else if (key == "seed") cfg.seed = read<std::uint64_t>(j, "seed");
        else if (key == "double_pairs") cfg.double_pairs = read<bool>(j, "double_pairs");
        else throw PreconditionError("unknown config key '" + key + "'");
    }
}

Json run_report_json(const RunReport& r) {
    Json j;
    j["trials"] = r.trials;
    j["successes"] = r.successes;
    j["stage_names"] = r.stage_names;
    j["mean_attempts_per_stage"] = r.mean_attempts_per_stage;
    Json stages = Json::array();
    for (const auto& p : r.stage_success) stages.push_back(to_json(p));
    j["stage_success"] = std::move(stages);
    j["p_c_hat"] = to_json(r.p_c_hat);
    j["pass_success"] = to_json(r.pass_success);
    j["mean_passes"] = to_json(r.mean_passes);
    j["mean_time_s"] = to_json(r.mean_time_s);
    j["predicted_time_s"] = r.predicted_time_s;
    j["c_n_hat"] = r.c_n_hat ? to_json(*r.c_n_hat) : Json(nullptr);
    j["fidelity_mean"] = to_json(r.fidelity_mean);
    j["overflow_trials"] = r.overflow_trials;
    return j;
}

Json run_timing_json(const RunReport& r) {
    double passes = r.mean_passes.value * static_cast<double>(r.successes);
    double attempts = 0.0;
    for (double a : r.mean_attempts_per_stage) attempts += a * static_cast<double>(r.successes);
    return Json{{"total_passes", passes}, {"total_attempts", attempts}};
}

Json sweep_json(const std::vector<SweepRow>& rows) {
    Json arr = Json::array();
    for (const auto& row : rows) {
        Json j;
        j["n"] = row.n;
        j["report"] = run_report_json(row.report);
        j["ratio_to_prev"] = row.ratio_to_prev ? to_json(*row.ratio_to_prev) : Json(nullptr);
        j["predicted_ratio"] = row.predicted_ratio ? Json(*row.predicted_ratio) : Json(nullptr);
        arr.push_back(std::move(j));
    }
    return Json{{"rows", std::move(arr)}};
}

Json teleport_report_json(const TeleportReport& r) {
    Json j;
    j["trials"] = r.trials;
    j["successes"] = r.successes;
    j["mean_rounds"] = to_json(r.mean_rounds);
    j["mean_w_passes"] = to_json(r.mean_w_passes);
    j["vacuum_fraction"] = to_json(r.vacuum_fraction);
    j["noise_fraction"] = to_json(r.noise_fraction);
    j["localized"] = r.localized;
    j["carol_holds"] = to_json(r.carol_holds);
    j["output_fidelity"] = to_json(r.output_fidelity);
    j["holder_fidelity"] = to_json(r.holder_fidelity);
    j["min_holder_fidelity"] = r.min_holder_fidelity;
    return j;
}

Json envelope(const std::string& command, Json config, Json results, Json timing) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = command;
    j["config"] = std::move(config);
    j["results"] = std::move(results);
    j["timing"] = std::move(timing);
    return j;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "n,p_c_hat,mean_time_s,predicted_time_s,ratio_to_prev,c_n_hat,fidelity_mean\n";
    for (const auto& row : rows) {
        const RunReport& r = row.report;
        out << row.n << ',' << csv_number(r.p_c_hat.value) << ',' << csv_number(r.mean_time_s.value) << ','
            << csv_number(r.predicted_time_s) << ',' << (row.ratio_to_prev ? csv_number(row.ratio_to_prev->value) : "")
            << ',' << (r.c_n_hat ? csv_number(r.c_n_hat->value) : "") << ',' << csv_number(r.fidelity_mean.value)
            << '\n';
    }
    return out.str();
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace wclass::report
