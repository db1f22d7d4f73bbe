#include "wclass/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "wclass/montecarlo.hpp"
#include "wclass/optics.hpp"

namespace wclass::cli {

namespace {

Command parse_command(const std::string& s) {
    if (s == "epr") return Command::epr;
    if (s == "w-state") return Command::w_state;
    if (s == "teleport") return Command::teleport;
    if (s == "scaling-sweep") return Command::scaling_sweep;
    throw UsageError("unknown command '" + s + "'");
}

std::vector<double> parse_phases(const std::string& s) {
    std::vector<double> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("--phases expects comma-separated numbers, got '" + s + "'");
        }
    }
    return out;
}

std::uint64_t parse_seed(const std::string& s) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used, 10);
        if (used != s.size() || s.front() == '-') throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError("--seed expects a non-negative integer or 'auto', got '" + s + "'");
    }
}

std::uint64_t auto_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

unsigned workers_from_env() {
    const char* env = std::getenv("WCLASS_SIM_WORKERS");
    if (env == nullptr || *env == '\0') return 0;
    try {
        std::size_t used = 0;
        const unsigned long v = std::stoul(env, &used);
        if (used == std::string(env).size()) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("WCLASS_SIM_WORKERS must be a non-negative integer, got '") + env + "'");
}

// Non-protocol keys of the config object.
void apply_spec_config(const report::Json& j, ExperimentSpec& spec) {
    report::Json protocol = report::Json::object();
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "trials") spec.trials = value.get<std::uint64_t>();
            else if (key == "alpha") spec.alpha = report::complex_from_json(value);
            else if (key == "beta") spec.beta = report::complex_from_json(value);
            else if (key == "n_min") spec.n_min = value.get<unsigned>();
            else if (key == "n_max") spec.n_max = value.get<unsigned>();
            else protocol[key] = value;
        } catch (const nlohmann::json::exception& e) {
            throw UsageError("config key '" + key + "': " + e.what());
        }
    }
    report::apply_protocol_config(protocol, spec.config);
}

void load_config_file(const std::string& path, ExperimentSpec& spec) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    report::Json j;
    try {
        j = report::Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    // A full report is accepted too.
    if (j.is_object() && j.contains("schema_version") && j.contains("config")) j = j["config"];
    try {
        apply_spec_config(j, spec);
    } catch (const PreconditionError& e) {
        throw UsageError(e.what());
    }
}

void validate_spec(const ExperimentSpec& spec) {
    if (spec.trials < 1) throw UsageError("--trials must be at least 1");
    if (spec.format == Format::csv_summary && spec.command != Command::scaling_sweep)
        throw UsageError("csv-summary output is only available for scaling-sweep");
    try {
        switch (spec.command) {
            case Command::epr: {
                ProtocolConfig pair = spec.config;
                pair.n = 2;
                if (!pair.phases.empty() && pair.phases.size() != 2)
                    throw UsageError("epr takes two phases");
                pair.validate(2);
                break;
            }
            case Command::w_state: spec.config.validate(3); break;
            case Command::teleport: {
                TeleportConfig t{spec.alpha, spec.beta, spec.config};
                t.base.n = 3;
                t.validate();
                break;
            }
            case Command::scaling_sweep: {
                if (spec.n_min < 3 || spec.n_max < spec.n_min)
                    throw UsageError("scaling-sweep needs 3 <= --n-min <= --n-max");
                if (!spec.config.phases.empty()) throw UsageError("scaling-sweep does not take --phases");
                ProtocolConfig c = spec.config;
                c.n = spec.n_max;
                c.validate(3);
                break;
            }
        }
    } catch (const UsageError&) {
        throw;
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

void summarize(const RunReport& r, std::vector<std::string>& lines) {
    lines.push_back("successes " + std::to_string(r.successes) + " / " + std::to_string(r.trials));
    lines.push_back(fmt("p_c_hat %.6g", r.p_c_hat.value) + fmt(" +- %.2g", r.p_c_hat.std_error));
    lines.push_back(fmt("mean_time_s %.6g", r.mean_time_s.value) + fmt(" +- %.2g", r.mean_time_s.std_error) +
                    fmt("  predicted %.6g", r.predicted_time_s));
    lines.push_back(fmt("fidelity_mean %.6f", r.fidelity_mean.value));
    if (r.c_n_hat) lines.push_back(fmt("c_n_hat %.6g", r.c_n_hat->value));
    if (r.overflow_trials > 0)
        lines.push_back("warning: " + std::to_string(r.overflow_trials) + " trials hit the truncation cap");
}

}  // namespace

std::string command_name(Command c) {
    switch (c) {
        case Command::epr: return "epr";
        case Command::w_state: return "w-state";
        case Command::teleport: return "teleport";
        case Command::scaling_sweep: return "scaling-sweep";
    }
    return "";
}

ExperimentSpec parse_args(const std::vector<std::string>& args) {
    CLI::App app{"Heralded W-state preparation and W-assisted teleportation on atomic ensembles", "wclass-sim"};
    std::string command, seed, phases, output, format = "json", config_path;
    unsigned n = 0, cap = 0, workers = 0, n_min = 0, n_max = 0;
    double eta = 0, pe = 0, t0 = 0, are = 0, aim = 0, bre = 0, bim = 0;
    std::uint64_t na = 0, max_attempts = 0, trials = 0;
    bool no_double_pairs = false;

    app.add_option("command", command, "epr | w-state | teleport | scaling-sweep")->required();
    auto* o_n = app.add_option("--n", n, "number of ensembles (w-state)");
    auto* o_eta = app.add_option("--eta", eta, "photon loss probability");
    auto* o_pe = app.add_option("--pe", pe, "Stokes emission probability per pump pulse");
    auto* o_phases = app.add_option("--phases", phases, "comma-separated channel phases phi_1i");
    auto* o_na = app.add_option("--na", na, "atoms per ensemble (finite-size factor)");
    auto* o_t0 = app.add_option("--t0", t0, "duration of one heralding attempt in seconds");
    auto* o_cap = app.add_option("--cap", cap, "per-term excitation truncation cap");
    auto* o_max = app.add_option("--max-attempts", max_attempts, "restart limit per preparation");
    auto* o_seed = app.add_option("--seed", seed, "integer seed or 'auto'")->required();
    auto* o_trials = app.add_option("--trials", trials, "independent trials");
    app.add_option("--output", output, "report path (default stdout)");
    app.add_option("--format", format, "json | csv-summary")->check(CLI::IsMember({"json", "csv-summary"}));
    app.add_option("--config", config_path, "JSON config file; flags take precedence");
    auto* o_workers = app.add_option("--workers", workers, "worker threads (default WCLASS_SIM_WORKERS or all cores)");
    auto* o_nodp = app.add_flag("--no-double-pairs", no_double_pairs, "drop the double-pair pump term");
    auto* o_are = app.add_option("--alpha-re", are, "teleported amplitude alpha, real part");
    auto* o_aim = app.add_option("--alpha-im", aim, "teleported amplitude alpha, imaginary part");
    auto* o_bre = app.add_option("--beta-re", bre, "teleported amplitude beta, real part");
    auto* o_bim = app.add_option("--beta-im", bim, "teleported amplitude beta, imaginary part");
    auto* o_nmin = app.add_option("--n-min", n_min, "first n of a scaling sweep");
    auto* o_nmax = app.add_option("--n-max", n_max, "last n of a scaling sweep");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested(app.help());
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    ExperimentSpec spec;
    spec.command = parse_command(command);
    if (!config_path.empty()) load_config_file(config_path, spec);

    ProtocolConfig& cfg = spec.config;
    if (o_n->count()) cfg.n = n;
    if (o_eta->count()) cfg.eta = eta;
    if (o_pe->count()) cfg.p_e = pe;
    if (o_phases->count()) cfg.phases = parse_phases(phases);
    if (o_na->count()) cfg.n_a = na;
    if (o_t0->count()) cfg.t0 = t0;
    if (o_cap->count()) cfg.truncation_cap = cap;
    if (o_max->count()) cfg.max_attempts = max_attempts;
    if (o_nodp->count()) cfg.double_pairs = false;
    if (o_trials->count()) spec.trials = trials;
    if (o_are->count() || o_aim->count())
        spec.alpha = {o_are->count() ? are : spec.alpha.real(), o_aim->count() ? aim : spec.alpha.imag()};
    if (o_bre->count() || o_bim->count())
        spec.beta = {o_bre->count() ? bre : spec.beta.real(), o_bim->count() ? bim : spec.beta.imag()};
    if (o_nmin->count()) spec.n_min = n_min;
    if (o_nmax->count()) spec.n_max = n_max;
    if (o_seed->count()) {
        if (seed == "auto") {
            spec.seed_auto = true;
            cfg.seed = auto_seed();
        } else {
            cfg.seed = parse_seed(seed);
        }
    }
    spec.output_path = output;
    spec.format = format == "csv-summary" ? Format::csv_summary : Format::json;
    spec.workers = o_workers->count() ? workers : workers_from_env();
    if (spec.command == Command::teleport) cfg.n = 3;
    validate_spec(spec);
    return spec;
}

ExperimentSpec parse_args(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return parse_args(args);
}

report::Json spec_config_json(const ExperimentSpec& spec) {
    ProtocolConfig cfg = spec.config;
    if (spec.command == Command::epr) cfg.n = 2;
    report::Json j = report::protocol_config_json(cfg);
    if (spec.command == Command::scaling_sweep) {
        j.erase("n");
        j["n_min"] = spec.n_min;
        j["n_max"] = spec.n_max;
    }
    if (spec.command == Command::teleport) {
        j["alpha"] = report::to_json(spec.alpha);
        j["beta"] = report::to_json(spec.beta);
    }
    j["trials"] = spec.trials;
    return j;
}

RunOutput execute(const ExperimentSpec& spec) {
    RunOutput out;
    report::Json results, timing = report::Json::object();
    std::uint64_t successes = 0;
    if (spec.config.p_e > optics::kWeakPumpLimit)
        out.summary.push_back(fmt("warning: p_e %.3g is outside the weak-pump expansion", spec.config.p_e));
    switch (spec.command) {
        case Command::epr: {
            const RunReport r = run_epr_batch(spec.config, spec.trials, spec.workers);
            successes = r.successes;
            results = report::run_report_json(r);
            timing = report::run_timing_json(r);
            summarize(r, out.summary);
            break;
        }
        case Command::w_state: {
            const RunReport r = run_batch(spec.config, spec.trials, spec.workers);
            successes = r.successes;
            results = report::run_report_json(r);
            timing = report::run_timing_json(r);
            summarize(r, out.summary);
            break;
        }
        case Command::teleport: {
            TeleportConfig t{spec.alpha, spec.beta, spec.config};
            const TeleportReport r = run_teleport_batch(t, spec.trials, spec.workers);
            successes = r.localized;
            results = report::teleport_report_json(r);
            timing = report::Json{{"mean_rounds", r.mean_rounds.value}, {"mean_w_passes", r.mean_w_passes.value}};
            out.summary.push_back("successes " + std::to_string(r.successes) + " / " + std::to_string(r.trials));
            out.summary.push_back(fmt("vacuum fraction %.4f", r.vacuum_fraction.value));
            out.summary.push_back(fmt("holder split: Carol %.4f", r.carol_holds.value) +
                                  fmt(" / Bob %.4f", 1.0 - r.carol_holds.value));
            out.summary.push_back(fmt("holder fidelity mean %.10f", r.holder_fidelity.value));
            break;
        }
        case Command::scaling_sweep: {
            const auto rows = scaling_sweep(spec.config, spec.n_min, spec.n_max, spec.trials, spec.workers);
            successes = rows.empty() ? 0 : rows.front().report.successes;
            for (const auto& row : rows) successes = std::min(successes, row.report.successes);
            results = report::sweep_json(rows);
            report::Json per_row = report::Json::array();
            for (const auto& row : rows) per_row.push_back(report::run_timing_json(row.report));
            timing = report::Json{{"rows", std::move(per_row)}};
            for (const auto& row : rows) {
                std::string line = "n=" + std::to_string(row.n) + fmt(" mean_time_s %.6g", row.report.mean_time_s.value);
                if (row.ratio_to_prev)
                    line += fmt(" ratio %.4g", row.ratio_to_prev->value) +
                            fmt(" +- %.2g", row.ratio_to_prev->std_error) +
                            fmt(" predicted %.4g", row.predicted_ratio.value_or(0.0));
                out.summary.push_back(line);
            }
            if (spec.format == Format::csv_summary) out.text = report::sweep_csv(rows);
            break;
        }
    }
    if (spec.format == Format::json)
        out.text = report::dump(report::envelope(command_name(spec.command), spec_config_json(spec),
                                                 std::move(results), std::move(timing)));
    if (successes == 0) {
        out.exit_code = kInsufficientData;
        out.summary.push_back("insufficient data: no heralded successes");
    }
    return out;
}

int run(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
    if (spec.seed_auto) err << "seed " << spec.config.seed << "\n";
    const auto start = std::chrono::steady_clock::now();
    RunOutput result;
    try {
        result = execute(spec);
    } catch (const InsufficientData& e) {
        err << "insufficient data: " << e.what() << "\n";
        return kInsufficientData;
    } catch (const AttemptsExhausted& e) {
        err << "attempts exhausted: " << e.what() << "\n";
        return kInsufficientData;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (spec.output_path.empty()) {
        out << result.text;
        out.flush();
        if (!out) {
            err << "error: failed to write report to stdout\n";
            return kIo;
        }
    } else {
        std::ofstream file(spec.output_path, std::ios::binary | std::ios::trunc);
        if (file) file << result.text;
        if (file) file.close();
        if (!file) {
            err << "error: cannot write report to '" << spec.output_path << "'\n";
            return kIo;
        }
    }
    for (const auto& line : result.summary) err << line << "\n";
    err << "wall_clock_s " << wall << "\n";
    return result.exit_code;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    ExperimentSpec spec;
    try {
        spec = parse_args(argc, argv);
    } catch (const HelpRequested& h) {
        out << h.what();
        return kOk;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\nrun 'wclass-sim --help' for options\n";
        return kUsage;
    }
    try {
        return run(spec, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kInsufficientData;
    }
}

}  // namespace wclass::cli
