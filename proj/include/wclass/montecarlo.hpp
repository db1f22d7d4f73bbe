#pragma once

// Seeded batch runs of the W-chain protocol and the estimators built on
// them: per-stage success probabilities, heralding probability p_c,
// generation time, the vacuum coefficient c_n and mixture fidelity.
//
// Trial k always draws from RandomStream::derive(seed, k) and per-trial
// records are reduced in trial order, so reports do not depend on the number
// of worker threads.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wclass/fock.hpp"
#include "wclass/protocol.hpp"

namespace wclass {

// Proportion with its standard error and a 95% Wilson score interval.
struct Proportion {
    double value = 0.0;
    double std_error = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

Proportion wilson(double successes, double trials);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

// Mean and standard error of the mean.
Estimate mean_estimate(const std::vector<double>& xs);

struct TrialRecord {
    bool succeeded = false;
    std::uint64_t passes = 0;
    std::uint64_t total_attempts = 0;
    std::vector<std::uint64_t> stage_attempts;
    double fidelity = 0.0;
    // Final state lies in the one-excitation atomic sector.
    bool single_excitation = false;
    bool overflow = false;
    std::optional<FockState> final_state;
};

struct RunReport {
    std::uint64_t trials = 0;
    std::uint64_t successes = 0;
    std::vector<std::string> stage_names;
    std::vector<double> mean_attempts_per_stage;
    // Per-attempt success probability of each stage.
    std::vector<Proportion> stage_success;
    // Heralding probability of one beam-splitter round on two fresh ensembles, loss removed.
    Proportion p_c_hat;
    // Probability that one pass through the whole chain succeeds.
    Proportion pass_success;
    Estimate mean_passes;
    Estimate mean_time_s;
    double predicted_time_s = 0.0;
    // Noise-to-W ratio of the heralded outputs; nullopt without W outcomes.
    std::optional<Estimate> c_n_hat;
    Estimate fidelity_mean;
    std::uint64_t overflow_trials = 0;
};

struct BatchResult {
    std::vector<TrialRecord> records;
    RunReport report;
};

unsigned default_workers();

BatchResult run_trials(const ProtocolConfig& cfg, std::uint64_t trials, unsigned workers = 0,
                       bool keep_states = false);
RunReport run_batch(const ProtocolConfig& cfg, std::uint64_t trials, unsigned workers = 0);

// Any stage sequence scored against `ideal`. The generation-time prediction
// uses `parties` heralded links.
BatchResult run_sequence_trials(const StageSequence& sequence, const FockState& ideal, unsigned parties,
                                std::uint64_t trials, unsigned workers = 0, bool keep_states = false);

// Heralded EPR pairs between parties 1 and 2 (cfg.n is taken as 2); scored
// against (s1+ + e^{i phi_12} s2+)|vac>/sqrt2 with one link in the time prediction.
RunReport run_epr_batch(const ProtocolConfig& cfg, std::uint64_t trials, unsigned workers = 0);

// t0 / ((1 - eta)^(2n-1) p_c^n)
double predicted_generation_time(unsigned n, double eta, double p_c, double t0);

struct NoisyStateMixture {
    struct Component {
        double weight;
        FockState state;
    };
    std::vector<Component> components;

    // Throws PreconditionError unless weights are non-negative and sum to 1.
    void validate() const;
};

double fidelity_mixture(const NoisyStateMixture& mix, const FockState& target);

struct VacuumEstimate {
    Estimate c_n_hat;
    std::uint64_t w_outcomes = 0;
    std::uint64_t noise_outcomes = 0;
    NoisyStateMixture mixture;
};

// rho_n = (c_n rho_noise + |W><W|) / (c_n + 1) reconstructed from heralded outputs.
VacuumEstimate estimate_vacuum_coefficient(const ProtocolConfig& cfg, std::uint64_t trials, unsigned workers = 0);

struct SweepRow {
    unsigned n = 0;
    RunReport report;
    // mean_time(n) / mean_time(n-1); absent on the first row.
    std::optional<Estimate> ratio_to_prev;
    // 1 / ((1-eta)^2 p_c_hat) with this row's p_c_hat.
    std::optional<double> predicted_ratio;
};

std::vector<SweepRow> scaling_sweep(const ProtocolConfig& base, unsigned n_min, unsigned n_max,
                                    std::uint64_t trials, unsigned workers = 0);

// Each row uses its own seed derived from (base seed, n).
std::uint64_t sweep_row_seed(std::uint64_t seed, unsigned n);

struct TeleportReport {
    std::uint64_t trials = 0;
    std::uint64_t successes = 0;
    Estimate mean_rounds;
    Estimate mean_w_passes;
    // Heralded with no excitation left at the receivers.
    Proportion vacuum_fraction;
    // Heralded with other than one excitation at the receivers (noisy W input).
    Proportion noise_fraction;
    // The remaining outcomes carry one excitation and are localized.
    std::uint64_t localized = 0;
    Proportion carol_holds;
    // Fidelity with the normalized ideal four-mode output.
    Estimate output_fidelity;
    Estimate holder_fidelity;
    double min_holder_fidelity = 1.0;
};

TeleportReport run_teleport_batch(const TeleportConfig& cfg, std::uint64_t trials, unsigned workers = 0);

}  // namespace wclass
