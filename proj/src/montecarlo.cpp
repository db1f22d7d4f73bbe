#include "wclass/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <thread>

#include "wclass/errors.hpp"

namespace wclass {

namespace {

constexpr double kZ95 = 1.959963984540054;

// Runs body(k) for k in [0, count) on `workers` threads. Each index writes its
// own slot, so the result does not depend on scheduling.
void parallel_for(std::uint64_t count, unsigned workers, const std::function<void(std::uint64_t)>& body) {
    if (workers == 0) workers = default_workers();
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(count, 1)));
    if (workers <= 1) {
        for (std::uint64_t k = 0; k < count; ++k) body(k);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::uint64_t k = next.fetch_add(1);
                if (k >= count || failed.load()) return;
                try {
                    body(k);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed = true;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

Proportion scaled(Proportion p, double factor) {
    p.value = std::min(1.0, p.value * factor);
    p.std_error *= factor;
    p.lower = std::min(1.0, p.lower * factor);
    p.upper = std::min(1.0, p.upper * factor);
    return p;
}

bool same_up_to_rounding(const FockState& a, const FockState& b) {
    return std::abs(inner_product(a, b) - Complex(1.0, 0.0)) < 1e-12;
}

}  // namespace

unsigned default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

Proportion wilson(double successes, double trials) {
    Proportion p;
    if (!(trials > 0.0)) return p;
    const double phat = successes / trials;
    const double z2 = kZ95 * kZ95;
    const double denom = 1.0 + z2 / trials;
    const double centre = (phat + z2 / (2.0 * trials)) / denom;
    const double half = kZ95 * std::sqrt(phat * (1.0 - phat) / trials + z2 / (4.0 * trials * trials)) / denom;
    p.value = phat;
    p.std_error = std::sqrt(phat * (1.0 - phat) / trials);
    p.lower = successes <= 0.0 ? 0.0 : std::max(0.0, centre - half);
    p.upper = successes >= trials ? 1.0 : std::min(1.0, centre + half);
    return p;
}

Estimate mean_estimate(const std::vector<double>& xs) {
    Estimate e;
    if (xs.empty()) return e;
    double sum = 0.0;
    for (double x : xs) sum += x;
    e.value = sum / static_cast<double>(xs.size());
    if (xs.size() < 2) return e;
    double ss = 0.0;
    for (double x : xs) ss += (x - e.value) * (x - e.value);
    e.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
    return e;
}

double predicted_generation_time(unsigned n, double eta, double p_c, double t0) {
    if (!(eta >= 0.0 && eta < 1.0)) throw DomainError("eta must lie in [0, 1)");
    if (!(p_c > 0.0 && p_c <= 1.0)) throw DomainError("p_c must lie in (0, 1]");
    return t0 / (std::pow(1.0 - eta, 2.0 * n - 1.0) * std::pow(p_c, static_cast<double>(n)));
}

BatchResult run_sequence_trials(const StageSequence& sequence, const FockState& ideal, unsigned parties,
                                std::uint64_t trials, unsigned workers, bool keep_states) {
    if (trials < 1) throw PreconditionError("trials must be >= 1");
    const ProtocolConfig& cfg = sequence.config();
    const ChainModes& modes = sequence.modes();
    const std::size_t depth = sequence.stages().size();

    BatchResult result;
    result.records.resize(trials);
    parallel_for(trials, workers, [&](std::uint64_t k) {
        RandomStream rng = RandomStream::derive(cfg.seed, k);
        TrialRecord& rec = result.records[k];
        try {
            SequenceRun run = sequence.sample(rng);
            rec.succeeded = true;
            rec.passes = run.passes;
            rec.total_attempts = run.total_attempts;
            rec.stage_attempts = std::move(run.stage_attempts);
            rec.fidelity = fidelity(ideal, run.outcome.state);
            const auto dist = count_excitations(run.outcome.state, modes.ensembles);
            rec.single_excitation = dist.size() > 1 && dist[1] > 1.0 - 1e-12;
            rec.overflow = run.outcome.state.overflowed();
            if (keep_states) rec.final_state = std::move(run.outcome.state);
        } catch (const AttemptsExhausted&) {
            rec.succeeded = false;
            rec.passes = cfg.max_attempts;
        }
    });

    // Ordered reduction.
    RunReport& rep = result.report;
    rep.trials = trials;
    for (const auto& s : sequence.stages()) rep.stage_names.push_back(s.name());
    std::vector<double> stage_attempts(depth, 0.0);
    std::vector<double> passes, times, fids;
    double total_passes = 0.0;
    std::uint64_t w_outcomes = 0;
    for (const auto& rec : result.records) {
        total_passes += static_cast<double>(rec.passes);
        if (!rec.succeeded) continue;
        ++rep.successes;
        for (std::size_t s = 0; s < depth; ++s) stage_attempts[s] += static_cast<double>(rec.stage_attempts[s]);
        passes.push_back(static_cast<double>(rec.passes));
        times.push_back(static_cast<double>(rec.total_attempts) * cfg.t0);
        fids.push_back(rec.fidelity);
        if (rec.single_excitation) ++w_outcomes;
        if (rec.overflow) ++rep.overflow_trials;
    }
    const double successes = static_cast<double>(rep.successes);
    for (std::size_t s = 0; s < depth; ++s) {
        rep.mean_attempts_per_stage.push_back(successes > 0 ? stage_attempts[s] / successes : 0.0);
        // Every attempt at stage s+1 follows a success at stage s.
        const double wins = s + 1 < depth ? stage_attempts[s + 1] : successes;
        rep.stage_success.push_back(wilson(wins, stage_attempts[s]));
    }
    rep.p_c_hat = scaled(rep.stage_success.front(), 1.0 / (1.0 - cfg.eta));
    rep.pass_success = wilson(successes, total_passes);
    rep.mean_passes = mean_estimate(passes);
    rep.mean_time_s = mean_estimate(times);
    if (rep.p_c_hat.value > 0.0)
        rep.predicted_time_s = predicted_generation_time(parties, cfg.eta, rep.p_c_hat.value, cfg.t0);
    rep.fidelity_mean = mean_estimate(fids);
    if (w_outcomes > 0) {
        const double q = (successes - static_cast<double>(w_outcomes)) / successes;
        const double se_q = std::sqrt(q * (1.0 - q) / successes);
        rep.c_n_hat = Estimate{q / (1.0 - q), se_q / ((1.0 - q) * (1.0 - q))};
    }
    return result;
}

BatchResult run_trials(const ProtocolConfig& cfg, std::uint64_t trials, unsigned workers, bool keep_states) {
    const StageSequence sequence = make_chain_sequence(cfg);
    return run_sequence_trials(sequence, ideal_w_state(sequence.modes(), cfg.n, cfg.phases), cfg.n, trials,
                               workers, keep_states);
}

RunReport run_batch(const ProtocolConfig& cfg, std::uint64_t trials, unsigned workers) {
    return run_trials(cfg, trials, workers, false).report;
}

RunReport run_epr_batch(const ProtocolConfig& cfg, std::uint64_t trials, unsigned workers) {
    ProtocolConfig pair = cfg;
    pair.n = 2;
    if (pair.phases.size() > 2) pair.phases.resize(2);
    pair.validate(2);
    ChainModes modes = make_chain_modes(pair);
    FockState ideal = ideal_w_state(modes, 2, pair.phases);
    FockState vac = FockState::vacuum(modes.registry, pair.truncation_cap);
    const StageSequence sequence(pair, std::move(modes), {{StageKind::epr, 1, 2, false}}, std::move(vac));
    return run_sequence_trials(sequence, ideal, 1, trials, workers, false).report;
}

void NoisyStateMixture::validate() const {
    if (components.empty()) throw PreconditionError("mixture has no components");
    double sum = 0.0;
    for (const auto& c : components) {
        if (!(c.weight >= 0.0)) throw PreconditionError("mixture weights must be non-negative");
        sum += c.weight;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw PreconditionError("mixture weights must sum to 1");
}

double fidelity_mixture(const NoisyStateMixture& mix, const FockState& target) {
    mix.validate();
    if (std::abs(target.norm_squared() - 1.0) > 1e-10) throw PreconditionError("target state is not normalized");
    double f = 0.0;
    for (const auto& c : mix.components) f += c.weight * std::norm(inner_product(target, c.state));
    return f;
}

VacuumEstimate estimate_vacuum_coefficient(const ProtocolConfig& cfg, std::uint64_t trials, unsigned workers) {
    if (trials < 1000) throw PreconditionError("vacuum coefficient estimation needs at least 1000 trials");
    BatchResult batch = run_trials(cfg, trials, workers, true);
    const RunReport& rep = batch.report;
    if (rep.successes == 0) throw InsufficientData("no heralded successes");
    if (!rep.c_n_hat) throw InsufficientData("no W-component outcomes among the successes");

    VacuumEstimate out;
    out.c_n_hat = *rep.c_n_hat;
    std::vector<std::uint64_t> counts;
    for (const auto& rec : batch.records) {
        if (!rec.succeeded) continue;
        (rec.single_excitation ? out.w_outcomes : out.noise_outcomes) += 1;
        const FockState& st = *rec.final_state;
        std::size_t k = 0;
        while (k < out.mixture.components.size() && !same_up_to_rounding(out.mixture.components[k].state, st)) ++k;
        if (k == out.mixture.components.size()) {
            out.mixture.components.push_back({0.0, st});
            counts.push_back(0);
        }
        ++counts[k];
    }
    const double total = static_cast<double>(rep.successes);
    for (std::size_t k = 0; k < counts.size(); ++k)
        out.mixture.components[k].weight = static_cast<double>(counts[k]) / total;
    return out;
}

std::uint64_t sweep_row_seed(std::uint64_t seed, unsigned n) {
    return splitmix64(seed ^ splitmix64(0x5357454550ull + n));
}

std::vector<SweepRow> scaling_sweep(const ProtocolConfig& base, unsigned n_min, unsigned n_max,
                                    std::uint64_t trials, unsigned workers) {
    if (n_min < 3 || n_max < n_min) throw PreconditionError("sweep needs 3 <= n_min <= n_max");
    std::vector<SweepRow> rows;
    for (unsigned n = n_min; n <= n_max; ++n) {
        ProtocolConfig cfg = base;
        cfg.n = n;
        cfg.seed = sweep_row_seed(base.seed, n);
        SweepRow row;
        row.n = n;
        row.report = run_batch(cfg, trials, workers);
        if (!rows.empty()) {
            const Estimate& a = row.report.mean_time_s;
            const Estimate& b = rows.back().report.mean_time_s;
            if (a.value > 0.0 && b.value > 0.0) {
                const double r = a.value / b.value;
                row.ratio_to_prev = Estimate{r, r * std::hypot(a.std_error / a.value, b.std_error / b.value)};
            }
            if (row.report.p_c_hat.value > 0.0)
                row.predicted_ratio = 1.0 / ((1.0 - cfg.eta) * (1.0 - cfg.eta) * row.report.p_c_hat.value);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

TeleportReport run_teleport_batch(const TeleportConfig& cfg, std::uint64_t trials, unsigned workers) {
    if (trials < 1) throw PreconditionError("trials must be >= 1");
    const Teleporter teleporter(cfg);
    const TeleportModes& modes = teleporter.modes();
    const FockState ideal = teleported_state(modes, cfg.alpha, cfg.beta, cfg.base.phases);
    std::vector<ModeIndex> receivers = modes.bob();
    for (auto m : modes.carol()) receivers.push_back(m);

    struct Row {
        bool succeeded = false;
        bool vacuum = false;
        bool single = false;
        bool carol = false;
        double rounds = 0.0;
        double w_passes = 0.0;
        double output_fidelity = 0.0;
        double holder_fidelity = 0.0;
    };
    std::vector<Row> rows(trials);
    parallel_for(trials, workers, [&](std::uint64_t k) {
        RandomStream rng = RandomStream::derive(cfg.base.seed, k);
        Row& row = rows[k];
        std::optional<TeleportOutcome> run;
        try {
            run = teleporter.run(rng);
        } catch (const AttemptsExhausted&) {
            return;
        }
        const TeleportOutcome& out = *run;
        row.succeeded = true;
        row.vacuum = out.vacuum_component;
        row.rounds = static_cast<double>(out.step.attempts);
        row.w_passes = static_cast<double>(out.w_attempts);
        if (row.vacuum) return;
        const auto dist = count_excitations(out.step.state, receivers);
        row.single = dist.size() > 1 && dist[1] > 1.0 - 1e-12;
        if (!row.single) return;
        row.output_fidelity = fidelity(ideal, out.step.state);
        const auto carol = modes.carol();
        const Localization loc = receiver_localize(out.step.state, carol, rng);
        row.carol = loc.holder == Holder::this_receiver;
        const auto pair = row.carol ? carol : modes.bob();
        row.holder_fidelity = qubit_fidelity(loc.residual, pair[0], pair[1], cfg.alpha, cfg.beta);
    });

    TeleportReport rep;
    rep.trials = trials;
    std::vector<double> rounds, w_passes, out_f, holder_f;
    std::uint64_t vacuum = 0, noisy = 0, carol = 0;
    for (const auto& row : rows) {
        if (!row.succeeded) continue;
        ++rep.successes;
        rounds.push_back(row.rounds);
        w_passes.push_back(row.w_passes);
        if (row.vacuum) {
            ++vacuum;
            continue;
        }
        if (!row.single) {
            ++noisy;
            continue;
        }
        ++rep.localized;
        if (row.carol) ++carol;
        out_f.push_back(row.output_fidelity);
        holder_f.push_back(row.holder_fidelity);
        rep.min_holder_fidelity = std::min(rep.min_holder_fidelity, row.holder_fidelity);
    }
    rep.mean_rounds = mean_estimate(rounds);
    rep.mean_w_passes = mean_estimate(w_passes);
    rep.vacuum_fraction = wilson(static_cast<double>(vacuum), static_cast<double>(rep.successes));
    rep.noise_fraction = wilson(static_cast<double>(noisy), static_cast<double>(rep.successes));
    rep.carol_holds = wilson(static_cast<double>(carol), static_cast<double>(rep.localized));
    rep.output_fidelity = mean_estimate(out_f);
    rep.holder_fidelity = mean_estimate(holder_f);
    if (rep.localized == 0) rep.min_holder_fidelity = 0.0;
    return rep;
}

}  // namespace wclass
