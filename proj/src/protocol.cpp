#include "wclass/protocol.hpp"

#include <cmath>
#include <numbers>

#include "wclass/errors.hpp"

namespace wclass {

using optics::DetectorOutcome;

void ProtocolConfig::validate(unsigned min_n) const {
    if (n < min_n) throw PreconditionError("n must be at least " + std::to_string(min_n));
    if (!(p_e >= 0.0 && p_e < 1.0)) throw DomainError("p_e must lie in [0, 1)");
    if (!(eta >= 0.0 && eta < 1.0)) throw DomainError("eta must lie in [0, 1)");
    if (!phases.empty() && phases.size() != n)
        throw PreconditionError("phases must list one value per party");
    if (n_a && *n_a < 2) throw DomainError("N_a must be at least 2");
    if (!(t0 > 0.0)) throw DomainError("t0 must be positive");
    if (truncation_cap == 0) throw DomainError("truncation cap must be positive");
    if (max_attempts < 1) throw PreconditionError("max_attempts must be at least 1");
}

double ProtocolConfig::phase(unsigned party) const {
    if (party < 1 || party > n) throw PreconditionError("party out of range");
    return phases.empty() ? 0.0 : phases[party - 1];
}

ModeIndex ChainModes::ensemble(unsigned party) const {
    if (party < 1 || party > ensembles.size()) throw ModeError("no ensemble for party " + std::to_string(party));
    return ensembles[party - 1];
}

ChainModes make_chain_modes(const ProtocolConfig& cfg) {
    ModeRegistry reg(CollectiveModeModel{cfg.n_a});
    ChainModes modes;
    for (unsigned i = 1; i <= cfg.n; ++i) modes.ensembles.push_back(reg.add("s" + std::to_string(i), ModeKind::atomic));
    modes.stokes_a = reg.add("stokes_a", ModeKind::photonic);
    modes.stokes_b = reg.add("stokes_b", ModeKind::photonic);
    modes.anti_stokes = reg.add("anti_stokes", ModeKind::photonic);
    modes.registry = ModeRegistry::seal(std::move(reg));
    return modes;
}

std::string Stage::name() const {
    const auto pair = "(" + std::to_string(i) + "," + std::to_string(j) + ")";
    switch (kind) {
        case StageKind::epr: return "epr" + pair;
        case StageKind::connect: return (closing ? "close" : "connect") + pair;
        case StageKind::merge: return "merge(" + std::to_string(i) + ")";
    }
    return "?";
}

std::vector<Stage> chain_stages(unsigned n) {
    if (n < 3) throw PreconditionError("a W chain needs at least 3 parties");
    std::vector<Stage> stages{{StageKind::epr, 1, 2, false}};
    for (unsigned i = 2; i + 1 <= n; ++i) {
        stages.push_back({StageKind::connect, i, i + 1, false});
        stages.push_back({StageKind::merge, i, i, false});
    }
    stages.push_back({StageKind::connect, 1, n, true});
    stages.push_back({StageKind::merge, 1, 1, false});
    return stages;
}

namespace {

bool same_state(const FockState& a, const FockState& b) {
    if (a.terms().size() != b.terms().size()) return false;
    auto ia = a.terms().begin();
    for (auto ib = b.terms().begin(); ib != b.terms().end(); ++ia, ++ib)
        if (ia->first != ib->first || std::abs(ia->second - ib->second) > 1e-12) return false;
    return true;
}


}  // namespace

void add_branch(StageResult& result, FockState state, Herald herald) {
    result.success_probability += herald.probability;
    for (auto& existing : result.successes)
        if (same_state(existing.state, state)) {
            existing.probability += herald.probability;
            existing.heralds.push_back(std::move(herald));
            return;
        }
    const double p = herald.probability;
    result.successes.push_back({p, std::move(state), {std::move(herald)}});
}

namespace {

StageResult enumerate_connect(const ProtocolConfig& cfg, const ChainModes& modes, const Stage& stage,
                              const FockState& input) {
    const auto ei = modes.ensemble(stage.i);
    const auto ej = modes.ensemble(stage.j);
    FockState pumped = optics::pump_excite(
        input, {ei, modes.stokes_a, cfg.p_e, cfg.phase(stage.i), cfg.double_pairs});
    pumped = optics::pump_excite(pumped, {ej, modes.stokes_b, cfg.p_e, cfg.phase(stage.j), cfg.double_pairs});
    const FockState mixed = normalize(optics::apply_beam_splitter(pumped, {modes.stokes_a, modes.stokes_b}));

    const std::string plus = stage.name() + "/D+";
    const std::string minus = stage.name() + "/D-";
    const optics::LossSpec loss{cfg.eta};
    StageResult result;
    for (const auto& la : optics::loss_branches(mixed, modes.stokes_a, loss))
        for (const auto& lb : optics::loss_branches(la.state, modes.stokes_b, loss))
            for (const auto& da : optics::detect_branches(lb.state, modes.stokes_a))
                for (const auto& db : optics::detect_branches(da.state, modes.stokes_b)) {
                    const bool click_a = da.photons > 0;
                    const bool click_b = db.photons > 0;
                    if (click_a == click_b) continue;
                    if (stage.closing && click_b) continue;
                    FockState out = db.state;
                    // The antisymmetric port heralds s_i+ - e^{i phi} s_j+; a pi shift on the
                    // fresh ensemble j restores the symmetric form.
                    if (click_b) out = optics::apply_phase(out, ej, std::numbers::pi);
                    add_branch(result, std::move(out),
                               {la.probability * lb.probability * da.probability * db.probability,
                                {DetectorOutcome{click_a, plus, da.photons},
                                 DetectorOutcome{click_b, minus, db.photons}},
                                la.lost + lb.lost});
                }
    return result;
}

StageResult enumerate_merge(const ProtocolConfig& cfg, const ChainModes& modes, const Stage& stage,
                            const FockState& input) {
    const FockState converted = optics::repump_convert(input, modes.ensemble(stage.i), modes.anti_stokes);
    StageResult result;
    if (converted.is_zero()) return result;
    const FockState retrieved = normalize(converted);
    const std::string label = stage.name() + "/D";
    for (const auto& l : optics::loss_branches(retrieved, modes.anti_stokes, {cfg.eta}))
        for (const auto& d : optics::detect_branches(l.state, modes.anti_stokes)) {
            if (d.photons == 0) continue;
            add_branch(result, d.state, {l.probability * d.probability,
                                         {DetectorOutcome{true, label, d.photons}}, l.lost});
        }
    return result;
}

}  // namespace

StageResult enumerate_stage(const ProtocolConfig& cfg, const ChainModes& modes, const Stage& stage,
                            const FockState& input) {
    if (input.is_zero()) throw NormalizationError("stage input is a zero state");
    const FockState in = normalize(input);
    switch (stage.kind) {
        case StageKind::epr:
        case StageKind::connect: return enumerate_connect(cfg, modes, stage, in);
        case StageKind::merge: return enumerate_merge(cfg, modes, stage, in);
    }
    return {};
}

namespace {

StepOutcome run_stages(const ProtocolConfig& cfg, std::vector<Stage> stages, const FockState& input,
                       RandomStream& rng) {
    ChainModes modes = make_chain_modes(cfg);
    require_same_registry(input, FockState::vacuum(modes.registry));
    StageSequence seq(cfg, modes, std::move(stages), input);
    return seq.sample(rng).outcome;
}

void require_party(const ProtocolConfig& cfg, unsigned party) {
    if (party < 1 || party > cfg.n) throw PreconditionError("party " + std::to_string(party) + " out of range");
}

}  // namespace

StepOutcome prepare_epr(const ProtocolConfig& cfg, unsigned i, unsigned j, RandomStream& rng) {
    cfg.validate(2);
    require_party(cfg, i);
    require_party(cfg, j);
    if (i == j) throw PreconditionError("EPR link needs two distinct parties");
    ChainModes modes = make_chain_modes(cfg);
    StageSequence seq(cfg, modes, {{StageKind::epr, i, j, false}},
                      FockState::vacuum(modes.registry, cfg.truncation_cap));
    return seq.sample(rng).outcome;
}

StepOutcome connect_step(const ProtocolConfig& cfg, const FockState& state, unsigned i, unsigned j,
                         RandomStream& rng) {
    cfg.validate(2);
    require_party(cfg, i);
    require_party(cfg, j);
    if (i == j) throw PreconditionError("connection needs two distinct parties");
    return run_stages(cfg, {{StageKind::connect, i, j, false}}, state, rng);
}

StepOutcome merge_repump(const ProtocolConfig& cfg, const FockState& state, unsigned i, RandomStream& rng) {
    cfg.validate(2);
    require_party(cfg, i);
    return run_stages(cfg, {{StageKind::merge, i, i, false}}, state, rng);
}

namespace {

// True when the single-excitation amplitudes over all parties have equal magnitude.
bool looks_like_w(const FockState& state, const ChainModes& modes) {
    if (state.is_zero()) return false;
    const auto& reg = *state.registry();
    double magnitude = -1.0;
    std::size_t singles = 0;
    for (const auto& [occ, amp] : state.terms()) {
        if (total_occupation(occ) != 1) return false;
        for (auto m : reg.modes(ModeKind::photonic))
            if (occ[m.id] != 0) return false;
        if (magnitude < 0.0) magnitude = std::abs(amp);
        if (std::abs(std::abs(amp) - magnitude) > 1e-9 * magnitude) return false;
        ++singles;
    }
    return singles == modes.ensembles.size();
}

}  // namespace

StepOutcome maximize_w(const ProtocolConfig& cfg, const FockState& state, RandomStream& rng) {
    cfg.validate(3);
    ChainModes modes = make_chain_modes(cfg);
    require_same_registry(state, FockState::vacuum(modes.registry));
    if (looks_like_w(state, modes))
        throw SequencingError("maximize_w called on a state that is already W-balanced");
    return run_stages(cfg, {{StageKind::connect, 1, cfg.n, true}, {StageKind::merge, 1, 1, false}}, state, rng);
}

StageSequence make_chain_sequence(const ProtocolConfig& cfg) {
    cfg.validate(3);
    ChainModes modes = make_chain_modes(cfg);
    auto vac = FockState::vacuum(modes.registry, cfg.truncation_cap);
    return StageSequence(cfg, std::move(modes), chain_stages(cfg.n), std::move(vac));
}

SequenceRun build_w_chain(const ProtocolConfig& cfg, RandomStream& rng) {
    return make_chain_sequence(cfg).sample(rng);
}

FockState phase_compensate(const FockState& state, const ChainModes& modes, const std::vector<double>& phases) {
    FockState out = state;
    for (std::size_t i = 0; i < phases.size() && i < modes.ensembles.size(); ++i)
        if (phases[i] != 0.0) out = optics::apply_phase(out, modes.ensembles[i], -phases[i]);
    return out;
}

FockState ideal_w_state(const ChainModes& modes, unsigned n, const std::vector<double>& phases) {
    if (n < 1 || n > modes.ensembles.size()) throw PreconditionError("ideal W needs 1 <= n <= ensembles");
    const auto vac = FockState::vacuum(modes.registry);
    TermAccumulator acc(vac);
    const double amp = 1.0 / std::sqrt(static_cast<double>(n));
    for (unsigned i = 0; i < n; ++i) {
        Occupation occ(modes.registry->size(), 0);
        occ[modes.ensembles[i].id] = 1;
        acc.add(occ, amp * std::polar(1.0, phases.empty() ? 0.0 : phases.at(i)));
    }
    return std::move(acc).finish();
}

FockState ideal_w_state(const ProtocolConfig& cfg) {
    return ideal_w_state(make_chain_modes(cfg), cfg.n, cfg.phases);
}

namespace algebra {

namespace {

double phase_of(const std::vector<double>& phases, unsigned party) {
    return phases.empty() ? 0.0 : phases.at(party - 1);
}

}  // namespace

FockState connect(const FockState& state, const ChainModes& modes, unsigned i, unsigned j,
                  const std::vector<double>& phases) {
    const Complex link = std::polar(1.0, phase_of(phases, j) - phase_of(phases, i));
    const std::vector<Complex> coeffs{1.0 / std::numbers::sqrt2, link / std::numbers::sqrt2};
    const std::vector<FockState> parts{create(state, modes.ensemble(i)), create(state, modes.ensemble(j))};
    return superpose(coeffs, parts);
}

FockState epr(const ChainModes& modes, const std::vector<double>& phases) {
    return connect(FockState::vacuum(modes.registry), modes, 1, 2, phases);
}

FockState merge(const FockState& state, const ChainModes& modes, unsigned i) {
    return annihilate(state, modes.ensemble(i));
}

FockState w_prime(const ChainModes& modes, unsigned n, const std::vector<double>& phases) {
    // Without the 1/sqrt2 link normalizations: the literal operator product.
    FockState state = epr(modes, phases).scaled(std::numbers::sqrt2);
    for (unsigned i = 2; i + 1 <= n; ++i)
        state = merge(connect(state, modes, i, i + 1, phases).scaled(std::numbers::sqrt2), modes, i);
    return state;
}

FockState maximize(const FockState& w_prime_state, const ChainModes& modes, unsigned n,
                   const std::vector<double>& phases) {
    const FockState linked = connect(w_prime_state, modes, 1, n, phases).scaled(std::numbers::sqrt2);
    return merge(linked, modes, 1).scaled(1.0 / (2.0 * std::sqrt(static_cast<double>(n))));
}

}  // namespace algebra

}  // namespace wclass
