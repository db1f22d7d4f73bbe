#include <cmath>
#include <numbers>

#include "wclass/errors.hpp"
#include "wclass/protocol.hpp"

namespace wclass {

using optics::DetectorOutcome;

void TeleportConfig::validate() const {
    const double norm = std::norm(alpha) + std::norm(beta);
    if (std::abs(norm - 1.0) > 1e-12) throw PreconditionError("|alpha|^2 + |beta|^2 must equal 1");
    ProtocolConfig b = base;
    b.n = 3;
    b.validate(3);
}

TeleportModes make_teleport_modes(const ProtocolConfig& base) {
    ModeRegistry reg(CollectiveModeModel{base.n_a});
    TeleportModes modes;
    modes.left = reg.add("sL", ModeKind::atomic);
    modes.right = reg.add("sR", ModeKind::atomic);
    for (unsigned i = 1; i <= 6; ++i) modes.ensembles.push_back(reg.add("s" + std::to_string(i), ModeKind::atomic));
    modes.as_left = reg.add("as_L", ModeKind::photonic);
    modes.as_1 = reg.add("as_1", ModeKind::photonic);
    modes.as_right = reg.add("as_R", ModeKind::photonic);
    modes.as_4 = reg.add("as_4", ModeKind::photonic);
    modes.registry = ModeRegistry::seal(std::move(reg));
    return modes;
}

FockState teleported_state(const TeleportModes& modes, Complex alpha, Complex beta,
                           const std::vector<double>& phases) {
    const auto phase = [&](unsigned party) { return phases.empty() ? 0.0 : phases.at(party - 1); };
    const Complex e12 = std::polar(1.0, phase(2) - phase(1));
    const Complex e13 = std::polar(1.0, phase(3) - phase(1));
    TermAccumulator acc(FockState::vacuum(modes.registry));
    const auto put = [&](unsigned party, Complex amp) {
        Occupation occ(modes.registry->size(), 0);
        occ[modes.ensemble(party).id] = 1;
        acc.add(occ, amp / std::numbers::sqrt2);
    };
    put(3, e13 * alpha);
    put(6, e13 * beta);
    put(2, e12 * alpha);
    put(5, e12 * beta);
    return std::move(acc).finish();
}

namespace {

ProtocolConfig three_party(const ProtocolConfig& base) {
    ProtocolConfig cfg = base;
    cfg.n = 3;
    return cfg;
}

TeleportConfig validated(TeleportConfig cfg) {
    cfg.validate();
    cfg.base.n = 3;
    return cfg;
}

}  // namespace

Teleporter::Teleporter(TeleportConfig cfg)
    : cfg_(validated(std::move(cfg))),
      modes_(make_teleport_modes(cfg_.base)),
      chain_(make_chain_sequence(three_party(cfg_.base))) {}

StageResult Teleporter::enumerate_round(const FockState& w123, const FockState& w456) const {
    const auto embed = [&](const FockState& w, unsigned offset) {
        std::vector<ModeIndex> mapping;
        for (unsigned i = 1; i <= 3; ++i) mapping.push_back(modes_.ensemble(i + offset));
        // The chain's photonic modes are empty after a successful run.
        mapping.push_back(modes_.as_left);
        mapping.push_back(modes_.as_1);
        mapping.push_back(modes_.as_right);
        return remap(w, modes_.registry, mapping);
    };
    const unsigned cap = std::max(cfg_.base.truncation_cap, 8u);
    FockState unknown = [&] {
        TermAccumulator acc(modes_.registry, cap);
        Occupation l(modes_.registry->size(), 0), r(modes_.registry->size(), 0);
        l[modes_.left.id] = 1;
        r[modes_.right.id] = 1;
        acc.add(l, cfg_.alpha);
        acc.add(r, cfg_.beta);
        return std::move(acc).finish();
    }();
    FockState joint = product(product(unknown, embed(w123, 0).with_cap(cap)), embed(w456, 3).with_cap(cap));

    // Synchronous repumping of L, 1, R and 4 into their anti-Stokes channels.
    joint = optics::repump_convert(joint, modes_.left, modes_.as_left);
    joint = optics::repump_convert(joint, modes_.ensemble(1), modes_.as_1);
    joint = optics::repump_convert(joint, modes_.right, modes_.as_right);
    joint = optics::repump_convert(joint, modes_.ensemble(4), modes_.as_4);
    StageResult result;
    if (joint.is_zero()) return result;
    joint = optics::apply_beam_splitter(normalize(joint), {modes_.as_left, modes_.as_1});
    joint = optics::apply_beam_splitter(joint, {modes_.as_right, modes_.as_4});

    const optics::LossSpec loss{cfg_.base.eta};
    const ModeIndex det[4] = {modes_.as_left, modes_.as_1, modes_.as_right, modes_.as_4};
    const char* names[4] = {"teleport/D1", "teleport/D2", "teleport/D3", "teleport/D4"};

    // Depth-first over loss then detection on the four output ports.
    struct Partial {
        double p;
        FockState state;
        unsigned lost;
        std::vector<unsigned> photons;
    };
    std::vector<Partial> frontier{{1.0, joint, 0, {}}};
    for (auto m : det) {
        std::vector<Partial> next;
        for (const auto& part : frontier)
            for (const auto& l : optics::loss_branches(part.state, m, loss))
                next.push_back({part.p * l.probability, l.state, part.lost + l.lost, part.photons});
        frontier = std::move(next);
    }
    for (auto m : det) {
        std::vector<Partial> next;
        for (const auto& part : frontier)
            for (const auto& d : optics::detect_branches(part.state, m)) {
                auto photons = part.photons;
                photons.push_back(d.photons);
                next.push_back({part.p * d.probability, d.state, part.lost, std::move(photons)});
            }
        frontier = std::move(next);
    }
    for (auto& part : frontier) {
        const bool c1 = part.photons[0] > 0, c2 = part.photons[1] > 0;
        const bool c3 = part.photons[2] > 0, c4 = part.photons[3] > 0;
        if ((c1 == c2) || (c3 == c4)) continue;
        FockState out = part.state;
        // The D2/D4 ports flip the sign of the beta branch; Bob and Carol undo it locally.
        if (c2 != c4) {
            out = optics::apply_phase(out, modes_.ensemble(5), std::numbers::pi);
            out = optics::apply_phase(out, modes_.ensemble(6), std::numbers::pi);
        }
        std::vector<DetectorOutcome> clicks;
        for (int k = 0; k < 4; ++k) clicks.push_back({part.photons[k] > 0, names[k], part.photons[k]});
        add_branch(result, std::move(out), {part.p, std::move(clicks), part.lost});
    }
    return result;
}

TeleportOutcome Teleporter::run(RandomStream& rng) const {
    TeleportOutcome outcome{StepOutcome{false, 0, FockState::vacuum(modes_.registry), {}}, false, 0};
    const std::vector<ModeIndex> receivers{modes_.ensemble(2), modes_.ensemble(3), modes_.ensemble(5),
                                           modes_.ensemble(6)};
    for (std::uint64_t attempt = 1; attempt <= cfg_.base.max_attempts; ++attempt) {
        auto w123 = chain_.sample(rng);
        auto w456 = chain_.sample(rng);
        outcome.w_attempts += w123.passes + w456.passes;
        StageResult round = enumerate_round(w123.outcome.state, w456.outcome.state);
        if (!(rng.uniform() < round.success_probability)) continue;
        std::vector<double> weights;
        for (const auto& b : round.successes) weights.push_back(b.probability);
        const auto& pick = round.successes[rng.choose(weights)];
        weights.clear();
        for (const auto& h : pick.heralds) weights.push_back(h.probability);
        outcome.step.succeeded = true;
        outcome.step.attempts = attempt;
        outcome.step.state = pick.state;
        outcome.step.click_log = pick.heralds[rng.choose(weights)].clicks;
        const auto dist = count_excitations(pick.state, receivers);
        outcome.vacuum_component = dist.size() >= 1 && dist[0] > 1.0 - 1e-12;
        return outcome;
    }
    throw AttemptsExhausted("teleport", "teleportation did not herald within max_attempts rounds");
}

TeleportOutcome teleport(const TeleportConfig& cfg, RandomStream& rng) { return Teleporter(cfg).run(rng); }

Localization receiver_localize(const FockState& state, const std::vector<ModeIndex>& receiver_modes,
                               RandomStream& rng) {
    if (state.is_zero()) throw NormalizationError("localization on a zero state");
    for (const auto& [occ, amp] : state.terms())
        if (total_occupation(occ) != 1)
            throw PreconditionError("receiver localization needs exactly one excitation in every term");
    const auto dist = count_excitations(state, receiver_modes);
    const double p_this = dist.size() > 1 ? dist[1] : 0.0;
    const bool here = rng.uniform() < p_this;
    FockState residual = normalize(project_occupation(state, receiver_modes, here ? 1 : 0));
    return {here ? Holder::this_receiver : Holder::other_receiver, std::move(residual), p_this};
}

double qubit_fidelity(const FockState& residual, ModeIndex a, ModeIndex b, Complex alpha, Complex beta) {
    TermAccumulator acc(residual);
    Occupation oa(residual.registry()->size(), 0), ob(residual.registry()->size(), 0);
    oa[a.id] = 1;
    ob[b.id] = 1;
    acc.add(oa, alpha);
    acc.add(ob, beta);
    return fidelity(std::move(acc).finish(), residual);
}

}  // namespace wclass
