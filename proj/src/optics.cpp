#include "wclass/optics.hpp"

#include <cmath>
#include <numbers>

#include "wclass/errors.hpp"

namespace wclass::optics {

namespace {

void require_photonic(const FockState& state, ModeIndex m) {
    state.registry()->check(m);
    if (m.kind != ModeKind::photonic)
        throw ModeKindError("mode '" + state.registry()->name(m) + "' is not photonic");
}

void require_atomic(const FockState& state, ModeIndex m) {
    state.registry()->check(m);
    if (m.kind != ModeKind::atomic)
        throw ModeKindError("mode '" + state.registry()->name(m) + "' is not atomic");
}

bool mode_empty(const FockState& state, ModeIndex m) {
    for (const auto& [occ, amp] : state.terms())
        if (occ[m.id] != 0) return false;
    return true;
}

double binomial_coefficient(unsigned n, unsigned k) {
    double c = 1.0;
    for (unsigned i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

}  // namespace

FockState apply_beam_splitter(const FockState& state, const BeamSplitterSpec& bs) {
    require_photonic(state, bs.mode_a);
    require_photonic(state, bs.mode_b);
    if (bs.mode_a == bs.mode_b) throw ModeError("beam splitter needs two distinct modes");

    const auto a = bs.mode_a.id;
    const auto b = bs.mode_b.id;
    TermAccumulator acc(state);
    for (const auto& [occ, amp] : state.terms()) {
        const unsigned na = occ[a];
        const unsigned nb = occ[b];
        if (na == 0 && nb == 0) {
            acc.add(occ, amp);
            continue;
        }
        // (a+)^na (b+)^nb / sqrt(na! nb!) expanded after substitution.
        const double pref = std::pow(std::numbers::sqrt2 / 2.0, na + nb) /
                            std::sqrt(std::tgamma(na + 1.0) * std::tgamma(nb + 1.0));
        for (unsigned j = 0; j <= na; ++j)
            for (unsigned k = 0; k <= nb; ++k) {
                const unsigned out_a = j + k;
                const unsigned out_b = na + nb - out_a;
                double c = binomial_coefficient(na, j) * binomial_coefficient(nb, k);
                if ((nb - k) % 2 == 1) c = -c;
                c *= std::sqrt(std::tgamma(out_a + 1.0) * std::tgamma(out_b + 1.0));
                Occupation next = occ;
                next[a] = static_cast<std::uint8_t>(out_a);
                next[b] = static_cast<std::uint8_t>(out_b);
                acc.add(next, amp * pref * c);
            }
    }
    return std::move(acc).finish();
}

FockState apply_phase(const FockState& state, ModeIndex m, double phi) {
    state.registry()->check(m);
    TermAccumulator acc(state);
    for (const auto& [occ, amp] : state.terms())
        acc.add(occ, amp * std::polar(1.0, phi * occ[m.id]));
    return std::move(acc).finish();
}

FockState pump_excite(const FockState& state, const PumpSpec& pump) {
    require_atomic(state, pump.ensemble);
    require_photonic(state, pump.stokes);
    if (pump.emission_prob < 0.0 || pump.emission_prob >= 1.0)
        throw DomainError("emission probability must lie in [0, 1)");
    if (!mode_empty(state, pump.stokes))
        throw SequencingError("Stokes mode '" + state.registry()->name(pump.stokes) +
                              "' is occupied before pumping");

    const auto pair = [&](const FockState& s) { return create(create(s, pump.ensemble), pump.stokes); };
    const FockState one = pair(state);
    std::vector<Complex> coeffs{1.0, std::sqrt(pump.emission_prob) * std::polar(1.0, pump.channel_phase)};
    std::vector<FockState> parts{state, one};
    if (pump.second_order) {
        coeffs.push_back(pump.emission_prob / 2.0 * std::polar(1.0, 2.0 * pump.channel_phase));
        parts.push_back(pair(one));
    }
    return superpose(coeffs, parts);
}

FockState repump_convert(const FockState& state, ModeIndex ensemble, ModeIndex anti_stokes) {
    require_atomic(state, ensemble);
    require_photonic(state, anti_stokes);
    if (!mode_empty(state, anti_stokes))
        throw SequencingError("anti-Stokes mode '" + state.registry()->name(anti_stokes) +
                              "' is occupied before repumping");

    const auto& reg = *state.registry();
    TermAccumulator acc(state);
    for (const auto& [occ, amp] : state.terms()) {
        const unsigned n = occ[ensemble.id];
        if (n == 0) {
            acc.add(occ, amp);
            continue;
        }
        Occupation next = occ;
        --next[ensemble.id];
        next[anti_stokes.id] = 1;
        acc.add(next, amp * creation_element(reg, ensemble, n - 1));
    }
    return std::move(acc).finish();
}

std::vector<LossBranch> loss_branches(const FockState& state, ModeIndex m, const LossSpec& loss) {
    require_photonic(state, m);
    if (loss.eta < 0.0 || loss.eta > 1.0) throw DomainError("loss probability must lie in [0, 1]");
    const double total = state.norm_squared();
    if (!(total > 0.0)) throw NormalizationError("loss applied to a zero state");

    unsigned max_n = 0;
    for (const auto& [occ, amp] : state.terms()) max_n = std::max<unsigned>(max_n, occ[m.id]);

    std::vector<LossBranch> out;
    const double keep = 1.0 - loss.eta;
    for (unsigned l = 0; l <= max_n; ++l) {
        // Kraus operator for l photons scattered into a measured environment.
        TermAccumulator acc(state);
        for (const auto& [occ, amp] : state.terms()) {
            const unsigned n = occ[m.id];
            if (n < l) continue;
            const double w = binomial_coefficient(n, l) * std::pow(keep, n - l) * std::pow(loss.eta, l);
            if (w == 0.0) continue;
            Occupation next = occ;
            next[m.id] = static_cast<std::uint8_t>(n - l);
            acc.add(next, amp * std::sqrt(w));
        }
        FockState branch = std::move(acc).finish();
        const double p = branch.norm_squared() / total;
        if (p > 0.0 && !branch.is_zero()) out.push_back({l, p, normalize(branch)});
    }
    return out;
}

LossResult apply_loss(const FockState& state, ModeIndex m, const LossSpec& loss, RandomStream& rng) {
    if (loss.eta == 0.0) {
        require_photonic(state, m);
        return {state, 0};
    }
    auto branches = loss_branches(state, m, loss);
    std::vector<double> w;
    for (const auto& b : branches) w.push_back(b.probability);
    auto& pick = branches[rng.choose(w)];
    return {std::move(pick.state), pick.lost};
}

std::vector<DetectBranch> detect_branches(const FockState& state, ModeIndex m) {
    require_photonic(state, m);
    const double total = state.norm_squared();
    if (!(total > 0.0)) throw NormalizationError("detection on a zero state");

    std::map<unsigned, TermAccumulator> by_k;
    for (const auto& [occ, amp] : state.terms()) {
        const unsigned k = occ[m.id];
        auto it = by_k.try_emplace(k, state).first;
        Occupation next = occ;
        next[m.id] = 0;
        it->second.add(next, amp);
    }
    std::vector<DetectBranch> out;
    for (auto& [k, acc] : by_k) {
        FockState branch = std::move(acc).finish();
        const double p = branch.norm_squared() / total;
        if (p > 0.0) out.push_back({k, p, normalize(branch)});
    }
    return out;
}

std::pair<DetectorOutcome, FockState> detect(const FockState& state, ModeIndex m, RandomStream& rng,
                                             std::string detector_id) {
    auto branches = detect_branches(state, m);
    std::vector<double> w;
    for (const auto& b : branches) w.push_back(b.probability);
    auto& pick = branches[rng.choose(w)];
    DetectorOutcome outcome{pick.photons >= 1, std::move(detector_id), pick.photons};
    return {outcome, std::move(pick.state)};
}

}  // namespace wclass::optics
