#include "wclass/fock.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "wclass/errors.hpp"

namespace wclass {

std::string_view to_string(ModeKind kind) {
    return kind == ModeKind::atomic ? "atomic" : "photonic";
}

double CollectiveModeModel::saturation(unsigned n) const {
    if (!n_a) return 1.0;
    const double frac = static_cast<double>(n) / static_cast<double>(*n_a);
    return frac >= 1.0 ? 0.0 : std::sqrt(1.0 - frac);
}

ModeRegistry::ModeRegistry(CollectiveModeModel model) : model_(model) {
    if (model_.n_a && *model_.n_a < 2)
        throw DomainError("finite-size collective model needs N_a >= 2");
}

ModeIndex ModeRegistry::add(std::string name, ModeKind kind) {
    if (sealed_) throw RegistryError("registry is sealed");
    if (find(name)) throw RegistryError("duplicate mode name '" + name + "'");
    if (names_.size() >= 0xFFFF) throw RegistryError("too many modes");
    names_.push_back(std::move(name));
    kinds_.push_back(kind);
    return {static_cast<std::uint16_t>(names_.size() - 1), kind};
}

std::optional<ModeIndex> ModeRegistry::find(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return ModeIndex{static_cast<std::uint16_t>(i), kinds_[i]};
    return std::nullopt;
}

ModeIndex ModeRegistry::at(std::string_view name) const {
    if (auto m = find(name)) return *m;
    throw ModeError("unknown mode '" + std::string(name) + "'");
}

const std::string& ModeRegistry::name(ModeIndex m) const {
    check(m);
    return names_[m.id];
}

std::vector<ModeIndex> ModeRegistry::modes(ModeKind kind) const {
    std::vector<ModeIndex> out;
    for (std::size_t i = 0; i < kinds_.size(); ++i)
        if (kinds_[i] == kind) out.push_back({static_cast<std::uint16_t>(i), kind});
    return out;
}

void ModeRegistry::check(ModeIndex m) const {
    if (m.id >= names_.size())
        throw ModeError("mode id " + std::to_string(m.id) + " is not registered");
    if (kinds_[m.id] != m.kind)
        throw ModeError("mode '" + names_[m.id] + "' is " + std::string(to_string(kinds_[m.id])));
}

std::shared_ptr<const ModeRegistry> ModeRegistry::seal(ModeRegistry registry) {
    registry.sealed_ = true;
    return std::make_shared<const ModeRegistry>(std::move(registry));
}

unsigned total_occupation(const Occupation& occ) {
    return std::accumulate(occ.begin(), occ.end(), 0u);
}

namespace {

void require_sealed(const RegistryPtr& registry) {
    if (!registry) throw RegistryError("null registry");
    if (!registry->sealed()) throw RegistryError("states need a sealed registry");
}

}  // namespace

FockState FockState::vacuum(RegistryPtr registry, unsigned cap) {
    return basis(registry, Occupation(registry ? registry->size() : 0, 0), 1.0, cap);
}

FockState FockState::zero(RegistryPtr registry, unsigned cap) {
    require_sealed(registry);
    if (cap == 0) throw DomainError("truncation cap must be positive");
    return FockState(std::move(registry), cap);
}

FockState FockState::basis(RegistryPtr registry, Occupation occ, Complex amp, unsigned cap) {
    require_sealed(registry);
    if (occ.size() != registry->size()) throw RegistryError("occupation length does not match registry");
    TermAccumulator acc(std::move(registry), cap);
    acc.add(occ, amp);
    return std::move(acc).finish();
}

Complex FockState::amplitude(const Occupation& occ) const {
    auto it = terms_.find(occ);
    return it == terms_.end() ? Complex{} : it->second;
}

double FockState::norm_squared() const {
    double s = 0.0;
    for (const auto& [occ, amp] : terms_) s += std::norm(amp);
    return s;
}

double FockState::norm() const { return std::sqrt(norm_squared()); }

FockState FockState::scaled(Complex factor) const {
    TermAccumulator acc(registry_, cap_, overflow_);
    for (const auto& [occ, amp] : terms_) acc.add(occ, amp * factor);
    return std::move(acc).finish();
}

FockState FockState::with_cap(unsigned cap) const {
    TermAccumulator acc(registry_, cap, overflow_);
    for (const auto& [occ, amp] : terms_) acc.add(occ, amp);
    return std::move(acc).finish();
}

std::string FockState::debug_string() const {
    std::ostringstream os;
    char buf[64];
    for (const auto& [occ, amp] : terms_) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g :", amp.real(), amp.imag());
        os << buf;
        for (auto n : occ) os << ' ' << static_cast<unsigned>(n);
        os << '\n';
    }
    return os.str();
}

TermAccumulator::TermAccumulator(RegistryPtr registry, unsigned cap, bool overflow)
    : registry_(std::move(registry)), cap_(cap), overflow_(overflow) {
    require_sealed(registry_);
    if (cap_ == 0) throw DomainError("truncation cap must be positive");
}

TermAccumulator::TermAccumulator(const FockState& like)
    : TermAccumulator(like.registry(), like.truncation_cap(), like.overflowed()) {}

void TermAccumulator::add(const Occupation& occ, Complex amp) {
    if (amp == Complex{}) return;
    if (total_occupation(occ) > cap_) {
        overflow_ = true;
        return;
    }
    terms_[occ] += amp;
}

FockState TermAccumulator::finish() && {
    FockState out(std::move(registry_), cap_);
    out.overflow_ = overflow_;
    for (auto& [occ, amp] : terms_)
        if (std::abs(amp) >= kPruneThreshold) out.terms_.emplace(occ, amp);
    return out;
}

double creation_element(const ModeRegistry& registry, ModeIndex m, unsigned n) {
    double element = std::sqrt(static_cast<double>(n) + 1.0);
    if (m.kind == ModeKind::atomic) element *= registry.collective().saturation(n);
    return element;
}

FockState create(const FockState& state, ModeIndex m) {
    const auto& reg = *state.registry();
    reg.check(m);
    TermAccumulator acc(state);
    for (const auto& [occ, amp] : state.terms()) {
        Occupation next = occ;
        if (next[m.id] == 0xFF) throw DomainError("occupation overflow");
        ++next[m.id];
        acc.add(next, amp * creation_element(reg, m, occ[m.id]));
    }
    return std::move(acc).finish();
}

FockState annihilate(const FockState& state, ModeIndex m) {
    const auto& reg = *state.registry();
    reg.check(m);
    TermAccumulator acc(state);
    for (const auto& [occ, amp] : state.terms()) {
        if (occ[m.id] == 0) continue;
        Occupation next = occ;
        --next[m.id];
        // Adjoint of the n-1 -> n creation element.
        acc.add(next, amp * creation_element(reg, m, next[m.id]));
    }
    return std::move(acc).finish();
}

void require_same_registry(const FockState& a, const FockState& b) {
    if (a.registry() == b.registry()) return;
    const auto& ra = *a.registry();
    const auto& rb = *b.registry();
    bool same = ra.names() == rb.names() && ra.collective().n_a == rb.collective().n_a;
    for (std::size_t i = 0; same && i < ra.size(); ++i)
        same = ra.find(ra.names()[i])->kind == rb.find(rb.names()[i])->kind;
    if (!same) throw RegistryError("states live on different registries");
}

Complex inner_product(const FockState& a, const FockState& b) {
    require_same_registry(a, b);
    Complex s{};
    const auto& small = a.terms().size() <= b.terms().size() ? a.terms() : b.terms();
    const bool a_small = &small == &a.terms();
    for (const auto& [occ, amp] : small) {
        Complex other = a_small ? b.amplitude(occ) : a.amplitude(occ);
        s += a_small ? std::conj(amp) * other : std::conj(other) * amp;
    }
    return s;
}

FockState normalize(const FockState& state) {
    const double n = state.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw NormalizationError("cannot normalize a zero state");
    return state.scaled(1.0 / n);
}

FockState superpose(std::span<const Complex> coeffs, std::span<const FockState> states) {
    if (states.empty() || coeffs.size() != states.size())
        throw PreconditionError("superpose needs matching, non-empty coefficient and state lists");
    TermAccumulator acc(states.front().registry(), states.front().truncation_cap());
    for (std::size_t k = 0; k < states.size(); ++k) {
        require_same_registry(states.front(), states[k]);
        if (states[k].overflowed()) acc.mark_overflow();
        for (const auto& [occ, amp] : states[k].terms()) acc.add(occ, coeffs[k] * amp);
    }
    return std::move(acc).finish();
}

std::vector<double> count_excitations(const FockState& state, std::span<const ModeIndex> modes) {
    for (auto m : modes) state.registry()->check(m);
    const double total = state.norm_squared();
    if (!(total > 0.0)) throw NormalizationError("count_excitations on a zero state");
    std::vector<double> dist;
    for (const auto& [occ, amp] : state.terms()) {
        unsigned k = 0;
        for (auto m : modes) k += occ[m.id];
        if (dist.size() <= k) dist.resize(k + 1, 0.0);
        dist[k] += std::norm(amp) / total;
    }
    return dist;
}

double fidelity(const FockState& a, const FockState& b) {
    const double na = a.norm_squared();
    const double nb = b.norm_squared();
    if (!(na > 0.0) || !(nb > 0.0)) throw NormalizationError("fidelity with a zero state");
    return std::norm(inner_product(a, b)) / (na * nb);
}

FockState project_occupation(const FockState& state, std::span<const ModeIndex> modes, unsigned k) {
    for (auto m : modes) state.registry()->check(m);
    TermAccumulator acc(state);
    for (const auto& [occ, amp] : state.terms()) {
        unsigned n = 0;
        for (auto m : modes) n += occ[m.id];
        if (n == k) acc.add(occ, amp);
    }
    return std::move(acc).finish();
}

FockState remap(const FockState& state, RegistryPtr target, std::span<const ModeIndex> mapping) {
    const auto& src = *state.registry();
    if (mapping.size() != src.size()) throw RegistryError("remap needs one target per source mode");
    for (std::size_t i = 0; i < mapping.size(); ++i) {
        target->check(mapping[i]);
        if (src.find(src.names()[i])->kind != mapping[i].kind)
            throw ModeKindError("remap changes the kind of mode '" + src.names()[i] + "'");
    }
    TermAccumulator acc(target, state.truncation_cap(), state.overflowed());
    for (const auto& [occ, amp] : state.terms()) {
        Occupation out(target->size(), 0);
        for (std::size_t i = 0; i < occ.size(); ++i) out[mapping[i].id] += occ[i];
        acc.add(out, amp);
    }
    return std::move(acc).finish();
}

FockState product(const FockState& a, const FockState& b) {
    require_same_registry(a, b);
    TermAccumulator acc(a.registry(), std::max(a.truncation_cap(), b.truncation_cap()),
                        a.overflowed() || b.overflowed());
    for (const auto& [oa, xa] : a.terms())
        for (const auto& [ob, xb] : b.terms()) {
            Occupation occ = oa;
            for (std::size_t i = 0; i < occ.size(); ++i) {
                if (oa[i] != 0 && ob[i] != 0) throw PreconditionError("product of states sharing a mode");
                occ[i] = static_cast<std::uint8_t>(oa[i] + ob[i]);
            }
            acc.add(occ, xa * xb);
        }
    return std::move(acc).finish();
}

}  // namespace wclass
