#pragma once

// Sparse few-excitation multi-mode bosonic states.
//
// A FockState is an immutable map from occupation vectors to complex
// amplitudes over a sealed ModeRegistry. Collective atomic modes are exact
// bosons unless the registry carries a finite atom number, in which case the
// ladder matrix elements pick up the saturation factor sqrt(1 - n/N_a).

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wclass {

using Complex = std::complex<double>;

// Amplitudes below this magnitude are dropped from every result.
inline constexpr double kPruneThreshold = 1e-15;
inline constexpr unsigned kDefaultTruncationCap = 4;

enum class ModeKind : std::uint8_t { atomic, photonic };

std::string_view to_string(ModeKind kind);

struct ModeIndex {
    std::uint16_t id = 0;
    ModeKind kind = ModeKind::atomic;

    friend bool operator==(const ModeIndex&, const ModeIndex&) = default;
};

struct CollectiveModeModel {
    // nullopt means N_a -> infinity (ideal bosons).
    std::optional<std::uint64_t> n_a;

    bool finite_size_enabled() const { return n_a.has_value(); }

    // Extra factor on the n -> n+1 matrix element of an atomic mode.
    double saturation(unsigned n) const;
};

class ModeRegistry {
  public:
    explicit ModeRegistry(CollectiveModeModel model = {});

    ModeIndex add(std::string name, ModeKind kind);

    std::optional<ModeIndex> find(std::string_view name) const;
    // Throws ModeError for unknown names.
    ModeIndex at(std::string_view name) const;

    std::size_t size() const { return names_.size(); }
    const std::string& name(ModeIndex m) const;
    const std::vector<std::string>& names() const { return names_; }
    std::vector<ModeIndex> modes(ModeKind kind) const;
    const CollectiveModeModel& collective() const { return model_; }
    bool sealed() const { return sealed_; }

    // Throws ModeError when m is not a registered mode of the stated kind.
    void check(ModeIndex m) const;

    static std::shared_ptr<const ModeRegistry> seal(ModeRegistry registry);

  private:
    CollectiveModeModel model_;
    std::vector<std::string> names_;
    std::vector<ModeKind> kinds_;
    bool sealed_ = false;
};

using RegistryPtr = std::shared_ptr<const ModeRegistry>;
using Occupation = std::vector<std::uint8_t>;

unsigned total_occupation(const Occupation& occ);

class FockState {
  public:
    using Terms = std::map<Occupation, Complex>;

    static FockState vacuum(RegistryPtr registry, unsigned cap = kDefaultTruncationCap);
    static FockState zero(RegistryPtr registry, unsigned cap = kDefaultTruncationCap);
    // Single basis ket with the given occupations (registry order).
    static FockState basis(RegistryPtr registry, Occupation occ, Complex amp = 1.0,
                           unsigned cap = kDefaultTruncationCap);

    const RegistryPtr& registry() const { return registry_; }
    unsigned truncation_cap() const { return cap_; }
    // Sticky: set once any operation dropped a term above the cap.
    bool overflowed() const { return overflow_; }

    const Terms& terms() const { return terms_; }
    Complex amplitude(const Occupation& occ) const;
    bool is_zero() const { return terms_.empty(); }

    double norm_squared() const;
    double norm() const;

    FockState scaled(Complex factor) const;
    FockState with_cap(unsigned cap) const;

    // "amp_re amp_im : n1 n2 ... nk", one line per term in occupation order.
    std::string debug_string() const;

  private:
    friend class TermAccumulator;
    FockState(RegistryPtr registry, unsigned cap) : registry_(std::move(registry)), cap_(cap) {}

    RegistryPtr registry_;
    unsigned cap_ = kDefaultTruncationCap;
    bool overflow_ = false;
    Terms terms_;
};

// Collects contributions term by term and produces a pruned, capped state.
class TermAccumulator {
  public:
    TermAccumulator(RegistryPtr registry, unsigned cap, bool overflow = false);
    explicit TermAccumulator(const FockState& like);

    void add(const Occupation& occ, Complex amp);
    void mark_overflow() { overflow_ = true; }
    FockState finish() &&;

  private:
    RegistryPtr registry_;
    unsigned cap_;
    bool overflow_;
    FockState::Terms terms_;
};

FockState create(const FockState& state, ModeIndex m);
FockState annihilate(const FockState& state, ModeIndex m);

// Conjugate-linear in a.
Complex inner_product(const FockState& a, const FockState& b);
FockState normalize(const FockState& state);
FockState superpose(std::span<const Complex> coeffs, std::span<const FockState> states);

// P(k) for the total occupation k of `modes`; index k of the result.
std::vector<double> count_excitations(const FockState& state, std::span<const ModeIndex> modes);

// |<a|b>|^2 / (<a|a><b|b>).
double fidelity(const FockState& a, const FockState& b);

// Keep only terms whose total occupation over `modes` equals k.
FockState project_occupation(const FockState& state, std::span<const ModeIndex> modes, unsigned k);

// Re-express a state on another registry; mapping[i] is the target of source mode i.
FockState remap(const FockState& state, RegistryPtr target, std::span<const ModeIndex> mapping);

// Tensor product of states on disjoint modes of the same registry.
FockState product(const FockState& a, const FockState& b);

// Used by the ladder operators and the optics elements.
double creation_element(const ModeRegistry& registry, ModeIndex m, unsigned n);

void require_same_registry(const FockState& a, const FockState& b);

}  // namespace wclass
