#pragma once

// Repeat-until-success preparation of n-party W states between atomic
// ensembles, plus W-assisted teleportation to two receivers.
//
// Ensembles are numbered from 1 as parties. Party i's Stokes channel carries
// the phase phases[i-1] (the phi_{1i} of the chain); the link phase between
// parties i and j is phases[j-1] - phases[i-1].
//
// Every heralded step is a Stage. A stage is evaluated by enumerating all of
// its quantum-jump branches (loss counts, photons absorbed per detector) with
// Born weights; sampling picks one branch. A failed stage restarts the whole
// stage sequence from its initial state.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wclass/fock.hpp"
#include "wclass/optics.hpp"
#include "wclass/random.hpp"

namespace wclass {

struct ProtocolConfig {
    unsigned n = 3;
    double p_e = 0.01;
    double eta = 0.0;
    // phi_{1i} per party in radians; empty means all zero.
    std::vector<double> phases;
    // Atom count per ensemble; nullopt is the N_a -> infinity limit.
    std::optional<std::uint64_t> n_a;
    double t0 = 1e-6;
    unsigned truncation_cap = kDefaultTruncationCap;
    // Upper bound on restarts of a stage sequence.
    std::uint64_t max_attempts = 1'000'000'000'000'000ull;
    std::uint64_t seed = 0;
    // Keep the double-pair term of each pump pulse.
    bool double_pairs = true;

    // Throws PreconditionError / DomainError. min_n is 3 for W preparation.
    void validate(unsigned min_n = 3) const;
    double phase(unsigned party) const;
};

struct ChainModes {
    RegistryPtr registry;
    std::vector<ModeIndex> ensembles;  // ensembles[i-1] is party i
    ModeIndex stokes_a;
    ModeIndex stokes_b;
    ModeIndex anti_stokes;

    ModeIndex ensemble(unsigned party) const;
};

// Atomic modes s1..sn followed by the photonic modes stokes_a, stokes_b, anti_stokes.
ChainModes make_chain_modes(const ProtocolConfig& cfg);

enum class StageKind { epr, connect, merge };

struct Stage {
    StageKind kind = StageKind::epr;
    unsigned i = 1;
    unsigned j = 2;
    // The chain-closing connection only heralds on the symmetric port.
    bool closing = false;

    std::string name() const;
};

// epr(1,2), then connect(i,i+1)/merge(i) for i = 2..n-1, then connect(1,n)/merge(1).
std::vector<Stage> chain_stages(unsigned n);

// One click pattern leading to a branch state.
struct Herald {
    double probability = 0.0;
    std::vector<optics::DetectorOutcome> clicks;
    unsigned lost = 0;
};

// Click patterns that leave the same state share one branch.
struct StageBranch {
    double probability = 0.0;
    FockState state;
    std::vector<Herald> heralds;
};


struct StageResult {
    std::vector<StageBranch> successes;
    double success_probability = 0.0;
};
// Adds the herald to the branch holding `state`, or opens a new branch.
void add_branch(StageResult& result, FockState state, Herald herald);

StageResult enumerate_stage(const ProtocolConfig& cfg, const ChainModes& modes, const Stage& stage,
                            const FockState& input);

struct StepOutcome {
    bool succeeded = false;
    std::uint64_t attempts = 0;
    FockState state;
    std::vector<optics::DetectorOutcome> click_log;
};

struct SequenceRun {
    StepOutcome outcome;
    std::vector<std::string> stage_names;
    // Attempts per stage, counting restarts.
    std::vector<std::uint64_t> stage_attempts;
    // Passes through the sequence (first stage attempts).
    std::uint64_t passes = 0;
    // Heralding pulses over all stages; generation time is this times t0.
    std::uint64_t total_attempts = 0;
    unsigned lost_photons = 0;
};

// Exact branch tree of a stage sequence with full-restart semantics. Built
// once, then sampled cheaply: the number of failed passes is geometric in the
// pass success probability, failed passes are split over stages
// multinomially, and the successful pass is drawn conditioned on success.
class StageSequence {
  public:
    StageSequence(ProtocolConfig cfg, ChainModes modes, std::vector<Stage> stages, FockState input);

    const std::vector<Stage>& stages() const { return stages_; }
    const ChainModes& modes() const { return modes_; }
    const ProtocolConfig& config() const { return cfg_; }

    double pass_success_probability() const { return nodes_.front().success; }
    // Probability that a pass fails at stage k.
    const std::vector<double>& failure_distribution() const { return fail_at_; }
    // Probability that a pass reaches stage k.
    const std::vector<double>& reach_probability() const { return reach_; }
    // Successful-pass end states with their unconditional probabilities.
    std::vector<std::pair<double, const FockState*>> leaves() const;
    std::size_t node_count() const { return nodes_.size(); }

    // Throws AttemptsExhausted when more than max_attempts passes are needed.
    SequenceRun sample(RandomStream& rng) const;

  private:
    struct Child {
        double probability;
        std::size_t node;
        std::vector<Herald> heralds;
    };
    struct Node {
        FockState state;
        unsigned depth;
        double success = 0.0;  // probability of completing the sequence from here
        std::vector<Child> children;
    };

    ProtocolConfig cfg_;
    ChainModes modes_;
    std::vector<Stage> stages_;
    std::vector<Node> nodes_;
    std::vector<double> fail_at_;
    std::vector<double> reach_;
};

// Individual steps, each with restart-on-failure over its own stages.
StepOutcome prepare_epr(const ProtocolConfig& cfg, unsigned i, unsigned j, RandomStream& rng);
StepOutcome connect_step(const ProtocolConfig& cfg, const FockState& state, unsigned i, unsigned j,
                         RandomStream& rng);
StepOutcome merge_repump(const ProtocolConfig& cfg, const FockState& state, unsigned i, RandomStream& rng);
StepOutcome maximize_w(const ProtocolConfig& cfg, const FockState& state, RandomStream& rng);

// Full chain from the ground state; `sequence` may be reused across trials.
StageSequence make_chain_sequence(const ProtocolConfig& cfg);
SequenceRun build_w_chain(const ProtocolConfig& cfg, RandomStream& rng);

FockState phase_compensate(const FockState& state, const ChainModes& modes, const std::vector<double>& phases);
// (1/sqrt n) sum_i e^{i phi_{1i}} s_i+ |vac>
FockState ideal_w_state(const ChainModes& modes, unsigned n, const std::vector<double>& phases);
FockState ideal_w_state(const ProtocolConfig& cfg);

// Operator-algebra route: the unconditioned, noise-free amplitudes obtained by
// applying the ladder operators literally.
namespace algebra {

// (s_i+ + e^{i phi_ij} s_j+) / sqrt2 applied to `state`.
FockState connect(const FockState& state, const ChainModes& modes, unsigned i, unsigned j,
                  const std::vector<double>& phases);
FockState epr(const ChainModes& modes, const std::vector<double>& phases);
// s_i applied to `state`.
FockState merge(const FockState& state, const ChainModes& modes, unsigned i);
// Unnormalized W' chain state for n parties.
FockState w_prime(const ChainModes& modes, unsigned n, const std::vector<double>& phases);
// (1 / 2 sqrt n) s_1 (s_1+ + e^{i phi_1n} s_n+) |W'>
FockState maximize(const FockState& w_prime_state, const ChainModes& modes, unsigned n,
                   const std::vector<double>& phases);

}  // namespace algebra

// ---- teleportation ----

struct TeleportConfig {
    Complex alpha = 1.0;
    Complex beta = 0.0;
    ProtocolConfig base;  // n is forced to 3

    void validate() const;
};

struct TeleportModes {
    RegistryPtr registry;
    ModeIndex left, right;                   // the unknown state's ensembles
    std::vector<ModeIndex> ensembles;        // parties 1..6
    ModeIndex as_left, as_1, as_right, as_4; // anti-Stokes channels

    ModeIndex ensemble(unsigned party) const { return ensembles.at(party - 1); }
    std::vector<ModeIndex> bob() const { return {ensemble(2), ensemble(5)}; }
    std::vector<ModeIndex> carol() const { return {ensemble(3), ensemble(6)}; }
};

TeleportModes make_teleport_modes(const ProtocolConfig& base);

// Normalized [e^{i phi13}(a s3+ + b s6+) + e^{i phi12}(a s2+ + b s5+)] |vac> / sqrt2.
FockState teleported_state(const TeleportModes& modes, Complex alpha, Complex beta,
                           const std::vector<double>& phases);

struct TeleportOutcome {
    StepOutcome step;
    // Heralded but with no excitation left at the receivers (two photons at one detector).
    bool vacuum_component = false;
    std::uint64_t w_attempts = 0;
};

class Teleporter {
  public:
    explicit Teleporter(TeleportConfig cfg);

    const TeleportModes& modes() const { return modes_; }
    TeleportOutcome run(RandomStream& rng) const;

    // All heralded outcomes of one Bell-type round on the given W states.
    StageResult enumerate_round(const FockState& w123, const FockState& w456) const;

  private:
    TeleportConfig cfg_;
    TeleportModes modes_;
    StageSequence chain_;
};

TeleportOutcome teleport(const TeleportConfig& cfg, RandomStream& rng);

enum class Holder { this_receiver, other_receiver };

struct Localization {
    Holder holder;
    FockState residual;
    double probability_this = 0.0;
};

// Number measurement of the receiver's modes on a one-excitation state.
Localization receiver_localize(const FockState& state, const std::vector<ModeIndex>& receiver_modes,
                               RandomStream& rng);

// Fidelity of a one-excitation residual with alpha s_a+ + beta s_b+.
double qubit_fidelity(const FockState& residual, ModeIndex a, ModeIndex b, Complex alpha, Complex beta);

}  // namespace wclass
