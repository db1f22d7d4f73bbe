#pragma once

// Physical moves used by every protocol step: 50/50 beam splitter, phase
// shifter, weak Raman pumping, repump retrieval, photon loss and
// non-number-resolving detection.
//
// Loss and detection come in two flavours sharing one implementation: the
// *_branches functions enumerate every quantum-jump outcome with its Born
// probability, and apply_loss/detect draw one of them.

#include <string>
#include <utility>
#include <vector>

#include "wclass/fock.hpp"
#include "wclass/random.hpp"

namespace wclass::optics {

// Above this per-pulse emission probability the weak-pumping expansion is
// no longer a good description.
inline constexpr double kWeakPumpLimit = 0.1;

struct BeamSplitterSpec {
    ModeIndex mode_a;
    ModeIndex mode_b;
};

struct PumpSpec {
    ModeIndex ensemble;
    ModeIndex stokes;
    double emission_prob = 0.0;
    double channel_phase = 0.0;
    // Keep the double-pair term of the expansion (subject to the cap).
    bool second_order = true;
};

struct LossSpec {
    double eta = 0.0;
};

struct DetectorOutcome {
    bool clicked = false;
    std::string detector_id;
    // Photons absorbed on this sample path; the click itself cannot tell 1 from 2.
    unsigned photons = 0;
};

// a+ -> (a+ + b+)/sqrt2, b+ -> (a+ - b+)/sqrt2.
FockState apply_beam_splitter(const FockState& state, const BeamSplitterSpec& bs);

FockState apply_phase(const FockState& state, ModeIndex m, double phi);

// (1 + sqrt(p) e^{i phi} S+A+ + (p e^{2 i phi} / 2) (S+A+)^2) |state>, unnormalized.
FockState pump_excite(const FockState& state, const PumpSpec& pump);

// Retrieval of one stored excitation into the anti-Stokes mode:
// |n, 0> -> sqrt(n) |n-1, 1> for n >= 1; terms with n = 0 pass unchanged.
FockState repump_convert(const FockState& state, ModeIndex ensemble, ModeIndex anti_stokes);

struct LossBranch {
    unsigned lost = 0;
    double probability = 0.0;
    FockState state;  // normalized
};

std::vector<LossBranch> loss_branches(const FockState& state, ModeIndex m, const LossSpec& loss);

struct LossResult {
    FockState state;
    unsigned lost = 0;
};

LossResult apply_loss(const FockState& state, ModeIndex m, const LossSpec& loss, RandomStream& rng);

struct DetectBranch {
    unsigned photons = 0;
    double probability = 0.0;
    FockState state;  // normalized, mode emptied
};

std::vector<DetectBranch> detect_branches(const FockState& state, ModeIndex m);

std::pair<DetectorOutcome, FockState> detect(const FockState& state, ModeIndex m, RandomStream& rng,
                                             std::string detector_id = "D");

}  // namespace wclass::optics
