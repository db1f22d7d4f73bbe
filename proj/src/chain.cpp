#include <algorithm>
#include <deque>

#include "wclass/errors.hpp"
#include "wclass/protocol.hpp"

namespace wclass {

namespace {

// Guard against runaway branching from very high truncation caps.
constexpr std::size_t kMaxNodes = 500'000;

}  // namespace

StageSequence::StageSequence(ProtocolConfig cfg, ChainModes modes, std::vector<Stage> stages, FockState input)
    : cfg_(std::move(cfg)), modes_(std::move(modes)), stages_(std::move(stages)) {
    if (stages_.empty()) throw PreconditionError("empty stage sequence");
    nodes_.push_back({input.with_cap(cfg_.truncation_cap), 0, 0.0, {}});

    const std::size_t depth = stages_.size();
    reach_.assign(depth + 1, 0.0);
    fail_at_.assign(depth, 0.0);

    std::vector<double> node_reach{1.0};
    for (std::size_t idx = 0; idx < nodes_.size(); ++idx) {
        const unsigned d = nodes_[idx].depth;
        reach_[d] += node_reach[idx];
        if (d == depth) continue;
        StageResult result = enumerate_stage(cfg_, modes_, stages_[d], nodes_[idx].state);
        fail_at_[d] += node_reach[idx] * std::max(0.0, 1.0 - result.success_probability);
        for (auto& branch : result.successes) {
            if (nodes_.size() >= kMaxNodes) throw Error("stage tree exceeds node limit");
            const std::size_t child = nodes_.size();
            nodes_.push_back({std::move(branch.state), d + 1, 0.0, {}});
            node_reach.push_back(node_reach[idx] * branch.probability);
            nodes_[idx].children.push_back(
                {branch.probability, child, std::move(branch.heralds)});
        }
    }
    // Children always follow their parent, so a reverse sweep settles success probabilities.
    for (std::size_t idx = nodes_.size(); idx-- > 0;) {
        Node& node = nodes_[idx];
        if (node.depth == depth) {
            node.success = 1.0;
            continue;
        }
        double s = 0.0;
        for (const auto& c : node.children) s += c.probability * nodes_[c.node].success;
        node.success = s;
    }
}

std::vector<std::pair<double, const FockState*>> StageSequence::leaves() const {
    std::vector<double> reach(nodes_.size(), 0.0);
    reach[0] = 1.0;
    std::vector<std::pair<double, const FockState*>> out;
    for (std::size_t idx = 0; idx < nodes_.size(); ++idx) {
        if (nodes_[idx].depth == stages_.size()) out.emplace_back(reach[idx], &nodes_[idx].state);
        for (const auto& c : nodes_[idx].children) reach[c.node] += reach[idx] * c.probability;
    }
    return out;
}

SequenceRun StageSequence::sample(RandomStream& rng) const {
    const std::size_t depth = stages_.size();
    const double p_pass = pass_success_probability();

    SequenceRun run{StepOutcome{false, 0, nodes_.front().state, {}}, {}, {}, 0, 0, 0};
    for (const auto& s : stages_) run.stage_names.push_back(s.name());

    const auto exhausted = [&](std::size_t stage) {
        throw AttemptsExhausted(stages_[stage].name(),
                                "no success within " + std::to_string(cfg_.max_attempts) +
                                    " attempts; bottleneck at " + stages_[stage].name());
    };
    const auto sample_failure_stage = [&]() {
        return rng.choose(std::span<const double>(fail_at_.data(), fail_at_.size()));
    };

    if (!(p_pass > 0.0)) exhausted(sample_failure_stage());
    const std::uint64_t failures = rng.geometric_failures(p_pass);
    if (failures >= cfg_.max_attempts) exhausted(sample_failure_stage());

    // Split the failed passes over the stage where each one stopped.
    std::vector<std::uint64_t> failed_at(depth, 0);
    std::uint64_t remaining = failures;
    double mass = 0.0;
    for (double f : fail_at_) mass += f;
    for (std::size_t k = 0; k < depth && remaining > 0; ++k) {
        const double p = mass > 0.0 ? std::clamp(fail_at_[k] / mass, 0.0, 1.0) : 0.0;
        const std::uint64_t c = k + 1 == depth ? remaining : rng.binomial(remaining, p);
        failed_at[k] = c;
        remaining -= c;
        mass -= fail_at_[k];
    }

    run.stage_attempts.assign(depth, 1);
    std::uint64_t suffix = 0;
    for (std::size_t k = depth; k-- > 0;) {
        suffix += failed_at[k];
        run.stage_attempts[k] += suffix;
        run.total_attempts += run.stage_attempts[k];
    }
    run.passes = failures + 1;

    // The successful pass, drawn conditioned on reaching the end.
    std::size_t idx = 0;
    std::vector<double> weights;
    while (nodes_[idx].depth < depth) {
        const Node& node = nodes_[idx];
        weights.clear();
        for (const auto& c : node.children) weights.push_back(c.probability * nodes_[c.node].success);
        const Child& pick = node.children[rng.choose(weights)];
        weights.clear();
        for (const auto& h : pick.heralds) weights.push_back(h.probability);
        const Herald& herald = pick.heralds[rng.choose(weights)];
        run.outcome.click_log.insert(run.outcome.click_log.end(), herald.clicks.begin(), herald.clicks.end());
        run.lost_photons += herald.lost;
        idx = pick.node;
    }
    run.outcome.succeeded = true;
    run.outcome.attempts = run.passes;
    run.outcome.state = nodes_[idx].state;
    return run;
}

}  // namespace wclass
