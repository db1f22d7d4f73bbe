// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>

#include "oracle.hpp"
#include "wclass/cli.hpp"
#include "wclass/montecarlo.hpp"
#include "wclass/protocol.hpp"

using namespace wclass;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

int failures = 0;

void verdict(const char* id, bool ok, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Complex e(const std::vector<double>& ph, unsigned party) { return std::polar(1.0, ph[party - 1]); }

std::vector<double> random_phases(unsigned n, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
    std::vector<double> ph(n, 0.0);
    for (unsigned i = 1; i < n; ++i) ph[i] = u(gen);
    return ph;
}

ProtocolConfig quiet(unsigned n, std::vector<double> phases = {}) {
    ProtocolConfig c;
    c.n = n;
    c.p_e = 1e-7;
    c.eta = 0.0;
    c.double_pairs = false;
    c.phases = std::move(phases);
    return c;
}

// The chain as a literal product of linear forms and derivatives.
oracle::Poly w_prime_oracle(unsigned n, const std::vector<double>& ph) {
    auto p = oracle::linear(n, {{0, 1.0}, {1, e(ph, 2) / e(ph, 1)}});
    for (unsigned i = 2; i + 1 <= n; ++i)
        p = oracle::derivative(oracle::linear(n, {{i - 1, 1.0}, {i, e(ph, i + 1) / e(ph, i)}}) * p, i - 1);
    return p;
}

void a1_algebra() {
    const auto start = Clock::now();
    std::mt19937_64 gen(2024);
    double worst = 0.0, worst_norm = 0.0, worst_w = 0.0;
    for (unsigned n = 3; n <= 8; ++n)
        for (int round = 0; round <= 20; ++round) {
            const auto ph = round == 0 ? std::vector<double>(n, 0.0) : random_phases(n, gen);
            const auto modes = make_chain_modes(quiet(n, ph));
            std::vector<std::size_t> ids;
            for (auto x : modes.ensembles) ids.push_back(x.id);

            const auto epr = algebra::epr(modes, ph);
            worst = std::max(worst, oracle::max_deviation(epr, oracle::linear(n, {{0, 1.0 / std::sqrt(2.0)},
                                                                                   {1, e(ph, 2) / std::sqrt(2.0)}}),
                                                          ids));
            const auto wp = algebra::w_prime(modes, n, ph);
            const auto orc = w_prime_oracle(n, ph);
            worst = std::max(worst, oracle::max_deviation(wp, orc, ids));
            worst_norm = std::max(worst_norm, std::abs(wp.norm_squared() - (4.0 * n - 6.0)));

            const auto w = algebra::maximize(wp, modes, n, ph);
            const auto closing = oracle::linear(n, {{0, 1.0}, {n - 1, e(ph, n)}});
            const auto want = oracle::derivative(closing * orc, 0) * (1.0 / (2.0 * std::sqrt(double(n))));
            worst = std::max(worst, oracle::max_deviation(w, want, ids));
            worst_w = std::max(worst_w, std::abs(inner_product(ideal_w_state(modes, n, ph), w) - 1.0));
        }
    const double t = seconds_since(start);
    const bool ok = worst < 1e-12 && worst_norm < 1e-12 && worst_w < 1e-12 && t < 1.0;
    verdict("A1", ok,
            fmt("n=3..8 x 21 phase sets, max amplitude dev %.2e, max |norm^2-(4n-6)| %.2e, "
                "max |<W|maximized>-1| %.2e, %.3f s",
                worst, worst_norm, worst_w, t));
}

void a2_bosonic() {
    ModeRegistry ideal;
    const auto s = ideal.add("s", ModeKind::atomic);
    const auto vac = FockState::vacuum(ModeRegistry::seal(std::move(ideal)));
    const auto back = annihilate(create(create(vac, s), s), s);
    const auto expect = create(vac, s).scaled(2.0);
    const double dev = std::abs(inner_product(expect, back) - 4.0) + std::abs(back.norm_squared() - 4.0);

    ModeRegistry finite(CollectiveModeModel{1000});
    const auto sf = finite.add("s", ModeKind::atomic);
    const auto vf = FockState::vacuum(ModeRegistry::seal(std::move(finite)));
    const auto bf = annihilate(create(create(vf, sf), sf), sf);
    const double factor = std::abs(bf.amplitude(Occupation{1}));
    const double want = 2.0 * 999.0 / 1000.0;
    const bool ok = dev < 1e-12 && std::abs(factor - want) < 1e-12;
    verdict("A2", ok, fmt("ideal deviation %.2e, N_a=1000 factor %.15f (want %.15f)", dev, factor, want));
}

void a3_fidelity() {
    const auto start = Clock::now();
    bool ok = true;
    std::string detail;
    for (unsigned n = 3; n <= 5; ++n) {
        ProtocolConfig c;
        c.n = n;
        c.eta = 0.0;
        c.p_e = 0.005;
        c.seed = 300 + n;
        const auto r = run_batch(c, 1000);
        ok = ok && r.successes == 1000 && r.fidelity_mean.value >= 0.95;
        detail += fmt("n=%u F=%.4f+-%.4f (%llu ok); ", n, r.fidelity_mean.value, r.fidelity_mean.std_error,
                      static_cast<unsigned long long>(r.successes));
    }
    const double t = seconds_since(start);
    ok = ok && t < 60.0;
    verdict("A3", ok, detail + fmt("%.2f s", t));
}

void a4_scaling() {
    const auto start = Clock::now();
    ProtocolConfig c;
    c.eta = 0.3;
    c.p_e = 0.01;
    c.seed = 4;
    const auto rows = scaling_sweep(c, 3, 5, 100000);
    bool within = true, formula = true;
    std::string detail;
    for (const auto& row : rows) {
        if (!row.ratio_to_prev || !row.predicted_ratio) continue;
        const double pc = row.report.p_c_hat.value;
        const double z = (row.ratio_to_prev->value - *row.predicted_ratio) / row.ratio_to_prev->std_error;
        within = within && std::abs(z) <= 3.0;
        const double exact = predicted_generation_time(row.n, c.eta, pc, c.t0) /
                             predicted_generation_time(row.n - 1, c.eta, pc, c.t0);
        formula = formula && std::abs(exact - *row.predicted_ratio) <= 1e-12 * exact;
        detail += fmt("n=%u ratio %.1f+-%.1f vs predicted %.1f (z=%.1f); ", row.n, row.ratio_to_prev->value,
                      row.ratio_to_prev->std_error, *row.predicted_ratio, z);
    }
    const double t = seconds_since(start);
    verdict("A4", within && formula && t < 600.0,
            detail + fmt("formula ratios %s, %.1f s", formula ? "exact" : "MISMATCH", t));
}

void a5_vacuum() {
    std::vector<double> cs;
    bool ok = true;
    std::string detail;
    for (double eta : {0.1, 0.3, 0.5}) {
        ProtocolConfig c;
        c.n = 3;
        c.p_e = 0.01;
        c.eta = eta;
        c.double_pairs = true;
        c.seed = 500;
        const auto est = estimate_vacuum_coefficient(c, 20000);
        const double fm = fidelity_mixture(est.mixture, ideal_w_state(c));
        const double gap = std::abs(fm - 1.0 / (1.0 + est.c_n_hat.value));
        ok = ok && gap < 1e-10 && est.c_n_hat.value > 0.0;
        if (!cs.empty()) ok = ok && est.c_n_hat.value > cs.back();
        cs.push_back(est.c_n_hat.value);
        detail += fmt("eta=%.1f c3=%.4f+-%.4f |F-1/(1+c3)|=%.1e; ", eta, est.c_n_hat.value, est.c_n_hat.std_error, gap);
    }
    verdict("A5", ok, detail + "monotone " + (ok ? "yes" : "check"));
}

void a6_teleport() {
    std::mt19937_64 gen(66);
    std::normal_distribution<double> g;
    double worst = 0.0, min_holder = 1.0;
    std::size_t heralds = 0;
    std::uint64_t samples = 0, carol = 0;
    RandomStream rng(606);
    for (int round = 0; round < 20; ++round) {
        Complex alpha{g(gen), g(gen)}, beta{g(gen), g(gen)};
        const double nrm = std::sqrt(std::norm(alpha) + std::norm(beta));
        alpha /= nrm;
        beta /= nrm;
        const TeleportConfig tc{alpha, beta, quiet(3)};
        const Teleporter tp(tc);
        const auto& m = tp.modes();
        const auto w = ideal_w_state(make_chain_modes(tc.base), 3, {}).with_cap(4);
        const auto res = tp.enumerate_round(w, w);
        const auto ideal = teleported_state(m, alpha, beta, {});
        std::vector<ModeIndex> rec = m.bob();
        for (auto x : m.carol()) rec.push_back(x);
        std::vector<FockState> kept;
        for (const auto& br : res.successes) {
            if (count_excitations(br.state, rec).at(0) > 0.5) continue;
            ++heralds;
            kept.push_back(normalize(br.state));
            worst = std::max(worst, std::abs(std::abs(inner_product(ideal, kept.back())) - 1.0));
        }
        // 500 receiver measurements per input, 1e4 in total.
        for (int k = 0; k < 500 && !kept.empty(); ++k) {
            const auto loc = receiver_localize(kept[k % kept.size()], m.carol(), rng);
            const bool at_carol = loc.holder == Holder::this_receiver;
            carol += at_carol;
            ++samples;
            const auto pair = at_carol ? m.carol() : m.bob();
            min_holder = std::min(min_holder, qubit_fidelity(loc.residual, pair[0], pair[1], alpha, beta));
        }
    }
    const double pc = double(carol) / double(samples);
    const double z = (pc - 0.5) / std::sqrt(0.25 / double(samples));
    const bool ok = heralds > 0 && worst < 1e-10 && std::abs(z) <= 3.0 && min_holder >= 1.0 - 1e-10;
    verdict("A6", ok,
            fmt("20 inputs, %zu one-excitation heralds, max |overlap-1| %.2e; P(Carol)=%.4f over %llu samples "
                "(z=%.2f); min holder fidelity %.12f",
                heralds, worst, pc, static_cast<unsigned long long>(samples), z, min_holder));

    // End to end through the sampled chain, for information only.
    ProtocolConfig base;
    base.p_e = 0.001;
    base.eta = 0.0;
    base.double_pairs = false;
    base.seed = 6;
    const auto rep = run_teleport_batch({0.6, Complex(0.0, 0.8), base}, 10000);
    std::printf("INFO A6: full chain p_e=0.001, 1e4 trials: P(Carol)=%.4f+-%.4f over %llu localized, "
                "holder fidelity %.6f+-%.6f, noise fraction %.4f\n",
                rep.carol_holds.value, rep.carol_holds.std_error, static_cast<unsigned long long>(rep.localized),
                rep.holder_fidelity.value, rep.holder_fidelity.std_error, rep.noise_fraction.value);
}

void a7_determinism() {
    const std::vector<std::vector<std::string>> commands{
        {"w-state", "--n", "4", "--eta", "0.2", "--pe", "0.01", "--trials", "2000", "--seed", "71"},
        {"epr", "--eta", "0.1", "--trials", "2000", "--seed", "72"},
        {"teleport", "--alpha-re", "0.6", "--beta-im", "0.8", "--pe", "0.02", "--trials", "300", "--seed", "73"},
        {"scaling-sweep", "--n-min", "3", "--n-max", "4", "--eta", "0.3", "--trials", "2000", "--seed", "74"},
        {"scaling-sweep", "--n-min", "3", "--n-max", "4", "--trials", "500", "--seed", "75", "--format",
         "csv-summary"},
    };
    bool ok = true;
    std::string detail;
    for (const auto& args : commands) {
        std::string first;
        bool same = true;
        for (const char* workers : {"1", "3", "1", "8"}) {
            auto a = args;
            a.insert(a.end(), {"--workers", workers});
            const auto out = cli::execute(cli::parse_args(a));
            if (first.empty()) first = out.text;
            else same = same && out.text == first;
        }
        ok = ok && same && !first.empty();
        detail += args.front() + (same ? " identical; " : " DIFFERS; ");
    }
    verdict("A7", ok, detail + "workers 1,3,1,8");
}

}  // namespace

int main() {
    const auto guarded = [](const char* id, void (*fn)()) {
        try {
            fn();
        } catch (const std::exception& ex) {
            verdict(id, false, std::string("threw: ") + ex.what());
        }
    };
    guarded("A1", a1_algebra);
    guarded("A2", a2_bosonic);
    guarded("A3", a3_fidelity);
    guarded("A4", a4_scaling);
    guarded("A5", a5_vacuum);
    guarded("A6", a6_teleport);
    guarded("A7", a7_determinism);
    std::printf("%d of 7 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
