// Acceptance suite: runs every contract criterion end to end and prints one
// pass/fail line each. Exit code = number of failed criteria.
//
//   ./acceptance <repo-root>
//
// The repo root locates data/corr_chsh_table.json.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcorr/bell.hpp"
#include "qcorr/classical_prob.hpp"
#include "qcorr/entropy.hpp"
#include "qcorr/hull_oracle.hpp"
#include "qcorr/lp.hpp"
#include "qcorr/rvr.hpp"

using namespace qcorr;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const char* what, bool ok, double seconds, double budget,
            const std::string& detail) {
    const bool timely = seconds < budget;
    std::printf("criterion %2d: %s  (%.2fs / budget %.0fs)  %s%s%s\n", id,
                ok && timely ? "PASS" : "FAIL", seconds, budget, what,
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!(ok && timely)) ++failures;
}

double deg(double d) { return d * M_PI / 180.0; }

hilbert::DensityOperator singlet() { return entropy::make_singlet(); }

std::vector<hilbert::Projector> chsh_projectors() {
    using namespace hilbert;
    return {
        validate_projector(embed(spin_projector(deg(0)).op(), {2, 2}, 0)),
        validate_projector(embed(spin_projector(deg(225)).op(), {2, 2}, 1)),
        validate_projector(embed(spin_projector(deg(90)).op(), {2, 2}, 0)),
        validate_projector(embed(spin_projector(deg(135)).op(), {2, 2}, 1)),
    };
}

cprob::JointTable random_table(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> raw(static_cast<size_t>(1) << n);
    for (double& x : raw) x = -std::log(std::max(u(rng), 1e-300));
    return cprob::JointTable::normalized(n, std::move(raw));
}

// 1. Singlet entropies: S = 0, S_1 = S_2 = ln 2, all within 1e-9.
void criterion_1() {
    const auto t0 = Clock::now();
    const hilbert::DensityOperator s = singlet();
    const double total = entropy::von_neumann_entropy(s);
    const entropy::EntropyReport r = entropy::information_inequality_report(s, {2, 2});
    const bool ok = std::abs(total) <= 1e-9 &&
                    std::abs(r.parts[0] - std::log(2.0)) <= 1e-9 &&
                    std::abs(r.parts[1] - std::log(2.0)) <= 1e-9;
    const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
    char buf[128];
    std::snprintf(buf, sizeof(buf), "S=%.3g, S1=%.12g, S2=%.12g", total, r.parts[0],
                  r.parts[1]);
    report(1, "singlet entropies S=0, S_j=ln 2", ok, dt, 1.0, buf);
}

// 2. Tsirelson value at analytic settings and via the search.
void criterion_2() {
    const auto t0 = Clock::now();
    const double ts = 2.0 * std::sqrt(2.0);
    const bell::TwoQubitScenario sc = bell::make_two_qubit_scenario(
        singlet(), bell::QubitSetting{deg(0)}, bell::QubitSetting{deg(90)},
        bell::QubitSetting{deg(225)}, bell::QubitSetting{deg(135)});
    const double fixed = bell::quantum_chsh(sc);
    const bell::ChshMaximum m = bell::maximize_chsh(singlet());
    const bool ok = std::abs(fixed - ts) <= 1e-9 && m.value >= ts - 1e-6;
    const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
    char buf[128];
    std::snprintf(buf, sizeof(buf), "fixed=%.12g, search=%.12g", fixed, m.value);
    report(2, "Tsirelson value 2*sqrt(2)", ok, dt, 10.0, buf);
}

// 3. LHV bound over 10^4 randomized models with up to 64 ontic states.
void criterion_3() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(0x7be11b07ULL);
    std::uniform_int_distribution<int> nstates(1, 64);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> bit(0, 1);
    bool ok = true;
    double worst = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
        bell::HvmModel m;
        m.observables = {"A1", "A2", "B1", "B2"};
        const int n = nstates(rng);
        double sum = 0.0;
        for (int s = 0; s < n; ++s) {
            m.weights.push_back(u(rng) + 1e-9);
            sum += m.weights.back();
            m.responses.push_back({static_cast<uint8_t>(bit(rng)),
                                   static_cast<uint8_t>(bit(rng)),
                                   static_cast<uint8_t>(bit(rng)),
                                   static_cast<uint8_t>(bit(rng))});
        }
        for (double& w : m.weights) w /= sum;
        double s2 = 0.0;
        for (double w : m.weights) s2 += w;
        m.weights.back() += 1.0 - s2;
        const double v = bell::hvm_chsh(m, "A1", "A2", "B1", "B2");
        worst = std::max(worst, std::abs(v));
        if (std::abs(v) > 2.0 + 1e-12) ok = false;
    }
    const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
    char buf[64];
    std::snprintf(buf, sizeof(buf), "max |CHSH| = %.15g", worst);
    report(3, "LHV bound |CHSH| <= 2 over 10^4 models", ok, dt, 30.0, buf);
}

// 4. Completeness dichotomy on the four-projector set.
void criterion_4() {
    const auto t0 = Clock::now();
    const auto ps = chsh_projectors();
    const double expected_slack = (2.0 - 2.0 * std::sqrt(2.0)) / 2.0;

    const rvr::FeasibilityResult on_singlet = rvr::completeness_lp(rvr::build_rvr(ps, singlet(), 4));
    bool ok = on_singlet.status == rvr::FeasibilityResult::Status::incomplete &&
              on_singlet.certificate.kind == rvr::FeasibilityCertificate::Kind::quadrilateral &&
              std::abs(on_singlet.certificate.slack - expected_slack) <= 1e-6;

    const hilbert::DensityOperator mixed =
        hilbert::DensityOperator::validate(hilbert::scale(hilbert::identity(4), 0.25));
    const rvr::RvrModel mixed_model = rvr::build_rvr(ps, mixed, 4);
    const rvr::FeasibilityResult on_mixed = rvr::completeness_lp(mixed_model);
    ok = ok && on_mixed.status == rvr::FeasibilityResult::Status::complete;
    if (ok)
        for (const auto& [key, p] : mixed_model.defined)
            if (std::abs(rvr::witness_marginal(on_mixed.witness, key) - p) > 1e-7) ok = false;

    const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
    char buf[128];
    std::snprintf(buf, sizeof(buf), "singlet slack=%.12g (want %.12g), mixed witness verified",
                  on_singlet.certificate.slack, expected_slack);
    report(4, "completeness dichotomy singlet vs mixed", ok, dt, 5.0, buf);
}

// 5. Exactly the 24 probabilities of the four-projector example.
void criterion_5() {
    const auto t0 = Clock::now();
    const rvr::RvrModel model = rvr::build_rvr(chsh_projectors(), singlet(), 4);
    int size_le2 = 0;
    for (const auto& [key, p] : model.defined)
        if (key.size() <= 2) ++size_le2;
    const bool ok = size_le2 == 24 && model.defined.size() == 24;
    const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
    char buf[64];
    std::snprintf(buf, sizeof(buf), "defined=%zu, size<=2: %d", model.defined.size(), size_le2);
    report(5, "four-projector example defines exactly 24 probabilities", ok, dt, 1.0, buf);
}

// 6. Algebraic chain quadrilateral -> CH -> CHSH on 10^3 marginal sets.
void criterion_6() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(0xa15eb7a1cULL);
    bool ok = true;
    for (int trial = 0; trial < 1000 && ok; ++trial) {
        const cprob::PairMarginals m = cprob::pair_marginals_from_table(random_table(rng, 4));
        const int a1 = 0, a2 = 1, b1 = 2, b2 = 3;
        const double quad = cprob::quadrilateral_check(m, a1, b1, b2, a2);
        const double ch_swapped = cprob::ch_value(m, a2, a1, b2, b1);
        if (std::abs(quad - 2.0 * ch_swapped) > 1e-12) ok = false;
        const double ch = cprob::ch_value(m, a1, a2, b1, b2);
        auto e = [&](int x, int y) { return cprob::to_pm(m.pair(x, y), m.single(x), m.single(y)); };
        const double chsh = cprob::chsh_value(e(a1, b1), e(a2, b1), e(a1, b2), e(a2, b2));
        if (std::abs(chsh - (2.0 - 4.0 * ch)) > 1e-12) ok = false;
    }
    const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
    report(6, "algebraic chain 2*CH = quad, CHSH = 2 - 4*CH", ok, dt, 5.0, "10^3 marginal sets");
}

// 7. Triangle/quadrilateral necessity over 10^4 genuine tables.
void criterion_7() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(0x7a1a5ULL);
    bool ok = true;
    double min_slack = 1e300;
    for (int trial = 0; trial < 10000 && ok; ++trial) {
        const int n = 3 + trial % 3;  // 3..5
        const cprob::PairMarginals m = cprob::pair_marginals_from_table(random_table(rng, n));
        for (int j = 0; j < n && ok; ++j)
            for (int k = 0; k < n && ok; ++k)
                for (int l = 0; l < n && ok; ++l) {
                    if (j == k || k == l || j == l) continue;
                    const double s = cprob::triangle_check(m, j, k, l);
                    min_slack = std::min(min_slack, s);
                    if (s < -1e-12) ok = false;
                }
        for (int a1 = 0; a1 < n && ok; ++a1)
            for (int b1 = 0; b1 < n && ok; ++b1)
                for (int b2 = 0; b2 < n && ok; ++b2)
                    for (int a2 = 0; a2 < n && ok; ++a2) {
                        if (a1 == b1 || a1 == b2 || a1 == a2 || b1 == b2 || b1 == a2 ||
                            b2 == a2)
                            continue;
                        const double s = cprob::quadrilateral_check(m, a1, b1, b2, a2);
                        min_slack = std::min(min_slack, s);
                        if (s < -1e-12) ok = false;
                    }
    }
    const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
    char buf[64];
    std::snprintf(buf, sizeof(buf), "min slack = %.3g", min_slack);
    report(7, "triangle/quadrilateral necessity on 10^4 tables", ok, dt, 60.0, buf);
}

// 8. Float LP vs exact rational hull oracle on 200 instances, n = 4.
void criterion_8() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(0x08ac1eULL);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    bool ok = true;
    int compared = 0, ambiguous = 0;
    for (int trial = 0; trial < 200; ++trial) {
        // Rational-friendly tables on a 1/64 grid; odd trials perturb one
        // pair marginal out of consistency.
        std::vector<double> atoms(16);
        double sum = 0.0;
        for (double& a : atoms) {
            a = (std::floor(u(rng) * 16.0) + 1.0) / 16.0;
            sum += a;
        }
        for (double& a : atoms) a /= sum;
        const cprob::JointTable table = cprob::JointTable::normalized(4, atoms);
        std::vector<rvr::MarginalEntry> entries;
        for (int j = 0; j < 4; ++j)
            entries.push_back({{{j, 1}}, cprob::marginal(table, {j}, {1})});
        for (int j = 0; j < 4; ++j)
            for (int k = j + 1; k < 4; ++k)
                entries.push_back({{{j, 1}, {k, 1}}, cprob::marginal(table, {j, k}, {1, 1})});
        if (trial % 2 == 1) {
            const size_t which = 4 + static_cast<size_t>(trial) % 6;
            entries[which].value = std::min(1.0, entries[which].value + 0.4 + 0.2 * u(rng));
        }

        const lp::LpOutcome f =
            lp::solve_feasibility(rvr::lp_problem_from_marginals(4, entries, 1e-9));
        if (f.status == lp::LpStatus::ambiguous) {
            ++ambiguous;
            continue;
        }
        const rvr::HullInstance hull = rvr::hull_instance_from_marginals(4, entries);
        const lp::HullMembership exact = lp::hull_membership_oracle(hull.vertices, hull.target);
        ++compared;
        if ((f.status == lp::LpStatus::feasible) != exact.is_member) ok = false;
    }
    const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
    char buf[96];
    std::snprintf(buf, sizeof(buf), "compared=%d, ambiguous=%d", compared, ambiguous);
    report(8, "float LP agrees with the exact hull oracle", ok && compared >= 150, dt, 120.0,
           buf);
}

// 9. A stored classical table beats 2 by >= 0.05 under Corr substitution and
// replays deterministically.
void criterion_9(const std::string& repo_root) {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string detail;

    const cprob::CorrChshSearchResult replay =
        cprob::search_corr_chsh_table(20240229ULL, 20000, 2.05);
    if (!replay.found || replay.value < 2.05) {
        ok = false;
        detail = "seeded search failed";
    }

    std::ifstream in(repo_root + "/data/corr_chsh_table.json");
    if (!in) {
        ok = false;
        detail = "stored table missing";
    } else {
        std::stringstream buf;
        buf << in.rdbuf();
        const nlohmann::json doc = nlohmann::json::parse(buf.str());
        std::vector<double> atoms = doc.at("atoms").get<std::vector<double>>();
        const cprob::JointTable stored = cprob::JointTable::normalized(4, atoms);
        const double fresh = cprob::corr_chsh_combination(stored);
        if (fresh < 2.05) ok = false;
        // Bitwise replay agreement between the stored artifact and the search.
        if (replay.found) {
            for (size_t i = 0; i < stored.probs.size(); ++i)
                if (stored.probs[i] != replay.table.probs[i]) ok = false;
            if (doc.at("attempts_used").get<int>() != replay.attempts_used) ok = false;
        }
        char buf2[96];
        std::snprintf(buf2, sizeof(buf2), "stored=%.12g, replay=%.12g, attempts=%d", fresh,
                      replay.value, replay.attempts_used);
        detail = buf2;
    }
    const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
    report(9, "classical Corr-CHSH counterexample stored and replayed", ok, dt, 60.0, detail);
}

// 10. Entanglement sufficiency probe: the search matches 2 sqrt(1+sin^2 2eta).
void criterion_10() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string detail;
    for (double eta_deg : {5.0, 15.0, 30.0, 45.0}) {
        const double eta = deg(eta_deg);
        const hilbert::DensityOperator psi = entropy::make_partially_entangled(eta);
        const bell::ChshMaximum m = bell::maximize_chsh(psi);
        const double closed = 2.0 * std::sqrt(1.0 + std::pow(std::sin(2.0 * eta), 2));

        // Independent cross-check of the closed form by coarse grid evaluation.
        double grid_best = 0.0;
        for (int ia = 0; ia < 36; ia += 1)
            for (int ib1 = 0; ib1 < 36; ++ib1)
                for (int ib2 = 0; ib2 < 36; ++ib2) {
                    const bell::TwoQubitScenario sc = bell::make_two_qubit_scenario(
                        psi, bell::QubitSetting{deg(ia * 10.0)},
                        bell::QubitSetting{deg(std::fmod(ia * 10.0 + 90.0, 360.0))},
                        bell::QubitSetting{deg(ib1 * 10.0)},
                        bell::QubitSetting{deg(ib2 * 10.0)});
                    grid_best = std::max(grid_best, std::abs(bell::quantum_chsh(sc)));
                }
        if (!(m.value > 2.0)) ok = false;
        if (std::abs(m.value - closed) > 1e-4) ok = false;
        if (grid_best > closed + 1e-9) ok = false;  // closed form is an upper bound
        if (closed - grid_best > 0.05) ok = false;  // and the grid approaches it
        char buf[128];
        std::snprintf(buf, sizeof(buf), "eta=%g: search=%.9g closed=%.9g grid=%.6g; ", eta_deg,
                      m.value, closed, grid_best);
        detail += buf;
    }
    const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
    report(10, "partially entangled CHSH matches 2 sqrt(1+sin^2 2eta)", ok, dt, 60.0, detail);
}

}  // namespace

int main(int argc, char** argv) {
    const std::string repo_root = argc > 1 ? argv[1] : ".";
    std::printf("acceptance suite\n----------------\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9(repo_root);
    criterion_10();
    std::printf("----------------\n%s (%d failed)\n", failures == 0 ? "ALL PASS" : "FAILURES",
                failures);
    return failures;
}
