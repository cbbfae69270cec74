// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "degma/continuation.hpp"
#include "degma/diagnostics.hpp"
#include "degma/output.hpp"
#include "degma/radial.hpp"
#include "degma/solver.hpp"
#include "degma/transforms.hpp"
#include "radial_case.hpp"

using namespace degma;
using degma::testing::RadialCase;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
    std::printf("criterion %d: %s  %s  [%s]\n", id, ok ? "PASS" : "FAIL", what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void radial_consistency() {
    bool ok = true;
    std::string detail;
    for (double p : {1.0, 0.5, 1.5}) {
        auto t0 = std::chrono::steady_clock::now();
        RadialSolution rs = solve_radial(p, 1.0, 1.0, 2.0);
        double slope = rs.interface_slope_fit(), expo = rs.exponent_fit();
        double dt = seconds_since(t0);
        RadialPressure pr = radial_pressure(rs);
        ExponentPack pk = rs.pack();
        double closed = std::cbrt(1.0 / pk.theta);
        double es = std::abs(slope - closed) / closed, ee = std::abs(expo - pk.q) / pk.q;
        ok = ok && es <= 0.01 && ee <= 0.02 && dt < 1.0 && std::abs(pr.gprime_interface - closed) < 1e-12;
        if (!detail.empty()) detail += "; ";
        detail += fmt("p=%g slope err %.2e exp err %.2e %.3fs", p, es, ee, dt);
    }
    report(1, ok, "radial profile: interface slope within 1%, exponent within 2%, < 1 s", detail);
}

}  // namespace

int main() {
    radial_consistency();

    auto t0 = std::chrono::steady_clock::now();
    RadialCase c129 = degma::testing::make_radial_case(129);
    double t129 = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    RadialCase c257 = degma::testing::make_radial_case(257);
    double t257 = seconds_since(t0);

    {
        double e1 = c129.max_rel_error(), e2 = c257.max_rel_error();
        double d = c129.sol.f.delta();
        double mr = std::abs(c129.sol.interface.mean_radius({0, 0}) - 1.0);
        bool ok = c129.sol.report.converged && c257.sol.report.converged && e1 <= 0.03 && mr <= d && e1 / e2 >= 1.5;
        report(2, ok, "disk vs radial profile: error <= 3% at n=129, mean radius within delta, refinement gain >= 1.5",
               fmt("err %.4f -> %.4f (gain %.2f), |mean r - 1| %.2e vs delta %.4f, solve %.1fs / %.1fs", e1, e2, e1 / e2,
                   mr, d, t129, t257));
    }

    {
        FreeBoundaryResidual fb = free_boundary_relation(c257.sol.interface, c257.sol.h, c257.pk);
        report(3, fb.sup <= 0.05, "free-boundary relation sup |theta g_nu^3 kappa - h| <= 0.05 at n=257",
               fmt("sup %.4f over %zu vertices", fb.sup, c257.sol.interface.size()));
    }

    EstimateReport r129 = full_report(c129.sol, 8);
    EstimateReport r257 = full_report(c257.sol, 8);
    {
        bool ok = !r257.empty && r257.patch_failures == 0 && r257.detM <= 0.05 && r257.patch_det_identity <= 0.05 &&
                  r257.patch_b_identity <= 0.05 && r257.patches_positive && r257.patch_A_eig.min > 0.0 &&
                  r257.patch_b.min > 0.0;
        report(4, ok, "identity suite at n=257: det M, det A and b identities <= 5%, A positive definite, b > 0",
               fmt("det M %.4f, det A %.4f, b %.4f, eig A [%.3f, %.3f], b [%.3f, %.3f], %zu patches", r257.detM,
                   r257.patch_det_identity, r257.patch_b_identity, r257.patch_A_eig.min, r257.patch_A_eig.max,
                   r257.patch_b.min, r257.patch_b.max, r257.patches.size()));
    }

    {
        bool ok = true;
        double worst = 1e300;
        int tested = 0;
        for (const HodographPatch& p : default_patches(c257.sol, 4)) {
            LinearizationCheck lc = linearization_check(p, c257.pk, 2024 + tested, 5, {1e-3, 1e-4, 1e-5});
            for (double o : lc.order) {
                worst = std::min(worst, o);
                ok = ok && o >= 0.9;
            }
            ++tested;
        }
        report(5, ok && tested > 0, "linearization: finite-difference order >= 0.9 over eps 1e-3..1e-5, 5 directions",
               fmt("min order %.3f over %d patches", worst, tested));
    }

    // continuation on the standard disk, run twice for reproducibility
    const ConvexDomain disk = ConvexDomain::disk({0, 0}, 2.0);
    fs::path dir = fs::temp_directory_path() / "degma_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    Supersolution sup = build_supersolution(1.0, 1.0, disk, 129, 0.01);
    ContinuationConfig cc;
    cc.solve.n = 129;
    cc.seed = 1;
    cc.ledger_path = (dir / "ledger_a.jsonl").string();
    t0 = std::chrono::steady_clock::now();
    ContinuationResult run = run_continuation(sup, cc);
    double tc = seconds_since(t0);
    cc.ledger_path = (dir / "ledger_b.jsonl").string();
    ContinuationResult rerun = run_continuation(sup, cc);

    {
        ScalarField2D gpsi = pressure_from_density(sup.psi, sup.pack);
        bool ok = true;
        std::size_t pairs = 0;
        for (std::size_t s = 0; s < run.states.size(); ++s) {
            const ContinuationState& st = run.states[s];
            ComparisonResult cmp = comparison_check(gpsi, st.sol.g, comparison_tolerance(gpsi));
            ok = ok && cmp.hypotheses_ok && cmp.pass;
            if (s > 0) {
                const PressureSolution& prev = run.states[s - 1].sol;
                ComparisonResult mono = comparison_check(prev.g, st.sol.g, comparison_tolerance(prev.g));
                ok = ok && mono.pass && vanishing_set_escapes(prev.f, st.sol.f).empty();
                ++pairs;
            }
        }
        // corrupted pair: lower the supersolution on a disk in the positivity set
        ScalarField2D bad = gpsi;
        const PressureSolution& last = run.states.back().sol;
        for (int j = 0; j < bad.n(); ++j)
            for (int i = 0; i < bad.n(); ++i)
                if (norm(bad.node(i, j) - Point{1.7, 0.0}) < 0.15) bad(i, j) = 0.5 * last.g(i, j);
        ComparisonResult cor = comparison_check(bad, last.g, comparison_tolerance(gpsi));
        bool rejected = !cor.pass && !cor.violations.empty();
        report(6, ok && rejected, "comparison: f_t <= psi and monotone vanishing sets in t; corrupted pair rejected",
               fmt("%zu states, %zu consecutive pairs, corrupted pair %zu violations", run.states.size(), pairs,
                   cor.violations.size()));
    }

    {
        bool green = true;
        for (const ContinuationState& st : run.states) green = green && st.flags.all();
        bool same = run.ledger == rerun.ledger &&
                    sha256_file((dir / "ledger_a.jsonl").string()) == sha256_file((dir / "ledger_b.jsonl").string());
        report(7, run.reached && green && same, "continuation reaches t=1 with H1-H4 green; ledger byte-identical",
               fmt("reached %s, t_max %.3f, %zu accepted states, flags %s, ledger %s, %.1fs", run.reached ? "yes" : "no",
                   run.t_max, run.states.size(), green ? "green" : "red", same ? "identical" : "differs", tc));
    }
    fs::remove_all(dir);

    {
        auto held = [](double coarse, double fine) { return fine >= 0.8 * coarse; };
        bool ok = held(r129.grad.min, r257.grad.min) && held(r129.M_eig.min, r257.M_eig.min) &&
                  held(r129.patch_b.min, r257.patch_b.min);
        std::string h;
        for (int f = 0; f < 5; ++f) {
            ok = ok && r257.holder_max[f] < 2.0 * r129.holder_max[f];
            h += fmt("%s %.3f->%.3f ", kHolderFields[f], r129.holder_max[f], r257.holder_max[f]);
        }
        report(8, ok, "refinement 129 -> 257: minima drop < 20%, Hoelder seminorms grow < 2x",
               fmt("|Dg| %.4f->%.4f, eig M %.4f->%.4f, b %.4f->%.4f; ", r129.grad.min, r257.grad.min, r129.M_eig.min,
                   r257.M_eig.min, r129.patch_b.min, r257.patch_b.min) +
                   h);
    }

    std::printf("%d of 8 criteria failed\n", failures);
    return failures ? 1 : 0;
}
