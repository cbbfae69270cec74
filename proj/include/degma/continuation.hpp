#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "degma/diagnostics.hpp"
#include "degma/field.hpp"
#include "degma/solution.hpp"
#include "degma/solver.hpp"

namespace degma {

// psi = c1 (|P - center|^2 - rho^2)_+^q together with its exact forcing.
struct Supersolution {
    ExponentPack pack;
    double c1 = 0.0;
    double rho = 0.0;
    double lambda = 0.0;
    Point center;
    ScalarField2D psi;   // density
    ScalarField2D hbar;  // det D^2 psi / psi^p, continued inside the ball by its limit at r = rho
    double hbar_min = 0.0, hbar_max = 0.0;

    double value(Point P) const;
    // Boundary data taken from psi itself.
    BoundaryData trace(int samples = 256) const;
};

// det D^2 psi / psi^p for the radial profile; independent of psi's size apart
// from the factor c1^(2-p).
double supersolution_ratio(const ExponentPack& pack, double c1, double rho, double r);

// Bisects c1 so that the largest ratio on the domain falls in [0.45, 0.5)
// and checks that the smallest one exceeds 2 lambda_target. A given boundary
// must dominate psi.
Supersolution build_supersolution(double p, double rho, const ConvexDomain& domain, int n, double lambda_target,
                                  const BoundaryData* boundary = nullptr);

// (1 - t) hbar + t.
ScalarField2D forcing_at(double t, const ScalarField2D& hbar);

struct HypothesisFlags {
    std::array<bool, 4> ok{};
    std::array<std::string, 4> note;
    bool all() const { return ok[0] && ok[1] && ok[2] && ok[3]; }
};

struct ContinuationState {
    double t = 0.0;
    double delta = 0.0;
    ScalarField2D h;
    PressureSolution sol;
    EstimateReport report;
    HypothesisFlags flags;
    double scheme_residual = 0.0;
    bool below_psi = true;       // comparison against psi
    bool monotone = true;        // comparison against the previous accepted state
    int lambda_violations = 0;   // nodes of the previous vanishing set that lifted off
};

struct ContinuationConfig {
    SolveConfig solve;
    double delta0 = 0.1;
    double delta_min = 1e-3;
    int patches = 4;
    std::uint64_t seed = 1;
    int convexity_pairs = 10000;
    std::vector<double> checkpoints;  // t values; the first accepted t at or past each is saved
    std::string checkpoint_dir;
    std::string ledger_path;          // JSONL, one record per attempted state
    void validate() const;
};

struct ContinuationResult {
    std::vector<ContinuationState> states;  // accepted states, t increasing
    std::vector<std::string> ledger;        // JSONL records as written
    std::vector<std::string> files;         // checkpoint files
    bool reached = false;
    double t_max = 0.0;
    std::string message;
};

// Random midpoint test f((P+Q)/2) <= (f(P)+f(Q))/2 + tol over node pairs
// whose segment stays in the domain; returns the number of violations.
int midpoint_convexity_violations(const ScalarField2D& f, int pairs, std::uint64_t seed, double tol);

// Nodes that sit in the interior of Lambda(f_small) but are positive in
// f_large: Lambda(f_small) must be contained in Lambda(f_large) up to one cell.
std::vector<std::size_t> vanishing_set_escapes(const ScalarField2D& f_small, const ScalarField2D& f_large);

// Tolerance used when comparing pressures: 2 delta max|Dg|.
double comparison_tolerance(const ScalarField2D& g);

struct RestartPoint {
    double t = 0.0;
    double delta = 0.0;
    ScalarField2D f;
};

// Marches t from 0 (f = psi) to 1, warm-starting each solve from the last
// accepted state. `restart` resumes from a checkpoint instead of t = 0.
ContinuationResult run_continuation(const Supersolution& super, const ContinuationConfig& cfg,
                                    const std::optional<RestartPoint>& restart = std::nullopt);

}  // namespace degma
