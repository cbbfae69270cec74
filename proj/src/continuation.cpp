#include "degma/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include "json.hpp"

#include "degma/calculus.hpp"
#include "degma/output.hpp"
#include "degma/transforms.hpp"

namespace degma {

double supersolution_ratio(const ExponentPack& pack, double c1, double rho, double r) {
    const double q = pack.q;
    return 4.0 * std::pow(c1, 2.0 - pack.p) * q * q * ((2.0 * q - 1.0) * r * r - rho * rho);
}

double Supersolution::value(Point P) const {
    double u = dot(P - center, P - center) - rho * rho;
    return u > 0.0 ? c1 * std::pow(u, pack.q) : 0.0;
}

BoundaryData Supersolution::trace(int samples) const {
    auto self = *this;
    return BoundaryData([self](Point P) { return self.value(P); }, *psi.domain(), pack, samples);
}

Supersolution build_supersolution(double p, double rho, const ConvexDomain& domain, int n, double lambda_target,
                                  const BoundaryData* boundary) {
    if (!(rho > 0.0)) throw std::invalid_argument("supersolution radius rho must be positive");
    if (!(lambda_target > 0.0)) throw std::invalid_argument("lambda must be positive");
    Supersolution s;
    s.pack = ExponentPack::from_p(p);
    s.rho = rho;
    s.lambda = lambda_target;
    s.center = {0.0, 0.0};

    // B_rho must sit compactly inside the domain.
    double r_in = std::numeric_limits<double>::infinity(), r_out = 0.0;
    for (Point b : domain.boundary_samples(1024)) {
        r_in = std::min(r_in, norm(b - s.center));
        r_out = std::max(r_out, norm(b - s.center));
    }
    if (!domain.contains(s.center) || !(r_in > rho))
        throw std::invalid_argument("no admissible c1: the ball of radius rho is not inside the domain");

    // The ratio grows with r, so its extremes sit at r = rho and at r_out;
    // it scales as c1^(2-p), which keeps the bisection monotone.
    auto top = [&](double c) { return supersolution_ratio(s.pack, c, rho, r_out); };
    double lo = 0.0, hi = 1.0;
    while (top(hi) < 0.5) hi *= 2.0;
    double c = hi;
    for (int it = 0; it < 200; ++it) {
        c = 0.5 * (lo + hi);
        double v = top(c);
        if (v >= 0.45 && v < 0.5) break;
        (v < 0.45 ? lo : hi) = c;
    }
    s.c1 = c;
    double bottom = supersolution_ratio(s.pack, c, rho, rho);
    if (!(bottom > 2.0 * lambda_target))
        throw std::runtime_error("no admissible c1: ratio spans [" + std::to_string(bottom) + ", " +
                                 std::to_string(top(c)) + "], below 2 lambda = " + std::to_string(2 * lambda_target));

    if (boundary) {
        for (Point b : domain.boundary_samples(1024))
            if (boundary->density(b) < s.value(b))
                throw std::runtime_error("boundary dominance violated at (" + std::to_string(b.x) + ", " +
                                         std::to_string(b.y) + ")");
    }

    ScalarField2D grid = make_grid(domain, n);
    s.psi = grid.filled(0.0);
    s.hbar = grid.filled(0.0);
    s.hbar_min = std::numeric_limits<double>::infinity();
    s.hbar_max = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (!grid.readable(i, j)) continue;
            Point P = grid.node(i, j);
            s.psi(i, j) = s.value(P);
            double r = std::max(norm(P - s.center), rho);
            double hb = supersolution_ratio(s.pack, c, rho, r);
            s.hbar(i, j) = hb;
            s.hbar_min = std::min(s.hbar_min, hb);
            s.hbar_max = std::max(s.hbar_max, hb);
        }
    return s;
}

ScalarField2D forcing_at(double t, const ScalarField2D& hbar) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("continuation parameter t must lie in [0, 1]");
    ScalarField2D h = hbar;
    for (std::size_t k = 0; k < h.size(); ++k)
        if (h.kind(k) != NodeKind::exterior) h[k] = (1.0 - t) * hbar[k] + t;
    return h;
}

void ContinuationConfig::validate() const {
    solve.validate();
    if (!(delta0 > 0.0 && delta0 <= 1.0)) throw std::invalid_argument("continuation.delta0 must lie in (0, 1]");
    if (!(delta_min > 0.0 && delta_min <= delta0))
        throw std::invalid_argument("continuation.delta_min must lie in (0, delta0]");
    if (patches < 0) throw std::invalid_argument("continuation.patches must be nonnegative");
}

int midpoint_convexity_violations(const ScalarField2D& f, int pairs, std::uint64_t seed, double tol) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> U(0, f.n() - 1);
    const ConvexDomain* dom = f.domain().get();
    int bad = 0;
    for (int k = 0; k < pairs; ++k) {
        int i1 = U(rng), j1 = U(rng), i2 = U(rng), j2 = U(rng);
        if (!f.readable(i1, j1) || !f.readable(i2, j2)) continue;
        Point P = f.node(i1, j1), Q = f.node(i2, j2);
        Point M = 0.5 * (P + Q);
        if (dom && !dom->contains(M)) continue;
        double fm;
        try {
            fm = sample_bilinear(f, M);
        } catch (const std::out_of_range&) {
            continue;
        }
        if (fm > 0.5 * (f(i1, j1) + f(i2, j2)) + tol) ++bad;
    }
    return bad;
}

std::vector<std::size_t> vanishing_set_escapes(const ScalarField2D& f_small, const ScalarField2D& f_large) {
    if (!(f_small.spec() == f_large.spec())) throw std::invalid_argument("fields live on different grids");
    std::vector<std::size_t> out;
    for (int j = 0; j < f_small.n(); ++j)
        for (int i = 0; i < f_small.n(); ++i) {
            if (!f_small.readable(i, j) || f_small(i, j) > 0.0) continue;
            bool deep = true;
            for (int dj = -1; dj <= 1 && deep; ++dj)
                for (int di = -1; di <= 1; ++di)
                    if (!f_small.readable(i + di, j + dj) || f_small(i + di, j + dj) > 0.0) {
                        deep = false;
                        break;
                    }
            if (deep && f_large(i, j) > 0.0) out.push_back(f_small.index(i, j));
        }
    return out;
}

double comparison_tolerance(const ScalarField2D& g) { return 2.0 * g.delta() * max_gradient_norm(g); }

namespace {

using json = nlohmann::ordered_json;

PressureSolution wrap_density(const ScalarField2D& f, const ScalarField2D& h, const ExponentPack& pack) {
    PressureSolution sol;
    sol.pack = pack;
    sol.f = f;
    sol.g = pressure_from_density(f, pack);
    sol.h = h;
    try {
        sol.interface = extract_interface(sol.g, pack);
    } catch (const std::runtime_error&) {
        sol.interface = Interface{};
    }
    sol.report.converged = true;
    return sol;
}

struct Baseline {
    double grad_min, grad_max, m_min, m_max;
};

HypothesisFlags check_hypotheses(const Supersolution& sup, const ContinuationState& st, const Baseline* base,
                                 const ContinuationConfig& cfg) {
    HypothesisFlags fl;
    const ScalarField2D& f = st.sol.f;
    const ConvexDomain& dom = *f.domain();
    char buf[256];

    // H1 after the dilation P -> P / R_max, which keeps the equation's form.
    double r_out = 0.0;
    for (Point b : dom.boundary_samples(1024)) r_out = std::max(r_out, norm(b - sup.center));
    fl.ok[0] = dom.contains(sup.center) && std::isfinite(r_out) && r_out > 0.0;
    std::snprintf(buf, sizeof buf, "domain inside B_%.6g about the origin", r_out);
    fl.note[0] = buf;

    // H2: nonempty vanishing set inside the domain, containing B_rho up to a cell.
    int lifted = 0;
    const double reach = sup.rho - f.delta();
    for (int j = 0; j < f.n(); ++j)
        for (int i = 0; i < f.n(); ++i)
            if (f.readable(i, j) && norm(f.node(i, j) - sup.center) <= reach && f(i, j) > 0.0) ++lifted;
    fl.ok[1] = st.sol.interface.size() > 0 && lifted == 0;
    std::snprintf(buf, sizeof buf, "interface vertices %zu, positive nodes inside B_rho %d", st.sol.interface.size(),
                  lifted);
    fl.note[1] = buf;

    // H3: strict convexity of f on its positivity set.
    double tol = 2.0 * f.delta() * max_gradient_norm(f);
    int bad = midpoint_convexity_violations(f, cfg.convexity_pairs, cfg.seed, tol);
    fl.ok[2] = bad == 0 && st.report.M_eig.min > 0.0;
    std::snprintf(buf, sizeof buf, "midpoint violations %d, min eig M %.6g", bad, st.report.M_eig.min);
    fl.note[2] = buf;

    // H4 proxy: bounded C2_s quantities that do not degrade past 2x of t = 0.
    const EstimateReport& r = st.report;
    bool finite = std::isfinite(r.grad.min) && std::isfinite(r.grad.max) && std::isfinite(r.M_eig.min) &&
                  std::isfinite(r.M_eig.max) && r.grad.min > 0.0;
    bool stable = true;
    if (base)
        stable = r.grad.min >= 0.5 * base->grad_min && r.grad.max <= 2.0 * base->grad_max &&
                 r.M_eig.min >= 0.5 * base->m_min && r.M_eig.max <= 2.0 * base->m_max;
    fl.ok[3] = !r.empty && finite && stable && r.patches_positive;
    std::snprintf(buf, sizeof buf, "|Dg| in [%.6g, %.6g], eig M in [%.6g, %.6g], patches %s", r.grad.min, r.grad.max,
                  r.M_eig.min, r.M_eig.max, r.patches_positive ? "positive" : "failed");
    fl.note[3] = buf;
    return fl;
}

json range_json(const Range& r) { return r.empty() ? json(nullptr) : json::array({r.min, r.max}); }

json state_record(const ContinuationState& st, bool accepted, const std::string& reason) {
    json rec;
    rec["t"] = st.t;
    rec["delta"] = st.delta;
    rec["accepted"] = accepted;
    rec["reason"] = reason;
    const ConvergenceReport& c = st.sol.report;
    rec["converged"] = c.converged;
    rec["newton_steps"] = c.newton_steps;
    rec["sweeps"] = c.sweeps;
    rec["residual"] = st.scheme_residual;
    json flags;
    for (int k = 0; k < 4; ++k) flags["H" + std::to_string(k + 1)] = st.flags.ok[k];
    rec["flags"] = flags;
    json notes;
    for (int k = 0; k < 4; ++k) notes["H" + std::to_string(k + 1)] = st.flags.note[k];
    rec["notes"] = notes;
    const EstimateReport& r = st.report;
    json est;
    est["grad"] = range_json(r.grad);
    est["M_eig"] = range_json(r.M_eig);
    est["Q"] = range_json(r.Q);
    est["Z_min"] = std::isfinite(r.Z_min) ? json(r.Z_min) : json(nullptr);
    est["detM"] = r.detM;
    est["fb"] = r.fb;
    est["patch_b"] = range_json(r.patch_b);
    est["patch_A_eig"] = range_json(r.patch_A_eig);
    rec["estimates"] = est;
    rec["interface_vertices"] = st.sol.interface.size();
    rec["below_psi"] = st.below_psi;
    rec["monotone"] = st.monotone;
    rec["lambda_violations"] = st.lambda_violations;
    return rec;
}

std::string checkpoint_stem(const std::string& dir, double t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "checkpoint_t%.6f", t);
    return (dir.empty() ? std::string(".") : dir) + "/" + buf;
}

}  // namespace

ContinuationResult run_continuation(const Supersolution& super, const ContinuationConfig& cfg,
                                    const std::optional<RestartPoint>& restart) {
    cfg.validate();
    if (cfg.solve.n != super.psi.n()) throw std::invalid_argument("solver grid does not match the supersolution grid");
    const ExponentPack& pk = super.pack;
    const ConvexDomain& dom = *super.psi.domain();
    BoundaryData bd = super.trace();
    ContinuationResult out;

    std::ofstream ledger;
    if (!cfg.ledger_path.empty()) {
        ledger.open(cfg.ledger_path);
        if (!ledger) throw std::runtime_error("cannot write " + cfg.ledger_path);
    }
    auto log = [&](const ContinuationState& st, bool accepted, const std::string& reason) {
        std::string line = state_record(st, accepted, reason).dump();
        out.ledger.push_back(line);
        if (ledger) ledger << line << '\n' << std::flush;
    };

    const ScalarField2D g_psi = pressure_from_density(super.psi, pk);
    const double psi_tol = comparison_tolerance(g_psi);

    auto evaluate = [&](ContinuationState& st, const Baseline* base, const ContinuationState* prev) {
        st.scheme_residual = scheme_residual(bd, st.h, pk, st.sol.f);
        st.report = full_report(st.sol, cfg.patches);
        st.flags = check_hypotheses(super, st, base, cfg);
        st.below_psi = comparison_check(g_psi, st.sol.g, psi_tol).pass;
        if (prev) {
            st.monotone = comparison_check(prev->sol.g, st.sol.g, comparison_tolerance(prev->sol.g)).pass;
            st.lambda_violations = static_cast<int>(vanishing_set_escapes(prev->sol.f, st.sol.f).size());
        }
    };

    // The t = 0 state is psi itself; its bounds anchor the H4 proxy.
    ContinuationState s0;
    s0.t = 0.0;
    s0.h = super.hbar;
    s0.sol = wrap_density(super.psi, s0.h, pk);
    evaluate(s0, nullptr, nullptr);
    const Baseline base{s0.report.grad.min, s0.report.grad.max, s0.report.M_eig.min, s0.report.M_eig.max};
    s0.flags = check_hypotheses(super, s0, &base, cfg);

    double delta = cfg.delta0;
    if (restart) {
        if (!(restart->f.spec() == super.psi.spec())) throw std::invalid_argument("checkpoint grid does not match");
        ContinuationState r;
        r.t = restart->t;
        r.delta = restart->delta;
        r.h = forcing_at(r.t, super.hbar);
        r.sol = wrap_density(restart->f, r.h, pk);
        evaluate(r, &base, nullptr);
        log(r, true, "restart");
        out.states.push_back(std::move(r));
        if (restart->delta > 0.0) delta = std::min(cfg.delta0, restart->delta);
    } else {
        log(s0, s0.flags.all(), s0.flags.all() ? "initial" : "hypotheses");
        if (!s0.flags.all()) {
            out.message = "the supersolution itself fails the hypotheses";
            return out;
        }
        out.states.push_back(s0);
    }

    std::vector<double> pending = cfg.checkpoints;
    std::sort(pending.begin(), pending.end());
    auto checkpoint = [&](const ContinuationState& st) {
        while (!pending.empty() && pending.front() <= st.t + 1e-12) {
            pending.erase(pending.begin());
            std::string stem = checkpoint_stem(cfg.checkpoint_dir, st.t);
            write_solution_csv(st.sol.f, st.sol.g, stem + ".csv");
            json meta;
            meta["t"] = st.t;
            meta["delta"] = st.delta;
            meta["p"] = pk.p;
            meta["rho"] = super.rho;
            meta["c1"] = super.c1;
            meta["n"] = st.sol.f.n();
            std::ofstream(stem + ".json") << meta.dump(2) << '\n';
            out.files.push_back(stem + ".csv");
            out.files.push_back(stem + ".json");
        }
    };
    checkpoint(out.states.back());

    while (out.states.back().t < 1.0) {
        const ContinuationState& prev = out.states.back();
        double t = std::min(1.0, prev.t + delta);
        if (1.0 - t < 1e-12) t = 1.0;
        ContinuationState st;
        st.t = t;
        st.delta = t - prev.t;
        st.h = forcing_at(t, super.hbar);
        std::string reason;
        try {
            st.sol = solve_ma(dom, bd, st.h, pk, cfg.solve, prev.sol.f);
            evaluate(st, &base, &prev);
            if (!st.sol.report.converged) reason = "solver did not converge";
            else if (!st.flags.ok[1]) reason = "H2";
            else if (!st.flags.ok[2]) reason = "H3";
            else if (!st.flags.ok[3]) reason = "H4";
            else if (!st.flags.ok[0]) reason = "H1";
        } catch (const std::runtime_error& e) {
            reason = e.what();
        }
        bool accepted = reason.empty();
        log(st, accepted, accepted ? "step" : reason);
        if (accepted) {
            out.states.push_back(std::move(st));
            checkpoint(out.states.back());
            continue;
        }
        delta *= 0.5;
        if (delta < cfg.delta_min) {
            out.message = "step size fell below delta_min at t = " + std::to_string(prev.t) + " (" + reason + ")";
            break;
        }
    }
    out.t_max = out.states.back().t;
    out.reached = out.t_max >= 1.0;
    if (out.reached) out.message = "reached t = 1";
    return out;
}

}  // namespace degma
