// Acceptance gate: one PASS/FAIL line per criterion, tolerances pinned here.

#include "baselines.hpp"
#include "fowlerkit/config.hpp"
#include "fowlerkit/errors.hpp"
#include "fowlerkit/report.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

using namespace fowlerkit;

namespace {

constexpr double kAlgebraRtol = 1e-12;
constexpr double kEnergyDrift = 1e-8;
constexpr double kOrbitClosure = 1e-6;
constexpr double kMonotoneFloor = 1e-8;
constexpr double kEquilibriumResidual = 1e-12;
constexpr double kScalingLaw = 1e-6;
constexpr double kExponentFit = 1e-3;
constexpr double kLogRateRel = 0.10;
constexpr double kMaximaRatio = 1e-6;
constexpr int kProbes = 20;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            if (!pass) detail << "; ";
            pass = false;
            detail << what;
        }
    }
};

std::string g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

ProblemConfig regular_config(double eta = 0.0) {
    ProblemConfig c;
    c.n = 5;
    c.eta = eta;
    c.q1 = c.q2 = 4.0;
    c.K1 = -1.0;
    c.K2 = 1.0;
    return c;
}

ProblemConfig fast_decay_config() {
    ProblemConfig c;
    c.n = 5;
    c.q1 = c.q2 = 3.0;
    c.K1 = 1.0;
    c.K2 = -1.0;
    return c;
}

const StructureReport& regular_report() {
    static const StructureReport r = find_structure(make_piecewise(regular_config()), Family::D);
    return r;
}

// 1 -------------------------------------------------------------------------
void exponent_algebra(Outcome& o) {
    fk_test::Gen gen(1001);
    int n_ok = 0, checked_triple = 0;
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const int n = gen.integer(3, 9);
        const double hardy = (n - 2.0) * (n - 2.0) / 4.0;
        const double eta = gen.uniform(-3.0, 0.999 * hardy);
        const double q = 2.0 + gen.log_uniform(1e-2, 20.0);
        const double delta = gen.uniform(-1.9, 4.0);
        const auto e = derive_exponent_set(n, eta, q, delta);
        const double tr = e.alpha + e.gamma, det = e.alpha * e.gamma + e.eta;
        const double r_tr = std::abs(e.lambda + e.Lambda - tr) / std::max({1.0, std::abs(e.lambda), std::abs(e.Lambda)});
        const double r_det = std::abs(e.lambda * e.Lambda - det) /
                             std::max({1.0, std::abs(e.lambda * e.Lambda), std::abs(e.alpha * e.gamma), std::abs(eta)});
        double r_root = 0.0;
        for (double m : {e.kappa, n - 2.0 - e.kappa})
            r_root = std::max(r_root, std::abs(m * m - (n - 2.0) * m + eta) / std::max({1.0, m * m, std::abs(eta)}));
        worst = std::max({worst, r_tr, r_det, r_root});
        bool ok = r_tr <= kAlgebraRtol && r_det <= kAlgebraRtol && r_root <= kAlgebraRtol;
        if (e.critically_close.empty()) {
            ++checked_triple;
            const bool a = e.regime == Regime::Saddle;
            const bool b = e.linear_coupling() < 0.0;
            const bool c = e.serrin < e.l && e.hardy_upper.exceeds(e.l);
            const bool d = e.lambda < 0.0 && 0.0 < e.Lambda;
            ok = ok && a == b && b == c && c == d;
        }
        n_ok += ok;
    }
    o.require(n_ok == 1000, std::to_string(1000 - n_ok) + " samples fail");
    o.detail << (o.pass ? "" : "; ") << "1000 samples, " << checked_triple << " saddle-equivalence checks, worst rel "
             << g(worst);
}

// 2 -------------------------------------------------------------------------
void hamiltonian_conservation(Outcome& o) {
    const Side s = make_side(5, 0.0, 1.0, 10.0 / 3.0, 0.0);
    o.require(s.exps.hamiltonian, "l = 2^* not flagged hamiltonian");
    const double px = std::pow(-s.exps.linear_coupling() / s.K, 1.0 / (s.exps.q - 2.0));
    const double py = -s.exps.alpha * px;
    const PhasePoint start{1.3 * px, py, 0.0};
    IntegratorOptions io;
    io.rtol = 1e-12;
    io.atol = 1e-14;
    io.keep_dense = true;
    EventSpec ev;
    ev.y_axis = false;
    const auto tr = integrate(s, start, Direction::Forward, 200.0, ev, io);
    // Upward crossings of the horizontal through P+, refined on the dense path.
    std::vector<double> ups;
    for (size_t i = 1; i < tr.samples.size(); ++i) {
        const auto &a = tr.samples[i - 1], &b = tr.samples[i];
        if (a.y - py < 0.0 && b.y - py >= 0.0) {
            double lo = a.t, hi = b.t;
            for (int it = 0; it < 100 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                (tr.state_at(mid)[1] - py < 0.0 ? lo : hi) = mid;
            }
            ups.push_back(0.5 * (lo + hi));
        }
    }
    o.require(ups.size() >= 11, "fewer than 10 periods within the horizon");
    if (ups.size() < 11) return;
    const double e0 = energy(start.x, start.y, s);
    double drift = 0.0;
    for (const auto& smp : tr.samples)
        if (smp.t <= ups[10]) drift = std::max(drift, std::abs(energy(smp.x, smp.y, s) - e0));
    drift /= std::max(1.0, std::abs(e0));
    const double x0 = tr.state_at(ups[0])[0];
    double closure = 0.0;
    for (int k = 1; k <= 10; ++k) closure = std::max(closure, std::abs(tr.state_at(ups[k])[0] - x0));
    o.require(drift < kEnergyDrift, "energy drift " + g(drift));
    o.require(closure < kOrbitClosure, "closure " + g(closure));
    o.detail << (o.pass ? "" : "; ") << "period " << g(ups[1] - ups[0]) << ", drift " << g(drift) << " over 10 periods, closure "
             << g(closure);
}

// 3 -------------------------------------------------------------------------
void energy_monotonicity(Outcome& o) {
    // Positive-reaction panels at eta = 1 (2_* ~ 2.764, 2^* = 10/3, I ~ 7.236).
    const std::pair<double, double> panels[] = {{2.2, 2.7}, {2.85, 3.25}, {3.5, 7.0}, {7.6, 12.0}};
    fk_test::Gen gen(3003);
    int trajectories = 0, violations = 0;
    double worst = 0.0;
    for (const auto& [lo, hi] : panels) {
        for (int i = 0; i < 50; ++i) {
            const Side s = make_side(5, 1.0, 1.0, gen.uniform(lo, hi), 0.0);
            const double trace = s.exps.alpha + s.exps.gamma;
            const PhasePoint p0{gen.uniform(-1.5, 1.5), gen.uniform(-1.5, 1.5), 0.0};
            EventSpec ev;
            ev.blowup_threshold = 1e3;
            IntegratorOptions io;
            io.rtol = 1e-12;
            io.atol = 1e-14;
            const auto tr = integrate(s, p0, Direction::Forward, 20.0, ev, io);
            ++trajectories;
            for (size_t k = 1; k < tr.samples.size(); ++k) {
                const auto &a = tr.samples[k - 1], &b = tr.samples[k];
                const double ea = energy(a.x, a.y, s), eb = energy(b.x, b.y, s);
                const double wrong = trace > 0 ? ea - eb : eb - ea;  // positive when against the law
                const double floor = kMonotoneFloor * std::max({1.0, std::abs(ea), std::abs(eb)});
                worst = std::max(worst, wrong / std::max({1.0, std::abs(ea), std::abs(eb)}));
                if (wrong > floor) ++violations;
            }
        }
    }
    o.require(violations == 0, std::to_string(violations) + " sampled differences against the law");
    o.detail << (o.pass ? "" : "; ") << trajectories << " trajectories in 4 panels, largest wrong-sign step "
             << g(std::max(worst, 0.0));
}

// 4 -------------------------------------------------------------------------
void equilibrium_residuals(Outcome& o) {
    int cases = 0, mismatches = 0;
    double worst = 0.0;
    for (int n : {3, 4, 5, 7})
        for (double eta_frac : {-0.5, 0.0, 0.4, 0.9})
            for (double K : {-2.0, -1.0, 0.5, 1.0, 3.0})
                for (double q : {2.3, 2.9, 3.5, 4.0, 5.0, 7.0, 11.0})
                    for (double delta : {-1.0, 0.0, 1.5}) {
                        const double eta = eta_frac * (n - 2.0) * (n - 2.0) / 4.0;
                        const Side s = make_side(n, eta, K, q, delta);
                        const auto& e = s.exps;
                        if (!e.critically_close.empty()) continue;
                        ++cases;
                        const bool window = e.serrin < e.l && e.hardy_upper.exceeds(e.l);
                        const bool expect = K > 0 ? window : !window && !(e.l == e.serrin);
                        const auto eq = equilibria(s);
                        if ((eq.size() == 3) != expect) ++mismatches;
                        for (const auto& p : eq) {
                            const double r = norm(vector_field(p.location.x, p.location.y, s)) /
                                             std::max(1.0, norm(p.location));
                            worst = std::max(worst, r);
                        }
                    }
    o.require(mismatches == 0, std::to_string(mismatches) + " existence mismatches");
    o.require(worst < kEquilibriumResidual, "residual " + g(worst));
    o.detail << (o.pass ? "" : "; ") << cases << " parameter points, worst |F(P)|/max(1,|P|) " << g(worst);
}

// 5 -------------------------------------------------------------------------
void parameter_scaling(Outcome& o) {
    const auto d = check_parameter_scaling(make_piecewise(regular_config()), Family::D, 1.0, 2.0);
    const auto l = check_parameter_scaling(make_piecewise(fast_decay_config()), Family::L, 1.0, 2.0);
    o.require(d.sup_rel_error < kScalingLaw, "regular side " + g(d.sup_rel_error));
    o.require(l.sup_rel_error < kScalingLaw, "fast-decay side " + g(l.sup_rel_error));
    o.detail << (o.pass ? "" : "; ") << "d: " << g(d.sup_rel_error) << " over " << d.points << " points, L: "
             << g(l.sup_rel_error) << " over " << l.points << " points";
}

// Shared by 6, 7, 9.
template <std::size_t N>
void check_sequence(Outcome& o, const StructureReport& r, const double (&baseline)[N], int k_count,
                    const std::string& prefix) {
    o.require(static_cast<int>(r.points.size()) >= k_count, "only " + std::to_string(r.points.size()) + " values");
    if (static_cast<int>(r.points.size()) < k_count) return;
    double worst = 0.0;
    for (int k = 0; k < k_count; ++k) {
        const auto& p = r.points[k];
        if (k > 0) o.require(p.value > r.points[k - 1].value, "not increasing at k=" + std::to_string(k));
        o.require(p.verified.zeros == k, "zero count at k=" + std::to_string(k));
        o.require(p.verified.label() == "(R, fd, " + std::to_string(k) + ")",
                  "class at k=" + std::to_string(k) + " is " + p.verified.label());
        worst = std::max(worst, fk_test::rel_err(p.value, baseline[k]));
    }
    o.require(worst < fk_baseline::kRelTol, "baseline deviation " + g(worst));
    o.detail << (o.pass ? "" : "; ") << prefix;
    for (int k = 0; k < k_count; ++k) o.detail << (k ? ", " : " ") << std::to_string(r.points[k].value);
    o.detail << ", baseline dev " << g(worst);
}

int probe_interval(const PiecewiseSystem& sys, Family f, double lo, double hi, const std::string& want) {
    int bad = 0;
    for (int i = 0; i < kProbes; ++i) {
        const double p = lo + (hi - lo) * (i + 0.5) / kProbes;
        if (solve_radial(sys, f, p).cls.label() != want) ++bad;
    }
    return bad;
}

// 6 -------------------------------------------------------------------------
void regular_structure(Outcome& o) {
    const auto& r = regular_report();
    check_sequence(o, r, fk_baseline::kRegularEta0, 3, "D_k");
    if (r.points.size() < 2) return;
    const auto sys = make_piecewise(regular_config());
    const int b0 = probe_interval(sys, Family::D, 0.0, r.points[0].value, "(R, sd, 0)");
    const int b1 = probe_interval(sys, Family::D, r.points[0].value, r.points[1].value, "(R, sd, 1)");
    o.require(b0 == 0, std::to_string(b0) + " probes below D_0 misclassified");
    o.require(b1 == 0, std::to_string(b1) + " probes in (D_0, D_1) misclassified");
    o.detail << "; probes " << 2 * kProbes - b0 - b1 << "/" << 2 * kProbes;
}

// 7 -------------------------------------------------------------------------
void fast_decay_structure(Outcome& o) {
    const auto sys = make_piecewise(fast_decay_config());
    const auto r = find_structure(sys, Family::L);
    check_sequence(o, r, fk_baseline::kFastDecay, 2, "L_k");
    if (r.points.empty()) return;
    const int b0 = probe_interval(sys, Family::L, 0.0, r.points[0].value, "(S, fd, 0)");
    o.require(b0 == 0, std::to_string(b0) + " probes below L_0 misclassified");
    o.detail << "; probes " << kProbes - b0 << "/" << kProbes;
}

// 8 -------------------------------------------------------------------------
void intersection_geometry(Outcome& o) {
    const auto& r = regular_report();
    o.require(r.hypotheses.monotone, "ordering hypothesis l1 <= l2 <= I not met");
    o.require(r.intersections.has_value() && r.intersections->first.size() >= 3, "fewer than 3 intersections");
    if (!r.intersections || r.intersections->first.size() < 3) return;
    const auto& t = *r.intersections;
    double min_T = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 3; ++j) {
        const auto& q = t.first[j];
        const std::string J = std::to_string(j);
        o.require(q.theta < -j * std::numbers::pi && q.theta > -(j + 1) * std::numbers::pi,
                  "theta_" + J + " = " + g(q.theta) + " outside its window");
        o.require(q.branch == (j % 2 == 0 ? BranchTag::StablePlus : BranchTag::StableMinus), "parity at j=" + J);
        o.require(q.transversality > 0.0, "transversality at j=" + J);
        o.require(t.no_reentry[j], "re-entry into region " + J);
        min_T = std::min(min_T, q.transversality);
    }
    o.detail << (o.pass ? "" : "; ") << "theta " << g(t.first[0].theta) << ", " << g(t.first[1].theta) << ", "
             << g(t.first[2].theta) << "; min transversality " << g(min_T) << "; no re-entry within arclength "
             << g(t.launch_budget);
}

// 9 -------------------------------------------------------------------------
void hardy_variant(Outcome& o) {
    const auto sys = make_piecewise(regular_config(1.0));
    const auto& e = sys.inner.exps;
    o.require(std::abs(e.kappa - 0.381966) < 1e-6, "kappa " + g(e.kappa));
    o.require(std::abs(e.serrin - 2.763932) < 1e-6, "2_* " + g(e.serrin));
    o.require(!e.hardy_upper.is_unbounded() && std::abs(e.hardy_upper.value() - 7.236068) < 1e-6, "I bound");
    const auto r = find_structure(sys, Family::D);
    check_sequence(o, r, fk_baseline::kRegularEta1, 3, "D_k");
    if (r.points.size() < 3) return;
    const double mu = sys.outer.exps.mu();
    double worst = 0.0;
    for (int k = 0; k < 3; ++k) {
        const auto& x = r.points[k].verified.infinity.exponent;
        o.require(x.has_value(), "no exponent fit at k=" + std::to_string(k));
        if (x) worst = std::max(worst, std::abs(*x - mu));
    }
    o.require(worst < kExponentFit, "exponent error " + g(worst));
    const int b0 = probe_interval(sys, Family::D, 0.0, r.points[0].value, "(R, sd, 0)");
    const int b1 = probe_interval(sys, Family::D, r.points[0].value, r.points[1].value, "(R, sd, 1)");
    o.require(b0 + b1 == 0, std::to_string(b0 + b1) + " probes misclassified");
    o.detail << "; |fit - (n-2-kappa)| <= " << g(worst) << "; probes " << 2 * kProbes - b0 - b1 << "/"
             << 2 * kProbes;
}

// 10 ------------------------------------------------------------------------
void log_correction(Outcome& o) {
    ProblemConfig c = regular_config(1.0);
    const double kappa = make_side(5, 1.0, 1.0, 4.0, 0.0).exps.kappa;
    c.q2 = 2.0 + 2.0 / kappa;  // l2 = I(1)
    const auto sys = make_piecewise(c);
    o.require(sys.outer.exps.regime == Regime::CenterStable, "outer side not at l = I");
    SolveOptions so;
    so.horizon = 4e4;
    const auto s = solve_radial(sys, Family::D, 1.0, so);
    o.require(s.cls.infinity.rate == RateTag::LogCorrected, "class " + s.cls.label());
    const auto rate = fit_log_rate(s.traj);
    const double want = -1.0 / (c.q2 - 2.0);
    o.require(rate.has_value(), "no fit");
    if (!rate) return;
    const double rel = std::abs(*rate - want) / std::abs(want);
    o.require(rel < kLogRateRel, "rate " + g(*rate) + " vs " + g(want));
    o.detail << (o.pass ? "" : "; ") << "fitted " << *rate << ", expected " << want << " (rel " << g(rel) << ")";
}

// 11 ------------------------------------------------------------------------
void maxima_scaling(Outcome& o) {
    StructureOptions so;
    so.k_max = 0;
    so.intersections = false;
    const auto base = find_structure(make_piecewise(regular_config()), Family::D, so);
    const auto s = scaling_report(base, 4.0, 2.0, so);
    o.require(s.R_error < kMaximaRatio, "R0 ratio error " + g(s.R_error));
    o.require(s.U_error < kMaximaRatio, "U0 ratio error " + g(s.U_error));
    o.require(s.D_error < kMaximaRatio, "D0 ratio error " + g(s.D_error));
    o.detail << (o.pass ? "" : "; ") << "ratio errors R0 " << g(s.R_error) << ", U0 " << g(s.U_error) << ", D0 "
             << g(s.D_error) << "; residual " << g(s.residual);
}

// 12 ------------------------------------------------------------------------
void determinism(Outcome& o) {
    RunConfig cfg;
    cfg.problem = regular_config();
    auto once = [&] {
        const auto r = find_structure(make_piecewise(cfg.problem), cfg.family, structure_options(cfg));
        std::ostringstream os;
        write_json(os, with_config(cfg, "structure", to_json(r)));
        return os.str();
    };
    const std::string a = once(), b = once();
    o.require(a == b, "reports differ");
    o.detail << (o.pass ? "" : "; ") << a.size() << " bytes, identical";
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<void(Outcome&)>> criteria[] = {
        {"exponent algebra", exponent_algebra},
        {"hamiltonian conservation", hamiltonian_conservation},
        {"energy monotonicity", energy_monotonicity},
        {"equilibrium residuals", equilibrium_residuals},
        {"parameter scaling law", parameter_scaling},
        {"regular structure", regular_structure},
        {"fast-decay structure", fast_decay_structure},
        {"intersection geometry", intersection_geometry},
        {"Hardy variant", hardy_variant},
        {"log-corrected rate", log_correction},
        {"scaling of maxima", maxima_scaling},
        {"determinism", determinism},
    };
    int failed = 0, idx = 0;
    for (const auto& [name, fn] : criteria) {
        ++idx;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            fn(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !o.pass;
        std::printf("[%2d] %-4s %-26s %s (%.1fs)\n", idx, o.pass ? "PASS" : "FAIL", name, o.detail.str().c_str(),
                    sec);
    }
    std::printf("%d/%d criteria passed\n", idx - failed, idx);
    return failed == 0 ? 0 : 1;
}
