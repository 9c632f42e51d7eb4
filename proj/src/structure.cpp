#include "fowlerkit/errors.hpp"
#include "fowlerkit/shooting.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

namespace fowlerkit {

namespace {

/// Runs fn(i) for i in [0, n). Results must be written by index so the outcome
/// does not depend on scheduling.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    int nt = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    nt = std::clamp(nt, 1, std::max(n, 1));
    if (nt == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < nt; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

bool approx_eq(double a, double b) { return std::abs(a - b) <= kCriticalEqualityRtol * std::max(std::abs(a), std::abs(b)); }
bool strictly_less(double a, double b) { return a < b && !approx_eq(a, b); }
bool at_most(double a, double b) { return a < b || approx_eq(a, b); }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

/// Outcome of one shot, compared between neighbouring seeds.
struct Shot {
    int zeros = 0;
    EndClass::Kind kind = EndClass::Kind::Unresolved;
    int sign = 0;
    bool degenerate = false;
    std::string end;  // target label or termination name

    bool same(const Shot& o) const { return zeros == o.zeros && kind == o.kind && sign == o.sign; }
};

struct Flip {
    double lo, hi;
    Shot before, after;
};

struct Context {
    const PiecewiseSystem& sys;
    Family family;
    const StructureOptions& opts;
    const ManifoldBranch& launch;
    double phys;            // rho^p factor of the parameter
    double rate;

    double parameter_at(double s) const { return phys * std::exp(rate * launch.at_arclength(s).t); }

    ZeroCount launch_zeros(double s) const {
        ZeroCount z;
        for (const auto& m : launch.y_axis_crossings) {
            if (m.s >= s) break;
            if (m.degenerate)
                z.degenerate = true;
            else
                ++z.count;
        }
        return z;
    }

    Shot shoot(double s) const {
        const PhasePoint q = launch.at_arclength(s);
        EndClass lc;
        lc.kind = family == Family::D ? EndClass::Kind::Regular : EndClass::Kind::FastDecay;
        lc.value = phys * std::exp(rate * q.t);
        lc.sign = 1;
        SolveOptions so = opts.solve;
        so.capture_radius.reset();
        so.keep_dense = false;
        const RadialSolution r = shoot_far_side(sys, family, {q.x, q.y, 0.0}, lc, launch_zeros(s), so);
        const EndClass& far = family == Family::D ? r.cls.infinity : r.cls.origin;
        Shot out{r.cls.zeros, far.kind, far.sign, r.cls.degenerate, ""};
        if (r.traj.termination == EventKind::Converged)
            out.end = far.rate == RateTag::Power ? (far.sign > 0 ? "P+" : "P-") : "origin";
        else
            out.end = std::string(to_string(r.traj.termination));
        return out;
    }
};

std::string class_label(Family f, const Shot& s) {
    SolutionClass c;
    EndClass launch;
    launch.kind = f == Family::D ? EndClass::Kind::Regular : EndClass::Kind::FastDecay;
    EndClass far;
    far.kind = s.kind;
    c.origin = f == Family::D ? launch : far;
    c.infinity = f == Family::D ? far : launch;
    c.zeros = s.zeros;
    return c.label();
}

/// Bisects [lo, hi] (arclengths with differing shots) down to the relative
/// tolerance, splitting when the midpoint differs from both ends.
void refine(const Context& cx, double lo, double hi, const Shot& a, const Shot& b, std::vector<Flip>& out,
            std::vector<std::string>& warnings, int depth = 0) {
    while ((hi - lo) > cx.opts.bisect_rtol * hi) {
        double mid = 0.5 * (lo + hi);
        Shot m = cx.shoot(mid);
        if (m.degenerate) {
            const double moved = mid + 0.25 * (hi - lo);
            warnings.push_back("degenerate crossing at launch arclength " + fmt(mid) + "; seed moved to " +
                               fmt(moved));
            mid = moved;
            m = cx.shoot(mid);
        }
        if (m.same(a)) {
            lo = mid;
        } else if (m.same(b)) {
            hi = mid;
        } else {
            if (depth < 64) {
                refine(cx, lo, mid, a, m, out, warnings, depth + 1);
                refine(cx, mid, hi, m, b, out, warnings, depth + 1);
            }
            return;
        }
    }
    out.push_back({lo, hi, a, b});
}

}  // namespace

Hypotheses check_hypotheses(const PiecewiseSystem& sys, Family family) {
    const ExponentSet& e1 = sys.inner.exps;
    const ExponentSet& e2 = sys.outer.exps;
    const double K1 = sys.inner.K, K2 = sys.outer.K;
    Hypotheses h;
    auto need = [&](bool ok, const std::string& clause) {
        if (!ok) throw RegimeError("hypothesis fails: " + clause);
        h.clauses.push_back(clause);
    };
    if (family == Family::D) {
        h.setting = "regular-family";
        need(K1 < 0.0 && K2 > 0.0, "K1 < 0 < K2");
        need(e1.l > 2.0 && e1.hardy_upper.exceeds(e1.l) &&
                 (e1.hardy_upper.is_unbounded() || !approx_eq(e1.l, e1.hardy_upper.value())),
             "2 < l1 < I(eta)");
        need(strictly_less(e2.sobolev, e2.l), "l2 > 2^*");
        h.monotone = at_most(e1.l, e2.l) && (e2.hardy_upper.is_unbounded() || at_most(e2.l, e2.hardy_upper.value()));
        if (h.monotone) h.clauses.push_back("l1 <= l2 <= I(eta)");
    } else {
        h.setting = "fast-decay-family";
        need(K2 < 0.0 && K1 > 0.0, "K2 < 0 < K1");
        need(e1.l > 2.0 && strictly_less(e1.l, e1.sobolev), "2 < l1 < 2^*");
        need(strictly_less(e2.serrin, e2.l), "l2 > 2_*(eta)");
        h.monotone = at_most(e1.l, e2.l) && at_most(e1.serrin, e1.l);
        if (h.monotone) h.clauses.push_back("l2 >= l1 >= 2_*(eta)");
    }
    return h;
}

ProblemConfig dual_config(const ProblemConfig& cfg) {
    ProblemConfig d = cfg;
    const double n = cfg.n;
    d.K1 = cfg.K2;
    d.K2 = cfg.K1;
    d.q1 = cfg.q2;
    d.q2 = cfg.q1;
    d.delta1 = (n - 2.0) * (cfg.q2 - 1.0) - n - 2.0 - cfg.delta2;
    d.delta2 = (n - 2.0) * (cfg.q1 - 1.0) - n - 2.0 - cfg.delta1;
    d.rho = 1.0 / cfg.rho;
    return d;
}

IntersectionTable intersect_manifolds(const ManifoldBranch& launch, const ManifoldBranch& spiral_plus,
                                      const ManifoldBranch& spiral_minus, const PiecewiseSystem& sys, Family family) {
    const Side& launch_side = family == Family::D ? sys.inner : sys.outer;
    const Side& spiral_side = family == Family::D ? sys.outer : sys.inner;
    // The spiral's regions are cut by its crossings with the half axis on the
    // launch branch's side: y > 0 for D, y < 0 for L.
    const double axis_sign = family == Family::D ? 1.0 : -1.0;
    const double launch_rate = launch.rate;
    const double phys = family == Family::D ? std::pow(sys.rho, sys.inner.exps.kappa)
                                            : std::pow(sys.rho, sys.outer.exps.mu());

    IntersectionTable tab;
    tab.launch_budget = launch.total_arclength();
    tab.spiral_budget = std::min(spiral_plus.total_arclength(), spiral_minus.total_arclength());

    constexpr std::size_t chunk = 32;
    struct Box {
        double x0, x1, y0, y1;
        std::size_t i0, i1;
    };
    auto boxes = [&](const std::vector<BranchPoint>& p) {
        std::vector<Box> out;
        for (std::size_t i = 0; i + 1 < p.size(); i += chunk) {
            const std::size_t e = std::min(i + chunk, p.size() - 1);
            Box b{p[i].x, p[i].x, p[i].y, p[i].y, i, e};
            for (std::size_t k = i; k <= e; ++k) {
                b.x0 = std::min(b.x0, p[k].x), b.x1 = std::max(b.x1, p[k].x);
                b.y0 = std::min(b.y0, p[k].y), b.y1 = std::max(b.y1, p[k].y);
            }
            out.push_back(b);
        }
        return out;
    };
    const auto la = boxes(launch.points);

    for (const ManifoldBranch* sp : {&spiral_plus, &spiral_minus}) {
        const auto sb = boxes(sp->points);
        for (const auto& A : la)
            for (const auto& B : sb) {
                if (A.x1 < B.x0 || B.x1 < A.x0 || A.y1 < B.y0 || B.y1 < A.y0) continue;
                for (std::size_t i = A.i0; i < A.i1; ++i)
                    for (std::size_t k = B.i0; k < B.i1; ++k) {
                        const auto &p0 = launch.points[i], &p1 = launch.points[i + 1];
                        const auto &q0 = sp->points[k], &q1 = sp->points[k + 1];
                        const double rx = p1.x - p0.x, ry = p1.y - p0.y;
                        const double sx = q1.x - q0.x, sy = q1.y - q0.y;
                        const double den = rx * sy - ry * sx;
                        if (den == 0.0) continue;
                        const double qx = q0.x - p0.x, qy = q0.y - p0.y;
                        const double u = (qx * sy - qy * sx) / den;
                        const double v = (qx * ry - qy * rx) / den;
                        if (u < 0.0 || u >= 1.0 || v < 0.0 || v >= 1.0) continue;

                        // Newton on P_launch(ta) = P_spiral(tb).
                        double ta = p0.t + u * (p1.t - p0.t), tb = q0.t + v * (q1.t - q0.t);
                        bool ok = true;
                        for (int it = 0; it < 50; ++it) {
                            State a, b;
                            try {
                                a = launch.path.state_at(ta);
                                b = sp->path.state_at(tb);
                            } catch (const std::out_of_range&) {
                                ok = false;
                                break;
                            }
                            const Vec2 fa = vector_field(a[0], a[1], launch_side);
                            const Vec2 fb = vector_field(b[0], b[1], spiral_side);
                            const double gx = a[0] - b[0], gy = a[1] - b[1];
                            const double det = fa.x * (-fb.y) - (-fb.x) * fa.y;
                            if (det == 0.0) {
                                ok = false;
                                break;
                            }
                            const double dta = (-gx * (-fb.y) + fb.x * (-gy)) / det;
                            const double dtb = (fa.x * (-gy) - fa.y * (-gx)) / det;
                            ta += dta;
                            tb += dtb;
                            if (std::abs(dta) + std::abs(dtb) < 1e-14 * (1.0 + std::abs(ta) + std::abs(tb))) break;
                        }
                        if (!ok) continue;
                        const State a = launch.path.state_at(ta);
                        const State bst = sp->path.state_at(tb);
                        if (std::hypot(a[0] - bst[0], a[1] - bst[1]) > 1e-8 * (1.0 + std::hypot(a[0], a[1])))
                            continue;

                        IntersectionPoint ip;
                        ip.q = {a[0], a[1]};
                        ip.branch = sp->tag;
                        ip.launch_arclength = launch.arclength_at_time(ta);
                        ip.spiral_arclength = sp->arclength_at_time(tb);
                        ip.parameter = phys * std::exp(launch_rate * ta);
                        int m = 0;
                        for (const auto& mk : sp->y_axis_crossings)
                            if (mk.s < ip.spiral_arclength && mk.y * axis_sign > 0.0) ++m;
                        ip.j = 2 * m + (is_plus(sp->tag) ? 0 : 1);
                        // Unwrapped angle at q, continued from the nearest polyline point.
                        const auto& near = sp->points[ip.spiral_arclength - q0.s < q1.s - ip.spiral_arclength ? k : k + 1];
                        const double ang = std::atan2(ip.q.y, ip.q.x);
                        const double theta_q = near.theta + std::remainder(ang - near.theta, 2.0 * M_PI);
                        ip.theta = sp->points.front().theta - theta_q;
                        ip.transversality = transversality(ip.q, sys);
                        const double jpi = ip.j * M_PI;
                        ip.window_ok = family == Family::D ? (-(jpi + M_PI) < ip.theta && ip.theta < -jpi)
                                                           : (jpi < ip.theta && ip.theta < jpi + M_PI);
                        ip.parity_ok = (ip.j % 2 == 0) == is_plus(sp->tag);
                        // The same crossing can be met from two adjacent segment pairs.
                        bool dup = false;
                        for (const auto& o : tab.all)
                            if (o.branch == ip.branch &&
                                std::abs(o.launch_arclength - ip.launch_arclength) <
                                    1e-9 * (1.0 + ip.launch_arclength))
                                dup = true;
                        if (!dup) tab.all.push_back(ip);
                    }
            }
    }
    std::sort(tab.all.begin(), tab.all.end(),
              [](const IntersectionPoint& a, const IntersectionPoint& b) { return a.launch_arclength < b.launch_arclength; });

    int jmax = -1;
    for (const auto& p : tab.all) jmax = std::max(jmax, p.j);
    for (int j = 0; j <= jmax; ++j) {
        auto first = std::find_if(tab.all.begin(), tab.all.end(), [&](const IntersectionPoint& p) { return p.j == j; });
        if (first == tab.all.end()) break;
        tab.first.push_back(*first);
    }
    for (std::size_t j = 0; j < tab.first.size(); ++j) {
        const double limit = j + 1 < tab.first.size() ? tab.first[j + 1].launch_arclength
                                                      : std::numeric_limits<double>::infinity();
        IntersectionPoint last = tab.first[j];
        for (const auto& p : tab.all)
            if (p.j == static_cast<int>(j) && p.launch_arclength < limit) last = p;
        tab.last.push_back(last);
        bool clean = true;
        for (const auto& p : tab.all)
            if (p.launch_arclength > tab.first[j].launch_arclength && p.j <= static_cast<int>(j)) clean = false;
        tab.no_reentry.push_back(clean);
    }
    return tab;
}

StructureReport find_structure(const PiecewiseSystem& sys, Family family, const StructureOptions& opts) {
    StructureReport rep;
    rep.config = sys.physical;
    rep.family = family;
    rep.hypotheses = check_hypotheses(sys, family);

    const Side& launch_side = family == Family::D ? sys.inner : sys.outer;
    const Side& far_side = family == Family::D ? sys.outer : sys.inner;
    const BranchTag tag = family == Family::D ? BranchTag::UnstablePlus : BranchTag::StablePlus;
    TraceOptions to = opts.trace;
    to.richardson = false;
    const ManifoldBranch launch = trace_manifold(launch_side, tag, to);
    const double phys = family == Family::D ? std::pow(sys.rho, launch_side.exps.kappa)
                                            : std::pow(sys.rho, launch_side.exps.mu());
    const Context cx{sys, family, opts, launch, phys, launch.rate};

    rep.accumulation.bounded = launch.termination == EventKind::BlowUp;
    rep.accumulation.value = phys * std::exp(launch.rate * launch.path.end_time());

    // Log-spaced scan in arclength.
    const double s_lo = 10.0 * std::hypot(launch.seed.x, launch.seed.y);
    const double s_hi = launch.total_arclength() * (1.0 - 1e-9);
    rep.scan_lo = s_lo;
    rep.scan_hi = s_hi;
    if (!(s_hi > s_lo))
        throw BracketNotFound("launch branch ends at arclength " + fmt(launch.total_arclength()) +
                                  ", before the scan start " + fmt(s_lo) + "; raise the horizon or budget",
                              0.0, 0.0);
    const int N = std::max(opts.scan_points, 2);
    std::vector<double> grid(N);
    for (int i = 0; i < N; ++i) grid[i] = std::exp(std::log(s_lo) + (std::log(s_hi) - std::log(s_lo)) * i / (N - 1));
    std::vector<Shot> shots(N);
    parallel_for(N, opts.threads, [&](int i) {
        Shot s = cx.shoot(grid[i]);
        if (s.degenerate) {
            grid[i] *= i + 1 < N ? 1.0 + 1e-6 : 1.0 - 1e-6;
            s = cx.shoot(grid[i]);
        }
        shots[i] = s;
    });

    std::vector<int> brackets;
    for (int i = 0; i + 1 < N; ++i)
        if (!shots[i].same(shots[i + 1]) && std::min(shots[i].zeros, shots[i + 1].zeros) <= opts.k_max)
            brackets.push_back(i);
    std::vector<std::vector<Flip>> found(brackets.size());
    std::vector<std::vector<std::string>> warns(brackets.size());
    parallel_for(static_cast<int>(brackets.size()), opts.threads, [&](int b) {
        const int i = brackets[b];
        refine(cx, grid[i], grid[i + 1], shots[i], shots[i + 1], found[b], warns[b]);
    });
    std::vector<Flip> flips;
    for (std::size_t b = 0; b < found.size(); ++b) {
        flips.insert(flips.end(), found[b].begin(), found[b].end());
        rep.warnings.insert(rep.warnings.end(), warns[b].begin(), warns[b].end());
    }
    rep.flips = static_cast<int>(flips.size());
    for (int i = 0; i < N; ++i)
        if (shots[i].kind == EndClass::Kind::Unresolved)
            rep.warnings.push_back("unresolved terminal behaviour at launch arclength " + fmt(grid[i]));

    // Per-interval classes from the scan and the refined flips.
    {
        double lo_s = 0.0;
        Shot cur = shots.front();
        std::size_t f = 0;
        auto close = [&](double hi_s, const Shot& s) {
            IntervalClass ic;
            ic.lo = lo_s > 0.0 ? cx.parameter_at(lo_s) : 0.0;
            ic.hi = cx.parameter_at(hi_s);
            ic.label = class_label(family, s);
            ic.end = s.end;
            ic.zeros = s.zeros;
            rep.intervals.push_back(ic);
        };
        for (int i = 0; i + 1 < N; ++i) {
            if (shots[i].same(shots[i + 1])) continue;
            const bool refined = f < flips.size() && flips[f].lo >= grid[i] && flips[f].hi <= grid[i + 1];
            if (!refined) {
                close(grid[i], cur);
                lo_s = grid[i + 1];
                cur = shots[i + 1];
                continue;
            }
            while (f < flips.size() && flips[f].hi <= grid[i + 1]) {
                const double mid = 0.5 * (flips[f].lo + flips[f].hi);
                close(mid, flips[f].before);
                lo_s = mid;
                cur = flips[f].after;
                ++f;
            }
        }
        close(s_hi, cur);
        // Beyond k_max + 1 zeros the brackets are not refined.
        auto beyond = std::find_if(rep.intervals.begin(), rep.intervals.end(),
                                   [&](const IntervalClass& c) { return c.zeros > opts.k_max + 1; });
        rep.intervals.erase(beyond, rep.intervals.end());
    }

    // D_k / L_k: first k -> k+1 flip; the preceding (k-1 -> k) flip is the tilde value.
    SolveOptions verify = opts.solve;
    verify.capture_radius = opts.capture_radius;
    verify.keep_dense = true;
    std::vector<ManifoldBranch> far_branches;
    {
        TraceOptions ft = opts.trace;
        ft.richardson = false;
        const BranchTag a = family == Family::D ? BranchTag::StablePlus : BranchTag::UnstablePlus;
        const BranchTag b = family == Family::D ? BranchTag::StableMinus : BranchTag::UnstableMinus;
        if (branch_exists(far_side, a)) {
            far_branches.push_back(trace_manifold(far_side, a, ft));
            far_branches.push_back(trace_manifold(far_side, b, ft));
        }
    }

    for (int k = 0; k <= opts.k_max; ++k) {
        auto it = std::find_if(flips.begin(), flips.end(),
                               [&](const Flip& f) { return f.before.zeros == k && f.after.zeros == k + 1; });
        if (it == flips.end()) {
            if (k == 0)
                throw BracketNotFound("no zero-count flip 0 -> 1 in the scanned launch arclength range [" + fmt(s_lo) +
                                          ", " + fmt(s_hi) + "]",
                                      cx.parameter_at(s_lo), cx.parameter_at(s_hi));
            rep.warnings.push_back("no flip " + std::to_string(k) + " -> " + std::to_string(k + 1) +
                                   " within the launch budget");
            break;
        }
        StructurePoint sp;
        sp.k = k;
        sp.arclength = 0.5 * (it->lo + it->hi);
        sp.arclength_lo = it->lo;
        sp.arclength_hi = it->hi;
        sp.achieved_rtol = (it->hi - it->lo) / sp.arclength;
        sp.value = cx.parameter_at(sp.arclength);
        sp.bracket_lo = cx.parameter_at(it->lo);
        sp.bracket_hi = cx.parameter_at(it->hi);
        if (sp.bracket_lo > sp.bracket_hi) std::swap(sp.bracket_lo, sp.bracket_hi);
        if (k >= 1) {
            const Flip* tilde = nullptr;
            for (auto f = flips.begin(); f != it; ++f)
                if (f->before.zeros == k - 1 && f->after.zeros == k) tilde = &*f;
            if (tilde) {
                sp.tilde = cx.parameter_at(0.5 * (tilde->lo + tilde->hi));
                const double prev = rep.points.empty() ? 0.0 : rep.points.back().value;
                sp.tilde_equals_previous = std::abs(*sp.tilde - prev) <= 1e-6 * prev;
            } else {
                sp.tilde_equals_previous = false;
            }
            if (rep.hypotheses.monotone && !sp.tilde_equals_previous)
                rep.warnings.push_back("tilde value for k = " + std::to_string(k) +
                                       " differs from the previous member although the ordering assumption holds");
        }
        try {
            const RadialSolution v = solve_radial(sys, family, sp.value, verify);
            sp.verified = v.cls;
            const EndClass& far = family == Family::D ? v.cls.infinity : v.cls.origin;
            const auto want = family == Family::D ? EndClass::Kind::FastDecay : EndClass::Kind::Regular;
            sp.verified_ok = far.kind == want && v.cls.zeros == k && !v.cls.degenerate;
        } catch (const NumericalError& e) {
            rep.warnings.push_back("verification of k = " + std::to_string(k) + " failed: " + e.what());
        }
        if (!far_branches.empty()) {
            const PhasePoint q = launch.at_arclength(sp.arclength);
            sp.manifold_distance = std::min(distance_to_branch(far_branches[0], {q.x, q.y}),
                                            distance_to_branch(far_branches[1], {q.x, q.y}));
        }
        if (!sp.verified_ok)
            rep.warnings.push_back("k = " + std::to_string(k) + " verified as " + sp.verified.label());
        rep.points.push_back(sp);
    }

    if (opts.intersections && far_branches.size() == 2)
        rep.intersections = intersect_manifolds(launch, far_branches[0], far_branches[1], sys, family);
    return rep;
}

MaximumData first_maximum(const PiecewiseSystem& sys, double D0, const SolveOptions& opts) {
    SolveOptions o = opts;
    o.record_x_axis = true;
    const RadialSolution s = solve_radial(sys, Family::D, D0, o);
    for (const auto& e : s.traj.events) {
        if (e.kind != EventKind::XAxisCrossing || e.side != 2 || !(e.x > 0.0)) continue;
        MaximumData m;
        m.R0 = sys.rho * std::exp(e.t);
        m.U0 = e.x * std::exp(-sys.outer.exps.alpha * e.t);
        m.D0 = D0;
        return m;
    }
    throw NumericalError("no maximum of u after the switch");
}

ScalingCheck scaling_report(const StructureReport& base, double Kbar, double rhobar, const StructureOptions& opts,
                            double tolerance) {
    if (!(Kbar > 0.0) || !(rhobar > 0.0)) throw DomainError("Kbar and rhobar must be positive");
    if (base.family != Family::D || base.points.empty())
        throw DomainError("scaling needs a regular-family report with D_0");
    ScalingCheck sc;
    sc.Kbar = Kbar;
    sc.rhobar = rhobar;
    const ProblemConfig& c0 = base.config;
    if (c0.rho != 1.0 || std::abs(c0.K1) != 1.0 || std::abs(c0.K2) != 1.0)
        sc.warnings.push_back("base configuration is not at |K| = 1, rho = 1");
    sc.exact_law = c0.q1 == c0.q2 && c0.delta1 == 0.0 && c0.delta2 == 0.0;
    if (!sc.exact_law) sc.warnings.push_back("the scaling law is exact only for q1 = q2 and delta = 0");

    const PiecewiseSystem sys0 = make_piecewise(c0);
    sc.base = first_maximum(sys0, base.points.front().value, opts.solve);

    ProblemConfig c1 = c0;
    c1.K1 *= Kbar;
    c1.K2 *= Kbar;
    c1.rho = rhobar * c0.rho;
    const PiecewiseSystem sys1 = make_piecewise(c1);
    StructureOptions o = opts;
    o.k_max = 0;
    o.intersections = false;
    const StructureReport r1 = find_structure(sys1, Family::D, o);
    sc.scaled = first_maximum(sys1, r1.points.front().value, opts.solve);

    const double amp = std::pow(rhobar * rhobar * Kbar, -1.0 / (c0.q1 - 2.0));
    sc.expected_R_ratio = rhobar;
    sc.expected_U_ratio = amp;
    sc.expected_D_ratio = amp * std::pow(rhobar, sys0.inner.exps.kappa);
    auto rel = [](double got, double want) { return std::abs(got - want) / std::abs(want); };
    sc.R_error = rel(sc.scaled.R0 / sc.base.R0, sc.expected_R_ratio);
    sc.U_error = rel(sc.scaled.U0 / sc.base.U0, sc.expected_U_ratio);
    sc.D_error = rel(sc.scaled.D0 / sc.base.D0, sc.expected_D_ratio);

    // w(r) = amp u(r / rhobar) in the rescaled equation, with u'' from a
    // five-point central difference of the dense u'.
    {
        SolveOptions so = opts.solve;
        so.keep_dense = true;
        const RadialSolution u = solve_radial(sys0, Family::D, base.points.front().value, so);
        const double n = c0.n, eta = c0.eta;
        auto uval = [&](double r, double& du) {
            const double t = std::log(r / c0.rho);
            const Side& s = t <= 0.0 ? sys0.inner : sys0.outer;
            const State st = u.traj.state_at(t);
            const double rn = std::exp(t);
            du = st[1] * std::pow(rn, -(s.exps.alpha + 1.0)) / c0.rho;
            return st[0] * std::pow(rn, -s.exps.alpha);
        };
        const double t_hi = std::min(u.traj.end_time(), 5.0);
        double worst = 0.0;
        for (int i = 0; i <= 400; ++i) {
            const double t = -5.0 + (t_hi + 5.0) * i / 400.0;  // normalized time of u
            const double s = c0.rho * std::exp(t);
            const double h = 2e-3 * s;
            if (std::abs(s - c0.rho) < 3.0 * h) continue;
            const double r = rhobar * s;
            double du, dp1, dm1, dp2, dm2;
            const double uv = uval(s, du);
            uval(s + h, dp1);
            uval(s - h, dm1);
            uval(s + 2.0 * h, dp2);
            uval(s - 2.0 * h, dm2);
            const double d2u = (8.0 * (dp1 - dm1) - (dp2 - dm2)) / (12.0 * h);
            const double w = amp * uv, dw = amp * du / rhobar, d2w = amp * d2u / (rhobar * rhobar);
            const bool inner = r <= c1.rho;
            const double K = inner ? c1.K1 : c1.K2, q = inner ? c1.q1 : c1.q2, dl = inner ? c1.delta1 : c1.delta2;
            const double f = K * std::pow(r, dl) * w * std::pow(std::abs(w), q - 2.0);
            const double terms[] = {d2w, (n - 1.0) / r * dw, eta / (r * r) * w, f};
            double scale = 0.0, res = 0.0;
            for (double v : terms) scale += std::abs(v), res += v;
            if (scale > 0.0) worst = std::max(worst, std::abs(res) / scale);
        }
        sc.residual = worst;
    }
    sc.passed = sc.exact_law && sc.R_error < tolerance && sc.U_error < tolerance && sc.D_error < tolerance &&
                sc.residual < tolerance;
    return sc;
}

}  // namespace fowlerkit
