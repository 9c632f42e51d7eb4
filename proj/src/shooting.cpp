#include "fowlerkit/shooting.hpp"

#include "fowlerkit/errors.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace fowlerkit {

std::string_view to_string(Family f) { return f == Family::D ? "D" : "L"; }

std::string_view to_string(RateTag r) {
    switch (r) {
        case RateTag::None: return "none";
        case RateTag::Power: return "power";
        case RateTag::Linear: return "linear";
        case RateTag::LogCorrected: return "log-corrected";
    }
    return "?";
}

std::string_view short_name(EndClass::Kind k) {
    switch (k) {
        case EndClass::Kind::Regular: return "R";
        case EndClass::Kind::Singular: return "S";
        case EndClass::Kind::FastDecay: return "fd";
        case EndClass::Kind::SlowDecay: return "sd";
        case EndClass::Kind::BlowUp: return "blow-up";
        case EndClass::Kind::Unresolved: return "unresolved";
    }
    return "?";
}

std::string SolutionClass::label() const {
    return "(" + std::string(short_name(origin.kind)) + ", " + std::string(short_name(infinity.kind)) + ", " +
           std::to_string(zeros) + ")";
}

ZeroCount count_nondegenerate_zeros(const Trajectory& traj) {
    ZeroCount z;
    for (const auto& e : traj.events) {
        if (e.kind != EventKind::YAxisCrossing) continue;
        if (e.degenerate)
            z.degenerate = true;
        else
            ++z.count;
    }
    return z;
}

LinearComponents linear_components(const Vec2& p, const ExponentSet& e) {
    const double mu = e.mu(), k = e.kappa;
    return {(p.y + mu * p.x) / (mu - k), (p.y + k * p.x) / (k - mu)};
}

double transversality(const Vec2& q, const PiecewiseSystem& sys) {
    const Vec2 fi = vector_field(q.x, q.y, sys.inner);
    const Vec2 fo = vector_field(q.x, q.y, sys.outer);
    return -fi.x * fo.y + fi.y * fo.x;
}

std::vector<Target> far_side_targets(const Side& side, const SolveOptions& opts, double arm) {
    std::vector<Target> out;
    for (const auto& q : equilibria(side)) {
        Target tg{q.location, opts.converge_radius, opts.converge_dwell, 0.0, std::string(to_string(q.kind))};
        if (q.kind == EquilibriumKind::Origin) tg.arm_radius = arm;
        out.push_back(tg);
    }
    if (opts.capture_radius) out.push_back({{0.0, 0.0}, *opts.capture_radius, 0.0, arm, "origin-capture"});
    return out;
}

namespace {

int sign(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

double linear_fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) sx += xs[i], sy += ys[i];
    const double mx = sx / n, my = sy / n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxy / sxx;
}

EventSpec make_events(const SolveOptions& opts, std::vector<Target> targets) {
    EventSpec ev;
    ev.y_axis = true;
    ev.x_axis = opts.record_x_axis;
    ev.zero_floor = opts.zero_floor;
    ev.blowup_threshold = opts.blowup_threshold;
    ev.event_tol = opts.event_tol;
    ev.targets = std::move(targets);
    return ev;
}

IntegratorOptions make_integrator(const SolveOptions& opts) {
    IntegratorOptions io;
    io.rtol = opts.rtol;
    io.atol = opts.atol;
    io.h_max = opts.h_max;
    // The origin-exponent fit of a certified fast decay reads the dense path.
    io.keep_dense = opts.keep_dense || opts.capture_radius.has_value();
    io.samples_per_step = 1;
    return io;
}

bool is_origin_label(const std::string& s) { return s == "origin" || s == "origin-capture"; }

}  // namespace

std::optional<double> fit_origin_exponent(const Trajectory& traj, const Side& side, double rmin, double rmax) {
    if (traj.dense.empty() || traj.samples.size() < 2) return std::nullopt;
    // Start of the final approach: last sample outside rmax.
    std::size_t i0 = traj.samples.size();
    while (i0 > 0) {
        const auto& s = traj.samples[i0 - 1];
        if (std::hypot(s.x, s.y) > rmax) break;
        --i0;
    }
    if (i0 == 0) return std::nullopt;
    const double ta = traj.samples[i0 - 1].t, tb = traj.end_time();
    std::vector<double> ts, ls;
    const int m = 400;
    for (int i = 0; i <= m; ++i) {
        const double t = ta + (tb - ta) * i / m;
        State st;
        try {
            st = traj.state_at(t);
        } catch (const std::out_of_range&) {
            continue;
        }
        const double r = std::hypot(st[0], st[1]);
        if (r < rmin || r > rmax || st[0] == 0.0) continue;
        ts.push_back(t);
        ls.push_back(std::log(std::abs(st[0])) - side.exps.alpha * t);
    }
    if (ts.size() < 8) return std::nullopt;
    return -linear_fit_slope(ts, ls);
}

std::optional<double> fit_log_rate(const Trajectory& traj) {
    if (traj.samples.size() < 8) return std::nullopt;
    const double t0 = traj.front().t;
    const double span = std::abs(traj.back().t - t0);
    std::vector<double> lt, lx;
    for (const auto& s : traj.samples) {
        const double tau = std::abs(s.t - t0);
        if (tau < 0.1 * span || s.x == 0.0) continue;
        lt.push_back(std::log(tau));
        lx.push_back(std::log(std::abs(s.x)));
    }
    if (lt.size() < 5) return std::nullopt;
    return linear_fit_slope(lt, lx);
}

EndClass classify_terminal(const Trajectory& traj, const Side& side, const std::vector<Target>& targets, double rho,
                           double capture_radius) {
    const auto& e = side.exps;
    const bool fwd = traj.direction == Direction::Forward;
    const Sample& last = traj.back();
    const double t_end = traj.end_time();
    Vec2 end{last.x, last.y};
    for (auto it = traj.events.rbegin(); it != traj.events.rend(); ++it)
        if (it->kind == traj.termination) {
            end = {it->x, it->y};
            break;
        }
    EndClass c;
    c.sign = sign(end.x);

    switch (traj.termination) {
        case EventKind::BlowUp:
            c.kind = EndClass::Kind::BlowUp;
            c.value = rho * std::exp(t_end);
            return c;
        case EventKind::Converged: {
            const std::string& label = targets.at(traj.target).label;
            if (!is_origin_label(label)) {
                const Vec2 p = targets.at(traj.target).point;
                c.kind = fwd ? EndClass::Kind::SlowDecay : EndClass::Kind::Singular;
                c.rate = RateTag::Power;
                c.sign = sign(p.x);
                c.value = std::pow(rho, e.alpha) * end.x;
                c.exponent = e.alpha;
                double worst = 0.0;
                for (const auto& s : traj.samples)
                    if (std::abs(s.t - t_end) <= std::log(10.0))
                        worst = std::max(worst, std::abs(s.x - p.x) / std::abs(p.x));
                c.fit_error = worst;
                return c;
            }
            const LinearComponents lc = linear_components(end, e);
            const double rmax = 1e-3, rmin = std::min(10.0 * capture_radius, 1e-4);
            if (fwd) {
                // r -> infinity: fast decay along the stable eigenvector, slow
                // decay along the weaker stable direction of a node.
                if (e.regime == Regime::CenterStable) {
                    c.kind = EndClass::Kind::SlowDecay;
                    c.rate = RateTag::LogCorrected;
                    return c;
                }
                if (e.regime == Regime::NodeStable && std::abs(lc.unstable) >= std::abs(lc.stable)) {
                    c.kind = EndClass::Kind::SlowDecay;
                    c.rate = RateTag::Linear;
                    c.value = std::pow(rho, e.kappa) * lc.unstable * std::exp(-e.Lambda * t_end);
                    c.exponent = e.kappa;
                    c.sign = sign(lc.unstable);
                    return c;
                }
                c.kind = EndClass::Kind::FastDecay;
                c.value = std::pow(rho, e.mu()) * lc.stable * std::exp(-e.lambda * t_end);
                c.sign = sign(lc.stable);
                c.exponent = fit_origin_exponent(traj, side, rmin, rmax);
                return c;
            }
            if (e.regime == Regime::CenterUnstable) {
                c.kind = EndClass::Kind::Singular;
                c.rate = RateTag::LogCorrected;
                return c;
            }
            if (e.regime == Regime::NodeUnstable && std::abs(lc.stable) >= std::abs(lc.unstable)) {
                c.kind = EndClass::Kind::Singular;
                c.rate = RateTag::Linear;
                c.value = std::pow(rho, e.mu()) * lc.stable * std::exp(-e.lambda * t_end);
                c.exponent = e.mu();
                c.sign = sign(lc.stable);
                return c;
            }
            c.kind = EndClass::Kind::Regular;
            c.value = std::pow(rho, e.kappa) * lc.unstable * std::exp(-e.Lambda * t_end);
            c.sign = sign(lc.unstable);
            c.exponent = fit_origin_exponent(traj, side, rmin, rmax);
            return c;
        }
        case EventKind::Horizon: {
            const bool center = fwd ? e.regime == Regime::CenterStable : e.regime == Regime::CenterUnstable;
            if (center && std::hypot(end.x, end.y) < 0.5) {
                if (auto slope = fit_log_rate(traj); slope && *slope < 0.0) {
                    c.kind = fwd ? EndClass::Kind::SlowDecay : EndClass::Kind::Singular;
                    c.rate = RateTag::LogCorrected;
                    c.exponent = -*slope;
                    return c;
                }
            }
            c.kind = EndClass::Kind::Unresolved;
            return c;
        }
        default:
            c.kind = EndClass::Kind::Unresolved;
            return c;
    }
}

namespace {

struct Launch {
    const Side* launch;
    const Side* far;
    BranchTag tag;
    Direction dir;
    int launch_id;
    double phys_exponent;  // parameter scales as rho^p
};

Launch launch_of(const PiecewiseSystem& sys, Family f) {
    if (f == Family::D)
        return {&sys.inner, &sys.outer, BranchTag::UnstablePlus, Direction::Forward, 1, sys.inner.exps.kappa};
    return {&sys.outer, &sys.inner, BranchTag::StablePlus, Direction::Backward, 2, sys.outer.exps.mu()};
}

EndClass launch_class(Family f, double parameter, const ExponentSet& e) {
    EndClass c;
    c.kind = f == Family::D ? EndClass::Kind::Regular : EndClass::Kind::FastDecay;
    c.value = parameter;
    c.exponent = f == Family::D ? e.kappa : e.mu();
    c.sign = sign(parameter);
    return c;
}

}  // namespace

RadialSolution solve_radial(const PiecewiseSystem& sys, Family family, double parameter, const SolveOptions& opts) {
    if (!(parameter > 0.0)) throw DomainError("the seed parameter must be positive");
    const Launch ln = launch_of(sys, family);
    if (!branch_exists(*ln.launch, ln.tag))
        throw RegimeError(std::string("no ") + std::string(to_string(ln.tag)) + " branch on the launch side (" +
                          std::string(to_string(ln.launch->exps.regime)) + ")");
    const SeedCurve c = seed_curve(*ln.launch, ln.tag);
    if (c.center) throw RegimeError("the seed parameter is undefined on a center branch");

    const double p = parameter * std::pow(sys.rho, -ln.phys_exponent);
    const double eps = opts.seed_epsilon.value_or(default_seed_epsilon(*ln.launch, ln.tag));
    // The parameter-p solution is the parameter-1 solution shifted by ln(p)/rate.
    const double shift = std::log(p) / c.rate;
    double ax = seed_curve_offset(c, eps);
    double ts = seed_curve_time(c, ax) - shift;
    const double dsign = sign_of(ln.dir);
    if (dsign * ts > -1.0) {
        ts = -dsign;
        ax = seed_curve_abscissa(c, ts + shift);
    }
    const double ys = c.slope * ax + c.corr * std::pow(ax, c.power - 1.0);

    RadialSolution sol;
    sol.family = family;
    sol.parameter = parameter;
    sol.seed = {ax, ys, ts};
    const auto targets = far_side_targets(*ln.far, opts, 1e-3);
    const EventSpec ev = make_events(opts, targets);
    // Absolute tolerance relative to the seed size, as for the traced branches.
    IntegratorOptions io = make_integrator(opts);
    io.atol *= std::min(1.0, std::hypot(ax, ys));
    sol.traj = integrate(sys, sol.seed, ln.dir, std::abs(ts) + opts.horizon, ev, io);
    if (sol.traj.termination == EventKind::BlowUp && sol.traj.events.back().side == ln.launch_id)
        throw SeedOverflow("launch side blows up before the switch at t = " +
                           std::to_string(sol.traj.events.back().t));

    const EndClass far = classify_terminal(sol.traj, *ln.far, targets, sys.rho, opts.capture_radius.value_or(1e-5));
    const EndClass near = launch_class(family, parameter, ln.launch->exps);
    sol.cls.origin = family == Family::D ? near : far;
    sol.cls.infinity = family == Family::D ? far : near;
    const ZeroCount z = count_nondegenerate_zeros(sol.traj);
    sol.cls.zeros = z.count;
    sol.cls.degenerate = z.degenerate;
    return sol;
}

RadialSolution shoot_far_side(const PiecewiseSystem& sys, Family family, const PhasePoint& q, const EndClass& launch,
                              ZeroCount launch_zeros, const SolveOptions& opts) {
    const Launch ln = launch_of(sys, family);
    RadialSolution sol;
    sol.family = family;
    sol.parameter = launch.value.value_or(0.0);
    sol.seed = {q.x, q.y, 0.0};
    const double arm = std::min(1e-3, 0.5 * std::hypot(q.x, q.y));
    const auto targets = far_side_targets(*ln.far, opts, arm);
    sol.traj = integrate(*ln.far, sol.seed, ln.dir, opts.horizon, make_events(opts, targets), make_integrator(opts));
    const EndClass far = classify_terminal(sol.traj, *ln.far, targets, sys.rho, opts.capture_radius.value_or(1e-5));
    sol.cls.origin = family == Family::D ? launch : far;
    sol.cls.infinity = family == Family::D ? far : launch;
    const ZeroCount z = count_nondegenerate_zeros(sol.traj);
    sol.cls.zeros = launch_zeros.count + z.count;
    sol.cls.degenerate = launch_zeros.degenerate || z.degenerate;
    return sol;
}

double distance_to_branch(const ManifoldBranch& b, const Vec2& p) {
    // Straight seed chord from the origin.
    const Vec2 s = b.seed;
    const double ss = s.x * s.x + s.y * s.y;
    const double f = std::clamp((p.x * s.x + p.y * s.y) / ss, 0.0, 1.0);
    double best = std::hypot(p.x - f * s.x, p.y - f * s.y);

    std::size_t ib = 0;
    double coarse = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < b.points.size(); ++i) {
        const double d = std::hypot(b.points[i].x - p.x, b.points[i].y - p.y);
        if (d < coarse) coarse = d, ib = i;
    }
    best = std::min(best, coarse);
    const double t_lo = b.points[ib > 0 ? ib - 1 : 0].t;
    const double t_hi = b.points[std::min(ib + 1, b.points.size() - 1)].t;
    if (t_lo == t_hi) return best;
    auto dist2 = [&](double t) {
        const State st = b.path.state_at(t);
        return (st[0] - p.x) * (st[0] - p.x) + (st[1] - p.y) * (st[1] - p.y);
    };
    const double a = std::min(t_lo, t_hi), c = std::max(t_lo, t_hi);
    double t = boost::math::tools::brent_find_minima(dist2, a, c, 52).first;
    // Brent stops at sqrt(eps) in t; finish with foot-of-perpendicular steps.
    for (int it = 0; it < 4; ++it) {
        const double h = 1e-6 * (c - a);
        const double tp = std::min(t + h, c), tm = std::max(t - h, a);
        const State sp = b.path.state_at(tp), sm = b.path.state_at(tm), s0 = b.path.state_at(t);
        const double tx = (sp[0] - sm[0]) / (tp - tm), ty = (sp[1] - sm[1]) / (tp - tm);
        const double tt = tx * tx + ty * ty;
        if (tt == 0.0) break;
        t = std::clamp(t + ((p.x - s0[0]) * tx + (p.y - s0[1]) * ty) / tt, a, c);
    }
    return std::min(best, std::sqrt(dist2(t)));
}

ScalingLawCheck check_parameter_scaling(const PiecewiseSystem& sys, Family family, double p1, double p2,
                                        const SolveOptions& opts) {
    SolveOptions o = opts;
    o.keep_dense = true;
    const RadialSolution a = solve_radial(sys, family, p1, o);
    const RadialSolution b = solve_radial(sys, family, p2, o);
    const Launch ln = launch_of(sys, family);
    const ExponentSet& e = ln.launch->exps;
    const double rate = family == Family::D ? e.Lambda : e.lambda;

    ScalingLawCheck out;
    out.shift = std::log(p2 / p1) / rate;
    // b(t) = a(t + shift) on the launch side: t and t + shift both before the switch.
    double lo, hi;
    if (family == Family::D) {
        lo = std::max(b.seed.t, a.seed.t - out.shift);
        hi = std::min(0.0, -out.shift);
    } else {
        lo = std::max(0.0, -out.shift);
        hi = std::min(b.seed.t, a.seed.t - out.shift);
    }
    if (!(hi > lo)) throw DomainError("parameters too far apart for a common launch-side window");
    const int m = 2000;
    double num = 0.0, den = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double t = lo + (hi - lo) * i / m;
        const State sb = b.traj.state_at(t);
        const State sa = a.traj.state_at(t + out.shift);
        // u = x r^-alpha in normalized radius.
        const double ub = sb[0] * std::exp(-e.alpha * t);
        const double ua = sa[0] * std::exp(-e.alpha * t);
        num = std::max(num, std::abs(ub - ua));
        den = std::max(den, std::abs(ub));
        ++out.points;
    }
    out.sup_rel_error = num / den;
    return out;
}

}  // namespace fowlerkit
