#include "fowlerkit/manifolds.hpp"

#include "fowlerkit/errors.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace fowlerkit {

namespace {

/// Solves g(x)/x = target for x of the given sign; g(x)/x is increasing in |x|.
double solve_secant_slope(const Nonlinearity& g, double target, double sgn) {
    if (auto q = g.pure_power()) return sgn * std::pow(target, 1.0 / (*q - 2.0));
    auto f = [&](double a) { return g(sgn * a) / (sgn * a) - target; };
    double lo = 1.0, hi = 1.0;
    while (f(lo) > 0.0 && lo > 1e-300) lo *= 0.5;
    while (f(hi) < 0.0 && hi < 1e300) hi *= 2.0;
    if (!(f(lo) <= 0.0 && f(hi) >= 0.0)) throw NumericalError("no root of g(x)/x = c");
    boost::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
    return sgn * 0.5 * (r.first + r.second);
}

std::string classify_point(double tr, double det, double scale) {
    if (det < 0.0) return "saddle";
    if (std::abs(tr) <= 1e-12 * scale) return "center";
    const std::string suffix = tr < 0.0 ? "-stable" : "-unstable";
    return (tr * tr - 4.0 * det < 0.0 ? "focus" : "node") + suffix;
}

double linearization_norm(const ExponentSet& e) {
    return std::sqrt(e.alpha * e.alpha + 1.0 + e.eta * e.eta + e.gamma * e.gamma);
}

double leading_power(const Side& s) {
    if (auto lead = s.g.leading()) return lead->exponent;
    return s.exps.q;
}

}  // namespace

std::string_view to_string(EquilibriumKind k) {
    switch (k) {
        case EquilibriumKind::Origin: return "origin";
        case EquilibriumKind::PPlus: return "P+";
        case EquilibriumKind::PMinus: return "P-";
    }
    return "?";
}

std::string_view to_string(BranchTag t) {
    switch (t) {
        case BranchTag::UnstablePlus: return "unstable+";
        case BranchTag::UnstableMinus: return "unstable-";
        case BranchTag::StablePlus: return "stable+";
        case BranchTag::StableMinus: return "stable-";
    }
    return "?";
}

std::string_view to_string(RayFlow::Kind k) {
    switch (k) {
        case RayFlow::Kind::Outward: return "outward";
        case RayFlow::Kind::Inward: return "inward";
        case RayFlow::Kind::Threshold: return "threshold";
    }
    return "?";
}

bool has_nontrivial_equilibria(const Side& s) {
    const Regime r = s.exps.regime;
    if (s.K > 0.0) return r == Regime::Saddle;
    if (s.K < 0.0) return r == Regime::NodeUnstable || r == Regime::NodeStable;
    return false;
}

std::vector<Equilibrium> equilibria(const Side& s) {
    const auto& e = s.exps;
    const double tr = e.alpha + e.gamma;
    const double scale = std::abs(e.alpha) + std::abs(e.gamma);
    std::vector<Equilibrium> out;
    out.push_back({EquilibriumKind::Origin, {0.0, 0.0}, std::string(to_string(e.regime)), 0.0, tr,
                   e.linear_coupling()});
    if (!has_nontrivial_equilibria(s)) return out;
    const double target = -e.linear_coupling() / s.K;
    for (double sgn : {1.0, -1.0}) {
        const double px = solve_secant_slope(s.g, target, sgn);
        const Vec2 p{px, -e.alpha * px};
        const double det = e.linear_coupling() + s.K * s.g.derivative(px);
        out.push_back({sgn > 0 ? EquilibriumKind::PPlus : EquilibriumKind::PMinus, p,
                       classify_point(tr, det, scale), energy(p.x, p.y, s), tr, det});
    }
    return out;
}

bool branch_exists(const Side& s, BranchTag tag) {
    const Regime r = s.exps.regime;
    if (is_unstable(tag)) {
        switch (r) {
            case Regime::NodeUnstable:
            case Regime::Saddle:
            case Regime::CenterUnstable: return true;
            case Regime::CenterStable: return s.K < 0.0;
            case Regime::NodeStable: return false;
        }
    } else {
        switch (r) {
            case Regime::NodeStable:
            case Regime::Saddle:
            case Regime::CenterStable: return true;
            case Regime::CenterUnstable: return s.K < 0.0;
            case Regime::NodeUnstable: return false;
        }
    }
    return false;
}

SeedCurve seed_curve(const Side& s, BranchTag tag) {
    const auto& e = s.exps;
    SeedCurve c;
    const bool unstable = is_unstable(tag);
    c.slope = unstable ? -e.kappa : -e.mu();
    c.rate = unstable ? e.Lambda : e.lambda;
    const double other = unstable ? e.lambda : e.Lambda;
    c.center = unstable ? e.regime == Regime::CenterStable : e.regime == Regime::CenterUnstable;
    if (c.center) c.rate = 0.0;
    c.power = leading_power(s);
    if (auto lead = s.g.leading()) {
        const double den = (c.power - 1.0) * c.rate - other;
        if (std::abs(den) > 1e-8 * (std::abs(c.rate) + std::abs(other))) c.corr = -s.K * lead->coef / den;
    }
    return c;
}

double default_seed_epsilon(const Side& s, BranchTag tag) {
    if (seed_curve(s, tag).center) return 1e-9;
    double eps = 1e-7 * std::max(1.0, linearization_norm(s.exps));
    const double p = leading_power(s);
    if (p < 3.0) eps = std::min(eps, std::max(std::pow(1e-7, 1.0 / (p - 2.0)), 1e-40));
    return eps;
}

double seed_curve_time(const SeedCurve& c, double ax) {
    if (c.center) return 0.0;
    if (c.corr == 0.0) return std::log(ax) / c.rate;
    const double k = c.power - 2.0;
    return -std::log(std::pow(ax, -k) + c.corr / c.rate) / (k * c.rate);
}

double seed_curve_abscissa(const SeedCurve& c, double t) {
    if (c.center) throw RegimeError("the seed time law is undefined on a center branch");
    if (c.corr == 0.0) return std::exp(c.rate * t);
    const double k = c.power - 2.0;
    return std::pow(std::exp(-k * c.rate * t) - c.corr / c.rate, -1.0 / k);
}

double seed_curve_offset(const SeedCurve& c, double eps) {
    auto curve_y = [&](double x) { return c.slope * x + c.corr * x * std::pow(std::abs(x), c.power - 2.0); };
    double ax = eps / std::hypot(1.0, c.slope);
    for (int i = 0; i < 4; ++i) ax *= eps / std::hypot(ax, curve_y(ax));
    return ax;
}

namespace {

ManifoldBranch trace_once(const Side& side, BranchTag tag, double eps, const TraceOptions& opts) {
    ManifoldBranch b;
    b.tag = tag;
    b.curve = seed_curve(side, tag);
    b.center = b.curve.center;
    b.rate = b.curve.rate;
    b.epsilon = eps;

    const double sgn = is_plus(tag) ? 1.0 : -1.0;
    const SeedCurve& c = b.curve;
    auto curve_y = [&](double x) { return c.slope * x + c.corr * x * std::pow(std::abs(x), c.power - 2.0); };
    const double ax = seed_curve_offset(c, eps);
    const double xs = sgn * ax;
    b.seed = {xs, curve_y(xs)};
    b.seed_time = seed_curve_time(c, ax);

    EventSpec ev;
    ev.y_axis = true;
    ev.x_axis = true;
    ev.zero_floor = opts.zero_floor;
    ev.event_tol = opts.event_tol;
    ev.blowup_threshold = opts.blowup_threshold;
    ev.arclength_budget = std::max(opts.arclength_budget - eps, eps);
    const auto eq = equilibria(side);
    for (const auto& q : eq) {
        Target tg{q.location, opts.converge_radius, opts.converge_dwell, 0.0, std::string(to_string(q.kind))};
        if (q.kind == EquilibriumKind::Origin) tg.arm_radius = std::max(1e-3, 100.0 * eps);
        ev.targets.push_back(tg);
    }

    IntegratorOptions io;
    io.rtol = opts.rtol;
    io.atol = opts.atol * std::min(1.0, eps);
    io.keep_dense = true;
    io.samples_per_step = 4;
    double horizon = opts.horizon;
    if (b.center) {
        io.h_max = std::numeric_limits<double>::infinity();
        horizon = std::max(horizon, 1e200);
    }
    const Direction dir = is_unstable(tag) ? Direction::Forward : Direction::Backward;
    b.path = integrate(side, {b.seed.x, b.seed.y, b.seed_time}, dir, horizon, ev, io);
    b.termination = b.path.termination;
    if (b.termination == EventKind::Converged && b.path.target >= 0) b.converged_to = eq[b.path.target].kind;

    const double s0 = std::hypot(b.seed.x, b.seed.y);
    double theta = std::atan2(b.seed.y, b.seed.x);
    b.points.reserve(b.path.samples.size());
    for (const auto& smp : b.path.samples) {
        const double a = std::atan2(smp.y, smp.x);
        double d = a - std::remainder(theta, 2.0 * M_PI);
        d = std::remainder(d, 2.0 * M_PI);
        theta += d;
        b.points.push_back({s0 + smp.s, smp.t, smp.x, smp.y, theta, energy(smp.x, smp.y, side)});
    }
    int ny = 0, nx = 0;
    for (const auto& e : b.path.events) {
        if (e.kind == EventKind::YAxisCrossing)
            b.y_axis_crossings.push_back({++ny, s0 + e.s, e.t, e.x, e.y, e.degenerate});
        else if (e.kind == EventKind::XAxisCrossing)
            b.x_axis_crossings.push_back({++nx, s0 + e.s, e.t, e.x, e.y, e.degenerate});
    }
    if (b.points.size() > opts.max_polyline_points && opts.max_polyline_points >= 2) {
        const std::size_t stride = (b.points.size() + opts.max_polyline_points - 2) / (opts.max_polyline_points - 1);
        std::vector<BranchPoint> kept;
        for (std::size_t i = 0; i < b.points.size(); i += stride) kept.push_back(b.points[i]);
        if (kept.back().s != b.points.back().s) kept.push_back(b.points.back());
        b.points = std::move(kept);
    }

    if (b.center && c.corr != 0.0) {
        const double k = c.power - 2.0;
        double worst = 0.0;
        for (const auto& smp : b.path.samples) {
            if (std::abs(smp.x) > 1e3 * eps) break;
            const double w = std::pow(ax, -k) - k * c.corr * (smp.t - b.seed_time);
            if (!(w > 0.0)) break;
            const double pred = sgn * std::pow(w, -1.0 / k);
            worst = std::max(worst, std::abs(pred - smp.x) / std::abs(smp.x));
        }
        b.center_rate_error = worst;
    }
    return b;
}

}  // namespace

ManifoldBranch trace_manifold(const Side& side, BranchTag tag, const TraceOptions& opts) {
    if (!branch_exists(side, tag))
        throw RegimeError(std::string("branch ") + std::string(to_string(tag)) + " does not exist in the " +
                          std::string(to_string(side.exps.regime)) + " regime with K = " + std::to_string(side.K));
    const double eps = opts.epsilon.value_or(default_seed_epsilon(side, tag));
    ManifoldBranch b = trace_once(side, tag, eps, opts);
    if (opts.richardson && !b.center) {
        const ManifoldBranch half = trace_once(side, tag, 0.5 * eps, opts);
        const double span = std::min({b.total_arclength(), half.total_arclength(), 10.0});
        const double s0 = std::hypot(b.seed.x, b.seed.y);
        double worst = 0.0;
        for (int k = 1; k <= 10; ++k) {
            const double s = s0 + (span - s0) * k / 10.0;
            const PhasePoint p = b.at_arclength(s), q = half.at_arclength(s);
            worst = std::max(worst, std::hypot(p.x - q.x, p.y - q.y));
        }
        b.seed_discrepancy = worst;
    }
    return b;
}

PhasePoint ManifoldBranch::at_arclength(double s) const {
    const double s0 = std::hypot(seed.x, seed.y);
    if (s < 0.0) throw std::out_of_range("negative arclength");
    if (s <= s0) {
        const double f = s / s0;
        const double x = f * seed.x;
        return {x, f * seed.y, f > 0.0 ? seed_time_of(std::abs(x)) : -std::numeric_limits<double>::infinity()};
    }
    const double sl = s - s0;
    const auto& d = path.dense;
    auto it = std::partition_point(d.begin(), d.end(), [&](const DenseStep& st) { return st.eval_theta(1.0)[2] < sl; });
    if (it == d.end()) throw std::out_of_range("arclength beyond the traced branch");
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 80 && hi - lo > 1e-16; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (it->eval_theta(mid)[2] < sl)
            lo = mid;
        else
            hi = mid;
    }
    const double th = 0.5 * (lo + hi);
    const State st = it->eval_theta(th);
    return {st[0], st[1], it->t0 + th * it->h};
}

double ManifoldBranch::seed_time_of(double ax) const { return seed_curve_time(curve, ax); }

double ManifoldBranch::arclength_at_time(double t) const {
    const double s0 = std::hypot(seed.x, seed.y);
    const bool before_seed = is_unstable(tag) ? t < seed_time : t > seed_time;
    if (before_seed) {
        // Invert the seed-curve time relation for |x|, then scale along the seed chord.
        if (center) throw std::out_of_range("time before the seed on a center branch");
        const double ax = seed_curve_abscissa(curve, t);
        return s0 * ax / std::abs(seed.x);
    }
    return s0 + path.state_at(t)[2];
}

PhasePoint ManifoldBranch::at_time(double t) const {
    const State s = path.state_at(t);
    return {s[0], s[1], t};
}

double ManifoldBranch::parameter_at_time(double t) const {
    if (center) throw RegimeError("the solution parameter is undefined on a center branch");
    return std::exp(rate * t);
}

double ray_flow_rate(double m, double x, const Side& s) {
    const double c = m * m - (s.exps.n - 2.0) * m + s.exps.eta;
    return -x * c - s.K * s.g(x);
}

RayFlow ray_flow(double m, const Side& s) {
    RayFlow r;
    r.c = m * m - (s.exps.n - 2.0) * m + s.exps.eta;
    if (s.K < 0.0) {
        if (r.c <= 0.0) {
            r.kind = RayFlow::Kind::Outward;
        } else {
            r.kind = RayFlow::Kind::Threshold;
            r.threshold = solve_secant_slope(s.g, r.c / -s.K, 1.0);
        }
        return r;
    }
    if (r.c >= 0.0) {
        r.kind = RayFlow::Kind::Inward;
        return r;
    }
    throw DomainError("ray-flow threshold requested with K > 0 and m inside [kappa, n-2-kappa]");
}

void write_branch_csv(std::ostream& os, const ManifoldBranch& b) {
    os << "arclength,t,x,y,theta,E,marker\n";
    char buf[512];
    std::size_t im = 0;
    for (const auto& p : b.points) {
        while (im < b.y_axis_crossings.size() && b.y_axis_crossings[im].s <= p.s) {
            const auto& m = b.y_axis_crossings[im++];
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,,,y-axis-crossing-%d\n", m.s, m.t, m.x, m.y,
                          m.index);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,\n", p.s, p.t, p.x, p.y, p.theta, p.E);
        os << buf;
    }
}

}  // namespace fowlerkit
