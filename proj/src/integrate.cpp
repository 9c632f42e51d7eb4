#include "fowlerkit/integrate.hpp"

#include "fowlerkit/errors.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace fowlerkit {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

State axpy(const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms) {
    State r = y;
    for (int i = 0; i < 3; ++i) {
        double acc = 0.0;
        for (const auto& [c, k] : terms) acc += c * (*k)[i];
        r[i] += h * acc;
    }
    return r;
}

bool finite(const State& s) { return std::isfinite(s[0]) && std::isfinite(s[1]) && std::isfinite(s[2]); }

double planar_norm(const State& s) { return std::hypot(s[0], s[1]); }

double dist(const State& s, Vec2 p) { return std::hypot(s[0] - p.x, s[1] - p.y); }

int sign(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

struct Segment {
    const Side* side;
    int side_id;
    double t_end;
};

class Driver {
public:
    Driver(const EventSpec& ev, const IntegratorOptions& opts, Direction dir, Trajectory& out)
        : ev_(ev), opts_(opts), dir_(dir), dsign_(sign_of(dir)), out_(out) {
        armed_.resize(ev.targets.size());
        entered_.assign(ev.targets.size(), false);
        entry_t_.assign(ev.targets.size(), 0.0);
    }

    void start(double t, const State& y, int side_id) {
        out_.samples.push_back({t, y[0], y[1], y[2], side_id});
        for (size_t i = 0; i < ev_.targets.size(); ++i)
            armed_[i] = ev_.targets[i].arm_radius <= 0.0 || dist(y, ev_.targets[i].point) >= ev_.targets[i].arm_radius;
        xsign_ = sign(y[0]);
        ysign_ = sign(y[1]);
    }

    /// Advances from (t, y) to seg.t_end. Returns true when an event terminated the run.
    bool run(const Segment& seg, double& t, State& y) {
        side_ = seg.side;
        side_id_ = seg.side_id;
        State k1 = rhs(y);
        if (h_ == 0.0) h_ = initial_step(t, y, k1);

        while (dsign_ * (seg.t_end - t) > 0.0) {
            if (++steps_ > opts_.max_steps) throw StepFailure("step budget exhausted", t, y[0], y[1]);
            double h = dsign_ * std::min(std::abs(h_), opts_.h_max);
            bool last = false;
            if (dsign_ * (t + h - seg.t_end) >= 0.0) {
                h = seg.t_end - t;
                last = true;
            }
            if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t)))
                throw StepFailure("step size underflow", t, y[0], y[1]);

            const State k2 = rhs(axpy(y, h, {{a21, &k1}}));
            const State k3 = rhs(axpy(y, h, {{a31, &k1}, {a32, &k2}}));
            const State k4 = rhs(axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
            const State k5 = rhs(axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
            const State k6 = rhs(axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
            const State y1 = axpy(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
            const State k7 = rhs(y1);

            double err = 0.0;
            bool ok = finite(y1) && finite(k7);
            if (ok) {
                // The arclength channel is a quadrature and does not steer the step.
                for (int i = 0; i < 2; ++i) {
                    const double sc = opts_.atol + opts_.rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
                    const double e =
                        h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]) / sc;
                    err += e * e;
                }
                err = std::sqrt(err / 2.0);
                ok = std::isfinite(err);
            }
            if (!ok) {
                h_ = 0.2 * h;
                continue;
            }
            if (err > 1.0) {
                h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
                continue;
            }

            DenseStep ds;
            ds.t0 = t;
            ds.h = h;
            ds.side = side_id_;
            for (int i = 0; i < 3; ++i) {
                const double ydiff = y1[i] - y[i];
                const double bspl = h * k1[i] - ydiff;
                ds.rc[0][i] = y[i];
                ds.rc[1][i] = ydiff;
                ds.rc[2][i] = bspl;
                ds.rc[3][i] = ydiff - h * k7[i] - bspl;
                ds.rc[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
            }
            if (opts_.keep_dense) out_.dense.push_back(ds);

            const double fac = err == 0.0 ? 10.0 : std::min(10.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
            const double h_next = h * fac;

            if (process_step(ds)) {
                t = out_.samples.back().t;
                return true;
            }
            t = last ? seg.t_end : t + h;
            y = y1;
            k1 = k7;
            if (!last || std::abs(h_next) > std::abs(h)) h_ = h_next;
            if (check_dwell(t, y)) return true;
        }
        return false;
    }

    void finish_horizon(double t, const State& y) {
        out_.events.push_back({t, EventKind::Horizon, y[0], y[1], y[2], side_id_});
        out_.termination = EventKind::Horizon;
    }

    void record_switch(double t, const State& y) {
        out_.events.push_back({t, EventKind::Switch, y[0], y[1], y[2], side_id_});
    }

private:
    State rhs(const State& s) const {
        const Vec2 f = vector_field(s[0], s[1], *side_);
        return {f.x, f.y, dsign_ * std::hypot(f.x, f.y)};
    }

    double initial_step(double t, const State& y0, const State& f0) {
        auto scaled = [&](const State& v, const State& ref) {
            double s = 0.0;
            for (int i = 0; i < 2; ++i) {
                const double sc = opts_.atol + opts_.rtol * std::abs(ref[i]);
                s += (v[i] / sc) * (v[i] / sc);
            }
            return std::sqrt(s / 2.0);
        };
        const double dn0 = scaled(y0, y0), dn1 = scaled(f0, y0);
        double h0 = (dn0 < 1e-5 || dn1 < 1e-5) ? 1e-6 : 0.01 * dn0 / dn1;
        h0 = std::min(h0, opts_.h_max);
        const State y1 = axpy(y0, dsign_ * h0, {{1.0, &f0}});
        const State f1 = rhs(y1);
        State df{f1[0] - f0[0], f1[1] - f0[1], 0.0};
        const double dn2 = scaled(df, y0) / h0;
        const double m = std::max(dn1, dn2);
        const double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 0.2);
        (void)t;
        return dsign_ * std::min({100.0 * h0, h1, opts_.h_max});
    }

    /// Bisection in theta on a sign change of `f` between ta (f<=0 side) and tb.
    template <class F>
    double locate(const DenseStep& ds, double ta, double tb, F&& f) const {
        const bool fa_sign = f(ds.eval_theta(ta)) > 0.0;
        while (std::abs(ds.h) * (tb - ta) > ev_.event_tol) {
            const double tm = 0.5 * (ta + tb);
            if ((f(ds.eval_theta(tm)) > 0.0) == fa_sign)
                ta = tm;
            else
                tb = tm;
            if (tm == ta && tm == tb) break;
        }
        return tb;
    }

    bool process_step(const DenseStep& ds) {
        const int probes = std::max(ev_.crossing_probes, 0) + 1;
        std::vector<double> th(probes + 1);
        std::vector<State> st(probes + 1);
        for (int k = 0; k <= probes; ++k) {
            th[k] = static_cast<double>(k) / probes;
            st[k] = ds.eval_theta(th[k]);
        }

        double th_term = 2.0;
        EventKind term_kind = EventKind::Horizon;
        int term_target = -1;

        for (int k = 1; k <= probes && th_term > 1.0; ++k) {
            if (planar_norm(st[k]) > ev_.blowup_threshold) {
                th_term = locate(ds, th[k - 1], th[k],
                                 [&](const State& s) { return planar_norm(s) - ev_.blowup_threshold; });
                term_kind = EventKind::BlowUp;
            }
        }
        for (size_t i = 0; i < ev_.targets.size(); ++i) {
            const Target& tg = ev_.targets[i];
            if (tg.dwell > 0.0) {
                if (!armed_[i])
                    for (int k = 1; k <= probes; ++k)
                        if (dist(st[k], tg.point) >= tg.arm_radius) armed_[i] = true;
                continue;
            }
            bool armed = armed_[i];
            for (int k = 1; k <= probes; ++k) {
                if (th[k] >= th_term) break;
                const double d = dist(st[k], tg.point);
                if (!armed) {
                    if (d >= tg.arm_radius) armed = true;
                    continue;
                }
                if (d < tg.radius) {
                    const double thk = locate(ds, th[k - 1], th[k],
                                              [&](const State& s) { return tg.radius - dist(s, tg.point); });
                    if (thk < th_term) {
                        th_term = thk;
                        term_kind = EventKind::Converged;
                        term_target = static_cast<int>(i);
                    }
                    break;
                }
            }
            armed_[i] = armed;
        }
        if (ev_.arclength_budget) {
            const double budget = *ev_.arclength_budget;
            if (st[probes][2] >= budget) {
                const double thb = locate(ds, 0.0, 1.0, [&](const State& s) { return s[2] - budget; });
                if (thb < th_term) {
                    th_term = thb;
                    term_kind = EventKind::ArclengthBudget;
                }
            }
        }
        const bool terminated = th_term <= 1.0;

        // Axis crossings before the terminal point, in integration order.
        std::vector<double> cuts(th.begin(), th.end());
        if (terminated) {
            while (!cuts.empty() && cuts.back() >= th_term) cuts.pop_back();
            cuts.push_back(th_term);
        }
        std::vector<std::pair<double, EventKind>> crossings;
        auto scan = [&](int comp, int& last_sign, EventKind kind) {
            State prev = ds.eval_theta(cuts[0]);
            for (size_t k = 1; k < cuts.size(); ++k) {
                const State cur = (cuts[k] == th_term) ? ds.eval_theta(th_term) : st[k];
                const int s = sign(cur[comp]);
                if (s != 0) {
                    if (last_sign != 0 && s != last_sign) {
                        double ta = cuts[k - 1];
                        // A zero probe value sits exactly at the root.
                        if (prev[comp] != 0.0)
                            ta = locate(ds, cuts[k - 1], cuts[k], [&](const State& z) { return s * z[comp]; });
                        crossings.emplace_back(ta, kind);
                    }
                    last_sign = s;
                }
                prev = cur;
            }
        };
        if (ev_.y_axis) scan(0, xsign_, EventKind::YAxisCrossing);
        if (ev_.x_axis) scan(1, ysign_, EventKind::XAxisCrossing);
        std::sort(crossings.begin(), crossings.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [thc, kind] : crossings) {
            const State s = ds.eval_theta(thc);
            Event e{ds.t0 + thc * ds.h, kind, s[0], s[1], s[2], side_id_};
            const int other = kind == EventKind::YAxisCrossing ? 1 : 0;
            e.degenerate = std::abs(s[other]) <= ev_.zero_floor;
            out_.events.push_back(e);
        }

        const int m = std::max(opts_.samples_per_step, 1);
        for (int j = 1; j < m; ++j) {
            const double thj = static_cast<double>(j) / m;
            if (terminated && thj >= th_term) break;
            const State s = ds.eval_theta(thj);
            out_.samples.push_back({ds.t0 + thj * ds.h, s[0], s[1], s[2], side_id_});
        }
        if (terminated) {
            const State s = ds.eval_theta(th_term);
            const double te = ds.t0 + th_term * ds.h;
            out_.samples.push_back({te, s[0], s[1], s[2], side_id_});
            Event e{te, term_kind, s[0], s[1], s[2], side_id_};
            e.target = term_target;
            out_.events.push_back(e);
            out_.termination = term_kind;
            out_.target = term_target;
            return true;
        }
        const State& s = st[probes];
        out_.samples.push_back({ds.t1(), s[0], s[1], s[2], side_id_});
        return false;
    }

    bool check_dwell(double t, const State& y) {
        for (size_t i = 0; i < ev_.targets.size(); ++i) {
            const Target& tg = ev_.targets[i];
            if (tg.dwell <= 0.0 || !armed_[i]) continue;
            if (dist(y, tg.point) < tg.radius) {
                if (!entered_[i]) {
                    entered_[i] = true;
                    entry_t_[i] = t;
                } else if (std::abs(t - entry_t_[i]) >= tg.dwell) {
                    Event e{t, EventKind::Converged, y[0], y[1], y[2], side_id_};
                    e.target = static_cast<int>(i);
                    out_.events.push_back(e);
                    out_.termination = EventKind::Converged;
                    out_.target = static_cast<int>(i);
                    return true;
                }
            } else {
                entered_[i] = false;
            }
        }
        return false;
    }

    const EventSpec& ev_;
    const IntegratorOptions& opts_;
    Direction dir_;
    double dsign_;
    Trajectory& out_;
    const Side* side_ = nullptr;
    int side_id_ = 0;
    double h_ = 0.0;
    long steps_ = 0;
    int xsign_ = 0, ysign_ = 0;
    std::vector<bool> armed_;
    std::vector<bool> entered_;
    std::vector<double> entry_t_;
};

void check_inputs(const PhasePoint& start, double horizon) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be positive and finite");
    if (!std::isfinite(start.x) || !std::isfinite(start.y) || !std::isfinite(start.t))
        throw DomainError("initial point must be finite");
}

}  // namespace

bool DenseStep::contains(double t) const {
    return std::min(t0, t1()) <= t && t <= std::max(t0, t1());
}

State DenseStep::eval_theta(double th) const {
    const double th1 = 1.0 - th;
    State r;
    for (int i = 0; i < 3; ++i)
        r[i] = rc[0][i] + th * (rc[1][i] + th1 * (rc[2][i] + th * (rc[3][i] + th1 * rc[4][i])));
    return r;
}

State DenseStep::eval(double t) const { return eval_theta((t - t0) / h); }

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::YAxisCrossing: return "y-axis-crossing";
        case EventKind::XAxisCrossing: return "x-axis-crossing";
        case EventKind::Switch: return "switch";
        case EventKind::BlowUp: return "blow-up";
        case EventKind::Converged: return "converged";
        case EventKind::ArclengthBudget: return "arclength-budget";
        case EventKind::Horizon: return "horizon";
    }
    return "?";
}

double Trajectory::end_time() const {
    if (!events.empty() && events.back().kind == termination) return events.back().t;
    return samples.back().t;
}

State Trajectory::state_at(double t) const {
    if (dense.empty()) throw std::out_of_range("trajectory carries no dense output");
    const bool fwd = dense.front().h > 0.0;
    // Steps are ordered along the integration direction.
    auto it = std::partition_point(dense.begin(), dense.end(),
                                   [&](const DenseStep& d) { return fwd ? d.t1() < t : d.t1() > t; });
    if (it == dense.end() || !it->contains(t)) throw std::out_of_range("time outside the integrated span");
    return it->eval(t);
}

Trajectory integrate(const Side& side, const PhasePoint& start, Direction dir, double horizon, const EventSpec& events,
                     const IntegratorOptions& opts) {
    check_inputs(start, horizon);
    Trajectory out;
    out.direction = dir;
    Driver drv(events, opts, dir, out);
    State y{start.x, start.y, 0.0};
    double t = start.t;
    drv.start(t, y, 0);
    const Segment seg{&side, 0, start.t + sign_of(dir) * horizon};
    if (!drv.run(seg, t, y)) drv.finish_horizon(t, y);
    return out;
}

Trajectory integrate(const PiecewiseSystem& sys, const PhasePoint& start, Direction dir, double horizon,
                     const EventSpec& events, const IntegratorOptions& opts) {
    check_inputs(start, horizon);
    Trajectory out;
    out.direction = dir;
    Driver drv(events, opts, dir, out);
    const double t_end = start.t + sign_of(dir) * horizon;
    const bool fwd = dir == Direction::Forward;

    std::vector<Segment> segs;
    if (fwd) {
        if (start.t < 0.0 && t_end > 0.0) {
            segs.push_back({&sys.inner, 1, 0.0});
            segs.push_back({&sys.outer, 2, t_end});
        } else {
            segs.push_back(start.t < 0.0 ? Segment{&sys.inner, 1, t_end} : Segment{&sys.outer, 2, t_end});
        }
    } else {
        if (start.t > 0.0 && t_end < 0.0) {
            segs.push_back({&sys.outer, 2, 0.0});
            segs.push_back({&sys.inner, 1, t_end});
        } else {
            segs.push_back(start.t > 0.0 ? Segment{&sys.outer, 2, t_end} : Segment{&sys.inner, 1, t_end});
        }
    }

    State y{start.x, start.y, 0.0};
    double t = start.t;
    drv.start(t, y, segs.front().side_id);
    for (size_t i = 0; i < segs.size(); ++i) {
        if (drv.run(segs[i], t, y)) return out;
        if (i + 1 < segs.size()) drv.record_switch(t, y);
    }
    drv.finish_horizon(t, y);
    return out;
}

CrossingCount count_y_axis_crossings(const Trajectory& traj, double t_from, double t_to) {
    CrossingCount c;
    const double lo = std::min(t_from, t_to), hi = std::max(t_from, t_to);
    for (const auto& e : traj.events) {
        if (e.kind != EventKind::YAxisCrossing || e.t < lo || e.t > hi) continue;
        ++c.count;
        c.degenerate = c.degenerate || e.degenerate;
    }
    return c;
}

namespace {

struct CsvRow {
    double t, x, y;
    int side;
    std::string_view event;
};

void emit_csv(std::ostream& os, const Trajectory& traj, double rho, const std::function<const Side&(int)>& side_of) {
    std::vector<CsvRow> rows;
    rows.reserve(traj.samples.size() + traj.events.size());
    size_t ie = 0;
    const double dsign = sign_of(traj.direction);
    for (const auto& smp : traj.samples) {
        while (ie < traj.events.size() && dsign * (traj.events[ie].t - smp.t) <= 0.0) {
            const Event& e = traj.events[ie++];
            rows.push_back({e.t, e.x, e.y, e.side, to_string(e.kind)});
        }
        rows.push_back({smp.t, smp.x, smp.y, smp.side, ""});
    }
    for (; ie < traj.events.size(); ++ie) {
        const Event& e = traj.events[ie];
        rows.push_back({e.t, e.x, e.y, e.side, to_string(e.kind)});
    }

    os << "t,r,x,y,u,du,E,side,event\n";
    char buf[512];
    for (const auto& row : rows) {
        const Side& sd = side_of(row.side);
        const double alpha = sd.exps.alpha;
        const double u = row.x * std::exp(-alpha * row.t);
        const double du = row.y * std::exp(-(alpha + 1.0) * row.t) / rho;
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,", row.t, rho * std::exp(row.t),
                      row.x, row.y, u, du, energy(row.x, row.y, sd), row.side);
        os << buf << row.event << '\n';
    }
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const Side& side) {
    emit_csv(os, traj, 1.0, [&](int) -> const Side& { return side; });
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const PiecewiseSystem& sys) {
    emit_csv(os, traj, sys.rho, [&](int id) -> const Side& { return id == 2 ? sys.outer : sys.inner; });
}

}  // namespace fowlerkit
