#pragma once

#include "fowlerkit/fowler.hpp"

#include <array>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fowlerkit {

/// (x, y, s): phase point plus arclength accumulated along the path.
using State = std::array<double, 3>;

/// One accepted Dormand-Prince step with its 4th-order continuous extension.
struct DenseStep {
    double t0 = 0.0;
    double h = 0.0;
    std::array<State, 5> rc{};
    int side = 0;

    double t1() const { return t0 + h; }
    bool contains(double t) const;
    State eval(double t) const;
    State eval_theta(double theta) const;
};

enum class Direction { Forward, Backward };

inline double sign_of(Direction d) { return d == Direction::Forward ? 1.0 : -1.0; }

enum class EventKind {
    YAxisCrossing,  // x = 0
    XAxisCrossing,  // y = 0
    Switch,         // t = 0 in a switched system
    BlowUp,
    Converged,
    ArclengthBudget,
    Horizon,
};

std::string_view to_string(EventKind k);

struct IntegratorOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_max = 1.0;
    long max_steps = 20'000'000;
    /// Extra dense-output points recorded between accepted steps.
    int samples_per_step = 1;
    bool keep_dense = false;
};

/// A point the trajectory may converge to. `dwell == 0` makes it a capture
/// ball: the first entry terminates. `arm_radius > 0` keeps the target
/// inactive until the path has been at least that far from it.
struct Target {
    Vec2 point;
    double radius = 1e-9;
    double dwell = 1.0;
    double arm_radius = 0.0;
    std::string label;
};

struct EventSpec {
    bool y_axis = true;   // record x = 0 crossings
    bool x_axis = false;  // record y = 0 crossings
    double zero_floor = 1e-8;
    double blowup_threshold = 1e8;
    std::vector<Target> targets;
    std::optional<double> arclength_budget;
    double event_tol = 1e-10;
    int crossing_probes = 4;
};

struct Sample {
    double t, x, y, s;
    int side;
};

struct Event {
    double t;
    EventKind kind;
    double x, y, s;
    int side;
    bool degenerate = false;  // axis crossing with |other coordinate| <= zero_floor
    int target = -1;
};

struct Trajectory {
    std::vector<Sample> samples;
    std::vector<Event> events;
    EventKind termination = EventKind::Horizon;
    int target = -1;  // index into EventSpec::targets on Converged
    Direction direction = Direction::Forward;
    std::vector<DenseStep> dense;  // filled when IntegratorOptions::keep_dense

    const Sample& front() const { return samples.front(); }
    const Sample& back() const { return samples.back(); }
    /// Time of the terminating event (or of the last sample on Horizon).
    double end_time() const;
    /// Dense lookup; requires keep_dense. Throws std::out_of_range outside the span.
    State state_at(double t) const;
};

/// Integrates one autonomous side from `start` for |Delta t| = horizon.
/// Throws StepFailure on step-size underflow or non-finite state.
Trajectory integrate(const Side& side, const PhasePoint& start, Direction dir, double horizon,
                     const EventSpec& events = {}, const IntegratorOptions& opts = {});

/// Integrates the switched system; steps never straddle t = 0 and the switch
/// is recorded as an event. The inner side owns t = 0 when arriving from t < 0.
Trajectory integrate(const PiecewiseSystem& sys, const PhasePoint& start, Direction dir, double horizon,
                     const EventSpec& events = {}, const IntegratorOptions& opts = {});

/// Number of recorded x = 0 crossings, plus whether any of them is degenerate.
struct CrossingCount {
    int count = 0;
    bool degenerate = false;
};
CrossingCount count_y_axis_crossings(const Trajectory& traj, double t_from = -std::numeric_limits<double>::infinity(),
                                     double t_to = std::numeric_limits<double>::infinity());

/// CSV with columns t,r,x,y,u,du,E,side,event: one row per sample plus one
/// row per event, merged in integration order. Radii and u' are physical
/// (switch radius mapped back) for the switched system.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const Side& side);
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const PiecewiseSystem& sys);

}  // namespace fowlerkit
