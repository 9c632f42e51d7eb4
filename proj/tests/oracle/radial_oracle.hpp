#pragma once

// Independent route to the sequences D_k / L_k: the physical radial equation
//   u'' + (n-1)/r u' + eta u / r^2 + K(r) r^delta |u|^(q-2) u = 0
// integrated with Boost.Odeint in s = ln r, state (u, p = r u'), started
// from a two-term power series (near r = 0 for D, far out for L), followed
// by a dense parameter scan on a fixed grid and bisection on the zero count.
// Nothing here touches the Fowler variables or the library's integrator.

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fk_oracle {

struct Problem {
    int n = 3;
    double eta = 0.0;
    double K1 = -1.0, K2 = 1.0;
    double q1 = 4.0, q2 = 4.0;
    double delta1 = 0.0, delta2 = 0.0;
    double rho = 1.0;
};

struct Settings {
    double rtol = 1e-13;
    double s_span = 14.0;        // integrate over ln r in [ln rho - s_span, ln rho + s_span]
    double sample_ds = 2e-3;     // sign changes are looked for on this grid
    double blowup = 1e12;        // |u| r^alpha beyond this stops the solve
    double scan_step = 1e-3;     // dense parameter scan
    double scan_max = 6.0;
    double bisect_rel = 1e-15;
};

inline double kappa_of(int n, double eta) {
    const double m = n - 2.0;
    return 0.5 * (m - std::sqrt(m * m - 4.0 * eta));
}

using State = std::array<double, 2>;

struct Rhs {
    int n;
    double eta, K, q, delta;
    void operator()(const State& z, State& dz, double s) const {
        const double u = z[0], p = z[1];
        dz[0] = p;
        dz[1] = -(n - 2.0) * p - eta * u - K * std::exp((2.0 + delta) * s) * u * std::pow(std::abs(u), q - 2.0);
    }
};

struct BlowUp {};

/// Zeros of u over the integration range; blow-up counts what was seen.
inline int count_zeros(const Problem& pb, State z, double s0, double s1, const Settings& st) {
    namespace ode = boost::numeric::odeint;
    using Stepper = ode::runge_kutta_dopri5<State>;
    const double sr = std::log(pb.rho);
    const double dir = s1 > s0 ? 1.0 : -1.0;
    int zeros = 0;
    double last = z[0];
    auto run = [&](double a, double b, double K, double q, double delta) {
        if (dir * (b - a) <= 0.0) return;
        const Rhs rhs{pb.n, pb.eta, K, q, delta};
        const double alpha = 2.0 * (2.0 + delta) / (2.0 * (q + delta) - 2.0 * (2.0 + delta));
        auto obs = [&](const State& x, double s) {
            if (x[0] != 0.0 && last != 0.0 && (x[0] > 0.0) != (last > 0.0)) ++zeros;
            if (x[0] != 0.0) last = x[0];
            if (std::abs(x[0]) * std::exp(alpha * s) > st.blowup || !std::isfinite(x[0])) throw BlowUp{};
        };
        const int steps = static_cast<int>(std::ceil(std::abs(b - a) / st.sample_ds));
        const double ds = (b - a) / steps;
        auto stepper = ode::make_dense_output(1e-300, st.rtol, Stepper());
        stepper.initialize(z, a, ds);
        State x;
        for (int i = 1; i <= steps; ++i) {
            const double si = i == steps ? b : a + i * ds;
            while (dir * (stepper.current_time() - si) < 0.0) stepper.do_step(rhs);
            stepper.calc_state(si, x);
            obs(x, si);
        }
        z = x;
    };
    try {
        if (dir > 0) {
            run(s0, std::min(sr, s1), pb.K1, pb.q1, pb.delta1);
            run(std::max(sr, s0), s1, pb.K2, pb.q2, pb.delta2);
        } else {
            run(s0, std::max(sr, s1), pb.K2, pb.q2, pb.delta2);
            run(std::min(sr, s0), s1, pb.K1, pb.q1, pb.delta1);
        }
    } catch (const BlowUp&) {
    }
    return zeros;
}

/// Two-term expansion c r^a + A r^b of the branch through a power r^a, where
/// b = a + 2 + delta + a (q - 2) comes from balancing the nonlinear term.
inline State series_start(int n, double eta, double K, double q, double delta, double c, double a, double r) {
    const double b = 2.0 + delta + a * (q - 1.0);
    const double A = -K * c * std::pow(std::abs(c), q - 2.0) / (b * b + (n - 2.0) * b + eta);
    const double u = c * std::pow(r, a) + A * std::pow(r, b);
    const double p = c * a * std::pow(r, a) + A * b * std::pow(r, b);
    return {u, p};
}

/// Regular solution u ~ d r^-kappa at the origin.
inline int zeros_regular(const Problem& pb, double d, const Settings& st) {
    const double k = kappa_of(pb.n, pb.eta);
    const double s0 = std::log(pb.rho) - st.s_span;
    const State z = series_start(pb.n, pb.eta, pb.K1, pb.q1, pb.delta1, d, -k, std::exp(s0));
    return count_zeros(pb, z, s0, std::log(pb.rho) + st.s_span, st);
}

/// Fast-decay solution u ~ L r^-(n-2-kappa) at infinity.
inline int zeros_fast_decay(const Problem& pb, double L, const Settings& st) {
    const double mu = pb.n - 2.0 - kappa_of(pb.n, pb.eta);
    const double s0 = std::log(pb.rho) + st.s_span;
    const State z = series_start(pb.n, pb.eta, pb.K2, pb.q2, pb.delta2, L, -mu, std::exp(s0));
    return count_zeros(pb, z, s0, std::log(pb.rho) - st.s_span, st);
}

/// Values p_0 < ... < p_kmax at which the zero count first exceeds k.
template <class ZeroCount>
std::vector<double> sequence(ZeroCount zeros, int k_max, const Settings& st) {
    std::vector<double> out;
    double prev = st.scan_step;
    int prev_z = zeros(prev);
    for (double p = 2.0 * st.scan_step; p <= st.scan_max && static_cast<int>(out.size()) <= k_max;
         p += st.scan_step) {
        const int z = zeros(p);
        while (z > prev_z && static_cast<int>(out.size()) <= k_max) {
            const int k = static_cast<int>(out.size());
            if (z <= k) break;
            // First parameter with more than k zeros lies in (prev, p].
            double lo = prev, hi = p;
            while (hi - lo > st.bisect_rel * hi) {
                const double mid = 0.5 * (lo + hi);
                (zeros(mid) > k ? hi : lo) = mid;
            }
            out.push_back(0.5 * (lo + hi));
        }
        prev = p;
        prev_z = z;
    }
    return out;
}

inline std::vector<double> regular_sequence(const Problem& pb, int k_max, const Settings& st = {}) {
    return sequence([&](double d) { return zeros_regular(pb, d, st); }, k_max, st);
}

inline std::vector<double> fast_decay_sequence(const Problem& pb, int k_max, const Settings& st = {}) {
    return sequence([&](double L) { return zeros_fast_decay(pb, L, st); }, k_max, st);
}

}  // namespace fk_oracle
