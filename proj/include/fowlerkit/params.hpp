#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace fowlerkit {

/// Parameters of the radial problem
///   u'' + (n-1)/r u' + eta/r^2 u + f(u,r) = 0,
///   f = K1 r^delta1 u|u|^(q1-2) for r <= rho,  K2 r^delta2 u|u|^(q2-2) for r > rho.
struct ProblemConfig {
    int n = 3;
    double eta = 0.0;
    double K1 = -1.0;
    double K2 = 1.0;
    double q1 = 4.0;
    double q2 = 4.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double rho = 1.0;
};

/// Throws DomainError unless the standing assumptions hold.
void validate(const ProblemConfig& cfg);

/// A critical exponent that may be +infinity. Infinity is a distinct state,
/// never encoded as a large or special float.
class Threshold {
public:
    static Threshold finite(double v) { return Threshold(v); }
    static Threshold unbounded() { return Threshold(); }

    bool is_unbounded() const { return !value_.has_value(); }
    /// Throws std::bad_optional_access when unbounded.
    double value() const { return value_.value(); }

    bool exceeds(double l) const { return is_unbounded() || *value_ > l; }
    std::string to_string() const;

private:
    Threshold() = default;
    explicit Threshold(double v) : value_(v) {}
    std::optional<double> value_;
};

struct CriticalExponents {
    double kappa;        // smaller root of m^2 - (n-2)m + eta
    double serrin;       // 2_*(eta)
    double sobolev;      // 2^* = 2n/(n-2)
    Threshold hardy_upper;  // I(eta); unbounded when eta <= 0
};

/// Throws DomainError when n < 3 or eta >= (n-2)^2/4.
CriticalExponents critical_exponents(int n, double eta);

/// Stability type of the origin of the autonomous Fowler system.
enum class Regime {
    NodeUnstable,    // 2 < l < 2_*
    CenterUnstable,  // l = 2_*   (lambda = 0)
    Saddle,          // 2_* < l < I
    CenterStable,    // l = I     (Lambda = 0)
    NodeStable,      // l > I
};

std::string_view to_string(Regime r);

/// Relative tolerance used to decide l == 2_*, 2^*, I.
inline constexpr double kCriticalEqualityRtol = 1e-9;
/// Relative distance below which a critical value is reported as "critically close".
inline constexpr double kCriticalCloseRtol = 1e-6;

/// Derived exponents of one autonomous side.
struct ExponentSet {
    int n;
    double eta;
    double q;
    double delta;
    double l;
    double alpha;   // 2/(l-2)
    double gamma;   // alpha + 2 - n
    double kappa;
    double lambda;  // gamma + kappa
    double Lambda;  // alpha - kappa
    double serrin;
    double sobolev;
    Threshold hardy_upper;
    Regime regime;
    bool hamiltonian;  // l == 2^* within kCriticalEqualityRtol
    /// Names of critical values l lies within kCriticalCloseRtol of ("2_*", "2^*", "I").
    std::string critically_close;

    /// n - 2 - kappa, the decay exponent of fast-decay solutions.
    double mu() const { return n - 2 - kappa; }
    /// alpha*gamma + eta; negative exactly in the saddle regime.
    double linear_coupling() const { return alpha * gamma + eta; }
    bool origin_is_saddle() const { return regime == Regime::Saddle; }
};

double reduced_exponent(double q, double delta);

/// Throws DomainError when q <= 2, delta <= -2, eta violates the Hardy bound, or l <= 2.
ExponentSet derive_exponent_set(int n, double eta, double q, double delta);

}  // namespace fowlerkit
