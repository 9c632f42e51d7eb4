#pragma once

// Regression baselines for the sequences D_k / L_k, produced by the
// independent dense-scan oracle in tests/oracle/radial_oracle.hpp and frozen
// here. test_oracle re-derives them; test_shooting and the acceptance binary
// compare the library against them.

namespace fk_baseline {

// n = 5, eta = 0, q1 = q2 = 4, K1 = -1, K2 = 1, rho = 1.
inline constexpr double kRegularEta0[] = {1.5438055121639613, 1.9499168463314223, 2.1816130797062785};
// Same with eta = 1.
inline constexpr double kRegularEta1[] = {1.1536061835315836, 1.421039452045413, 1.5554051138367053};
// n = 5, eta = 0, q1 = q2 = 3, K1 = 1, K2 = -1, rho = 1.
inline constexpr double kFastDecay[] = {1.9131930220319386, 2.7543450897929613, 3.359752083330795};

inline constexpr double kRelTol = 1e-8;

}  // namespace fk_baseline
