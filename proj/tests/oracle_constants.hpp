#pragma once

// Frozen regression constants, computed once with an independent
// arbitrary-precision tool (25+ digits) and hard-coded here.  Tests compare
// the library against these numbers; none of them is produced by the library
// itself.

namespace oracle {

// Riemann zeta values.
inline constexpr double kZeta15 = 2.6123753486854883434;   // zeta(3/2)
inline constexpr double kZeta25 = 1.3414872572509171798;   // zeta(5/2)
inline constexpr double kZeta05 = -1.4603545088095868129;  // zeta(1/2)
inline constexpr double kZetaM05 = -0.2078862249773545661; // zeta(-1/2)
inline constexpr double kZeta3 = 1.2020569031595942854;    // zeta(3)
inline constexpr double kZeta2 = 1.6449340668482264365;    // pi^2/6

// Mean gap for tail exponent 1.5: zeta(1.5)/zeta(2.5).
inline constexpr double kMean15 = 1.9473724663169567001;

// Exact free energy F(h) of the homogeneous model, from the characteristic
// equation solved with arbitrary-precision polylogarithms.
// (exponent, h) -> F
inline constexpr double kF_a05_h1em3 = 5.4286358781318231e-7;
inline constexpr double kF_a05_h1em4 = 5.4305551677955252e-9;
inline constexpr double kF_a05_h1em2 = 5.409507292354492e-5;
inline constexpr double kF_a05_h2 = 1.1653630458968325;
inline constexpr double kF_a15_h1em3 = 5.2403112122069687e-4;
inline constexpr double kF_a15_h1em2 = 5.4668480965170739e-3;
inline constexpr double kF_a15_h01 = 6.1658095690155935e-2;
inline constexpr double kF_a15_h05 = 0.36484148969813748;
inline constexpr double kF_a15_h5 = 4.707820384195707;

// Hand enumeration of the N=2 instance: exponent 0.5, h=0.3, beta=1,
// disorder values (-1, 0) at sites 1, 2.
inline constexpr double kBruteN2LogZFree = -0.12771652927114928368;
inline constexpr double kBruteN2LogZPinned = -1.2697224748248867308;

}  // namespace oracle
