#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

// Scalar auxiliary functions of the dimensionless coupling strength zeta
// that appear in the closed-form photon numbers and autocorrelations:
//
//   E(z)      = (1 - e^-z)/z
//   Sigma(z)  = 2 e^-z [sinh(z) - z]
//   g(z)      = (1 - e^-z E)/z
//   h(z)      = 4(1-E)/z^3 - 2E/z^2 + E^4 + Sigma (2zE - 1)/z^4
//   h'(z)     = E^4 + E Sigma / z^3
//
// plus the quartic-trace factor
//
//   t4(z)     = [4z(1-E) - 2z^2 E - Sigma] / z^4
//
// which multiplies |r chi C_s C_a x|^4 in the storage-field intensity
// correlations. The closed forms cancel catastrophically near z = 0 (t4 is
// the worst: three O(z^2) terms conspiring to an O(z^4) residue), so below
// |z| < 0.1 every function switches to a truncated Taylor series whose
// coefficients were generated symbolically and frozen here. At the
// crossover both branches agree to better than 1e-12 relative.

namespace clsim::special {

namespace detail {

inline constexpr double series_threshold = 0.1;

template <std::size_t N>
double horner(const std::array<double, N>& c, double z) {
    double acc = c[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) acc = acc * z + c[i];
    return acc;
}

// E(z) = sum (-z)^k / (k+1)!
inline constexpr std::array<double, 14> cE = {
    1.00000000000000000e+00, -5.00000000000000000e-01, 1.66666666666666657e-01,
    -4.16666666666666644e-02, 8.33333333333333322e-03, -1.38888888888888894e-03,
    1.98412698412698413e-04, -2.48015873015873016e-05, 2.75573192239858925e-06,
    -2.75573192239858883e-07, 2.50521083854417202e-08, -2.08767569878681002e-09,
    1.60590438368216133e-10, -1.14707455977297245e-11};

// (1-E)/z
inline constexpr std::array<double, 14> cOmE = {
    5.00000000000000000e-01, -1.66666666666666657e-01, 4.16666666666666644e-02,
    -8.33333333333333322e-03, 1.38888888888888894e-03, -1.98412698412698413e-04,
    2.48015873015873016e-05, -2.75573192239858925e-06, 2.75573192239858883e-07,
    -2.50521083854417202e-08, 2.08767569878681002e-09, -1.60590438368216133e-10,
    1.14707455977297245e-11, -7.64716373181981641e-13};

// Sigma(z)/z^3
inline constexpr std::array<double, 14> cSigma3 = {
    3.33333333333333315e-01, -3.33333333333333315e-01, 1.83333333333333320e-01,
    -7.22222222222222154e-02, 2.26190476190476185e-02, -5.95238095238095205e-03,
    1.36133156966490305e-03, -2.76675485008818361e-04, 5.07555715889049214e-05,
    -8.50101544545989021e-06, 1.31138151971485307e-06, -1.87615514996467388e-07,
    2.50352846252317155e-08, -3.13074883180703284e-09};

inline constexpr std::array<double, 14> cg = {
    1.50000000000000000e+00, -1.16666666666666674e+00, 6.25000000000000000e-01,
    -2.58333333333333359e-01, 8.74999999999999944e-02, -2.51984126984126991e-02,
    6.32440476190476199e-03, -1.40817901234567902e-03, 2.81911375661375683e-04,
    -5.12816658649991987e-05, 8.54903198653198624e-06, -1.31539628067405844e-06,
    1.87925225127606075e-07, -2.50574614000539939e-08};

inline constexpr std::array<double, 14> ch = {
    1.83333333333333326e+00, -3.13333333333333330e+00, 3.03888888888888875e+00,
    -2.15396825396825387e+00, 1.23005952380952377e+00, -5.95568783068783025e-01,
    2.52181437389770724e-01, -9.53280824114157432e-02, 3.26439577654855442e-02,
    -1.02373488137377025e-02, 2.96510381703834081e-03, -7.98535807960411097e-04,
    2.01077600191976847e-04, -4.75636371478215143e-05};

inline constexpr std::array<double, 14> chp = {
    1.33333333333333326e+00, -2.50000000000000000e+00, 2.57222222222222241e+00,
    -1.89999999999999991e+00, 1.11845238095238098e+00, -5.54067460317460347e-01,
    2.38735670194003519e-01, -9.14550264550264558e-02, 3.16371385815830269e-02,
    -9.99842171717171650e-03, 2.91287099694837771e-03, -7.87938857879334049e-04,
    1.99070309757727094e-04, -4.72068297434120824e-05};

inline constexpr std::array<double, 14> ct4 = {
    1.66666666666666657e-01, -1.33333333333333331e-01, 6.11111111111111091e-02,
    -2.06349206349206345e-02, 5.65476190476190462e-03, -1.32275132275132268e-03,
    2.72266313932980589e-04, -5.03046336379669705e-05, 8.45926193148415357e-06,
    -1.30784853007075231e-06, 1.87340217102121867e-07, -2.50154019995289853e-08,
    3.12941057815396443e-09, -3.68323391977297997e-10};

} // namespace detail

/// E(z) = (1 - e^-z)/z, the pulse-integrated decay factor.
inline double aux_E(double z) {
    if (std::abs(z) < detail::series_threshold) return detail::horner(detail::cE, z);
    return -std::expm1(-z) / z;
}

/// (1 - E(z))/z, the storage-noise integral; -> 1/2 as z -> 0.
inline double one_minus_E_over_zeta(double z) {
    if (std::abs(z) < detail::series_threshold) return detail::horner(detail::cOmE, z);
    return (1.0 - aux_E(z)) / z;
}

/// Sigma(z) = 2 e^-z [sinh(z) - z]; leading order z^3/3.
inline double aux_Sigma(double z) {
    if (std::abs(z) < detail::series_threshold)
        return z * z * z * detail::horner(detail::cSigma3, z);
    return 2.0 * std::exp(-z) * (std::sinh(z) - z);
}

/// g(z) = (1 - e^-z E)/z, the retrieval-noise integral; g(0) = 3/2.
inline double aux_g(double z) {
    if (std::abs(z) < detail::series_threshold) return detail::horner(detail::cg, z);
    return (1.0 - std::exp(-z) * aux_E(z)) / z;
}

/// h(z), retrieval-noise fourth-moment combination; h(0) = 11/6.
inline double aux_h(double z) {
    if (std::abs(z) < detail::series_threshold) return detail::horner(detail::ch, z);
    const double E = aux_E(z), S = aux_Sigma(z);
    const double z2 = z * z;
    return 4.0 * (1.0 - E) / (z2 * z) - 2.0 * E / z2 + E * E * E * E +
           S * (2.0 * z * E - 1.0) / (z2 * z2);
}

/// h'(z), signal-noise cross fourth moment; h'(0) = 4/3.
inline double aux_hprime(double z) {
    if (std::abs(z) < detail::series_threshold) return detail::horner(detail::chp, z);
    const double E = aux_E(z), S = aux_Sigma(z);
    return E * E * E * E + E * S / (z * z * z);
}

/// t4(z) = [4z(1-E) - 2z^2 E - Sigma]/z^4; t4(0) = 1/6.
/// tr{(M_FWM M_FWM^+)^2} = |prefactor|^4 t4(zeta).
inline double aux_trace4(double z) {
    if (std::abs(z) < detail::series_threshold) return detail::horner(detail::ct4, z);
    const double E = aux_E(z), S = aux_Sigma(z);
    const double z2 = z * z;
    return (4.0 * z * (1.0 - E) - 2.0 * z2 * E - S) / (z2 * z2);
}

/// Complex generalization (1 - e^-w)/w, used for cumulative mode integrals
/// such as psi(1) with a flat input mode.
inline std::complex<double> aux_E_complex(std::complex<double> w) {
    if (std::abs(w) < detail::series_threshold) {
        std::complex<double> acc{detail::cE[13], 0.0};
        for (std::size_t i = 13; i-- > 0;) acc = acc * w + detail::cE[i];
        return acc;
    }
    return (1.0 - std::exp(-w)) / w;
}

} // namespace clsim::special
