#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "clsim/constants.hpp"

// First tier of the model: physical and cavity inputs, and the derived
// complex rates (complex detunings, absorption/dispersion, roundtrip
// phases and transmissions, cavity decay rates).
//
// Unit convention: every frequency, detuning and rate is angular (rad/s).
// Helpers that accept ordinary (Hz) frequencies convert with an explicit
// 2*pi and exist only at the construction boundary.

namespace clsim {

using cplx = std::complex<double>;

struct invalid_parameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Atomic-ensemble inputs. gamma is the homogeneous HWHM linewidth
/// (tabulated natural linewidths are FWHM = 2*gamma; see from_fwhm_hz).
struct PhysicalParams {
    double gamma{};     // rad/s, homogeneous HWHM
    double delta{};     // rad/s, ground-state hyperfine splitting
    double delta_s{};   // rad/s, signal detuning
    double delta_a{};   // rad/s, anti-Stokes detuning
    double d{};         // single-pass resonant optical depth
    double lambda_s{};  // m, signal carrier wavelength
    double ks_L_mod{};  // rad in [0, 2pi), signal carrier roundtrip phase mod 2pi
    double ka_L_mod{};  // rad in [0, 2pi), anti-Stokes carrier roundtrip phase mod 2pi

    void validate() const {
        if (!(gamma > 0.0)) throw invalid_parameter("gamma must be > 0");
        if (!(delta > 0.0)) throw invalid_parameter("delta must be > 0");
        if (!(d > 0.0)) throw invalid_parameter("optical depth d must be > 0");
        if (ks_L_mod < 0.0 || ks_L_mod >= two_pi)
            throw invalid_parameter("ks_L_mod outside [0, 2pi)");
        if (ka_L_mod < 0.0 || ka_L_mod >= two_pi)
            throw invalid_parameter("ka_L_mod outside [0, 2pi)");
    }
};

inline double wrap_2pi(double phase) {
    double w = std::fmod(phase, two_pi);
    if (w < 0.0) w += two_pi;
    return w;
}

/// Ring-cavity inputs. tau is stored redundantly and must equal L/c.
struct CavityParams {
    double r{};                     // input-output coupler amplitude reflectivity
    double L{};                     // m, roundtrip optical path
    double tau{};                   // s, roundtrip time, must equal L/c
    double extra_loss_amplitude{1.0};  // per-roundtrip amplitude transmission
                                       // from non-atomic losses, both fields

    double t_r() const { return std::sqrt(1.0 - r * r); }

    void validate() const {
        if (!(r > 0.0 && r < 1.0)) throw invalid_parameter("r must lie in (0,1)");
        if (!(L > 0.0)) throw invalid_parameter("L must be > 0");
        if (!(extra_loss_amplitude > 0.0 && extra_loss_amplitude <= 1.0))
            throw invalid_parameter("extra_loss_amplitude must lie in (0,1]");
        if (std::abs(tau - L / speed_of_light) > 1e-12 * tau)
            throw invalid_parameter("tau inconsistent with L/c");
    }

    static CavityParams from_length(double r, double L, double extra_loss_amplitude = 1.0) {
        return CavityParams{r, L, L / speed_of_light, extra_loss_amplitude};
    }
};

/// Gamma_x = gamma - i*Delta_x, the complex detuning.
inline cplx complex_detuning(double gamma, double delta_x) {
    if (!(gamma > 0.0)) throw invalid_parameter("gamma must be > 0");
    return {gamma, -delta_x};
}

/// kappa_s = d gamma / (tau Gamma_s);  kappa_a = d gamma / (tau Gamma_a_plus),
/// where Gamma_a_plus refers the anti-Stokes field to the populated transition.
struct AbsorptionRates {
    cplx kappa_s, kappa_a;
};

inline AbsorptionRates absorption_rates(const PhysicalParams& p, const CavityParams& c) {
    p.validate();
    c.validate();
    const cplx gamma_s = complex_detuning(p.gamma, p.delta_s);
    const cplx gamma_a_plus = complex_detuning(p.gamma, p.delta_a + p.delta);
    return {p.d * p.gamma / (c.tau * gamma_s), p.d * p.gamma / (c.tau * gamma_a_plus)};
}

/// All first-tier derived complex quantities for one configuration.
struct ComplexRates {
    cplx Gamma_s, Gamma_a, Gamma_a_plus;  // rad/s
    cplx kappa_s, kappa_a;                // 1/s
    double phi_s{}, phi_a{};              // rad, roundtrip phases
    double mu_s{}, mu_a{};                // roundtrip amplitude transmissions
    cplx gamma_cav_s, gamma_cav_a;        // 1/s, cavity decay rates
};

/// gamma_{s,a} = e^{-i k L} (1 - mu e^{i phi}) / (r tau).
inline cplx cavity_decay_rate(double mu, double phi, double kL, double r, double tau) {
    if (!(mu > 0.0 && mu < 1.0)) throw invalid_parameter("mu must lie in (0,1)");
    if (!(r > 0.0 && r < 1.0)) throw invalid_parameter("r must lie in (0,1)");
    return std::exp(cplx(0.0, -kL)) * (1.0 - mu * std::exp(cplx(0.0, phi))) / (r * tau);
}

/// Roundtrip phases derived from the carrier phase and the atomic
/// dispersion, phi = kL - Im{kappa} tau; roundtrip transmissions from the
/// atomic absorption and any extra intra-cavity loss.
inline ComplexRates derive_rates(const PhysicalParams& p, const CavityParams& c) {
    ComplexRates out;
    out.Gamma_s = complex_detuning(p.gamma, p.delta_s);
    out.Gamma_a = complex_detuning(p.gamma, p.delta_a);
    out.Gamma_a_plus = complex_detuning(p.gamma, p.delta_a + p.delta);
    const auto ab = absorption_rates(p, c);
    out.kappa_s = ab.kappa_s;
    out.kappa_a = ab.kappa_a;
    out.phi_s = p.ks_L_mod - ab.kappa_s.imag() * c.tau;
    out.phi_a = p.ka_L_mod - ab.kappa_a.imag() * c.tau;
    out.mu_s = c.r * std::exp(-ab.kappa_s.real() * c.tau) * c.extra_loss_amplitude;
    out.mu_a = c.r * std::exp(-ab.kappa_a.real() * c.tau) * c.extra_loss_amplitude;
    out.gamma_cav_s = cavity_decay_rate(out.mu_s, out.phi_s, p.ks_L_mod, c.r, c.tau);
    out.gamma_cav_a = cavity_decay_rate(out.mu_a, out.phi_a, p.ka_L_mod, c.r, c.tau);
    return out;
}

/// Same, but with the roundtrip phases pinned to explicit tuning targets
/// (e.g. phi_s = 0, phi_a = pi for a cavity locked to resonance with the
/// atoms present). The carrier phases in PhysicalParams are kept as the
/// explicit e^{+-ikL} factors.
inline ComplexRates derive_rates_with_phase_targets(const PhysicalParams& p,
                                                    const CavityParams& c,
                                                    double phi_s_target,
                                                    double phi_a_target) {
    ComplexRates out = derive_rates(p, c);
    out.phi_s = phi_s_target;
    out.phi_a = phi_a_target;
    out.gamma_cav_s = cavity_decay_rate(out.mu_s, out.phi_s, p.ks_L_mod, c.r, c.tau);
    out.gamma_cav_a = cavity_decay_rate(out.mu_a, out.phi_a, p.ka_L_mod, c.r, c.tau);
    return out;
}

/// FWHM linewidth in Hz -> angular HWHM in rad/s.
inline double gamma_from_fwhm_hz(double fwhm_hz) { return two_pi * fwhm_hz / 2.0; }

/// Ordinary frequency in Hz -> angular frequency in rad/s.
inline double angular_from_hz(double f_hz) { return two_pi * f_hz; }

} // namespace clsim
