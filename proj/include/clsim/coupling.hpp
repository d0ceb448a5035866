#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "clsim/params.hpp"

// Second tier: cavity transmission chi, cooperativity, the memory coupling
// parameters C_s, C_a, the noise suppression factor x, the spin-wave
// evolution coefficient f and its decay rate zeta, and the remaining
// drive coefficients of the epsilon-domain system.

namespace clsim {

struct degenerate_cavity_error : std::domain_error {
    using std::domain_error::domain_error;
};

struct model_inconsistency_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Control-pulse description. The closed forms depend only on the
/// integrated Rabi-frequency-squared W; the envelope shape matters only
/// for the time-domain oracle and the epsilon(t) map.
struct ControlParams {
    double W{};  // rad^2, integral of |Omega(t)|^2 dt

    void validate() const {
        if (!(W >= 0.0)) throw invalid_parameter("W must be >= 0");
    }
};

/// x = (1 - mu_s e^{i phi_s}) / (1 - mu_a e^{-i phi_a}).
inline cplx noise_suppression_factor(double mu_s, double phi_s, double mu_a, double phi_a) {
    const cplx den = 1.0 - mu_a * std::exp(cplx(0.0, -phi_a));
    if (std::abs(den) < 1e-15)
        throw degenerate_cavity_error("anti-Stokes cavity response is degenerate");
    return (1.0 - mu_s * std::exp(cplx(0.0, phi_s))) / den;
}

/// Cooperativity of the cavity for the signal field, C = d/(1 - mu_s e^{i phi_s}).
inline cplx cooperativity(double d, double mu_s, double phi_s) {
    if (!(d > 0.0)) throw invalid_parameter("optical depth d must be > 0");
    const cplx den = 1.0 - mu_s * std::exp(cplx(0.0, phi_s));
    if (std::abs(den) < 1e-15)
        throw degenerate_cavity_error("signal cavity response is degenerate");
    return d / den;
}

/// C_{s,a} = sqrt(C gamma W) / Gamma_{s,a}, principal branch.
/// Re{C} > 0 is required so the branch cut is never crossed as W varies.
inline std::pair<cplx, cplx> coupling_parameters(cplx coop, cplx Gamma_s, cplx Gamma_a,
                                                 double gamma, double W) {
    if (!(W >= 0.0)) throw invalid_parameter("W must be >= 0");
    if (!(coop.real() > 0.0))
        throw model_inconsistency_error("cooperativity has non-positive real part; "
                                        "principal-branch sqrt not applicable");
    const cplx root = std::sqrt(coop * gamma * W);
    return {root / Gamma_s, root / Gamma_a};
}

/// Everything the response formulas need for one (parameters, W) point.
struct DerivedCoupling {
    double r{}, tau{}, W{};
    double ks_L{}, ka_L{};     // carrier roundtrip phases
    double phi_s{}, phi_a{};
    double mu_s{}, mu_a{};
    cplx Gamma_s, Gamma_a;
    cplx chi;                  // cavity transmission amplitude
    cplx coop;                 // cooperativity
    cplx C_s, C_a;             // memory coupling parameters
    cplx x;                    // noise suppression factor
    cplx f;                    // spin-wave evolution coefficient
    double zeta{};             // -(f + f*)
    cplx g_coef_s, g_coef_a;   // input-drive coefficients of the b equation
    cplx p_s, p_a;             // input-feed coefficients of the field equations
    cplx c_s, c_a;             // spin-wave feed coefficients of the field equations
    cplx out_coef;             // coefficient of b in the output field
    cplx t_eff;                // chi e^{i phi_s} - r, off-interaction transmission

    /// Kernel prefactor r chi C_s^2 e^{i(phi_s + ks_L)} of the coherent
    /// storage/retrieval kernels.
    cplx signal_kernel_prefactor() const {
        return r * chi * C_s * C_s * std::exp(cplx(0.0, phi_s + ks_L));
    }
    /// Kernel prefactor -r chi C_s C_a x e^{i(phi_s + ks_L)} of the
    /// four-wave-mixing kernels.
    cplx fwm_kernel_prefactor() const {
        return -r * chi * C_s * C_a * x * std::exp(cplx(0.0, phi_s + ks_L));
    }
};

/// zeta from its explicit expansion in the coupling parameters. Used as an
/// independent cross-check on -(f + f*). include_fwm = false drops every
/// anti-Stokes contribution (the no-FWM reference configuration).
inline double zeta_explicit(cplx C_s, cplx C_a, cplx x, double ks_L, double ka_L,
                            cplx Gamma_s, cplx Gamma_a, double r, double W,
                            bool include_fwm = true) {
    const double arg_Ga = std::arg(Gamma_a);
    cplx term = C_s * C_s * std::exp(cplx(0.0, ks_L));
    cplx decay = 1.0 / Gamma_s;
    if (include_fwm) {
        term += C_a * C_a * x * std::exp(cplx(0.0, -(ka_L - 2.0 * arg_Ga)));
        decay += 1.0 / std::conj(Gamma_a);
    }
    return -2.0 * r * term.real() + 2.0 * W * decay.real();
}

/// Spin-wave evolution coefficient f and zeta = -(f + f*). The two are
/// computed along independent routes (f from the adiabatic elimination,
/// zeta from its explicit form) and must agree.
inline std::pair<cplx, double> spinwave_coefficient(const PhysicalParams& p,
                                                    const CavityParams& c,
                                                    const ComplexRates& rates,
                                                    const DerivedCoupling& dc,
                                                    bool include_fwm = true) {
    const double dgot = p.d * p.gamma / c.tau;
    cplx per_W = dgot / (rates.Gamma_s * rates.Gamma_s * rates.gamma_cav_s) -
                 1.0 / rates.Gamma_s;
    if (include_fwm)
        per_W += dgot / (std::norm(rates.Gamma_a) * std::conj(rates.gamma_cav_a)) -
                 1.0 / std::conj(rates.Gamma_a);
    const cplx f = dc.W * per_W;
    const double zeta_f = -2.0 * f.real();
    const double zeta_x = zeta_explicit(dc.C_s, dc.C_a, dc.x, p.ks_L_mod, p.ka_L_mod,
                                        rates.Gamma_s, rates.Gamma_a, c.r, dc.W,
                                        include_fwm);
    const double scale = std::max({std::abs(zeta_f), std::abs(zeta_x), 1e-300});
    if (std::abs(zeta_f - zeta_x) > 1e-9 * scale)
        throw model_inconsistency_error("zeta cross-check failed: -(f+f*) and the "
                                        "explicit form disagree beyond 1e-9 relative");
    return {f, zeta_f};
}

/// Assemble the full second-tier coupling set for one operating point.
/// include_fwm = false zeroes the anti-Stokes coupling C_a and drops its
/// terms from f (no-FWM reference configuration).
inline DerivedCoupling derive_coupling(const PhysicalParams& p, const CavityParams& c,
                                       const ComplexRates& rates, const ControlParams& ctl,
                                       bool include_fwm = true) {
    p.validate();
    c.validate();
    ctl.validate();

    DerivedCoupling dc;
    dc.r = c.r;
    dc.tau = c.tau;
    dc.W = ctl.W;
    dc.ks_L = p.ks_L_mod;
    dc.ka_L = p.ka_L_mod;
    dc.phi_s = rates.phi_s;
    dc.phi_a = rates.phi_a;
    dc.mu_s = rates.mu_s;
    dc.mu_a = rates.mu_a;
    dc.Gamma_s = rates.Gamma_s;
    dc.Gamma_a = rates.Gamma_a;

    const double t_r = c.t_r();
    const cplx den_s = 1.0 - rates.mu_s * std::exp(cplx(0.0, rates.phi_s));
    if (std::abs(den_s) < 1e-15)
        throw degenerate_cavity_error("signal cavity response is degenerate");
    dc.chi = t_r * t_r / den_s;
    dc.coop = cooperativity(p.d, rates.mu_s, rates.phi_s);
    dc.x = noise_suppression_factor(rates.mu_s, rates.phi_s, rates.mu_a, rates.phi_a);
    std::tie(dc.C_s, dc.C_a) =
        coupling_parameters(dc.coop, rates.Gamma_s, rates.Gamma_a, p.gamma, ctl.W);
    if (!include_fwm) dc.C_a = 0.0;
    std::tie(dc.f, dc.zeta) = spinwave_coefficient(p, c, rates, dc, include_fwm);

    const double sdg = std::sqrt(p.d * p.gamma * ctl.W);
    const cplx i{0.0, 1.0};
    // c_{s,a}, p_{s,a}: field amplitudes in terms of the spin wave and the inputs.
    dc.c_s = i * std::sqrt(p.d * p.gamma * ctl.W / c.tau) /
             (rates.Gamma_s * rates.gamma_cav_s);
    dc.c_a = i * std::sqrt(p.d * p.gamma * ctl.W / c.tau) /
             (rates.Gamma_a * rates.gamma_cav_a);
    dc.p_s = t_r * std::exp(-i * p.ks_L_mod) / (rates.gamma_cav_s * c.r * std::sqrt(c.tau));
    dc.p_a = t_r * std::exp(-i * p.ka_L_mod) / (rates.gamma_cav_a * c.r * std::sqrt(c.tau));
    // Input drives of the spin-wave equation. The signal drive carries a
    // minus sign: it is the substitution of the quasi-static field into
    // -i sqrt(d gamma/tau) (Omega*/Gamma_s) s.
    dc.g_coef_s = -i * t_r * std::exp(-i * p.ks_L_mod) * sdg /
                  (rates.Gamma_s * rates.gamma_cav_s * c.tau * c.r);
    dc.g_coef_a = i * t_r * std::exp(i * p.ka_L_mod) * sdg /
                  (rates.Gamma_a * std::conj(rates.gamma_cav_a) * c.tau * c.r);
    dc.out_coef = i * t_r * std::exp(i * rates.phi_s) * sdg /
                  (rates.Gamma_s * rates.gamma_cav_s * c.tau);
    dc.t_eff = dc.chi * std::exp(i * rates.phi_s) - c.r;
    return dc;
}

} // namespace clsim
