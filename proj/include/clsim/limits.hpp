#pragma once

#include <cmath>
#include <complex>
#include <limits>

#include "clsim/coupling.hpp"
#include "clsim/params.hpp"

// Asymptotic expansions and design rules: weak/strong coupling limits, the
// no-FWM literature benchmark, cavity geometry, bandwidth and coupler
// optimization, and the double-resonance control enhancement.
//
// Finesse convention, fixed project-wide: F = pi sqrt(mu) / (1 - mu) with
// mu the roundtrip amplitude transmission. Finesse and linewidth figures
// use the empty-cavity mu (coupler and passive loss only, no atoms).

namespace clsim {

struct configuration_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline double finesse(double mu) {
    if (!(mu > 0.0 && mu < 1.0)) throw invalid_parameter("mu must lie in (0,1)");
    return pi * std::sqrt(mu) / (1.0 - mu);
}

/// First-order-in-zeta outputs. Valid for zeta up to about 0.2; the caller
/// decides applicability.
struct WeakCouplingResult {
    double N_out_2{};
    double eta_tot{};
    double snr{};
    double g2_out_2{};
    bool g2_defined{true};
};

inline WeakCouplingResult weak_coupling(double N_in_1, cplx kappa,
                                        const DerivedCoupling& dc) {
    if (!(N_in_1 >= 0.0)) throw invalid_parameter("N_in_1 must be >= 0");
    WeakCouplingResult out;
    const double z = dc.zeta;
    const double base = std::norm(dc.r * dc.chi * dc.C_s);
    out.eta_tot = std::norm(dc.r * dc.chi * dc.C_s * dc.C_s * kappa) * (1.0 - z);
    out.N_out_2 = base * (std::norm(dc.C_s * kappa) * (1.0 - z) * N_in_1 +
                          std::norm(dc.C_a * dc.x) * (1.5 - 7.0 * z / 6.0));
    out.snr = N_in_1 * std::norm(kappa) * std::norm(dc.Gamma_a / dc.Gamma_s) *
              (2.0 / 3.0 - 4.0 * z / 27.0) / std::norm(dc.x);
    if (out.snr > 0.0) {
        // Fock-input (g2_in = 0), low-noise case: the heralded photon is
        // antibunched and the residual g2 is pure noise contamination
        out.g2_out_2 = (34.0 / 9.0 - 14.0 * z / 81.0) / out.snr;
    } else {
        out.g2_out_2 = std::numeric_limits<double>::quiet_NaN();
        out.g2_defined = false;
    }
    return out;
}

/// eta_tot -> |r chi C_s^2 kappa / zeta|^2 as zeta -> infinity.
inline double strong_coupling_efficiency(cplx kappa, const DerivedCoupling& dc) {
    return std::norm(dc.r * dc.chi * dc.C_s * dc.C_s * kappa / dc.zeta);
}

/// Absorption-free cooperativity of the cavity-enhanced ensemble.
inline double absorption_free_cooperativity(double r, double d) {
    if (!(r > 0.0 && r < 1.0)) throw configuration_error("r must lie in (0,1)");
    if (!(d >= 0.0)) throw configuration_error("d must be >= 0");
    return r * d / (1.0 - r);
}

/// Strong-coupling no-FWM efficiency benchmark,
/// eta = |kappa|^2 ((1+r)/2)^2 [C/(C+1)]^2 with C = rd/(1-r).
/// Independent of the detuning and the control pulse energy.
inline double gorshkov_efficiency(double r, double d, cplx kappa) {
    const double C = absorption_free_cooperativity(r, d);
    const double q = (1.0 + r) / 2.0;
    return std::norm(kappa) * q * q * (C / (C + 1.0)) * (C / (C + 1.0));
}

/// Closed-form substitutions that hold in the no-FWM resonant lossless
/// configuration, used to cross-check the general expressions.
struct GorshkovSubstitutions {
    double C_bb{};       // rd/(1-r)
    cplx Gamma_Cbb;      // Gamma_s + C_bb * gamma
    double zeta{};       // 2 W gamma (C_bb + 1) / |Gamma_Cbb|^2
    cplx chi;            // (1+r) Gamma_s / Gamma_Cbb
    cplx coop;           // C_bb (1/r) Gamma_s / Gamma_Cbb
};

inline GorshkovSubstitutions gorshkov_substitutions(double r, double d, double gamma,
                                                    cplx Gamma_s, double W) {
    if (!(gamma > 0.0)) throw configuration_error("gamma must be > 0");
    if (!(W >= 0.0)) throw configuration_error("W must be >= 0");
    GorshkovSubstitutions out;
    out.C_bb = absorption_free_cooperativity(r, d);
    out.Gamma_Cbb = Gamma_s + out.C_bb * gamma;
    out.zeta = 2.0 * W * gamma * (out.C_bb + 1.0) / std::norm(out.Gamma_Cbb);
    out.chi = (1.0 + r) * Gamma_s / out.Gamma_Cbb;
    out.coop = out.C_bb * Gamma_s / (r * out.Gamma_Cbb);
    return out;
}

/// Cavity geometry from the double-resonance condition: the free spectral
/// range divides twice the hyperfine splitting an odd number of times.
struct CavityGeometry {
    double delta_FSR{};  // rad/s
    double L{};          // m
    double mode_area{};  // m^2
};

inline CavityGeometry fsr_and_geometry(double delta, int m, double lambda_s) {
    if (!(delta > 0.0)) throw invalid_parameter("delta must be > 0");
    if (m < 0) throw invalid_parameter("m must be >= 0");
    if (!(lambda_s > 0.0)) throw invalid_parameter("lambda_s must be > 0");
    CavityGeometry out;
    out.delta_FSR = 4.0 * delta / (2.0 * m + 1.0);
    out.L = two_pi * speed_of_light / out.delta_FSR;
    out.mode_area = lambda_s * out.L;
    return out;
}

/// Acceptance bandwidth delta_s = a * Delta_FSR / F_s.
inline double bandwidth_limit(double delta_FSR, double F_s, double a_margin) {
    if (!(delta_FSR > 0.0)) throw invalid_parameter("delta_FSR must be > 0");
    if (!(F_s > 0.0)) throw invalid_parameter("F_s must be > 0");
    if (!(a_margin >= 0.0)) throw invalid_parameter("a_margin must be >= 0");
    return a_margin * delta_FSR / F_s;
}

/// Loss-optimal coupler. theta is the roundtrip loss angle, mu_s/r = cos^2(theta).
struct OptimalCoupler {
    double r_opt{};
    double chi_opt_half{};
};

inline OptimalCoupler optimal_coupler(double theta) {
    if (!(theta >= 0.0 && theta < 0.5)) throw invalid_parameter("theta must be small and >= 0");
    const double s = std::sin(theta), c = std::cos(theta);
    const double rt2 = std::sqrt(2.0);
    return {1.0 - rt2 * theta, (rt2 - s) / (s + rt2 * c * c)};
}

/// Intra-cavity control-field buildup: exact ratio t/(1-mu) and the
/// finesse approximation sqrt(2 F / pi).
struct ControlEnhancement {
    double exact{};
    double approx{};
    double rel_dev{};
};

inline ControlEnhancement control_enhancement(double t_omega, double mu_omega) {
    if (!(mu_omega > 0.0 && mu_omega < 1.0))
        throw invalid_parameter("mu_omega must lie in (0,1)");
    if (!(t_omega > 0.0 && t_omega <= 1.0))
        throw invalid_parameter("t_omega must lie in (0,1]");
    ControlEnhancement out;
    out.exact = t_omega / (1.0 - mu_omega);
    out.approx = std::sqrt(2.0 * finesse(mu_omega) / pi);
    out.rel_dev = std::abs(out.exact / out.approx - 1.0);
    return out;
}

/// The assembled design-rule report for one configuration.
struct DesignRules {
    double C_bb{};
    cplx Gamma_Cbb;
    double F_s{}, F_omega{};
    double delta_FSR{};
    double L{};
    double mode_area{};
    double linewidth{};        // rad/s, Delta_FSR / F_s
    double bandwidth_limit{};  // rad/s
    double a_margin{0.3};
    double r_opt{}, chi_opt_half{};
    double control_enhancement{};
};

inline DesignRules design_rules(const PhysicalParams& p, const CavityParams& c, int m,
                                double a_margin = 0.3) {
    p.validate();
    c.validate();
    DesignRules out;
    out.C_bb = absorption_free_cooperativity(c.r, p.d);
    out.Gamma_Cbb = complex_detuning(p.gamma, p.delta_s) + out.C_bb * p.gamma;
    const double mu_empty = c.r * c.extra_loss_amplitude;
    out.F_s = finesse(mu_empty);
    out.F_omega = out.F_s;
    const auto geom = fsr_and_geometry(p.delta, m, p.lambda_s);
    out.delta_FSR = geom.delta_FSR;
    out.L = geom.L;
    out.mode_area = geom.mode_area;
    out.linewidth = geom.delta_FSR / out.F_s;
    out.a_margin = a_margin;
    out.bandwidth_limit = bandwidth_limit(geom.delta_FSR, out.F_s, a_margin);
    const double theta = std::acos(std::sqrt(c.extra_loss_amplitude));
    const auto oc = optimal_coupler(theta);
    out.r_opt = oc.r_opt;
    out.chi_opt_half = oc.chi_opt_half;
    out.control_enhancement = control_enhancement(c.t_r(), mu_empty).exact;
    return out;
}

} // namespace clsim
