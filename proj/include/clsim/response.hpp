#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include "clsim/coupling.hpp"
#include "clsim/special.hpp"

// Closed-form memory response on the normalized epsilon in [0,1] grid:
// output temporal modes, photon numbers, efficiencies, SNR and the g2
// autocorrelations for the storage and retrieval interactions.
//
// All quadrature is composite trapezoid on a uniform grid. The
// delta-function part of the storage kernel is never discretized; its
// contribution enters through t_eff analytically.

namespace clsim {

struct undefined_statistics_error : std::domain_error {
    using std::domain_error::domain_error;
};

namespace quad {

inline double step(int n) { return 1.0 / (n - 1); }

/// Trapezoid weight of sample k on an n-point uniform grid over [0,1].
inline double weight(int k, int n) {
    const double h = step(n);
    return (k == 0 || k == n - 1) ? 0.5 * h : h;
}

inline cplx inner(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    const int n = static_cast<int>(a.size());
    cplx acc{};
    for (int k = 0; k < n; ++k) acc += weight(k, n) * std::conj(a[k]) * b[k];
    return acc;
}

inline double norm2(const std::vector<cplx>& a) { return inner(a, a).real(); }

/// Cumulative trapezoid integral; out[k] = integral of a over [0, eps_k].
inline std::vector<cplx> cumtrapz(const std::vector<cplx>& a) {
    const int n = static_cast<int>(a.size());
    const double h = step(n);
    std::vector<cplx> out(n);
    out[0] = 0.0;
    for (int k = 1; k < n; ++k) out[k] = out[k - 1] + 0.5 * h * (a[k - 1] + a[k]);
    return out;
}

} // namespace quad

/// A complex amplitude sampled on the uniform epsilon grid.
struct TemporalMode {
    std::vector<cplx> amplitude;

    int grid_n() const { return static_cast<int>(amplitude.size()); }
    double norm2() const { return quad::norm2(amplitude); }

    TemporalMode& normalize() {
        const double n2 = norm2();
        if (!(n2 > 0.0)) throw invalid_parameter("cannot normalize a null mode");
        const double s = 1.0 / std::sqrt(n2);
        for (auto& a : amplitude) a *= s;
        return *this;
    }

    void require_normalized() const {
        // tolerance covers summation rounding on grids up to ~10^6 points
        if (std::abs(norm2() - 1.0) > 1e-9)
            throw invalid_parameter("input mode is not normalized");
    }

    static TemporalMode flat(int n) {
        if (n < 2) throw invalid_parameter("grid_n must be >= 2");
        TemporalMode m{std::vector<cplx>(n, 1.0)};
        return m.normalize();
    }

    /// The single temporal mode the memory accepts: psi(eps) ~ e^{-f* eps}.
    /// Any normalized input orthogonal to it has kappa = 0.
    static TemporalMode optimal(int n, cplx f) {
        if (n < 2) throw invalid_parameter("grid_n must be >= 2");
        TemporalMode m{std::vector<cplx>(n)};
        for (int k = 0; k < n; ++k)
            m.amplitude[k] = std::exp(-std::conj(f) * (k * quad::step(n)));
        return m.normalize();
    }
};

/// Cumulative response integral psi(eps) = int_0^eps e^{-f e'} psi_in(e') de'.
inline std::vector<cplx> response_integral(const TemporalMode& psi_in, cplx f) {
    const int n = psi_in.grid_n();
    std::vector<cplx> integrand(n);
    for (int k = 0; k < n; ++k)
        integrand[k] = std::exp(-f * (k * quad::step(n))) * psi_in.amplitude[k];
    return quad::cumtrapz(integrand);
}

/// Signal field emerging from the storage interaction,
///   phi_1(eps) = r chi C_s^2 e^{i(phi_s+ks_L)} e^{f eps} psi(eps) + t_eff psi_in(eps).
inline TemporalMode storage_output_mode(const TemporalMode& psi_in, const DerivedCoupling& dc) {
    psi_in.require_normalized();
    const int n = psi_in.grid_n();
    const auto psi = response_integral(psi_in, dc.f);
    const cplx pref = dc.signal_kernel_prefactor();
    TemporalMode phi1{std::vector<cplx>(n)};
    for (int k = 0; k < n; ++k)
        phi1.amplitude[k] = pref * std::exp(dc.f * (k * quad::step(n))) * psi[k] +
                            dc.t_eff * psi_in.amplitude[k];
    return phi1;
}

/// Normalized overlap of the input mode with the cavity response,
/// kappa = (e^zeta E)^{-1/2} psi(1). |kappa| <= 1 up to quadrature error.
inline cplx retrieval_overlap_kappa(const TemporalMode& psi_in, cplx f, double zeta) {
    psi_in.require_normalized();
    const auto psi = response_integral(psi_in, f);
    // e^zeta E(zeta) = E(-zeta), always real positive
    return psi.back() / std::sqrt(special::aux_E(-zeta));
}

/// N_out,1 = N_in,1 <phi1|phi1> + |r chi C_s C_a x|^2 (1-E)/zeta.
inline double transmitted_photons(const TemporalMode& psi_in, double N_in_1,
                                  const DerivedCoupling& dc) {
    if (!(N_in_1 >= 0.0)) throw invalid_parameter("N_in_1 must be >= 0");
    const auto phi1 = storage_output_mode(psi_in, dc);
    const double noise =
        std::norm(dc.fwm_kernel_prefactor()) * special::one_minus_E_over_zeta(dc.zeta);
    return N_in_1 * phi1.norm2() + noise;
}

/// N_out,2 = |r chi C_s|^2 [ |C_s E kappa|^2 N_in,1 + |C_a x|^2 g(zeta) ].
/// Returns {N_out_2, noise_floor}; noise_floor is the second term alone.
inline std::pair<double, double> retrieved_photons(double N_in_1, cplx kappa,
                                                   const DerivedCoupling& dc) {
    if (!(N_in_1 >= 0.0)) throw invalid_parameter("N_in_1 must be >= 0");
    const double E = special::aux_E(dc.zeta);
    const double base = std::norm(dc.r * dc.chi * dc.C_s);
    const double signal = base * std::norm(dc.C_s * E * kappa) * N_in_1;
    const double noise = base * std::norm(dc.C_a * dc.x) * special::aux_g(dc.zeta);
    return {signal + noise, noise};
}

/// eta_tot = |r chi C_s^2 E kappa|^2 (noise-subtracted total efficiency).
inline double efficiency(cplx kappa, const DerivedCoupling& dc) {
    const double E = special::aux_E(dc.zeta);
    return std::norm(dc.r * dc.chi * dc.C_s * dc.C_s * E * kappa);
}

/// SNR = N_in,1 |kappa|^2 |Gamma_a/Gamma_s|^2 E^2 / (g(zeta) |x|^2).
/// Returns +inf when the noise channel is closed (C_a = 0 or x = 0).
inline double snr(double N_in_1, cplx kappa, const DerivedCoupling& dc) {
    if (!(N_in_1 >= 0.0)) throw invalid_parameter("N_in_1 must be >= 0");
    const double noise = std::norm(dc.C_a * dc.x) * special::aux_g(dc.zeta);
    if (!(noise > 0.0)) return std::numeric_limits<double>::infinity();
    const double E = special::aux_E(dc.zeta);
    return N_in_1 * std::norm(kappa) * std::norm(dc.Gamma_a / dc.Gamma_s) * E * E /
           (special::aux_g(dc.zeta) * std::norm(dc.x));
}

/// <phi1| K K^+ |phi1> for the causal FWM kernel K = B Theta e^{f(e-e')},
/// evaluated by grid quadrature using the kernel's separable factorization.
inline double fwm_cross_term(const TemporalMode& phi1, const DerivedCoupling& dc) {
    const int n = phi1.grid_n();
    const double h = quad::step(n);
    // T(u) = int_u^1 e^{f* e} phi1(e) de, reverse cumulative trapezoid.
    std::vector<cplx> integrand(n), T(n);
    for (int k = 0; k < n; ++k)
        integrand[k] = std::exp(std::conj(dc.f) * (k * h)) * phi1.amplitude[k];
    T[n - 1] = 0.0;
    for (int k = n - 2; k >= 0; --k)
        T[k] = T[k + 1] + 0.5 * h * (integrand[k] + integrand[k + 1]);
    double acc = 0.0;
    for (int k = 0; k < n; ++k)
        acc += quad::weight(k, n) * std::exp(dc.zeta * (k * h)) * std::norm(T[k]);
    return std::norm(dc.fwm_kernel_prefactor()) * acc;
}

/// g2 of the field transmitted during storage.
inline double g2_storage(const TemporalMode& psi_in, double N_in_1, double g2_in,
                         const DerivedCoupling& dc) {
    if (!(g2_in >= 0.0)) throw invalid_parameter("g2_in must be >= 0");
    const auto phi1 = storage_output_mode(psi_in, dc);
    const double p11 = phi1.norm2();
    const double noise1 =
        std::norm(dc.fwm_kernel_prefactor()) * special::one_minus_E_over_zeta(dc.zeta);
    const double N1 = N_in_1 * p11 + noise1;
    if (!(N1 > 0.0)) throw undefined_statistics_error("N_out,1 is zero; g2 undefined");
    const double tr4 =
        std::norm(dc.fwm_kernel_prefactor()) * std::norm(dc.fwm_kernel_prefactor()) *
        special::aux_trace4(dc.zeta);
    const double cross = (N_in_1 > 0.0) ? fwm_cross_term(phi1, dc) : 0.0;
    const double num = (g2_in - 1.0) * N_in_1 * N_in_1 * p11 * p11 + tr4 +
                       2.0 * N_in_1 * cross;
    return 1.0 + num / (N1 * N1);
}

/// g2 of the field retrieved by the readout pulse.
inline double g2_retrieval(double N_in_1, double g2_in, cplx kappa,
                           const DerivedCoupling& dc) {
    if (!(g2_in >= 0.0)) throw invalid_parameter("g2_in must be >= 0");
    const auto [N2, noise] = retrieved_photons(N_in_1, kappa, dc);
    if (!(N2 > 0.0)) throw undefined_statistics_error("N_out,2 is zero; g2 undefined");
    const double E = special::aux_E(dc.zeta);
    const double base2 = std::norm(dc.r * dc.chi * dc.C_s);
    const double csek2 = std::norm(dc.C_s * E * kappa);
    const double cax2 = std::norm(dc.C_a * dc.x);
    const double num =
        base2 * base2 *
        ((g2_in - 1.0) * N_in_1 * N_in_1 * csek2 * csek2 +
         cax2 * cax2 * special::aux_h(dc.zeta) +
         2.0 * N_in_1 * std::norm(dc.C_s) * cax2 * std::norm(kappa) *
             special::aux_hprime(dc.zeta));
    return 1.0 + num / (N2 * N2);
}

/// Discretized integral kernels. The delta part of M1 is not discretized;
/// it is reported as the scalar t_eff alongside the dense part.
struct KernelMatrices {
    int grid_n{};
    cplx t_eff;                        // delta-function coefficient of M1
    std::vector<cplx> M1_dense;        // row-major grid_n x grid_n
    std::vector<cplx> M_FWM_1;
    std::vector<cplx> M2;
    std::vector<cplx> M_FWM_2;
};

inline KernelMatrices kernel_matrices(const DerivedCoupling& dc, int grid_n) {
    if (grid_n < 2) throw invalid_parameter("grid_n must be >= 2");
    KernelMatrices km;
    km.grid_n = grid_n;
    km.t_eff = dc.t_eff;
    const double h = quad::step(grid_n);
    const cplx pref_s = dc.signal_kernel_prefactor();
    const cplx pref_f = dc.fwm_kernel_prefactor();
    const cplx ef = std::exp(dc.f);
    const std::size_t nn = static_cast<std::size_t>(grid_n) * grid_n;
    km.M1_dense.resize(nn);
    km.M_FWM_1.resize(nn);
    km.M2.resize(nn);
    km.M_FWM_2.resize(nn);
    for (int i = 0; i < grid_n; ++i) {
        for (int j = 0; j < grid_n; ++j) {
            const cplx M = std::exp(dc.f * ((i - j) * h));
            const double theta = (i > j) ? 1.0 : (i == j ? 0.5 : 0.0);
            const std::size_t idx = static_cast<std::size_t>(i) * grid_n + j;
            km.M1_dense[idx] = pref_s * theta * M;
            km.M_FWM_1[idx] = pref_f * theta * M;
            km.M2[idx] = pref_s * ef * M;
            km.M_FWM_2[idx] = pref_f * ef * M;
        }
    }
    return km;
}

/// Full closed-form evaluation of one operating point.
struct MemoryResult {
    double N_out_1{}, N_out_2{};
    double noise_floor{};
    double eta_store{}, eta_ret{}, eta_tot{};
    double snr{};
    double g2_out_1{}, g2_out_2{};
    cplx kappa_overlap;
};

inline MemoryResult evaluate_memory(const TemporalMode& psi_in, double N_in_1,
                                    double g2_in, const DerivedCoupling& dc) {
    MemoryResult res;
    res.kappa_overlap = retrieval_overlap_kappa(psi_in, dc.f, dc.zeta);
    res.N_out_1 = transmitted_photons(psi_in, N_in_1, dc);
    std::tie(res.N_out_2, res.noise_floor) =
        retrieved_photons(N_in_1, res.kappa_overlap, dc);
    res.eta_tot = efficiency(res.kappa_overlap, dc);
    // noise-subtracted storage efficiency; eta_ret keeps eta_tot = eta_store*eta_ret
    const auto phi1 = storage_output_mode(psi_in, dc);
    res.eta_store = 1.0 - phi1.norm2();
    res.eta_ret = (res.eta_store != 0.0) ? res.eta_tot / res.eta_store
                                         : std::numeric_limits<double>::quiet_NaN();
    res.snr = snr(N_in_1, res.kappa_overlap, dc);
    res.g2_out_1 = g2_storage(psi_in, N_in_1, g2_in, dc);
    res.g2_out_2 = g2_retrieval(N_in_1, g2_in, res.kappa_overlap, dc);
    return res;
}

} // namespace clsim
