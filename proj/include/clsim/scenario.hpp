#pragma once

#include <atomic>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "clsim/limits.hpp"
#include "clsim/oracle.hpp"
#include "clsim/response.hpp"

// Configuration, the caesium-vapour preset, the parameter-scan engine and
// deterministic CSV emission.

namespace clsim {

inline constexpr const char* csv_schema_header = "# cavity-lambda-sim v0.1.0 schema=1";

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One fully specified operating configuration (before choosing W).
struct Preset {
    PhysicalParams physical;
    CavityParams cavity;
    int cavity_order{0};  // m in Delta_FSR = 4 delta/(2m+1)
};

/// Caesium vapour numbers with the cavity locked so the signal is resonant
/// (phi_s = 0) and the anti-Stokes anti-resonant (phi_a = pi), carrier
/// roundtrip phases ks_L = 0, ka_L = pi. The anti-Stokes detuning defaults
/// to Delta_s + 2*delta (double-resonance placement).
inline Preset cs_preset(double r = 0.9, double loss_intensity = 0.0,
                        std::optional<double> delta_a = std::nullopt) {
    if (!(loss_intensity >= 0.0 && loss_intensity < 1.0))
        throw config_error("loss_intensity must lie in [0,1)");
    Preset ps;
    ps.physical.gamma = angular_from_hz(25e6);
    ps.physical.delta = angular_from_hz(9.2e9);
    ps.physical.delta_s = angular_from_hz(5e9);
    ps.physical.delta_a = delta_a.value_or(ps.physical.delta_s + 2.0 * ps.physical.delta);
    ps.physical.d = 380.0;
    ps.physical.lambda_s = 852e-9;
    ps.physical.ks_L_mod = 0.0;
    ps.physical.ka_L_mod = pi;
    const auto geom = fsr_and_geometry(ps.physical.delta, 0, ps.physical.lambda_s);
    ps.cavity = CavityParams::from_length(r, geom.L, std::sqrt(1.0 - loss_intensity));
    ps.cavity_order = 0;
    return ps;
}

/// Rates for a preset with the roundtrip phases pinned to the lock targets.
inline ComplexRates preset_rates(const Preset& ps) {
    return derive_rates_with_phase_targets(ps.physical, ps.cavity, 0.0, pi);
}

/// Control-energy calibration, W = (2 F_Omega/pi) (d_dip/hbar)^2 2 E/(c eps0 A).
struct EnergyMap {
    double dipole_moment{};   // C m
    double mode_area{};       // m^2
    double control_finesse{};
};

inline double energy_to_W(double energy_J, const EnergyMap& map) {
    if (!(energy_J >= 0.0)) throw config_error("energy must be >= 0");
    if (!(map.dipole_moment > 0.0 && map.mode_area > 0.0 && map.control_finesse > 0.0))
        throw config_error("energy_map requires dipole_moment, mode_area, control_finesse > 0");
    const double dip = map.dipole_moment / hbar;
    return (2.0 * map.control_finesse / pi) * dip * dip * 2.0 * energy_J /
           (speed_of_light * epsilon0 * map.mode_area);
}

enum class InputMode { flat, optimal };

struct ScanAxis {
    std::string path;  // "control.W" | "control.energy" | "cavity.r" |
                       // "cavity.loss_intensity" | "physical.delta_s"
    std::vector<double> values;
};

struct ScanConfig {
    Preset preset;
    double N_in_1{0.5};
    double g2_in{0.0};
    InputMode input_mode{InputMode::flat};
    std::vector<ScanAxis> axes;
    std::optional<EnergyMap> energy_map;
    std::string csv_path;
    bool verify{false};
    int grid_n{2000};
    int jobs{0};  // 0: decide from env/hardware
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j,
                                std::initializer_list<const char*> allowed,
                                const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) { ok = true; break; }
        if (!ok) throw config_error("unknown key '" + key + "' in " + where);
    }
}

inline bool known_axis_path(const std::string& p) {
    return p == "control.W" || p == "control.energy" || p == "cavity.r" ||
           p == "cavity.loss_intensity" || p == "physical.delta_s";
}

} // namespace detail

inline ScanConfig parse_scan_config(const nlohmann::json& j) {
    detail::reject_unknown_keys(j,
                                {"preset", "cavity", "physical", "N_in_1", "g2_in",
                                 "input_mode", "scan", "energy_map", "output"},
                                "config root");
    ScanConfig cfg;

    double r = 0.9, loss = 0.0;
    std::optional<double> delta_a;
    if (j.contains("cavity")) {
        const auto& c = j.at("cavity");
        detail::reject_unknown_keys(c, {"r", "loss_intensity"}, "cavity");
        r = c.value("r", r);
        loss = c.value("loss_intensity", loss);
    }
    if (j.contains("physical")) {
        const auto& p = j.at("physical");
        detail::reject_unknown_keys(p, {"delta_a"}, "physical");
        if (p.contains("delta_a")) delta_a = p.at("delta_a").get<double>();
    }
    const std::string preset = j.value("preset", std::string("cs"));
    if (preset != "cs") throw config_error("unknown preset '" + preset + "'");
    cfg.preset = cs_preset(r, loss, delta_a);

    cfg.N_in_1 = j.value("N_in_1", 0.5);
    cfg.g2_in = j.value("g2_in", 0.0);
    if (!(cfg.N_in_1 >= 0.0)) throw config_error("N_in_1 must be >= 0");
    if (!(cfg.g2_in >= 0.0)) throw config_error("g2_in must be >= 0");

    const std::string mode = j.value("input_mode", std::string("flat"));
    if (mode == "flat") cfg.input_mode = InputMode::flat;
    else if (mode == "optimal") cfg.input_mode = InputMode::optimal;
    else throw config_error("input_mode must be 'flat' or 'optimal'");

    if (!j.contains("scan") || !j.at("scan").is_array() || j.at("scan").empty())
        throw config_error("config requires a non-empty 'scan' axis list");
    for (const auto& a : j.at("scan")) {
        detail::reject_unknown_keys(a, {"path", "values"}, "scan axis");
        ScanAxis ax;
        ax.path = a.at("path").get<std::string>();
        if (!detail::known_axis_path(ax.path))
            throw config_error("unknown scan parameter path '" + ax.path + "'");
        for (const auto& v : a.at("values")) {
            const double x = v.get<double>();
            if (!std::isfinite(x)) throw config_error("non-finite scan value");
            ax.values.push_back(x);
        }
        if (ax.values.empty()) throw config_error("empty scan axis '" + ax.path + "'");
        cfg.axes.push_back(std::move(ax));
    }

    if (j.contains("energy_map")) {
        const auto& em = j.at("energy_map");
        detail::reject_unknown_keys(em, {"dipole_moment", "mode_area", "control_finesse"},
                                    "energy_map");
        cfg.energy_map = EnergyMap{em.at("dipole_moment").get<double>(),
                                   em.at("mode_area").get<double>(),
                                   em.at("control_finesse").get<double>()};
    }
    for (const auto& ax : cfg.axes)
        if (ax.path == "control.energy" && !cfg.energy_map)
            throw config_error("scanning control.energy requires energy_map");
    bool has_w_axis = false;
    for (const auto& ax : cfg.axes)
        if (ax.path == "control.W" || ax.path == "control.energy") has_w_axis = true;
    if (!has_w_axis)
        throw config_error("scan must include a control.W or control.energy axis");

    if (j.contains("output")) {
        const auto& o = j.at("output");
        detail::reject_unknown_keys(o, {"csv", "verify", "grid_n", "jobs"}, "output");
        cfg.csv_path = o.value("csv", std::string());
        cfg.verify = o.value("verify", false);
        cfg.grid_n = o.value("grid_n", 2000);
        cfg.jobs = o.value("jobs", 0);
    }
    if (cfg.grid_n < 2) throw config_error("grid_n must be >= 2");
    return cfg;
}

inline ScanConfig load_scan_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config parse error: ") + e.what());
    }
    try {
        return parse_scan_config(j);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config schema error: ") + e.what());
    }
}

/// One evaluated scan point.
struct ScanRow {
    // echo
    double r{}, loss_intensity{}, delta_s{}, W{};
    std::optional<double> energy;
    // derived scalars
    double zeta{}, abs_x_sq{}, abs_chi{}, abs_coop{};
    // results
    MemoryResult res;
    // oracle verification (optional)
    std::optional<KernelTraceReport> oracle;
    std::string error;  // empty on success
};

namespace detail {

inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline int resolve_jobs(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("CLSIM_JOBS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

} // namespace detail

/// Evaluate every point of the scan grid (cartesian product of the axes,
/// first axis outermost) with a bounded worker pool; rows are returned in
/// grid order regardless of scheduling.
inline std::vector<ScanRow> run_scan(const ScanConfig& cfg) {
    std::vector<std::size_t> shape;
    std::size_t total = 1;
    for (const auto& ax : cfg.axes) {
        shape.push_back(ax.values.size());
        total *= ax.values.size();
    }
    std::vector<ScanRow> rows(total);

    auto eval_point = [&](std::size_t flat) {
        ScanRow& row = rows[flat];
        // decode mixed-radix index, first axis outermost
        std::vector<std::size_t> idx(cfg.axes.size());
        std::size_t rem = flat;
        for (std::size_t a = cfg.axes.size(); a-- > 0;) {
            idx[a] = rem % shape[a];
            rem /= shape[a];
        }
        Preset ps = cfg.preset;
        double W = 0.0;
        double r = ps.cavity.r;
        double loss = 1.0 - ps.cavity.extra_loss_amplitude * ps.cavity.extra_loss_amplitude;
        try {
            for (std::size_t a = 0; a < cfg.axes.size(); ++a) {
                const double v = cfg.axes[a].values[idx[a]];
                const auto& path = cfg.axes[a].path;
                if (path == "control.W") W = v;
                else if (path == "control.energy") {
                    row.energy = v;
                    W = energy_to_W(v, *cfg.energy_map);
                } else if (path == "cavity.r") r = v;
                else if (path == "cavity.loss_intensity") loss = v;
                else if (path == "physical.delta_s") {
                    ps.physical.delta_s = v;
                    ps.physical.delta_a = v + 2.0 * ps.physical.delta;
                }
            }
            ps.cavity = CavityParams::from_length(r, ps.cavity.L, std::sqrt(1.0 - loss));
            row.r = r;
            row.loss_intensity = loss;
            row.delta_s = ps.physical.delta_s;
            row.W = W;

            const auto rates = preset_rates(ps);
            const auto dc = derive_coupling(ps.physical, ps.cavity, rates, ControlParams{W});
            row.zeta = dc.zeta;
            row.abs_x_sq = std::norm(dc.x);
            row.abs_chi = std::abs(dc.chi);
            row.abs_coop = std::abs(dc.coop);

            const TemporalMode psi = cfg.input_mode == InputMode::flat
                                         ? TemporalMode::flat(cfg.grid_n)
                                         : TemporalMode::optimal(cfg.grid_n, dc.f);
            row.res = evaluate_memory(psi, cfg.N_in_1, cfg.g2_in, dc);
            if (cfg.verify) {
                auto psi_of_eps = [&](double e) -> cplx {
                    return cfg.input_mode == InputMode::flat
                               ? cplx{1.0, 0.0}
                               : std::exp(-std::conj(dc.f) * e);
                };
                row.oracle = kernel_photon_numbers(dc, psi_of_eps, cfg.N_in_1, cfg.grid_n);
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    };

    const int jobs = std::min<std::size_t>(detail::resolve_jobs(cfg.jobs), std::max<std::size_t>(total, 1));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < total; ++i) eval_point(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1))
                    eval_point(i);
            });
        for (auto& th : pool) th.join();
    }
    return rows;
}

inline void write_csv(std::ostream& out, const std::vector<ScanRow>& rows, bool verify,
                      bool with_energy) {
    out << csv_schema_header << "\n";
    out << "r,loss_intensity,delta_s,W";
    if (with_energy) out << ",energy";
    out << ",zeta,abs_x_sq,abs_chi,abs_coop"
        << ",N_out_1,N_out_2,noise_floor,eta_store,eta_ret,eta_tot,snr"
        << ",g2_out_1,g2_out_2,abs_kappa";
    if (verify)
        out << ",oracle_N_out_1,oracle_N_out_2,oracle_noise_floor"
            << ",dev_N_out_1,dev_N_out_2,dev_noise_floor";
    out << ",error\n";
    const auto f = detail::fmt17;
    for (const auto& row : rows) {
        out << f(row.r) << ',' << f(row.loss_intensity) << ',' << f(row.delta_s) << ','
            << f(row.W);
        if (with_energy) out << ',' << f(row.energy.value_or(0.0));
        out << ',' << f(row.zeta) << ',' << f(row.abs_x_sq) << ',' << f(row.abs_chi) << ','
            << f(row.abs_coop) << ',' << f(row.res.N_out_1) << ',' << f(row.res.N_out_2)
            << ',' << f(row.res.noise_floor) << ',' << f(row.res.eta_store) << ','
            << f(row.res.eta_ret) << ',' << f(row.res.eta_tot) << ',' << f(row.res.snr)
            << ',' << f(row.res.g2_out_1) << ',' << f(row.res.g2_out_2) << ','
            << f(std::abs(row.res.kappa_overlap));
        if (verify) {
            if (row.oracle) {
                const auto& o = *row.oracle;
                auto dev = [](double cf, double orc) {
                    return orc != 0.0 ? std::abs(cf / orc - 1.0) : std::abs(cf - orc);
                };
                out << ',' << f(o.N_out_1.value) << ',' << f(o.N_out_2.value) << ','
                    << f(o.noise_floor.value) << ',' << f(dev(row.res.N_out_1, o.N_out_1.value))
                    << ',' << f(dev(row.res.N_out_2, o.N_out_2.value)) << ','
                    << f(dev(row.res.noise_floor, o.noise_floor.value));
            } else {
                out << ",,,,,,";
            }
        }
        out << ',' << row.error << "\n";
    }
}

inline std::string csv_string(const std::vector<ScanRow>& rows, bool verify,
                              bool with_energy) {
    std::ostringstream ss;
    write_csv(ss, rows, verify, with_energy);
    return ss.str();
}

} // namespace clsim
