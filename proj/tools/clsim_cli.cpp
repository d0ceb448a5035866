#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "clsim/clsim.hpp"

namespace {

int write_rows(const std::vector<clsim::ScanRow>& rows, const std::string& out_path,
               bool verify) {
    bool with_energy = false;
    for (const auto& r : rows)
        if (r.energy) with_energy = true;
    if (out_path.empty()) {
        clsim::write_csv(std::cout, rows, verify, with_energy);
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot open output file: " << out_path << "\n";
            return 1;
        }
        clsim::write_csv(out, rows, verify, with_energy);
    }
    return 0;
}

void apply_overrides(clsim::ScanConfig& cfg, int grid_n, int jobs, bool verify) {
    if (grid_n > 0) cfg.grid_n = grid_n;
    if (jobs > 0) cfg.jobs = jobs;
    if (verify) cfg.verify = true;
}

int cmd_scan(const std::string& config_path, const std::string& out_path, int grid_n,
             int jobs, bool verify) {
    auto cfg = clsim::load_scan_config(config_path);
    apply_overrides(cfg, grid_n, jobs, verify);
    const auto rows = clsim::run_scan(cfg);
    const std::string path = !out_path.empty() ? out_path : cfg.csv_path;
    return write_rows(rows, path, cfg.verify);
}

int cmd_verify(const std::string& config_path, const std::string& out_path, int grid_n,
               int jobs) {
    auto cfg = clsim::load_scan_config(config_path);
    apply_overrides(cfg, grid_n, jobs, true);
    const auto rows = clsim::run_scan(cfg);
    double worst = 0.0;
    std::size_t failed = 0;
    for (const auto& row : rows) {
        if (!row.error.empty()) {
            ++failed;
            continue;
        }
        if (!row.oracle) continue;
        const auto& o = *row.oracle;
        auto dev = [](double cf, double orc) {
            return orc != 0.0 ? std::abs(cf / orc - 1.0) : std::abs(cf - orc);
        };
        worst = std::max({worst, dev(row.res.N_out_1, o.N_out_1.value),
                          dev(row.res.N_out_2, o.N_out_2.value),
                          dev(row.res.noise_floor, o.noise_floor.value)});
    }
    if (!out_path.empty()) {
        const int rc = write_rows(rows, out_path, true);
        if (rc != 0) return rc;
    }
    std::printf("points: %zu  errors: %zu  worst closed-form/oracle deviation: %.3e\n",
                rows.size(), failed, worst);
    if (failed > 0) return 2;
    return 0;
}

int cmd_limits(const std::string& config_path) {
    const auto cfg = clsim::load_scan_config(config_path);
    const auto& ps = cfg.preset;
    const auto rules = clsim::design_rules(ps.physical, ps.cavity, ps.cavity_order);
    std::printf("delta_FSR        %.6g rad/s (%.4g GHz)\n", rules.delta_FSR,
                rules.delta_FSR / clsim::two_pi / 1e9);
    std::printf("roundtrip L      %.6g m\n", rules.L);
    std::printf("mode area        %.6g m^2\n", rules.mode_area);
    std::printf("finesse F_s      %.6g\n", rules.F_s);
    std::printf("linewidth        %.6g rad/s (%.4g GHz)\n", rules.linewidth,
                rules.linewidth / clsim::two_pi / 1e9);
    std::printf("bandwidth d_s    %.6g rad/s (%.4g MHz, a=%.2g)\n", rules.bandwidth_limit,
                rules.bandwidth_limit / clsim::two_pi / 1e6, rules.a_margin);
    std::printf("C_bb             %.6g\n", rules.C_bb);
    std::printf("r_opt            %.6g\n", rules.r_opt);
    std::printf("chi_opt/2        %.6g\n", rules.chi_opt_half);
    std::printf("control buildup  %.6g\n", rules.control_enhancement);
    return 0;
}

int cmd_preset(double r, double loss, int grid_n) {
    const auto ps = clsim::cs_preset(r, loss);
    const auto rates = clsim::preset_rates(ps);
    const auto rules = clsim::design_rules(ps.physical, ps.cavity, ps.cavity_order);
    std::printf("gamma            %.6g rad/s\n", ps.physical.gamma);
    std::printf("delta            %.6g rad/s\n", ps.physical.delta);
    std::printf("delta_s          %.6g rad/s\n", ps.physical.delta_s);
    std::printf("delta_a          %.6g rad/s\n", ps.physical.delta_a);
    std::printf("d                %.6g\n", ps.physical.d);
    std::printf("lambda_s         %.6g m\n", ps.physical.lambda_s);
    std::printf("r                %.6g\n", ps.cavity.r);
    std::printf("loss (intensity) %.6g\n", loss);
    std::printf("L                %.6g m\n", ps.cavity.L);
    std::printf("tau              %.6g s\n", ps.cavity.tau);
    std::printf("mu_s             %.6g   mu_a %.6g\n", rates.mu_s, rates.mu_a);
    std::printf("phi_s            %.6g   phi_a %.6g\n", rates.phi_s, rates.phi_a);
    std::printf("gamma_cav_s      %.6g%+.6gi 1/s\n", rates.gamma_cav_s.real(),
                rates.gamma_cav_s.imag());
    std::printf("gamma_cav_a      %.6g%+.6gi 1/s\n", rates.gamma_cav_a.real(),
                rates.gamma_cav_a.imag());
    std::printf("linewidth        %.4g GHz\n", rules.linewidth / clsim::two_pi / 1e9);
    std::printf("grid_n           %d\n", grid_n);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cavity-enhanced Lambda-memory noise simulation"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    int grid_n = 0, jobs = 0;
    bool verify = false;

    auto add_common = [&](CLI::App* sub, bool with_config) {
        if (with_config)
            sub->add_option("config", config_path, "JSON scan configuration")->required();
        sub->add_option("--out", out_path, "CSV output path (default: config/stdout)");
        sub->add_option("--grid-n", grid_n, "quadrature grid size override");
        sub->add_option("--jobs", jobs, "worker count (default: CLSIM_JOBS or hardware)");
    };

    auto* scan = app.add_subcommand("scan", "evaluate a parameter scan to CSV");
    add_common(scan, true);
    scan->add_flag("--verify", verify, "append oracle columns");

    auto* ver = app.add_subcommand("verify", "closed-form vs oracle report");
    add_common(ver, true);

    auto* lim = app.add_subcommand("limits", "design-rule report for a config");
    lim->add_option("config", config_path, "JSON scan configuration")->required();

    auto* pre = app.add_subcommand("preset", "print a named preset");
    std::string preset_name;
    double pr = 0.9, ploss = 0.0;
    int pgrid = 2000;
    pre->add_option("name", preset_name, "preset name (cs)")->required();
    pre->add_option("--r", pr, "coupler amplitude reflectivity");
    pre->add_option("--loss", ploss, "roundtrip intensity loss");
    pre->add_option("--grid-n", pgrid, "quadrature grid size");

    CLI11_PARSE(app, argc, argv);

    try {
        if (scan->parsed()) return cmd_scan(config_path, out_path, grid_n, jobs, verify);
        if (ver->parsed()) return cmd_verify(config_path, out_path, grid_n, jobs);
        if (lim->parsed()) return cmd_limits(config_path);
        if (pre->parsed()) {
            if (preset_name != "cs") {
                std::cerr << "error: unknown preset '" << preset_name << "'\n";
                return 1;
            }
            return cmd_preset(pr, ploss, pgrid);
        }
    } catch (const clsim::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const clsim::invalid_parameter& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
