#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "clsim/scenario.hpp"

using namespace clsim;

namespace {

nlohmann::json minimal_config() {
    return nlohmann::json{
        {"preset", "cs"},
        {"scan", {{{"path", "control.W"}, {"values", {1e8, 1e9}}}}},
    };
}

} // namespace

TEST_CASE("caesium preset values") {
    const auto ps = cs_preset();
    CHECK(ps.physical.gamma == doctest::Approx(two_pi * 25e6).epsilon(1e-12));
    CHECK(ps.physical.delta == doctest::Approx(two_pi * 9.2e9).epsilon(1e-12));
    CHECK(ps.physical.delta_s == doctest::Approx(two_pi * 5e9).epsilon(1e-12));
    CHECK(ps.physical.delta_a ==
          doctest::Approx(ps.physical.delta_s + 2.0 * ps.physical.delta).epsilon(1e-12));
    CHECK(ps.physical.d == 380.0);
    CHECK(ps.physical.lambda_s == 852e-9);
    CHECK(ps.physical.ks_L_mod == 0.0);
    CHECK(ps.physical.ka_L_mod == pi);
    // zero-order double-resonance cavity: L = 2 pi c / (4 delta), about 8 mm
    CHECK(ps.cavity.L == doctest::Approx(8e-3).epsilon(0.03));
    CHECK(ps.cavity.r == 0.9);
    CHECK(ps.cavity.extra_loss_amplitude == 1.0);
    CHECK(ps.cavity_order == 0);

    const auto lossy = cs_preset(0.95, 0.02);
    CHECK(lossy.cavity.r == 0.95);
    CHECK(lossy.cavity.extra_loss_amplitude == doctest::Approx(std::sqrt(0.98)).epsilon(1e-14));
    const auto shifted = cs_preset(0.9, 0.0, two_pi * 20e9);
    CHECK(shifted.physical.delta_a == doctest::Approx(two_pi * 20e9).epsilon(1e-12));
    CHECK_THROWS_AS(cs_preset(0.9, 1.0), config_error);
    CHECK_THROWS_AS(cs_preset(0.9, -0.1), config_error);
}

TEST_CASE("preset rates pin the lock phases") {
    const auto ps = cs_preset();
    const auto rates = preset_rates(ps);
    CHECK(rates.phi_s == 0.0);
    CHECK(rates.phi_a == pi);
    CHECK(rates.gamma_cav_s.imag() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("energy calibration map") {
    const EnergyMap map{1e-30, 7e-9, 29.8};
    CHECK(energy_to_W(0.0, map) == 0.0);
    const double w1 = energy_to_W(1e-12, map);
    CHECK(w1 > 0.0);
    CHECK(energy_to_W(2e-12, map) == doctest::Approx(2.0 * w1).epsilon(1e-14));
    CHECK_THROWS_AS(energy_to_W(-1e-12, map), config_error);
    CHECK_THROWS_AS(energy_to_W(1e-12, EnergyMap{0.0, 7e-9, 29.8}), config_error);
    CHECK_THROWS_AS(energy_to_W(1e-12, EnergyMap{1e-30, 0.0, 29.8}), config_error);
    CHECK_THROWS_AS(energy_to_W(1e-12, EnergyMap{1e-30, 7e-9, 0.0}), config_error);
}

TEST_CASE("dipole moment implied by 10 pJ saturation is atomic-scale") {
    // find the pulse energy scale: W at which the matched-mode efficiency
    // reaches 90% of its strong-coupling asymptote
    const auto ps = cs_preset(0.9);
    const auto rates = preset_rates(ps);
    auto eta_at = [&](double W) {
        const auto dc = derive_coupling(ps.physical, ps.cavity, rates, ControlParams{W});
        return efficiency(1.0, dc);
    };
    const auto probe = derive_coupling(ps.physical, ps.cavity, rates, ControlParams{1.0});
    const double eta_asym = eta_at(1e3 / probe.zeta);
    double lo = 1e-2 / probe.zeta, hi = 1e3 / probe.zeta;
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        (eta_at(mid) < 0.9 * eta_asym ? lo : hi) = mid;
    }
    const double W90 = std::sqrt(lo * hi);

    // invert the calibration at 10 pJ with the preset's own geometry
    const double area = ps.physical.lambda_s * ps.cavity.L;
    const double F_omega = finesse(ps.cavity.r * ps.cavity.extra_loss_amplitude);
    const double E10 = 10e-12;
    const double dip =
        hbar * std::sqrt(W90 * pi * speed_of_light * epsilon0 * area / (4.0 * F_omega * E10));
    CAPTURE(W90);
    CAPTURE(dip);
    CHECK(dip > 1e-31);
    CHECK(dip < 1e-28);
    // round trip through the map
    const EnergyMap map{dip, area, F_omega};
    CHECK(energy_to_W(E10, map) == doctest::Approx(W90).epsilon(1e-10));
}

TEST_CASE("config parsing accepts the documented schema") {
    auto j = minimal_config();
    j["cavity"] = {{"r", 0.95}, {"loss_intensity", 0.01}};
    j["physical"] = {{"delta_a", two_pi * 20e9}};
    j["N_in_1"] = 0.7;
    j["g2_in"] = 1.0;
    j["input_mode"] = "optimal";
    j["energy_map"] = {{"dipole_moment", 1e-30}, {"mode_area", 7e-9}, {"control_finesse", 30.0}};
    j["output"] = {{"csv", "out.csv"}, {"verify", true}, {"grid_n", 500}, {"jobs", 2}};
    const auto cfg = parse_scan_config(j);
    CHECK(cfg.preset.cavity.r == 0.95);
    CHECK(cfg.preset.physical.delta_a == doctest::Approx(two_pi * 20e9).epsilon(1e-12));
    CHECK(cfg.N_in_1 == 0.7);
    CHECK(cfg.g2_in == 1.0);
    CHECK(cfg.input_mode == InputMode::optimal);
    REQUIRE(cfg.energy_map.has_value());
    CHECK(cfg.energy_map->control_finesse == 30.0);
    CHECK(cfg.csv_path == "out.csv");
    CHECK(cfg.verify);
    CHECK(cfg.grid_n == 500);
    CHECK(cfg.jobs == 2);
    REQUIRE(cfg.axes.size() == 1);
    CHECK(cfg.axes[0].path == "control.W");
    CHECK(cfg.axes[0].values == std::vector<double>{1e8, 1e9});
}

TEST_CASE("config parsing rejects malformed input") {
    // unknown keys at every level
    auto j = minimal_config();
    j["typo"] = 1;
    CHECK_THROWS_AS(parse_scan_config(j), config_error);
    j = minimal_config();
    j["cavity"] = {{"radius", 0.9}};
    CHECK_THROWS_AS(parse_scan_config(j), config_error);
    j = minimal_config();
    j["scan"][0]["step"] = 1.0;
    CHECK_THROWS_AS(parse_scan_config(j), config_error);
    j = minimal_config();
    j["energy_map"] = {{"dipole", 1e-30}};
    CHECK_THROWS_AS(parse_scan_config(j), config_error);

    // structural requirements
    CHECK_THROWS_AS(parse_scan_config(nlohmann::json{{"preset", "cs"}}), config_error);
    j = minimal_config();
    j["scan"] = nlohmann::json::array();
    CHECK_THROWS_AS(parse_scan_config(j), config_error);
    j = minimal_config();
    j["scan"][0]["path"] = "cavity.r"; // no W/energy axis left
    CHECK_THROWS_AS(parse_scan_config(j), config_error);
    j = minimal_config();
    j["scan"][0]["path"] = "physical.gamma"; // unknown path
    CHECK_THROWS_AS(parse_scan_config(j), config_error);
    j = minimal_config();
    j["scan"][0]["path"] = "control.energy"; // energy without map
    CHECK_THROWS_AS(parse_scan_config(j), config_error);
    j = minimal_config();
    j["preset"] = "rb";
    CHECK_THROWS_AS(parse_scan_config(j), config_error);
    j = minimal_config();
    j["input_mode"] = "gaussian";
    CHECK_THROWS_AS(parse_scan_config(j), config_error);
    j = minimal_config();
    j["N_in_1"] = -0.5;
    CHECK_THROWS_AS(parse_scan_config(j), config_error);
    j = minimal_config();
    j["scan"][0]["values"] = {1e8, std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(parse_scan_config(j), config_error);
}

TEST_CASE("scan grid order and qualitative physics") {
    auto j = minimal_config();
    j["scan"] = nlohmann::json::array();
    j["scan"].push_back({{"path", "cavity.loss_intensity"}, {"values", {0.0, 0.02}}});
    nlohmann::json wvals = nlohmann::json::array();
    std::vector<double> W;
    for (int k = 0; k < 12; ++k) W.push_back(2e7 * std::pow(1.65, k));
    for (double w : W) wvals.push_back(w);
    j["scan"].push_back({{"path", "control.W"}, {"values", wvals}});
    j["input_mode"] = "optimal";
    j["output"] = {{"grid_n", 400}, {"jobs", 1}};
    const auto cfg = parse_scan_config(j);
    const auto rows = run_scan(cfg);
    REQUIRE(rows.size() == 2 * W.size());
    for (const auto& row : rows) CHECK(row.error.empty());

    // first axis outermost: the first half is the lossless branch
    for (std::size_t k = 0; k < W.size(); ++k) {
        CHECK(rows[k].loss_intensity == 0.0);
        CHECK(rows[k].W == W[k]);
        CHECK(rows[W.size() + k].loss_intensity == 0.02);
    }

    const double bound = (1.0 + 0.9) * (1.0 + 0.9) / 4.0; // (chi/2)^2, lossless
    for (std::size_t k = 0; k < W.size(); ++k) {
        const auto& a = rows[k];
        const auto& b = rows[W.size() + k];
        CHECK(a.res.eta_tot <= bound + 1e-12);
        // loss can only hurt
        CHECK(b.res.eta_tot < a.res.eta_tot);
        if (k > 0) {
            // efficiency rises with pulse energy, g2 contamination rises too
            CHECK(a.res.eta_tot > rows[k - 1].res.eta_tot);
            CHECK(a.res.g2_out_2 > rows[k - 1].res.g2_out_2);
        }
    }
    // saturation: the last doubling moves eta by little
    const double tail = rows[W.size() - 1].res.eta_tot / rows[W.size() - 2].res.eta_tot;
    const double head = rows[1].res.eta_tot / rows[0].res.eta_tot;
    CHECK(tail < 1.15);
    CHECK(head > 1.5);
}

TEST_CASE("scan rows are deterministic across thread counts") {
    auto j = minimal_config();
    j["scan"] = nlohmann::json::array();
    j["scan"].push_back({{"path", "cavity.r"}, {"values", {0.9, 0.95}}});
    j["scan"].push_back({{"path", "control.W"}, {"values", {1e8, 5e8, 1e9}}});
    j["output"] = {{"grid_n", 300}};
    auto cfg = parse_scan_config(j);
    cfg.jobs = 1;
    const auto csv1 = csv_string(run_scan(cfg), false, false);
    cfg.jobs = 4;
    const auto csv4 = csv_string(run_scan(cfg), false, false);
    CHECK(csv1 == csv4);
    CHECK(csv1.rfind(csv_schema_header, 0) == 0);
}

TEST_CASE("scan points that fail are reported per-row") {
    auto j = minimal_config();
    j["scan"] = nlohmann::json::array();
    j["scan"].push_back({{"path", "cavity.loss_intensity"}, {"values", {0.0, 2.0}}});
    j["scan"].push_back({{"path", "control.W"}, {"values", {1e8}}});
    j["output"] = {{"grid_n", 300}};
    const auto cfg = parse_scan_config(j);
    const auto rows = run_scan(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].error.empty());
    CHECK(!rows[1].error.empty());
    // the CSV still has one line per point
    const auto csv = csv_string(rows, false, false);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("verified scan embeds oracle deviations") {
    auto j = minimal_config();
    j["scan"] = {{{"path", "control.W"}, {"values", {5e8}}}};
    j["output"] = {{"grid_n", 400}, {"verify", true}};
    const auto cfg = parse_scan_config(j);
    const auto rows = run_scan(cfg);
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].oracle.has_value());
    CHECK(rows[0].oracle->N_out_1.value ==
          doctest::Approx(rows[0].res.N_out_1).epsilon(1e-4));
    const auto csv = csv_string(rows, true, false);
    CHECK(csv.find("oracle_N_out_1") != std::string::npos);
    CHECK(csv.find("dev_noise_floor") != std::string::npos);
}

TEST_CASE("csv echoes the energy column only when scanned") {
    auto j = minimal_config();
    j["energy_map"] =
        {{"dipole_moment", 1e-30}, {"mode_area", 7e-9}, {"control_finesse", 30.0}};
    j["scan"] = {{{"path", "control.energy"}, {"values", {1e-12, 1e-11}}}};
    j["output"] = {{"grid_n", 300}};
    const auto cfg = parse_scan_config(j);
    const auto rows = run_scan(cfg);
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[0].energy.has_value());
    CHECK(rows[0].energy.value() == 1e-12);
    CHECK(rows[1].W == doctest::Approx(10.0 * rows[0].W).epsilon(1e-12));
    const auto csv = csv_string(rows, false, true);
    std::istringstream ss(csv);
    std::string line;
    std::getline(ss, line);
    CHECK(line == csv_schema_header);
    std::getline(ss, line);
    CHECK(line.find(",energy,") != std::string::npos);
}

TEST_CASE("load_scan_config reports file and syntax problems") {
    CHECK_THROWS_AS(load_scan_config("/nonexistent/path.json"), config_error);
}
