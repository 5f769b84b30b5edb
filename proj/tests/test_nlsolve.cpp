#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "couette/linprop.hpp"
#include "couette/nlsolve.hpp"

using namespace couette;

namespace {

SimConfig small_config(int n, double nu, double eps) {
    SimConfig c;
    c.Nz = c.Nv = n;
    c.Lv = 1.0;
    c.nu = nu;
    c.multipliers = MultiplierParams::make(1.0 / 6.0, nu > 0.0 ? nu : 1e-4);
    c.init.eps = eps;
    c.init.beta = 1.0 / 6.0;
    c.monitor_energy = false;
    return c;
}

double max_diff(const SpectralField& a, const SpectralField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.coef.size(); ++i) m = std::max(m, std::abs(a.coef[i] - b.coef[i]));
    return m;
}

SimState advance_fixed(Stepper& st, SimState s, double dt, int n) {
    for (int i = 0; i < n; ++i) {
        auto r = st.step(s, dt);
        REQUIRE(r.accepted);
    }
    return s;
}

}  // namespace

TEST_CASE("config round trip and validation") {
    auto c = small_config(48, 1e-3, 2.0);
    c.init.seed = 77;
    c.scheme = Scheme::ssp_rk3;
    c.init.zero_mode_boost = 3.0;
    auto d = config_from_json_string(to_json_string(c));
    CHECK(to_json_string(d) == to_json_string(c));
    CHECK(d.scheme == Scheme::ssp_rk3);
    CHECK(d.init.seed == 77);
    CHECK_THROWS_AS(config_from_json_string("{\"scheme\": \"euler\"}"), ConfigError);
    CHECK_THROWS_AS(config_from_json_string("{\"cfl\": -1}"), ConfigError);
    CHECK_THROWS_AS(config_from_json_string("{\"init\": {\"eps\": 0}}"), ConfigError);
    CHECK_THROWS_AS(config_from_json_string("{\"multipliers\": {\"sigma\": 5}}"), ConfigError);
    CHECK_THROWS_AS(config_from_json_string("not json"), ConfigError);
    // defaults fill in everything
    auto e = config_from_json_string("{}");
    CHECK(e.cfl == 0.4);
    CHECK(e.scheme == Scheme::lawson_ralston3);
}

TEST_CASE("initial data") {
    for (double beta : {0.0, 1.0 / 6.0, 1.0 / 3.0}) {
        auto c = small_config(64, 1e-4, 0.3);
        c.init.beta = beta;
        auto f = init_data(c);
        const double s = s_of_beta(beta);
        CHECK(gevrey_norm(f, s, c.multipliers.lambda0, c.multipliers.sigma) ==
              doctest::Approx(0.3 * std::pow(1e-4, beta)).epsilon(1e-10));
        CHECK(f.at(0, 0) == cplx(0.0));
        CHECK(f.hermitian_defect() == 0.0);
        // profile shape: |f| <k,eta>^{sigma+1} e^{lambda |k,eta|^s} is constant off the origin
        const Grid& g = f.grid;
        const double ref = std::abs(f.at(1, 0)) * std::pow(2.0, 6.0) * std::exp(s > 0 ? 1.0 : 0.0);
        for (auto [k, j] : {std::pair{2, 3}, {-5, 7}, {0, 4}, {3, -9}}) {
            const double a = l1(k, g.eta(j));
            const double v = std::abs(f.at(k, j)) * std::pow(bracket(a), 12.0) *
                             std::exp(s > 0 ? std::pow(a, s) : 0.0);
            CHECK(v == doctest::Approx(ref).epsilon(1e-12));
        }
    }
    auto c = small_config(64, 1e-4, 0.3);
    auto a = init_data(c), b = init_data(c);
    CHECK(a.coef == b.coef);
    c.init.seed = 2;
    CHECK(init_data(c).coef != a.coef);
    c.init.seed = 1;
    c.init.zero_mode_boost = 5.0;
    auto z = init_data(c);
    CHECK(std::abs(z.at(0, 3) / z.at(1, 3)) == doctest::Approx(5.0 * std::abs(a.at(0, 3) / a.at(1, 3))).epsilon(1e-12));
}

TEST_CASE("nonlinear term") {
    auto c = small_config(48, 0.0, 50.0);
    auto f = init_data(c);
    Stepper st(f.grid, 0.0, Scheme::lawson_ralston3, true, 0.4);
    SpectralField n(f.grid);
    st.nonlinear(f, 0.7, n);
    double nmax = 0.0;
    for (const auto& v : n.coef) nmax = std::max(nmax, std::abs(v));
    CHECK(std::abs(n.at(0, 0)) < 1e-14 * nmax);
    CHECK(n.hermitian_defect() == 0.0);
    CHECK(st.zero_mode_defect(f, 0.7) < 1e-13);
    // enstrophy is an exact invariant of the truncated nonlinearity
    double dot = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < f.coef.size(); ++i) {
        dot += std::real(std::conj(f.coef[i]) * n.coef[i]);
        scale += std::abs(f.coef[i]) * std::abs(n.coef[i]);
    }
    CHECK(std::abs(dot) < 1e-13 * scale);
    // a single x-mode pair does not advect itself
    SpectralField m(f.grid);
    m.at(1, 0) = cplx(0.2, 0.1);
    m.at(-1, 0) = cplx(0.2, -0.1);
    st.nonlinear(m, 0.3, n);
    for (const auto& v : n.coef) CHECK(std::abs(v) < 1e-17);
    SpectralField zero(f.grid);
    st.nonlinear(zero, 1.0, n);
    for (const auto& v : n.coef) CHECK(v == cplx(0.0));
}

TEST_CASE("step basics") {
    auto c = small_config(32, 1e-2, 1.0);
    Grid g = c.grid();
    Stepper st(g, c.nu, Scheme::lawson_ralston3, true, 0.4);
    SimState z{SpectralField(g), 0.0, 0};
    auto r = st.step(z, 0.5);
    CHECK(r.accepted);
    for (const auto& v : z.omega.coef) CHECK(v == cplx(0.0));
    CHECK(z.t == 0.5);

    // CFL rejection leaves the state alone
    SimState s{init_data(small_config(32, 1e-2, 3e3)), 0.0, 0};
    const auto before = s.omega.coef;
    const double bound = st.cfl_dt(s.omega, 0.0);
    auto bad = st.step(s, 2.0 * bound);
    CHECK_FALSE(bad.accepted);
    CHECK(bad.suggested_dt == doctest::Approx(bound).epsilon(1e-14));
    CHECK(s.omega.coef == before);
    CHECK(s.t == 0.0);
    CHECK(st.step(s, 0.9 * bound).accepted);
    auto clipped = st.advance(s, 1e3);
    CHECK(clipped.accepted);
    CHECK(clipped.dt <= clipped.suggested_dt);
}

TEST_CASE("single mode with viscosity follows the exact propagator") {
    auto c = small_config(32, 1e-2, 1.0);
    c.init.profile = "modes";
    c.init.modes = {{1.0, 0.0, 0.3, -0.4}};
    c.t_final = 6.0;
    c.dt_max = 0.25;
    auto res = run(c);
    REQUIRE_FALSE(res.aborted);
    const auto& w = res.final_state.omega;
    auto ref = sheared_evolve(init_data(c), 0.0, 6.0, c.nu);
    CHECK(max_diff(w, ref) < 1e-10 * std::abs(ref.at(1, 0)));
    auto lab = exact_evolve(init_data(c), 6.0, c.nu);
    CHECK(std::abs(lab.field.at(1, -6) - w.at(1, 0)) < 1e-10 * std::abs(w.at(1, 0)));
    CHECK(std::abs(w.at(1, 0)) == doctest::Approx(0.5 * std::exp(-1e-2 * (6.0 + 72.0))).epsilon(1e-10));
}

TEST_CASE("time stepping is third order") {
    for (Scheme sc : {Scheme::lawson_ralston3, Scheme::ssp_rk3}) {
        auto c = small_config(32, 2e-3, 1e3);
        auto f = init_data(c);
        // fixed steps, so the CFL guard is opened up
        Stepper st(f.grid, c.nu, sc, true, 10.0, 200.0);
        const double T = 0.8;
        auto ref = advance_fixed(st, {f, 0.0, 0}, T / 256, 256).omega;
        std::vector<double> err;
        for (int n : {8, 16, 32}) err.push_back(max_diff(advance_fixed(st, {f, 0.0, 0}, T / n, n).omega, ref));
        MESSAGE("errors " << err[0] << " " << err[1] << " " << err[2]);
        CHECK(std::log2(err[1] / err[2]) == doctest::Approx(3.0).epsilon(0.15));
    }
}

TEST_CASE("ssp_rk3 rejects a large backward integrating factor") {
    auto c = small_config(32, 1e-1, 1.0);
    Grid g = c.grid();
    Stepper st(g, c.nu, Scheme::ssp_rk3, true, 0.4, 30.0);
    SimState s{init_data(c), 50.0, 0};
    auto r = st.step(s, 0.1);
    CHECK_FALSE(r.accepted);
    CHECK(r.reason == "backward factor");
    CHECK(r.suggested_dt < 0.1);
    CHECK(s.t == 50.0);
    // Lawson-Ralston only integrates forward and takes the step
    Stepper lr(g, c.nu, Scheme::lawson_ralston3, true, 0.4);
    CHECK(lr.step(s, 0.1).accepted);
    CHECK(s.omega.finite());
}

TEST_CASE("inviscid run conserves enstrophy and mean") {
    auto c = small_config(64, 0.0, 5e2);
    c.t_final = 10.0;
    c.check_zero_mode = true;
    auto res = run(c);
    REQUIRE_FALSE(res.aborted);
    const double l0 = res.rows.front().l2;
    for (const auto& row : res.rows) {
        CHECK(std::abs(row.l2 / l0 - 1.0) < 1e-6);
        CHECK(std::abs(row.mean) < 1e-15 * l0);
        CHECK(row.zero_mode_defect < 1e-13);
    }
    CHECK(res.final_state.omega.hermitian_defect() == 0.0);
}

TEST_CASE("small data follows the linear propagator") {
    auto c = small_config(64, 1e-3, 1e-3);
    c.t_final = 20.0;
    auto res = run(c);
    auto w0 = init_data(c);
    for (const auto& row : res.rows) {
        auto lin = linear_norms(sheared_evolve(w0, 0.0, row.t, c.nu), row.t);
        CHECK(row.l2_neq == doctest::Approx(lin.omega_neq).epsilon(0.01));
    }
}

TEST_CASE("deviation from the linear solution is quadratic in the amplitude") {
    auto c = small_config(64, 1e-3, 1.0);
    c.t_final = 5.0;
    std::vector<double> le, ld;
    for (double eps : {20.0, 40.0, 80.0, 160.0}) {
        c.init.eps = eps;
        auto res = run(c);
        auto lin = sheared_evolve(init_data(c), 0.0, c.t_final, c.nu);
        le.push_back(std::log(eps));
        ld.push_back(std::log(l2_norm(res.final_state.omega - lin)));
    }
    const double slope = (ld.back() - ld.front()) / (le.back() - le.front());
    MESSAGE("slope " << slope);
    CHECK(slope == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("run plumbing") {
    auto c = small_config(32, 1e-3, 5e2);
    c.monitor_energy = true;
    SUBCASE("t_final = 0 gives the initial row only") {
        c.t_final = 0.0;
        auto r = run(c);
        CHECK(r.rows.size() == 1);
        CHECK(r.rows[0].t == 0.0);
        CHECK(r.rows[0].energy.A2 > 0.0);
    }
    SUBCASE("checkpoint and restart reproduce the continuation") {
        const auto dir = std::filesystem::temp_directory_path() / "couette_ckpt_test";
        std::filesystem::remove_all(dir);
        c.t_final = 6.0;
        c.diag_every = 0.5;
        c.checkpoint_every = 2.0;
        auto full = run(c, {dir.string(), ""});
        REQUIRE(full.checkpoints.size() == 3);
        auto st = load_checkpoint(full.checkpoints[0]);
        CHECK(st.t == 2.0);
        auto rest = run(c, {"", full.checkpoints[0]});
        REQUIRE(rest.rows.size() == 9);
        for (std::size_t i = 0; i < rest.rows.size(); ++i) {
            const auto& a = full.rows[i + 4];
            const auto& b = rest.rows[i];
            CHECK(a.t == b.t);
            CHECK(std::abs(a.l2_neq - b.l2_neq) <= 1e-12 * a.l2_neq);
            CHECK(std::abs(a.energy.A2 - b.energy.A2) <= 1e-12 * a.energy.A2);
        }
        CHECK(max_diff(full.final_state.omega, rest.final_state.omega) == 0.0);
        std::filesystem::remove_all(dir);
        std::ostringstream os;
        write_csv(os, full.rows);
        std::string header;
        std::getline(std::istringstream(os.str()), header);
        CHECK(std::count(header.begin(), header.end(), ',') + 1 == static_cast<long>(diag_columns().size()));
    }
    SUBCASE("a non-finite state aborts with a report") {
        c.t_final = 1.0;
        SimState s{init_data(c), 0.0, 0};
        s.omega.at(2, 1) = cplx(std::nan(""), 0.0);
        auto r = run_from(c, s);
        CHECK(r.aborted);
        CHECK(r.abort_reason.find("norm growth") != std::string::npos);
        CHECK(r.final_state.steps == 1);
    }
    SUBCASE("bad checkpoint") {
        const auto p = std::filesystem::temp_directory_path() / "couette_bad.bin";
        {
            std::ofstream os(p, std::ios::binary);
            os << "XXXX";
        }
        CHECK_THROWS_AS(load_checkpoint(p.string()), CheckpointError);
        std::filesystem::remove(p);
    }
}

TEST_CASE("energy monitor") {
    auto c = small_config(48, 1e-3, 1.0);
    auto f = init_data(c);
    MultiplierBank bank(c.multipliers);
    for (double t : {0.0, 0.5, 3.0, 17.0, 60.0}) {
        auto e = energy_monitor(f, t, c.nu, bank);
        CHECK(e.A2 > 0.0);
        CHECK(e.Agamma2_neq > 0.0);
        CHECK(e.ck_lambda >= 0.0);
        CHECK(e.ck_w >= 0.0);
        CHECK(e.ck_g >= 0.0);
        CHECK(e.dissipation > 0.0);
        // A2 from the composite multiplier directly
        double s = 0.0;
        for (int k = -f.grid.Kx; k <= f.grid.Kx; ++k)
            for (int j = -f.grid.Mv; j <= f.grid.Mv; ++j)
                s += std::exp(2.0 * bank.log_A(t, k, f.grid.eta(j))) * std::norm(f.at(k, j));
        CHECK(e.A2 == doctest::Approx(s * f.grid.deta()).epsilon(1e-12));
    }
    CHECK(energy_monitor(f, 2.0, c.nu, bank).ck_lambda > 0.0);
    SpectralField z(f.grid);
    auto e0 = energy_monitor(z, 2.0, c.nu, bank);
    CHECK(e0.A2 == 0.0);
    CHECK(e0.Agamma2_neq == 0.0);
    CHECK(e0.ck_lambda == 0.0);
    CHECK(e0.ck_w == 0.0);
    CHECK(e0.ck_g == 0.0);
    CHECK(e0.dissipation == 0.0);
    // s = 0: CK_lambda is |lambda'| ||A f||^2
    MultiplierBank b0(MultiplierParams::make(1.0 / 3.0, 1e-3));
    auto e = energy_monitor(f, 2.0, c.nu, b0);
    CHECK(e.ck_lambda == doctest::Approx(std::abs(b0.lambda().dot(2.0)) * e.A2).epsilon(1e-13));
}
