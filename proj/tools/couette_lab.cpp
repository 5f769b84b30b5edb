// couette-lab <lin|nl|weights|toys|audit|scan> --config FILE [--seed N] [--out DIR]
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "couette/coordsys.hpp"
#include "couette/lemma_lab.hpp"
#include "couette/linprop.hpp"
#include "couette/nlsolve.hpp"
#include "couette/report.hpp"
#include "couette/scan.hpp"
#include "couette/toys.hpp"
#include "couette/weights.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace couette;

namespace {

struct Ctx {
    std::string config_text;
    json cfg;
    std::uint64_t seed = 0;
    bool has_seed = false;
    std::string out;
};

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open config " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string save(const Ctx& c, const std::string& name, const std::string& text) {
    const std::string p = (fs::path(c.out) / name).string();
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p);
    os << text;
    return p;
}

SimConfig sim_config(const Ctx& c) {
    SimConfig s = config_from_json_string(c.config_text);
    if (c.has_seed) s.init.seed = c.seed;
    return s;
}

std::vector<double> output_times(const SimConfig& s) {
    std::vector<double> t;
    const long n = std::lround(std::floor(s.t_final / s.diag_every + 1e-9));
    for (long i = 0; i <= n; ++i) t.push_back(i * s.diag_every);
    return t;
}

int cmd_lin(const Ctx& c, Manifest& m) {
    const SimConfig s = sim_config(c);
    const json l = c.cfg.value("lin", json::object());
    const auto times = l.value("times", output_times(s));
    FitWindow w;
    if (l.contains("window")) w = {l["window"].at(0).get<double>(), l["window"].at(1).get<double>()};
    const auto rep = decay_report(init_data(s), s.nu, times, w);
    std::ostringstream os;
    write_csv(os, rep);
    m.add(save(c, "lin.csv", os.str()));
    m.add(save(c, "lin.json", to_json_string(rep)));
    return 0;
}

int cmd_nl(const Ctx& c, Manifest& m) {
    const SimConfig s = sim_config(c);
    RunOptions opt;
    if (s.checkpoint_every > 0.0) {
        opt.checkpoint_dir = (fs::path(c.out) / "checkpoints").string();
        fs::create_directories(opt.checkpoint_dir);
    }
    opt.restart_from = c.cfg.value("restart_from", std::string());
    const bool coords = c.cfg.value("coords", false);
    std::vector<SpectralField> u0, f0;
    if (coords)
        opt.on_output = [&](const SimState& st) {
            u0.push_back(zero_mode_velocity(st.omega));
            f0.push_back(zero_mode_vorticity(st.omega));
        };
    const auto res = run(s, opt);
    std::ostringstream os;
    write_csv(os, res.rows);
    m.add(save(c, "diag.csv", os.str()));
    std::ostringstream bin;
    write_binary(bin, res.final_state.omega);
    m.add(save(c, "final.bin", bin.str()));
    m.add(res.checkpoints);
    if (coords && u0.size() >= 2) {
        const auto series = coord_series(u0, f0, s.diag_every, s.nu);
        MultiplierBank bank(s.multipliers);
        std::vector<CoordEnergy> e;
        for (const auto& st : series.states) e.push_back(coord_energy(st, bank, s.init.eps));
        std::ostringstream cs;
        write_csv(cs, series, e);
        m.add(save(c, "coords.csv", cs.str()));
    }
    if (res.aborted) {
        std::cerr << "run aborted: " << res.abort_reason << '\n';
        return 3;
    }
    return 0;
}

int cmd_weights(const Ctx& c, Manifest& m) {
    const SimConfig s = sim_config(c);
    const json w = c.cfg.value("weights", json::object());
    const auto etas = w.value("eta", std::vector<double>{16.0, 1000.0});
    for (std::size_t i = 0; i < etas.size(); ++i) {
        std::ostringstream os;
        dump_weight_table(os, etas[i], s.multipliers);
        m.add(save(c, "weights_" + std::to_string(i) + ".csv", os.str()));
    }
    return 0;
}

int cmd_toys(const Ctx& c, Manifest& m) {
    const SimConfig s = sim_config(c);
    const auto& p = s.multipliers;
    const json t = c.cfg.value("toys", json::object());
    int i = 0;
    for (const auto& e : t.value("strong", json::array({{{"k", 1}, {"eta", 1e4}}}))) {
        const auto init = e.value("init", std::vector<double>{1.0, 0.0});
        if (init.size() != 2) throw ConfigError("toys.strong[].init needs two values");
        const auto tr = integrate_strong(e.at("k").get<int>(), e.at("eta").get<double>(), p, {init[0], init[1]});
        std::ostringstream os;
        write_csv(os, tr);
        m.add(save(c, "toy_strong_" + std::to_string(i++) + ".csv", os.str()));
    }
    i = 0;
    for (double eta : t.value("weak", std::vector<double>{100.0})) {
        std::ostringstream os;
        write_csv(os, integrate_weak(eta, p));
        m.add(save(c, "toy_weak_" + std::to_string(i++) + ".csv", os.str()));
    }
    json casc = json::array();
    for (double eta : t.value("cascade", std::vector<double>{16.0, 1e4, 1e6})) {
        const auto g = cascade_amplification(eta, p);
        casc.push_back({{"eta", eta}, {"log_product", g.log_product}, {"comparator", g.comparator},
                        {"leading", g.leading}, {"terms", g.terms}});
    }
    m.add(save(c, "cascade.json", casc.dump(2)));
    return 0;
}

int cmd_audit(const Ctx& c, Manifest& m) {
    const json a = c.cfg.value("audit", json::object());
    const std::size_t n = a.value("n_samples", std::size_t{20000});
    const std::uint64_t seed = c.has_seed ? c.seed : a.value("seed", std::uint64_t{1});
    const auto reps = run_all_audits(n, seed);
    bool ok = true;
    for (const auto& r : reps) {
        ok = ok && r.pass;
        std::printf("%-16s %-4s samples=%zu\n", r.id.c_str(), r.pass ? "PASS" : "FAIL", r.samples);
    }
    m.add(save(c, "audits.json", to_json_string(reps)));
    return ok ? 0 : 1;
}

int cmd_scan(const Ctx& c, Manifest& m) {
    auto sc = scan_config_from_json_string(c.config_text);
    if (c.has_seed) sc.base.init.seed = c.seed;
    const auto res = threshold_scan(sc.base, sc.settings);
    m.add(emit(res, c.out, "scan", EmitFormat::plotdata));
    m.add(emit(res, c.out, "scan", EmitFormat::json));
    for (const auto& cell : res.cells)
        std::printf("nu=%g eps=%g amp=%.4g rate=%.4g lin=%.4g %s\n", cell.nu, cell.eps, cell.amplification,
                    cell.rate, cell.linear_rate, cell.verdict.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"couette-lab: Couette flow experiments"};
    app.require_subcommand(1);
    std::string config;
    std::uint64_t seed = 0;
    std::string out = "out";
    Ctx ctx;
    struct Sub {
        const char* name;
        const char* help;
        int (*fn)(const Ctx&, Manifest&);
    };
    const Sub subs[] = {{"lin", "linear propagator and decay fits", cmd_lin},
                        {"nl", "nonlinear run (diagnostics, checkpoints, coordinates)", cmd_nl},
                        {"weights", "weight table dump", cmd_weights},
                        {"toys", "toy models and cascade growth", cmd_toys},
                        {"audit", "sampled lemma audits", cmd_audit},
                        {"scan", "threshold scan over (nu, eps)", cmd_scan}};
    std::vector<CLI::App*> apps;
    for (const auto& s : subs) {
        auto* a = app.add_subcommand(s.name, s.help);
        a->add_option("--config", config, "JSON config file")->required()->check(CLI::ExistingFile);
        a->add_option("--seed", seed, "seed override");
        a->add_option("--out", out, "output directory");
        apps.push_back(a);
    }
    CLI11_PARSE(app, argc, argv);
    try {
        for (std::size_t i = 0; i < apps.size(); ++i) {
            if (!apps[i]->parsed()) continue;
            ctx.config_text = slurp(config);
            ctx.cfg = json::parse(ctx.config_text);
            ctx.has_seed = apps[i]->count("--seed") > 0;
            ctx.seed = seed;
            ctx.out = out;
            fs::create_directories(out);
            std::uint64_t eff = 1;
            if (ctx.has_seed)
                eff = seed;
            else if (i == 4)
                eff = ctx.cfg.value("audit", json::object()).value("seed", std::uint64_t{1});
            else
                eff = ctx.cfg.value("init", json::object()).value("seed", std::uint64_t{1});
            Manifest m(subs[i].name, ctx.config_text, eff);
            const int rc = subs[i].fn(ctx, m);
            std::printf("manifest: %s\n", m.write(out).c_str());
            return rc;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
