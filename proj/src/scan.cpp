#include "couette/scan.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "couette/linprop.hpp"

namespace couette {

using nlohmann::json;

ScanConfig scan_config_from_json_string(const std::string& text) {
    ScanConfig sc;
    sc.base = config_from_json_string(text);
    const json j = json::parse(text);
    try {
        const json s = j.value("scan", json::object());
        sc.settings.nus = s.value("nus", std::vector<double>{sc.base.nu});
        sc.settings.eps = s.value("eps", std::vector<double>{});
        sc.settings.amp_bound = s.value("amp_bound", sc.settings.amp_bound);
        sc.settings.rate_fraction = s.value("rate_fraction", sc.settings.rate_fraction);
        sc.settings.window_start = s.value("window_start", sc.settings.window_start);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad scan field: ") + e.what());
    }
    for (double nu : sc.settings.nus)
        if (!(nu >= 0.0)) throw ConfigError("scan.nus must be >= 0");
    if (!(sc.settings.amp_bound > 0.0)) throw ConfigError("scan.amp_bound must be > 0");
    return sc;
}

double default_window_start(const SimConfig& c) {
    const Grid g = c.grid();
    return 2.0 * std::abs(g.eta(g.Mv));
}

ScanCell scan_cell(const SimConfig& base, const ScanSettings& s, double nu, double eps) {
    ScanCell cell;
    cell.nu = nu;
    cell.eps = eps;
    try {
        SimConfig c = base;
        c.nu = nu;
        c.init.eps = eps;
        const auto& m = base.multipliers;
        c.multipliers = MultiplierParams::make(m.beta, nu > 0.0 ? nu : 1e-4, m.lambda0, m.lambda1, m.sigma,
                                               m.gamma);
        c.validate();
        const SpectralField f0 = init_data(c);
        const auto res = run(c);
        if (res.rows.empty()) throw std::runtime_error("run produced no rows");
        const double n0 = res.rows.front().l2_neq;
        if (!(n0 > 0.0)) throw std::runtime_error("initial data has no x-dependent part");
        std::vector<double> t, v, vl;
        for (const auto& r : res.rows) {
            t.push_back(r.t);
            v.push_back(r.l2_neq);
            if (r.l2_neq / n0 > cell.amplification) {
                cell.amplification = r.l2_neq / n0;
                cell.t_amplification = r.t;
            }
            vl.push_back(l2_norm(project_modes(sheared_evolve(f0, 0.0, r.t, nu)).second));
        }
        cell.final_ratio = v.back() / n0;
        if (res.aborted) {
            cell.verdict = "unstable";
            cell.error = res.abort_reason;
            return cell;
        }
        cell.window = {s.window_start >= 0.0 ? s.window_start : default_window_start(c), c.t_final};
        const auto fit = fit_decay(t, v, DecayModel::exp_nu13, cell.window, nu);
        const auto lin = fit_decay(t, vl, DecayModel::exp_nu13, cell.window, nu);
        cell.rate = fit.rate;
        cell.linear_rate = lin.rate;
        cell.fit_residual = fit.residual;
        cell.window = fit.window;
        const bool decays = cell.rate >= s.rate_fraction * cell.linear_rate;
        cell.verdict = decays && cell.amplification < s.amp_bound ? "stable" : "unstable";
    } catch (const std::exception& e) {
        cell.verdict = "failed";
        cell.error = e.what();
    }
    return cell;
}

ScanResult threshold_scan(const SimConfig& base, const ScanSettings& s) {
    ScanResult r;
    r.settings = s;
    const std::size_t ne = s.eps.size();
    r.cells.resize(s.nus.size() * ne);
    // one job per cell; inside a job the solver's own parallel regions run serially
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = 0; i < r.cells.size(); ++i) r.cells[i] = scan_cell(base, s, s.nus[i / ne], s.eps[i % ne]);
    return r;
}

std::vector<std::string> scan_columns() {
    return {"nu",         "eps",        "rate",           "linear_rate",     "fit_residual",
            "window_t0",  "window_t1",  "amplification",  "t_amplification", "final_ratio",
            "verdict",    "error"};
}

namespace {

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch == '\n' ? ' ' : ch;
    }
    return q + "\"";
}

}  // namespace

void write_csv(std::ostream& os, const ScanResult& r) {
    const auto cols = scan_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    const auto old = os.precision(17);
    for (const auto& c : r.cells)
        os << c.nu << ',' << c.eps << ',' << c.rate << ',' << c.linear_rate << ',' << c.fit_residual << ','
           << c.window.t0 << ',' << c.window.t1 << ',' << c.amplification << ',' << c.t_amplification << ','
           << c.final_ratio << ',' << c.verdict << ',' << csv_quote(c.error) << '\n';
    os.precision(old);
}

std::string to_json_string(const ScanResult& r) {
    json j;
    j["settings"] = {{"nus", r.settings.nus},
                     {"eps", r.settings.eps},
                     {"amp_bound", r.settings.amp_bound},
                     {"rate_fraction", r.settings.rate_fraction},
                     {"window_start", r.settings.window_start}};
    json cells = json::array();
    for (const auto& c : r.cells)
        cells.push_back({{"nu", c.nu},
                         {"eps", c.eps},
                         {"rate", c.rate},
                         {"linear_rate", c.linear_rate},
                         {"fit_residual", c.fit_residual},
                         {"window", {c.window.t0, c.window.t1}},
                         {"amplification", c.amplification},
                         {"t_amplification", c.t_amplification},
                         {"final_ratio", c.final_ratio},
                         {"verdict", c.verdict},
                         {"error", c.error}});
    j["cells"] = cells;
    return j.dump(2);
}

ScanResult scan_result_from_json_string(const std::string& text) {
    const json j = json::parse(text);
    ScanResult r;
    const auto& s = j.at("settings");
    r.settings.nus = s.at("nus").get<std::vector<double>>();
    r.settings.eps = s.at("eps").get<std::vector<double>>();
    r.settings.amp_bound = s.at("amp_bound");
    r.settings.rate_fraction = s.at("rate_fraction");
    r.settings.window_start = s.at("window_start");
    for (const auto& c : j.at("cells")) {
        ScanCell x;
        x.nu = c.at("nu");
        x.eps = c.at("eps");
        x.rate = c.at("rate");
        x.linear_rate = c.at("linear_rate");
        x.fit_residual = c.at("fit_residual");
        x.window = {c.at("window").at(0).get<double>(), c.at("window").at(1).get<double>()};
        x.amplification = c.at("amplification");
        x.t_amplification = c.at("t_amplification");
        x.final_ratio = c.at("final_ratio");
        x.verdict = c.at("verdict");
        x.error = c.at("error");
        r.cells.push_back(x);
    }
    return r;
}

namespace {

void write_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw EmitError("cannot open " + path + " for writing");
    os << text;
    os.close();
    if (!os) throw EmitError("write failed for " + path);
}

}  // namespace

std::vector<std::string> emit(const ScanResult& r, const std::string& dir, const std::string& stem, EmitFormat f) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw EmitError("cannot create " + dir + ": " + ec.message());
    const std::string base = (fs::path(dir) / stem).string();
    std::vector<std::string> out;
    if (f == EmitFormat::json) {
        write_file(base + ".json", to_json_string(r));
        out.push_back(base + ".json");
        return out;
    }
    std::ostringstream csv;
    write_csv(csv, r);
    write_file(base + ".csv", csv.str());
    out.push_back(base + ".csv");
    if (f == EmitFormat::plotdata) {
        const std::string name = stem + ".csv";
        std::ostringstream gp;
        gp << "# gnuplot " << stem << ".gp  (reads " << name << " only)\n"
           << "set datafile separator ','\n"
           << "set key autotitle columnhead\n"
           << "set logscale x\n"
           << "set xlabel 'eps'\n"
           << "set terminal pngcairo size 1000,400\n"
           << "set output '" << stem << ".png'\n"
           << "set multiplot layout 1,2\n"
           << "set ylabel 'amplification'\n"
           << "plot '" << name << "' using 2:8 with linespoints\n"
           << "set ylabel 'rate / linear rate'\n"
           << "plot '" << name << "' using 2:($3/$4) with linespoints\n"
           << "unset multiplot\n";
        write_file(base + ".gp", gp.str());
        out.push_back(base + ".gp");
    }
    return out;
}

}  // namespace couette
