#include "couette/linprop.hpp"

#include <cmath>
#include <json.hpp>
#include <ostream>

#include "couette/kernels.hpp"

namespace couette {

double dissipation_integral(double k, double eta, double t0, double t1) {
    const double h = t1 - t0;
    const double a = eta - k * t0;
    const double b = eta - k * t1;
    return h * (k * k + (a * a + a * b + b * b) / 3.0);
}

double viscous_exponent(double k, double eta, double t, double nu) {
    // in sheared variables the lab frequency eta starts at eta + k t
    return nu * dissipation_integral(k, eta + k * t, 0.0, t);
}

EvolveResult exact_evolve(const SpectralField& w_in, double t, double nu) {
    if (t < 0.0 || nu < 0.0) throw std::invalid_argument("exact_evolve needs t >= 0, nu >= 0");
    const Grid& g = w_in.grid;
    EvolveResult res{SpectralField(g), 0, 0.0};
    double lost = 0.0;
    for (int k = -g.Kx; k <= g.Kx; ++k) {
        const double s = k * t * g.Lv;
        const double si = std::round(s);
        const bool lattice = std::abs(s - si) <= 1e-9 * std::max(1.0, std::abs(s));
        if (!lattice) {
            res.truncated += g.nj();
            for (int j = -g.Mv; j <= g.Mv; ++j) {
                const double e = g.eta(j) - k * t;
                lost += std::norm(w_in.at(k, j)) * std::exp(-2.0 * viscous_exponent(k, e, t, nu));
            }
            continue;
        }
        const long shift = static_cast<long>(si);
        for (int j = -g.Mv; j <= g.Mv; ++j) {
            const long src = j + shift;
            if (src < -g.Mv || src > g.Mv) {
                ++res.truncated;
            } else {
                res.field.at(k, j) = w_in.at(k, static_cast<int>(src)) *
                                     std::exp(-viscous_exponent(k, g.eta(j), t, nu));
            }
            // input mode j leaves the window when j - shift is outside it
            const long dst = j - shift;
            if (dst < -g.Mv || dst > g.Mv) {
                const double e = g.eta(j) - k * t;
                lost += std::norm(w_in.at(k, j)) * std::exp(-2.0 * viscous_exponent(k, e, t, nu));
            }
        }
    }
    res.lost_l2 = std::sqrt(g.deta() * lost);
    return res;
}

SpectralField sheared_evolve(const SpectralField& w, double t0, double t1, double nu) {
    const Grid& g = w.grid;
    SpectralField out = w;
    std::vector<double> lf(g.size());
    kernels::viscous_log_factor(g, nu, t0, t1, lf.data());
    kernels::scale_log(out.coef.data(), lf.data(), g.size());
    return out;
}

SpectralField stream_function(const SpectralField& w, double t) {
    SpectralField psi(w.grid);
    kernels::inverse_laplacian(w.grid, w.coef.data(), t, psi.coef.data());
    return psi;
}

SpectralField apply_laplacian(const SpectralField& f, double t) {
    SpectralField out(f.grid);
    const Grid& g = f.grid;
    for (int k = -g.Kx; k <= g.Kx; ++k)
        for (int j = -g.Mv; j <= g.Mv; ++j) {
            const double e = g.eta(j) - k * t;
            out.at(k, j) = -(static_cast<double>(k) * k + e * e) * f.at(k, j);
        }
    return out;
}

LinearNorms linear_norms(const SpectralField& w, double t) {
    const Grid& g = w.grid;
    double sy = 0.0, sx = 0.0, sw = 0.0;
    for (int k = -g.Kx; k <= g.Kx; ++k) {
        if (k == 0) continue;
        for (int j = -g.Mv; j <= g.Mv; ++j) {
            const double m = std::norm(w.at(k, j));
            if (m == 0.0) continue;
            const double e = g.eta(j) - k * t;
            const double sym = static_cast<double>(k) * k + e * e;
            sy += m * e * e / (sym * sym);
            sx += m * static_cast<double>(k) * k / (sym * sym);
            sw += m;
        }
    }
    LinearNorms n;
    n.t = t;
    n.dy_psi = std::sqrt(g.deta() * sy);
    n.dx_psi = std::sqrt(g.deta() * sx);
    n.t_dx_psi = bracket(t) * n.dx_psi;
    n.omega_neq = std::sqrt(g.deta() * sw);
    return n;
}

namespace {

DecayFit fit_positive(const std::vector<double>& t, const std::vector<double>& v, DecayModel m,
                      FitWindow w, double nu) {
    std::vector<double> tt, vv;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (v[i] > 0.0 && std::isfinite(std::log(v[i]))) {
            tt.push_back(t[i]);
            vv.push_back(v[i]);
        }
    return fit_decay(tt, vv, m, w, nu);
}

nlohmann::json fit_json(const DecayFit& f) {
    return {{"model", model_name(f.model)}, {"C", f.C},          {"rate", f.rate},
            {"residual", f.residual},       {"nu", f.nu},        {"t0", f.window.t0},
            {"t1", f.window.t1},            {"points", f.points}};
}

}  // namespace

DecayReport decay_report(const SpectralField& w_in, double nu, const std::vector<double>& times,
                         FitWindow power_window) {
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw std::invalid_argument("times must increase");
    DecayReport r;
    r.nu = nu;
    auto parts = project_modes(w_in);
    r.h2_neq = hsigma_norm(parts.second, 2.0);
    r.l2_neq = l2_norm(parts.second);
    for (double t : times) r.rows.push_back(linear_norms(sheared_evolve(w_in, 0.0, t, nu), t));
    if (r.l2_neq == 0.0) return r;

    std::vector<double> ts, y1, y2, y3, dy, dx;
    for (const auto& row : r.rows) {
        ts.push_back(row.t);
        y1.push_back(bracket(row.t) * row.dy_psi / r.h2_neq);
        y2.push_back(bracket(row.t) * row.t_dx_psi / r.h2_neq);
        y3.push_back(row.omega_neq / r.l2_neq);
        dy.push_back(row.dy_psi);
        dx.push_back(row.dx_psi);
    }
    r.dy_power = fit_positive(ts, dy, DecayModel::power, power_window, nu);
    r.dx_power = fit_positive(ts, dx, DecayModel::power, power_window, nu);
    if (nu > 0.0) {
        const FitWindow all{power_window.t0, 1e300};
        r.dy_exp = fit_positive(ts, y1, DecayModel::exp_cubic, all, nu);
        r.dx_exp = fit_positive(ts, y2, DecayModel::exp_cubic, all, nu);
        r.omega_exp = fit_positive(ts, y3, DecayModel::exp_cubic, all, nu);
        r.has_exp = true;
    }
    return r;
}

void write_csv(std::ostream& os, const DecayReport& r) {
    os.precision(17);
    os << "t,dy_psi,t_dx_psi,omega_neq\n";
    for (const auto& row : r.rows)
        os << row.t << ',' << row.dy_psi << ',' << row.t_dx_psi << ',' << row.omega_neq << '\n';
}

std::string to_json_string(const DecayReport& r) {
    nlohmann::json j;
    j["nu"] = r.nu;
    j["h2_neq"] = r.h2_neq;
    j["l2_neq"] = r.l2_neq;
    j["samples"] = r.rows.size();
    if (r.l2_neq > 0.0) {
        j["dy_power"] = fit_json(r.dy_power);
        j["dx_power"] = fit_json(r.dx_power);
    }
    if (r.has_exp) {
        j["dy_exp_cubic"] = fit_json(r.dy_exp);
        j["dx_exp_cubic"] = fit_json(r.dx_exp);
        j["omega_exp_cubic"] = fit_json(r.omega_exp);
    }
    return j.dump(2);
}

}  // namespace couette
