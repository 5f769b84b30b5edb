#include "couette/nlsolve.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "couette/kernels.hpp"

namespace couette {

using nlohmann::json;

// ---------------------------------------------------------------- config

void SimConfig::validate() const {
    if (Nz < 4 || Nv < 4) throw ConfigError("grid too small");
    if (!(Lv > 0.0)) throw ConfigError("Lv must be positive");
    if (!(nu >= 0.0)) throw ConfigError("nu must be >= 0");
    if (!(t_final >= 0.0)) throw ConfigError("t_final must be >= 0");
    if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("cfl safety must lie in (0,1]");
    if (!(dt_max > 0.0)) throw ConfigError("dt_max must be positive");
    if (!(diag_every > 0.0)) throw ConfigError("diag_every must be positive");
    if (checkpoint_every < 0.0) throw ConfigError("checkpoint_every must be >= 0");
    if (!(growth_abort > 1.0)) throw ConfigError("growth_abort must exceed 1");
    if (init.profile != "gevrey" && init.profile != "modes")
        throw ConfigError("unknown init profile '" + init.profile + "'");
    if (init.profile == "gevrey") {
        if (!(init.eps > 0.0)) throw ConfigError("init amplitude must be positive");
        if (!(init.zero_mode_boost > 0.0)) throw ConfigError("zero_mode_boost must be positive");
        if (!(init.pretilt >= 0.0)) throw ConfigError("pretilt must be >= 0");
    }
    grid();  // dealiasing check
    multipliers.validate();
}

namespace {

Scheme scheme_from_name(const std::string& s) {
    if (s == "lawson_ralston3") return Scheme::lawson_ralston3;
    if (s == "ssp_rk3") return Scheme::ssp_rk3;
    throw ConfigError("unknown scheme '" + s + "'");
}

const char* scheme_name(Scheme s) {
    return s == Scheme::ssp_rk3 ? "ssp_rk3" : "lawson_ralston3";
}

}  // namespace

SimConfig config_from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        SimConfig c;
        if (j.contains("grid")) {
            const auto& g = j["grid"];
            c.Nz = g.value("Nz", c.Nz);
            c.Nv = g.value("Nv", c.Nv);
            c.Lv = g.value("Lv", c.Lv);
        }
        c.nu = j.value("nu", c.nu);
        c.t_final = j.value("t_final", c.t_final);
        c.cfl = j.value("cfl", c.cfl);
        c.dt_max = j.value("dt_max", c.dt_max);
        c.scheme = scheme_from_name(j.value("scheme", std::string(scheme_name(c.scheme))));
        c.nonlinear = j.value("nonlinear", c.nonlinear);
        c.diag_every = j.value("diag_every", c.diag_every);
        c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
        c.monitor_energy = j.value("monitor_energy", c.monitor_energy);
        c.check_zero_mode = j.value("check_zero_mode", c.check_zero_mode);
        c.growth_abort = j.value("growth_abort", c.growth_abort);
        c.max_backward_log = j.value("max_backward_log", c.max_backward_log);

        json m = j.value("multipliers", json::object());
        // weights need nu > 0; an inviscid run borrows 1e-4 for its diagnostics
        const double mnu = m.value("nu", c.nu > 0.0 ? c.nu : 1e-4);
        std::optional<double> dl;
        if (m.contains("delta_lambda")) dl = m["delta_lambda"].get<double>();
        c.multipliers = MultiplierParams::make(m.value("beta", 1.0 / 6.0), mnu,
                                               m.value("lambda0", 1.0), m.value("lambda1", 0.5),
                                               m.value("sigma", 11.0), m.value("gamma", 7.0), dl);

        json in = j.value("init", json::object());
        c.init.profile = in.value("profile", c.init.profile);
        c.init.eps = in.value("eps", c.init.eps);
        c.init.beta = in.value("beta", c.multipliers.beta);
        c.init.s = in.value("s", c.init.s);
        c.init.lambda0 = in.value("lambda0", c.init.lambda0);
        c.init.sigma = in.value("sigma", c.init.sigma);
        c.init.seed = in.value("seed", c.init.seed);
        c.init.zero_mode_boost = in.value("zero_mode_boost", c.init.zero_mode_boost);
        c.init.pretilt = in.value("pretilt", c.init.pretilt);
        if (in.contains("modes"))
            for (const auto& e : in["modes"])
                c.init.modes.push_back({e.at(0).get<double>(), e.at(1).get<double>(),
                                        e.at(2).get<double>(), e.at(3).get<double>()});
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config field: ") + e.what());
    }
}

SimConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return config_from_json_string(ss.str());
}

std::string to_json_string(const SimConfig& c) {
    json j;
    j["grid"] = {{"Nz", c.Nz}, {"Nv", c.Nv}, {"Lv", c.Lv}};
    j["nu"] = c.nu;
    j["t_final"] = c.t_final;
    j["cfl"] = c.cfl;
    j["dt_max"] = c.dt_max;
    j["scheme"] = scheme_name(c.scheme);
    j["nonlinear"] = c.nonlinear;
    j["diag_every"] = c.diag_every;
    j["checkpoint_every"] = c.checkpoint_every;
    j["monitor_energy"] = c.monitor_energy;
    j["check_zero_mode"] = c.check_zero_mode;
    j["growth_abort"] = c.growth_abort;
    j["max_backward_log"] = c.max_backward_log;
    const auto& m = c.multipliers;
    j["multipliers"] = {{"beta", m.beta},       {"nu", m.nu},       {"lambda0", m.lambda0},
                        {"lambda1", m.lambda1}, {"sigma", m.sigma}, {"gamma", m.gamma},
                        {"delta_lambda", m.delta_lambda}};
    json in = {{"profile", c.init.profile},
               {"eps", c.init.eps},
               {"beta", c.init.beta},
               {"s", c.init.s},
               {"lambda0", c.init.lambda0},
               {"sigma", c.init.sigma},
               {"seed", c.init.seed},
               {"zero_mode_boost", c.init.zero_mode_boost},
               {"pretilt", c.init.pretilt}};
    if (!c.init.modes.empty()) {
        json arr = json::array();
        for (const auto& e : c.init.modes) arr.push_back({e[0], e[1], e[2], e[3]});
        in["modes"] = arr;
    }
    j["init"] = in;
    return j.dump(2);
}

// ---------------------------------------------------------------- initial data

SpectralField init_data(const SimConfig& c) {
    const Grid g = c.grid();
    SpectralField f(g);
    const InitSpec& in = c.init;
    if (in.profile == "modes") {
        for (const auto& e : in.modes) {
            const int k = static_cast<int>(e[0]), j = static_cast<int>(e[1]);
            if (std::abs(k) > g.Kx || std::abs(j) > g.Mv) throw ConfigError("init mode outside the grid");
            f.at(k, j) = cplx(e[2], e[3]);
            f.at(-k, -j) = cplx(e[2], -e[3]);
        }
        return f;
    }
    const double s = in.s >= 0.0 ? in.s : s_of_beta(in.beta);
    const double lam = in.lambda0 >= 0.0 ? in.lambda0 : c.multipliers.lambda0;
    const double sig = in.sigma >= 0.0 ? in.sigma : c.multipliers.sigma;
    std::mt19937_64 rng(in.seed);
    // phases drawn in index order so the seed fixes the field
    for (int k = -g.Kx; k <= g.Kx; ++k)
        for (int j = -g.Mv; j <= g.Mv; ++j) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            const double a = l1(k, g.eta(j) - k * in.pretilt);
            const double ex = s > 0.0 ? lam * std::pow(a, s) : 0.0;
            double mag = std::exp(-ex - (sig + 1.0) * std::log(bracket(a)));
            if (k == 0) mag *= in.zero_mode_boost;
            // the upper half plane carries the phase, the lower one its conjugate
            if (k > 0 || (k == 0 && j > 0)) {
                f.at(k, j) = std::polar(mag, 2.0 * M_PI * u);
                f.at(-k, -j) = std::conj(f.at(k, j));
            }
        }
    f.at(0, 0) = 0.0;
    const double target = in.eps * std::pow(c.nu > 0.0 ? c.nu : c.multipliers.nu, in.beta);
    f *= target / gevrey_norm(f, s, lam, sig);
    return f;
}

// ---------------------------------------------------------------- stepper

struct Stepper::Work {
    Transform tr;
    std::size_t np;
    std::vector<double> a, b, c, d, out;
    std::vector<cplx> psi, tmp;
    std::vector<double> lf;
    SpectralField k1, k2, k3, u1, u2;
    explicit Work(const Grid& g)
        : tr(g),
          np(static_cast<std::size_t>(g.Nz) * g.Nv),
          a(np), b(np), c(np), d(np), out(np),
          psi(g.size()), tmp(g.size()), lf(g.size()),
          k1(g), k2(g), k3(g), u1(g), u2(g) {}
};

Stepper::Stepper(const Grid& g, double nu, Scheme scheme, bool nonlinear, double cfl,
                 double max_backward_log)
    : g_(g), nu_(nu), scheme_(scheme), nl_(nonlinear), cfl_(cfl), max_back_(max_backward_log),
      w_(std::make_unique<Work>(g)) {}

Stepper::~Stepper() = default;

namespace {

void deriv(const Grid& g, const cplx* in, cplx* out, bool dz) {
    for (int k = -g.Kx; k <= g.Kx; ++k)
        for (int j = -g.Mv; j <= g.Mv; ++j) {
            const std::size_t i = g.index(k, j);
            out[i] = cplx(0.0, dz ? k : g.eta(j)) * in[i];
        }
}

double max_speed(const std::vector<double>& a, const std::vector<double>& c) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::hypot(a[i], c[i]));
    return m;
}

}  // namespace

double Stepper::eval(const SpectralField& w, double t, SpectralField& out, double* defect) {
    Work& W = *w_;
    kernels::inverse_laplacian(g_, w.coef.data(), t, W.psi.data());
    deriv(g_, W.psi.data(), W.tmp.data(), false);
    W.tr.to_physical(W.tmp.data(), W.a.data());  // d_v psi
    deriv(g_, W.psi.data(), W.tmp.data(), true);
    W.tr.to_physical(W.tmp.data(), W.c.data());  // d_z psi
    const double umax = max_speed(W.a, W.c);
    if (!nl_) {
        std::fill(out.coef.begin(), out.coef.end(), cplx(0.0));
        if (defect) *defect = 0.0;
        return umax;
    }
    deriv(g_, w.coef.data(), W.tmp.data(), true);
    W.tr.to_physical(W.tmp.data(), W.b.data());  // d_z w
    deriv(g_, w.coef.data(), W.tmp.data(), false);
    W.tr.to_physical(W.tmp.data(), W.d.data());  // d_v w
    kernels::jacobian(W.a.data(), W.b.data(), W.c.data(), W.d.data(), W.out.data(), W.np);
    W.tr.from_physical(W.out.data(), out.coef.data());
    if (defect) {
        // the k = 0 row must be -d_v of the z-average of w d_z psi
        W.tr.to_physical(w.coef.data(), W.b.data());
        for (std::size_t i = 0; i < W.np; ++i) W.out[i] = W.b[i] * W.c[i];
        W.tr.from_physical(W.out.data(), W.tmp.data());
        double worst = 0.0, scale = 0.0;
        for (int j = -g_.Mv; j <= g_.Mv; ++j) {
            const cplx n = out.at(0, j);
            const cplx r = -cplx(0.0, g_.eta(j)) * W.tmp[g_.index(0, j)];
            worst = std::max(worst, std::abs(n - r));
            scale = std::max({scale, std::abs(n), std::abs(r)});
        }
        for (const auto& v : out.coef) scale = std::max(scale, std::abs(v));
        *defect = scale > 0.0 ? worst / scale : 0.0;
    }
    return umax;
}

double Stepper::nonlinear(const SpectralField& w, double t, SpectralField& out) {
    return eval(w, t, out, nullptr);
}

double Stepper::zero_mode_defect(const SpectralField& w, double t) {
    SpectralField n(g_);
    double d = 0.0;
    eval(w, t, n, &d);
    return d;
}

double Stepper::cfl_dt(const SpectralField& w, double t) {
    Work& W = *w_;
    kernels::inverse_laplacian(g_, w.coef.data(), t, W.psi.data());
    deriv(g_, W.psi.data(), W.tmp.data(), false);
    W.tr.to_physical(W.tmp.data(), W.a.data());
    deriv(g_, W.psi.data(), W.tmp.data(), true);
    W.tr.to_physical(W.tmp.data(), W.c.data());
    const double u = max_speed(W.a, W.c);
    return u > 0.0 ? cfl_ * std::min(g_.dz(), g_.dv()) / u : HUGE_VAL;
}

StepResult Stepper::step(SimState& s, double dt, bool check_zero_mode) {
    return step_impl(s, dt, check_zero_mode, false);
}

StepResult Stepper::advance(SimState& s, double dt_cap, bool check_zero_mode) {
    return step_impl(s, dt_cap, check_zero_mode, true);
}

StepResult Stepper::step_impl(SimState& s, double dt, bool check_zero_mode, bool clip) {
    Work& W = *w_;
    StepResult r;
    r.dt = dt;
    if (!(dt > 0.0)) throw std::invalid_argument("step needs dt > 0");
    const double t = s.t;
    const SpectralField& u = s.omega;
    r.max_u = eval(u, t, W.k1, check_zero_mode ? &r.zero_mode_defect : nullptr);
    r.suggested_dt = r.max_u > 0.0 ? cfl_ * std::min(g_.dz(), g_.dv()) / r.max_u : HUGE_VAL;
    if (clip) r.dt = dt = std::min(dt, r.suggested_dt);
    if (dt > r.suggested_dt * (1.0 + 1e-12)) {
        r.accepted = false;
        r.reason = "CFL";
        return r;
    }
    const std::size_t n = g_.size();
    auto factor = [&](double t0, double t1) {
        kernels::viscous_log_factor(g_, nu_, t0, t1, W.lf.data());
        return W.lf.data();
    };

    if (scheme_ == Scheme::lawson_ralston3) {
        // nodes 0, 1/2, 3/4; weights 2/9, 1/3, 4/9; every factor runs forward in time
        const double h = dt;
        kernels::axpy_scaled(W.u1.coef.data(), u.coef.data(), W.k1.coef.data(), 0.5 * h,
                             factor(t, t + 0.5 * h), n);
        eval(W.u1, t + 0.5 * h, W.k2, nullptr);
        // u3 = E(t+h/2 -> t+3h/4) [E(t -> t+h/2) u + 3h/4 k2]
        W.u2 = u;
        kernels::scale_log(W.u2.coef.data(), factor(t, t + 0.5 * h), n);
        kernels::axpy_scaled(W.u2.coef.data(), W.u2.coef.data(), W.k2.coef.data(), 0.75 * h,
                             factor(t + 0.5 * h, t + 0.75 * h), n);
        eval(W.u2, t + 0.75 * h, W.k3, nullptr);
        // u+ = E(3h/4->h)[E(h/2->3h/4)[E(0->h/2)(u + 2h/9 k1) + h/3 k2] + 4h/9 k3]
        SpectralField v(g_);
        kernels::axpy_scaled(v.coef.data(), u.coef.data(), W.k1.coef.data(), 2.0 * h / 9.0,
                             factor(t, t + 0.5 * h), n);
        kernels::axpy_scaled(v.coef.data(), v.coef.data(), W.k2.coef.data(), h / 3.0,
                             factor(t + 0.5 * h, t + 0.75 * h), n);
        kernels::axpy_scaled(v.coef.data(), v.coef.data(), W.k3.coef.data(), 4.0 * h / 9.0,
                             factor(t + 0.75 * h, t + h), n);
        s.omega = std::move(v);
    } else {
        const double h = dt;
        // the middle stage pulls back from t+h to t+h/2
        double back = 0.0;
        {
            const double* lf = factor(t + h, t + 0.5 * h);
            for (std::size_t i = 0; i < n; ++i) back = std::max(back, lf[i]);
        }
        if (back > max_back_) {
            r.accepted = false;
            r.reason = "backward factor";
            r.suggested_dt = std::min(r.suggested_dt, 0.9 * h * std::sqrt(max_back_ / back));
            return r;
        }
        kernels::axpy_scaled(W.u1.coef.data(), u.coef.data(), W.k1.coef.data(), h, factor(t, t + h), n);
        eval(W.u1, t + h, W.k2, nullptr);
        // u2 = 3/4 E(0->h/2) u + 1/4 E(h->h/2)(u1 + h k2)
        SpectralField a(g_), b(g_);
        a = u;
        kernels::scale_log(a.coef.data(), factor(t, t + 0.5 * h), n);
        kernels::axpy_scaled(b.coef.data(), W.u1.coef.data(), W.k2.coef.data(), h,
                             factor(t + h, t + 0.5 * h), n);
        for (std::size_t i = 0; i < n; ++i) W.u2.coef[i] = 0.75 * a.coef[i] + 0.25 * b.coef[i];
        eval(W.u2, t + 0.5 * h, W.k3, nullptr);
        // u+ = 1/3 E(0->h) u + 2/3 E(h/2->h)(u2 + h k3)
        a = u;
        kernels::scale_log(a.coef.data(), factor(t, t + h), n);
        kernels::axpy_scaled(b.coef.data(), W.u2.coef.data(), W.k3.coef.data(), h,
                             factor(t + 0.5 * h, t + h), n);
        for (std::size_t i = 0; i < n; ++i) a.coef[i] = a.coef[i] / 3.0 + 2.0 * b.coef[i] / 3.0;
        s.omega = std::move(a);
    }
    s.t = t + dt;
    ++s.steps;
    return r;
}

// ---------------------------------------------------------------- diagnostics

EnergyDiag energy_monitor(const SpectralField& f, double t, double nu, MultiplierBank& bank) {
    const Grid& g = f.grid;
    const auto& p = bank.params();
    const double lam = bank.lambda()(t);
    const double lamdot = std::abs(bank.lambda().dot(t));
    std::vector<double> la(g.size()), lg(g.size());
    std::vector<double> wl(g.size()), ww(g.size()), wg(g.size()), wd(g.size());
    for (int k = -g.Kx; k <= g.Kx; ++k)
        for (int j = -g.Mv; j <= g.Mv; ++j) {
            const std::size_t i = g.index(k, j);
            if (f.coef[i] == cplx(0.0)) {
                la[i] = lg[i] = -HUGE_VAL;
                wl[i] = ww[i] = wg[i] = wd[i] = -HUGE_VAL;
                continue;
            }
            const double eta = g.eta(j);
            const auto m = bank.parts(t, k, eta, lam);
            la[i] = m.logA;
            lg[i] = k != 0 ? m.logAgamma : -HUGE_VAL;
            // log sqrt(factor) + log A so weighted_sq_sum squares to factor |A f|^2
            auto add = [&](double fac) { return fac > 0.0 ? m.logA + 0.5 * std::log(fac) : -HUGE_VAL; };
            wl[i] = add(lamdot * m.abs_pow_s);
            ww[i] = add(m.dlogw);
            wg[i] = add(m.dlogg);
            const double e = eta - k * t;
            wd[i] = add(nu * (static_cast<double>(k) * k + e * e));
        }
    (void)p;
    const double de = g.deta();
    EnergyDiag d;
    d.A2 = de * kernels::weighted_sq_sum(g, f.coef.data(), la.data());
    d.Agamma2_neq = de * kernels::weighted_sq_sum(g, f.coef.data(), lg.data());
    d.ck_lambda = de * kernels::weighted_sq_sum(g, f.coef.data(), wl.data());
    d.ck_w = de * kernels::weighted_sq_sum(g, f.coef.data(), ww.data());
    d.ck_g = de * kernels::weighted_sq_sum(g, f.coef.data(), wg.data());
    d.dissipation = de * kernels::weighted_sq_sum(g, f.coef.data(), wd.data());
    return d;
}

std::vector<std::string> diag_columns() {
    return {"t",     "steps", "dt",   "l2",   "l2_neq", "l2_zero",   "mean",
            "max_u", "zero_mode_defect",  "A2", "Agamma2_neq", "ck_lambda", "ck_w",
            "ck_g",  "dissipation"};
}

void write_csv(std::ostream& os, const std::vector<DiagRow>& rows) {
    const auto cols = diag_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    os.precision(17);
    for (const auto& r : rows) {
        const auto& e = r.energy;
        os << r.t << ',' << r.steps << ',' << r.dt << ',' << r.l2 << ',' << r.l2_neq << ','
           << r.l2_zero << ',' << r.mean << ',' << r.max_u << ',' << r.zero_mode_defect << ','
           << e.A2 << ',' << e.Agamma2_neq << ',' << e.ck_lambda << ',' << e.ck_w << ',' << e.ck_g
           << ',' << e.dissipation << '\n';
    }
}

// ---------------------------------------------------------------- checkpoints

void save_checkpoint(const std::string& path, const SimState& s) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw CheckpointError("cannot open " + path);
    const char magic[4] = {'C', 'L', 'C', 'K'};
    const std::int64_t steps = s.steps;
    os.write(magic, 4);
    os.write(reinterpret_cast<const char*>(&s.t), sizeof s.t);
    os.write(reinterpret_cast<const char*>(&steps), sizeof steps);
    write_binary(os, s.omega);
    if (!os) throw CheckpointError("write failed: " + path);
}

SimState load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw CheckpointError("cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "CLCK", 4) != 0) throw CheckpointError("bad checkpoint magic: " + path);
    SimState s;
    std::int64_t steps = 0;
    is.read(reinterpret_cast<char*>(&s.t), sizeof s.t);
    is.read(reinterpret_cast<char*>(&steps), sizeof steps);
    if (!is) throw CheckpointError("truncated checkpoint: " + path);
    s.steps = steps;
    try {
        s.omega = read_binary(is);
    } catch (const GridError& e) {
        throw CheckpointError(std::string(e.what()) + ": " + path);
    }
    return s;
}

// ---------------------------------------------------------------- run

namespace {

DiagRow diagnose(const SimState& s, double nu, MultiplierBank* bank) {
    DiagRow r;
    r.t = s.t;
    r.steps = s.steps;
    auto parts = project_modes(s.omega);
    r.l2 = l2_norm(s.omega);
    r.l2_zero = l2_norm(parts.first);
    r.l2_neq = l2_norm(parts.second);
    r.mean = s.omega.coef[s.omega.grid.index(0, 0)].real();
    if (bank) r.energy = energy_monitor(s.omega, s.t, nu, *bank);
    return r;
}

long tick(double t, double every) { return static_cast<long>(std::floor(t / every + 1e-9)); }

}  // namespace

RunResult run(const SimConfig& c, const RunOptions& opt) {
    if (!opt.restart_from.empty()) return run_from(c, load_checkpoint(opt.restart_from), opt);
    SimState s;
    s.omega = init_data(c);
    return run_from(c, std::move(s), opt);
}

RunResult run_from(const SimConfig& c, SimState s, const RunOptions& opt) {
    c.validate();
    const Grid g = c.grid();
    if (!s.omega.grid.same_modes(g)) throw CheckpointError("state does not match the configured grid");
    s.omega.grid = g;
    std::unique_ptr<MultiplierBank> bank;
    if (c.monitor_energy) bank = std::make_unique<MultiplierBank>(c.multipliers);
    Stepper st(g, c.nu, c.scheme, c.nonlinear, c.cfl, c.max_backward_log);

    RunResult res;
    res.rows.push_back(diagnose(s, c.nu, bank.get()));
    if (opt.on_output) opt.on_output(s);
    const double l2_0 = res.rows.front().l2;
    if (!opt.checkpoint_dir.empty()) std::filesystem::create_directories(opt.checkpoint_dir);

    long n_diag = tick(s.t, c.diag_every);
    double defect = 0.0, last_dt = 0.0, last_u = 0.0;
    // the step depends only on the current state and the next output time,
    // so a restart from a checkpoint retraces the same steps
    double cap = HUGE_VAL;
    while (s.t < c.t_final) {
        const double target = std::min(c.t_final, (n_diag + 1) * c.diag_every);
        StepResult r = st.advance(s, std::min({c.dt_max, target - s.t, cap}), c.check_zero_mode);
        if (!r.accepted) {
            ++res.rejected;
            cap = r.suggested_dt;
            if (!(cap > 1e-14 * std::max(1.0, s.t))) {
                res.aborted = true;
                res.abort_reason = "step size collapsed (" + r.reason + ")";
                break;
            }
            continue;
        }
        cap = HUGE_VAL;
        if (s.t > target - 1e-12 * std::max(1.0, target)) s.t = target;
        defect = std::max(defect, r.zero_mode_defect);
        last_dt = r.dt;
        last_u = r.max_u;
        const bool at_output = s.t == target;
        const double l2 = l2_norm(s.omega);
        const bool bad = !std::isfinite(l2) || l2 > c.growth_abort * l2_0;
        if (at_output || bad) {
            DiagRow row = diagnose(s, c.nu, bank.get());
            row.dt = last_dt;
            row.max_u = last_u;
            row.zero_mode_defect = defect;
            defect = 0.0;
            res.rows.push_back(row);
            if (opt.on_output && !bad) opt.on_output(s);
            n_diag = tick(s.t, c.diag_every);
            if (!bad && c.checkpoint_every > 0.0 && !opt.checkpoint_dir.empty() &&
                tick(s.t, c.checkpoint_every) > tick(s.t - last_dt, c.checkpoint_every)) {
                std::ostringstream name;
                name << opt.checkpoint_dir << "/ckpt_" << s.steps << ".bin";
                save_checkpoint(name.str(), s);
                res.checkpoints.push_back(name.str());
            }
        }
        if (bad) {
            res.aborted = true;
            std::ostringstream why;
            why << "non-finite norm or norm growth beyond " << c.growth_abort << "x at t = " << s.t;
            res.abort_reason = why.str();
            break;
        }
    }
    res.final_state = std::move(s);
    return res;
}

}  // namespace couette
