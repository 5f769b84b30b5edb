#include "couette/toys.hpp"

#include "couette/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace couette {

namespace {

struct StrongSys {
    double r, c, kappa;
    void rhs(double t, const double* y, double* dy) const {
        const double d = t - c;
        dy[0] = kappa * r / (1.0 + d * d) * y[1];
        dy[1] = kappa / r * y[0];
    }
};

struct StrongRun {
    std::vector<double> t, a, b;
    double fa = 0.0, fb = 0.0;
};

StrongRun run_strong(const StrongSys& sys, double t0, double t1, std::array<double, 2> init, int n,
                     int stride) {
    StrongRun out;
    const double h = (t1 - t0) / n;
    double y[2] = {init[0], init[1]};
    auto keep = [&](int i) {
        out.t.push_back(i == n ? t1 : t0 + i * h);
        out.a.push_back(y[0]);
        out.b.push_back(y[1]);
    };
    if (stride > 0) keep(0);
    for (int i = 0; i < n; ++i) {
        const double t = t0 + i * h;
        double k1[2], k2[2], k3[2], k4[2], tmp[2];
        sys.rhs(t, y, k1);
        for (int m = 0; m < 2; ++m) tmp[m] = y[m] + 0.5 * h * k1[m];
        sys.rhs(t + 0.5 * h, tmp, k2);
        for (int m = 0; m < 2; ++m) tmp[m] = y[m] + 0.5 * h * k2[m];
        sys.rhs(t + 0.5 * h, tmp, k3);
        for (int m = 0; m < 2; ++m) tmp[m] = y[m] + h * k3[m];
        sys.rhs(t + h, tmp, k4);
        for (int m = 0; m < 2; ++m) y[m] += h / 6.0 * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]);
        if (stride > 0 && ((i + 1) % stride == 0 || i + 1 == n)) keep(i + 1);
    }
    out.fa = y[0];
    out.fb = y[1];
    return out;
}

struct StrongSetup {
    StrongSys sys;
    double t0, t1;
};

StrongSetup strong_setup(int k, double eta, const MultiplierParams& p) {
    if (static_cast<double>(k) * eta <= 0.0)
        throw std::invalid_argument("strong toy needs k*eta > 0");
    const double e = std::abs(eta);
    if (e < 1.0) throw std::invalid_argument("strong toy needs |eta| >= 1");
    const auto L = layout(e, p.beta);
    const int ak = std::abs(k);
    if (ak < 1 || ak > L.Ns)
        throw std::invalid_argument("very critical interval is empty for this k");
    return {{L.r[ak], e / ak, p.kappa}, L.tminus[ak], L.tplus[ak]};
}

ToyTrajectory strong_meta(int k, double eta, const MultiplierParams& p) {
    ToyTrajectory tr;
    tr.strong = true;
    tr.k = k;
    tr.eta = eta;
    tr.beta = p.beta;
    tr.kappa = p.kappa;
    tr.nu = p.nu;
    return tr;
}

// weak-model rate on I_k, k pinned so shared endpoints use the right branch
struct WeakRate {
    double e, kappa, coef, c;
    bool strong;
    double operator()(double t) const {
        const double d = t - c;
        return strong ? kappa * coef / (coef * coef + d * d) : kappa * coef / (1.0 + d * d);
    }
    double width() const { return strong ? coef : 1.0; }
};

std::vector<WeakRate> weak_rates(double e, const MultiplierParams& p) {
    const int M = integer_part(e);
    const int Ns = std::min(M, integer_part(std::pow(e, p.s)));
    const double fg = frak_g(p.nu, e, p.beta);
    const double n13 = std::cbrt(p.nu);
    std::vector<WeakRate> out;
    for (int k = 1; k <= M; ++k) {
        const double kk = k;
        WeakRate w{e, p.kappa, 0.0, e / kk, k <= Ns};
        if (w.strong)
            w.coef = std::pow(e, 1.0 - 3.0 * p.beta) / std::pow(kk, 2.0 - 3.0 * p.beta);
        else
            w.coef = fg * std::pow(bracket(n13 * e / kk), -1.5) * std::pow(p.nu, p.beta) * e / (kk * kk);
        out.push_back(w);
    }
    return out;
}

// integrates one interval backward from hi (value 1) to lo; returns log of the value at lo
template <class Keep>
double weak_interval(const WeakRate& f, double lo, double hi, int n, Keep&& keep) {
    const double h = -(hi - lo) / n;
    double g = 1.0;
    for (int i = 0; i < n; ++i) {
        const double t = hi + i * h;
        const double k1 = f(t) * g;
        const double k2 = f(t + 0.5 * h) * (g + 0.5 * h * k1);
        const double k3 = f(t + 0.5 * h) * (g + 0.5 * h * k2);
        const double k4 = f(t + h) * (g + h * k3);
        g += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        keep(i + 1 == n ? lo : hi + (i + 1) * h, std::log(g), i + 1 == n);
    }
    return std::log(g);
}

int weak_steps(const WeakRate& f, double lo, double hi, int refine) {
    const double hmax = std::min((hi - lo) / 64.0, 0.05 * f.width());
    return refine * static_cast<int>(std::ceil((hi - lo) / hmax));
}

}  // namespace

ToyTrajectory integrate_strong_fixed(int k, double eta, const MultiplierParams& p,
                                     std::array<double, 2> init, int n) {
    const auto s = strong_setup(k, eta, p);
    auto tr = strong_meta(k, eta, p);
    auto run = run_strong(s.sys, s.t0, s.t1, init, n, 1);
    tr.t = std::move(run.t);
    tr.f_nr = std::move(run.a);
    tr.f_r = std::move(run.b);
    tr.steps = n;
    return tr;
}

ToyTrajectory integrate_strong(int k, double eta, const MultiplierParams& p,
                               std::array<double, 2> init, double tol, int max_points) {
    const auto s = strong_setup(k, eta, p);
    auto tr = strong_meta(k, eta, p);
    const double len = s.t1 - s.t0;
    int n = std::max(256, static_cast<int>(std::ceil(16.0 * len)));
    auto coarse = run_strong(s.sys, s.t0, s.t1, init, n, 0);
    for (int iter = 0;; ++iter) {
        auto fine = run_strong(s.sys, s.t0, s.t1, init, 2 * n, 0);
        const double scale = std::max({std::abs(fine.fa), std::abs(fine.fb), 1e-300});
        const double est =
            std::max(std::abs(fine.fa - coarse.fa), std::abs(fine.fb - coarse.fb)) / (15.0 * scale);
        n *= 2;
        if (est < tol || iter > 12 || (init[0] == 0.0 && init[1] == 0.0)) {
            tr.richardson = est;
            break;
        }
        coarse = std::move(fine);
    }
    const int stride = std::max(1, n / std::max(1, max_points));
    auto run = run_strong(s.sys, s.t0, s.t1, init, n, stride);
    tr.t = std::move(run.t);
    tr.f_nr = std::move(run.a);
    tr.f_r = std::move(run.b);
    tr.steps = n;
    return tr;
}

double integrate_weak_fixed(double eta, const MultiplierParams& p, int refine) {
    const double e = std::abs(eta);
    if (e < 1.0) return 0.0;
    const auto rates = weak_rates(e, p);
    double total = 0.0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        const double k = static_cast<double>(i + 1);
        const double lo = 2.0 * e / (2.0 * k + 1.0), hi = 2.0 * e / (2.0 * k - 1.0);
        total += weak_interval(rates[i], lo, hi, weak_steps(rates[i], lo, hi, refine),
                               [](double, double, bool) {});
    }
    return total;
}

ToyTrajectory integrate_weak(double eta, const MultiplierParams& p, double tol, int max_points) {
    ToyTrajectory tr;
    tr.strong = false;
    tr.eta = eta;
    tr.beta = p.beta;
    tr.kappa = p.kappa;
    tr.nu = p.nu;
    const double e = std::abs(eta);
    if (e < 1.0) {
        tr.t = {0.0};
        tr.log_g = {0.0};
        return tr;
    }
    int refine = 1;
    double coarse = integrate_weak_fixed(e, p, refine);
    for (int iter = 0;; ++iter) {
        const double fine = integrate_weak_fixed(e, p, 2 * refine);
        const double est = std::abs(fine - coarse) / 15.0;  // absolute in log = relative in g
        refine *= 2;
        if (est < tol || iter > 8) {
            tr.richardson = est;
            break;
        }
        coarse = fine;
    }
    const auto rates = weak_rates(e, p);
    long total_steps = 0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        const double k = static_cast<double>(i + 1);
        total_steps += weak_steps(rates[i], 2.0 * e / (2.0 * k + 1.0), 2.0 * e / (2.0 * k - 1.0), refine);
    }
    const long stride = std::max(1L, total_steps / std::max(1, max_points));
    // walk backward, collect, then reverse so times increase
    std::vector<double> ts{2.0 * e}, ls{0.0};
    double base = 0.0;
    long counter = 0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        const double k = static_cast<double>(i + 1);
        const double lo = 2.0 * e / (2.0 * k + 1.0), hi = 2.0 * e / (2.0 * k - 1.0);
        const int n = weak_steps(rates[i], lo, hi, refine);
        base += weak_interval(rates[i], lo, hi, n, [&](double t, double lg, bool last) {
            if (last || ++counter % stride == 0) {
                ts.push_back(t);
                ls.push_back(base + lg);
            }
        });
    }
    std::reverse(ts.begin(), ts.end());
    std::reverse(ls.begin(), ls.end());
    tr.t = std::move(ts);
    tr.log_g = std::move(ls);
    tr.steps = static_cast<int>(std::min<long>(total_steps, INT32_MAX));
    return tr;
}

CascadeGrowth cascade_amplification(double eta, const MultiplierParams& p) {
    CascadeGrowth c;
    const double e = std::abs(eta);
    const double mu = 2.0 * (2.0 - 3.0 * p.beta) * (1.0 + 2.0 * p.C1 * p.kappa);
    c.leading = 0.5 * mu * std::pow(e, p.s);
    c.comparator = w_growth_comparator(e, p.beta, p.kappa, p.C1);
    if (e < 1.0) return c;
    const auto L = layout(e, p.beta);
    c.terms = L.Ns;
    for (int k = 1; k <= L.Ns; ++k) c.log_product += (1.0 + 2.0 * p.C1 * p.kappa) * std::log(L.r[k]);
    return c;
}

void write_csv(std::ostream& os, const ToyTrajectory& tr) {
    os.precision(17);
    if (tr.strong) {
        os << "t,f_NR,f_R\n";
        for (std::size_t i = 0; i < tr.t.size(); ++i)
            os << tr.t[i] << ',' << tr.f_nr[i] << ',' << tr.f_r[i] << '\n';
    } else {
        os << "t,log_f_we\n";
        for (std::size_t i = 0; i < tr.t.size(); ++i) os << tr.t[i] << ',' << tr.log_g[i] << '\n';
    }
}

void write_csv(const std::string& path, const ToyTrajectory& tr) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    write_csv(os, tr);
    if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace couette
