#include "couette/coordsys.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <ostream>

namespace couette {

Grid profile_grid(const Grid& g) { return Grid::make(0, g.Mv, g.Lv); }

SpectralField zero_mode_velocity(const SpectralField& w) {
    const Grid& g = w.grid;
    SpectralField u(profile_grid(g));
    for (int j = -g.Mv; j <= g.Mv; ++j)
        if (j != 0) u.at(0, j) = cplx(0.0, 1.0) * w.at(0, j) / g.eta(j);
    return u;
}

SpectralField zero_mode_vorticity(const SpectralField& w) {
    const Grid& g = w.grid;
    SpectralField f(profile_grid(g));
    for (int j = -g.Mv; j <= g.Mv; ++j) f.at(0, j) = w.at(0, j);
    return f;
}

namespace {

SpectralField dy(const SpectralField& p) {
    SpectralField out(p.grid);
    for (int j = -p.grid.Mv; j <= p.grid.Mv; ++j) out.at(0, j) = cplx(0.0, p.grid.eta(j)) * p.at(0, j);
    return out;
}

std::vector<double> samples(const SpectralField& p) {
    const Grid& g = p.grid;
    const int n = 4 * g.nj();
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        const double y = 2.0 * M_PI * g.Lv * i / n;
        double s = p.at(0, 0).real();
        for (int j = 1; j <= g.Mv; ++j) s += 2.0 * std::real(p.at(0, j) * std::polar(1.0, g.eta(j) * y));
        out[i] = s;
    }
    return out;
}

double lagrange(const std::vector<double>& x, int i, double t) {
    double v = 1.0;
    for (std::size_t m = 0; m < x.size(); ++m)
        if (static_cast<int>(m) != i) v *= (t - x[m]) / (x[i] - x[m]);
    return v;
}

void check_series(const std::vector<SpectralField>& u) {
    if (u.empty()) throw CoordError("empty series");
    for (const auto& f : u)
        if (!f.grid.same_modes(u.front().grid) || f.grid.Kx != 0)
            throw CoordError("series entries must share one Kx = 0 grid");
}

}  // namespace

double profile_linf(const SpectralField& p) {
    double m = 0.0;
    for (double v : samples(p)) m = std::max(m, std::abs(v));
    return m;
}

std::vector<double> duhamel_weights(double a, double dt, int n, int first, int npts) {
    using GL = boost::math::quadrature::gauss<double, 16>;
    std::vector<double> x(npts);
    for (int i = 0; i < npts; ++i) x[i] = first + i - n;  // nodes in units of dt, interval [0,1]
    // subdivide so the exponential stays smooth on each piece
    const int pieces = std::max(1, static_cast<int>(std::ceil(a * dt)));
    std::vector<double> w(npts, 0.0);
    for (int p = 0; p < pieces; ++p) {
        const double lo = static_cast<double>(p) / pieces, hi = static_cast<double>(p + 1) / pieces;
        for (int i = 0; i < npts; ++i) {
            auto f = [&](double s) { return std::exp(-a * dt * (1.0 - s)) * lagrange(x, i, s); };
            w[i] += GL::integrate(f, lo, hi);
        }
    }
    for (auto& v : w) v *= dt;
    return w;
}

VSolution solve_v(const std::vector<SpectralField>& u0, double dt, double nu) {
    check_series(u0);
    if (!(dt > 0.0)) throw CoordError("dt must be positive");
    if (nu < 0.0) throw CoordError("nu must be >= 0");
    const Grid& g = u0.front().grid;
    const int N = static_cast<int>(u0.size());
    const int npts = std::min(6, N);
    VSolution s;
    s.dt = dt;
    s.nu = nu;
    s.phi.assign(N, SpectralField(g));
    for (int n = 0; n + 1 < N; ++n) {
        const int first = std::clamp(n - 2, 0, N - npts);
        for (int j = -g.Mv; j <= g.Mv; ++j) {
            const double a = nu * g.eta(j) * g.eta(j);
            const auto w = duhamel_weights(a, dt, n, first, npts);
            cplx acc = std::exp(-a * dt) * s.phi[n].at(0, j);
            for (int i = 0; i < npts; ++i) acc += w[i] * u0[first + i].at(0, j);
            s.phi[n + 1].at(0, j) = acc;
        }
    }
    s.qbar.reserve(N);
    for (int n = 0; n < N; ++n) s.qbar.push_back(n == 0 ? u0[0] : (1.0 / (n * dt)) * s.phi[n]);
    s.heat_residual.assign(N, -1.0);
    for (int n = 3; n + 3 < N; ++n) {
        double num = 0.0, den = 0.0;
        for (int j = -g.Mv; j <= g.Mv; ++j) {
            auto P = [&](int m) { return s.phi[m].at(0, j); };
            const cplx d = (-P(n - 3) + 9.0 * P(n - 2) - 45.0 * P(n - 1) + 45.0 * P(n + 1) -
                            9.0 * P(n + 2) + P(n + 3)) / (60.0 * dt);
            const cplx r = d + nu * g.eta(j) * g.eta(j) * P(n) - u0[n].at(0, j);
            num += std::norm(r);
            den += std::norm(u0[n].at(0, j));
        }
        s.heat_residual[n] = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    }
    return s;
}

CoordState derived_fields(const SpectralField& qbar, const SpectralField& u0, const SpectralField& f0,
                          double t, double nu) {
    (void)nu;
    if (t < 0.0) throw CoordError("t must be >= 0");
    CoordState c;
    c.t = t;
    c.qbar = qbar;
    c.h = dy(qbar);
    c.v2 = dy(c.h);
    c.q = SpectralField(qbar.grid);
    c.hbar = SpectralField(qbar.grid);
    if (t >= 1.0) {
        c.has_q = true;
        c.q = (1.0 / t) * (u0 - qbar);
    }
    if (t > 0.0) c.hbar = (-1.0 / t) * (f0 + c.h);
    const auto vp = samples(c.h);
    const auto dvp = samples(c.v2);       // d_y v' computed from v''
    const auto v2s = samples(dy(c.h));    // v'' as the second derivative of v - y
    c.min_vprime = HUGE_VAL;
    for (std::size_t i = 0; i < vp.size(); ++i) {
        const double a = 1.0 + vp[i];
        c.min_vprime = std::min(c.min_vprime, a);
        c.h_linf = std::max(c.h_linf, std::abs(vp[i]));
        // in y-variables d_v = (1/v') d_y
        if (a > 0.0) c.chain_residual = std::max(c.chain_residual, std::abs(a * (dvp[i] / a) - v2s[i]));
    }
    c.diffeomorphism = c.min_vprime > 0.0;
    return c;
}

CoordSeries coord_series(const std::vector<SpectralField>& u0, const std::vector<SpectralField>& f0,
                         double dt, double nu) {
    check_series(u0);
    check_series(f0);
    if (u0.size() != f0.size()) throw CoordError("velocity and vorticity series differ in length");
    const auto v = solve_v(u0, dt, nu);
    const int N = static_cast<int>(u0.size());
    CoordSeries out;
    for (int n = 0; n < N; ++n) out.states.push_back(derived_fields(v.qbar[n], u0[n], f0[n], n * dt, nu));
    out.dtv_residual.assign(N, -1.0);
    for (int n = 2; n + 2 < N; ++n) {
        const auto& c = out.states[n];
        if (!c.has_q) continue;
        const auto dtv = (1.0 / (12.0 * dt)) * (v.qbar[n - 2] - 8.0 * v.qbar[n - 1] + 8.0 * v.qbar[n + 1] - v.qbar[n + 2]);
        out.dtv_residual[n] = l2_norm(dtv - c.q - nu * c.v2);
    }
    return out;
}

CoordEnergy coord_energy(const CoordState& c, MultiplierBank& bank, double eps) {
    const auto& p = bank.params();
    const Grid& g = c.q.grid;
    CoordEnergy e;
    const double t = c.t;
    const double lam = bank.lambda()(t);
    const double nub = std::pow(p.nu, p.beta);
    double sq = 0.0, sg = 0.0, sh = 0.0, sr = 0.0;
    for (int j = -g.Mv; j <= g.Mv; ++j) {
        const double eta = g.eta(j);
        const double mq = std::norm(c.q.at(0, j)), mb = std::norm(c.hbar.at(0, j)), mh = std::norm(c.h.at(0, j));
        if (mq == 0.0 && mb == 0.0 && mh == 0.0) continue;
        const auto m = bank.parts(t, 0, eta, lam);
        const double ds = p.s > 0.0 ? std::pow(bracket(eta), -2.0 * p.s) : 1.0;
        const double a2 = std::exp(2.0 * m.logA);
        sq += a2 * ds * mq;
        sh += a2 * ds * mb;
        sg += std::exp(2.0 * m.logAgamma) * mq;
        if (mh > 0.0) sr += std::exp(2.0 * bank.log_AR(t, eta, lam)) * mh;
    }
    const double de = g.deta();
    e.q_A = nub * t * t * t * de * sq;
    e.q_gamma = t * t * t * t * de * sg;
    e.hbar_A = nub * t * t * t * de * sh;
    e.h_R = eps * nub * de * sr;
    return e;
}

void write_csv(std::ostream& os, const CoordSeries& s, const std::vector<CoordEnergy>& e) {
    os << "t,has_q,min_vprime,h_linf,chain_residual,dtv_residual,q_A,q_gamma,hbar_A,h_R\n";
    os.precision(17);
    for (std::size_t i = 0; i < s.states.size(); ++i) {
        const auto& c = s.states[i];
        CoordEnergy z;
        const CoordEnergy& en = i < e.size() ? e[i] : z;
        os << c.t << ',' << (c.has_q ? 1 : 0) << ',' << c.min_vprime << ',' << c.h_linf << ','
           << c.chain_residual << ',' << s.dtv_residual[i] << ',' << en.q_A << ',' << en.q_gamma
           << ',' << en.hbar_A << ',' << en.h_R << '\n';
    }
}

}  // namespace couette
