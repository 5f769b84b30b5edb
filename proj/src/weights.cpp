#include "couette/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "couette/grid.hpp"

namespace couette {

namespace {

double tail_integrand(double tau) { return std::pow(1.0 + tau * tau, -0.625); }

}  // namespace

double s_of_beta(double beta) {
    if (!(beta >= 0.0 && beta <= 1.0 / 3.0 + 1e-15))
        throw std::invalid_argument("beta must lie in [0, 1/3]");
    const double s = (1.0 - 3.0 * beta) / (2.0 - 3.0 * beta);
    return std::max(0.0, s);
}

int integer_part(double x) {
    if (x < 0.0) throw std::invalid_argument("integer_part expects x >= 0");
    return static_cast<int>(std::floor(x + 1e-9 * std::max(1.0, x)));
}

double LogVal::value() const { return std::exp(log); }

MultiplierParams MultiplierParams::make(double beta, double nu, double lambda0, double lambda1,
                                        double sigma, double gamma,
                                        std::optional<double> delta_lambda) {
    MultiplierParams p;
    p.beta = beta;
    p.s = s_of_beta(beta);
    p.nu = nu;
    p.lambda0 = lambda0;
    p.lambda1 = lambda1;
    p.sigma = sigma;
    p.gamma = gamma;
    if (!(lambda0 > lambda1 && lambda1 > 0.0))
        throw ConfigError("need lambda0 > lambda1 > 0");
    if (delta_lambda) {
        p.delta_lambda = *delta_lambda;
    } else {
        p.delta_lambda = std::min((lambda0 - lambda1) / 8.0,
                                  0.5 * LambdaSchedule::saturating_delta(lambda0, lambda1));
    }
    p.validate();
    return p;
}

void MultiplierParams::validate() const {
    if (!(beta >= 0.0 && beta <= 1.0 / 3.0 + 1e-15)) throw ConfigError("beta outside [0,1/3]");
    if (std::abs(s - s_of_beta(beta)) > 1e-14) throw ConfigError("s inconsistent with beta");
    if (sigma < 11.0 || sigma != std::floor(sigma)) throw ConfigError("sigma must be an integer >= 11");
    if (gamma < 7.0 || gamma > sigma - 4.0 || gamma != std::floor(gamma))
        throw ConfigError("gamma must be an integer in [7, sigma-4]");
    if (!(lambda0 > lambda1 && lambda1 > 0.0)) throw ConfigError("need lambda0 > lambda1 > 0");
    if (!(nu > 0.0 && nu < 1.0)) throw ConfigError("nu must lie in (0,1)");
    if (std::abs(1.0 + 2.0 * C1 * kappa - 2.0) > 1e-15) throw ConfigError("need 1 + 2 C1 kappa = 2");
    if (cM != 0.125) throw ConfigError("c_M is fixed at 1/8");
    if (c1 != 0.625) throw ConfigError("c_1 is fixed at 5/8");
    if (!(delta_lambda > 0.0)) throw ConfigError("delta_lambda must be positive");
    if (!(delta_lambda < LambdaSchedule::saturating_delta(lambda0, lambda1)))
        throw ConfigError("delta_lambda too large: lambda(t) would drop below (lambda0+lambda1)/2");
}

CriticalLayout layout(double eta, double beta) {
    if (eta == 0.0) throw std::invalid_argument("layout needs eta != 0");
    CriticalLayout L;
    L.eta = std::abs(eta);
    L.beta = beta;
    L.s = s_of_beta(beta);
    const double e = L.eta;
    L.Emax = e >= 1.0 ? integer_part(e) : 0;
    L.Ns = e >= 1.0 ? std::min(integer_part(std::pow(e, L.s)), L.Emax) : 0;
    const int n = L.Emax + 1;
    L.t.resize(n);
    L.r.assign(n, 0.0);
    L.a.assign(n, 0.0);
    L.tminus.assign(n, 0.0);
    L.tplus.assign(n, 0.0);
    for (int k = 0; k < n; ++k) {
        L.t[k] = 2.0 * e / (2.0 * k + 1.0);
        if (k == 0) continue;
        const double r = std::pow(e, 1.0 - 3.0 * beta) / std::pow(k, 2.0 - 3.0 * beta);
        L.r[k] = r;
        L.a[k] = 8.0 * (1.0 - 1.0 / r);
        L.tminus[k] = e / k - r / 8.0;
        L.tplus[k] = e / k + r / 8.0;
    }
    return L;
}

const char* region_name(Region r) {
    switch (r) {
        case Region::outside: return "outside";
        case Region::gap: return "gap";
        case Region::IL: return "I^L";
        case Region::IR: return "I^R";
        case Region::tIL: return "I~^L";
        case Region::tIR: return "I~^R";
    }
    return "?";
}

RegionInfo classify(double t, int k, double eta, double beta) {
    if (t < 0.0) throw std::invalid_argument("classify: t < 0");
    RegionInfo info;
    const double e = std::abs(eta);
    const int ak = std::abs(k);
    if (e < 1.0 || ak == 0) return info;
    const CriticalLayout L = layout(eta, beta);
    if (ak > L.Emax) return info;
    const double lo = L.t[ak], hi = L.t[ak - 1];
    if (t >= lo && t <= hi) {
        const double c = e / ak;
        const double r = L.r[ak];
        const double tm = c - r / 8.0, tp = c + r / 8.0;
        if (t >= tm && t < tp) {
            info.region = t < c ? Region::tIL : Region::tIR;
            info.resonant = static_cast<double>(k) * eta > 0.0;
        } else {
            info.region = t < c ? Region::IL : Region::IR;
        }
        return info;
    }
    if (t >= L.t[L.Emax] && t <= L.t[0]) info.region = Region::gap;
    return info;
}

// ---------------------------------------------------------------- WTable

WTable::WTable(double eta, double beta) {
    const double e = std::abs(eta);
    if (e < 1.0) {
        lay_.eta = e;
        lay_.beta = beta;
        lay_.s = s_of_beta(beta);
        trivial_ = true;
        return;
    }
    lay_ = layout(e, beta);
    trivial_ = false;
    const int Ns = lay_.Ns;
    lp_.assign(Ns + 2, 0.0);
    // lp_[k] = log w_NR(t_k^+); going from t_k^+ to t_k^- loses r_k^2
    for (int k = 1; k <= Ns; ++k) lp_[k + 1] = lp_[k] - 2.0 * std::log(lay_.r[k]);
}

double WTable::log_w0() const { return trivial_ ? 0.0 : lp_[lay_.Ns + 1]; }

LogVal WTable::inside(double t, int k, bool resonant) const {
    const double c = lay_.eta / k;
    const double r = lay_.r[k], a = lay_.a[k];
    const double lr = std::log(r);
    LogVal v;
    if (t >= c) {
        const double tau = t - c;
        const double l1p = std::log1p(a * tau);
        v.log = 0.5 * (l1p - lr) + lp_[k];
        v.dlog = 0.5 * a / (1.0 + a * tau);
        if (resonant) {
            v.log += l1p - lr;
            v.dlog += a / (1.0 + a * tau);
        }
    } else {
        const double tau = c - t;
        const double l1p = std::log1p(a * tau);
        v.log = -1.5 * l1p - 0.5 * lr + lp_[k];
        v.dlog = 1.5 * a / (1.0 + a * tau);
        if (resonant) {
            v.log += l1p - lr;
            v.dlog -= a / (1.0 + a * tau);
        }
    }
    return v;
}

LogVal WTable::nr(double t) const {
    if (trivial_) return {};
    const int Ns = lay_.Ns;
    if (Ns < 1 || t >= lay_.tplus[1]) return {};
    if (t < lay_.tminus[Ns]) return {lp_[Ns + 1], 0.0};
    for (int k = std::max(1, static_cast<int>(std::floor(lay_.eta / t)) - 1);
         k <= std::min(Ns, static_cast<int>(std::ceil(lay_.eta / t)) + 1); ++k) {
        if (t >= lay_.tminus[k] && t < lay_.tplus[k]) return inside(t, k, false);
    }
    // gap: plateau lp_[k] on [t_k^+, t_{k-1}^-); find the smallest k with t_k^+ <= t
    int lo = 1, hi = Ns + 1;
    while (lo < hi) {
        const int mid = (lo + hi) / 2;
        if (lay_.tplus[mid] <= t)
            hi = mid;
        else
            lo = mid + 1;
    }
    return {lp_[lo], 0.0};
}

LogVal WTable::r(double t) const {
    if (trivial_) return {};
    const int Ns = lay_.Ns;
    if (Ns < 1 || t >= lay_.tplus[1]) return {};
    if (t < lay_.tminus[Ns]) return {lp_[Ns + 1], 0.0};
    for (int k = std::max(1, static_cast<int>(std::floor(lay_.eta / t)) - 1);
         k <= std::min(Ns, static_cast<int>(std::ceil(lay_.eta / t)) + 1); ++k) {
        if (t >= lay_.tminus[k] && t < lay_.tplus[k]) return inside(t, k, true);
    }
    return nr(t);
}

LogVal WTable::wk(double t, int k, double eta_signed) const {
    if (trivial_) return {};
    const double e = lay_.eta;
    if (t > 2.0 * e) return {};
    const int Ns = lay_.Ns;
    if (Ns < 1) return {};
    const double tNs = lay_.t[Ns];
    if (t < tNs) return {log_w0(), 0.0};
    const int ak = std::abs(k);
    const bool same_sign = static_cast<double>(k) * eta_signed > 0.0;
    if (same_sign && ak >= 1 && ak <= Ns && t >= lay_.tminus[ak] && t < lay_.tplus[ak])
        return inside(t, ak, true);
    return nr(t);
}

LogVal WTable::wR_special(double t) const {
    if (trivial_) return {};
    if (t > 2.0 * lay_.eta) return {};
    if (lay_.Ns < 1) return {};
    if (t < lay_.t[lay_.Ns]) return {log_w0(), 0.0};
    return r(t);
}

// ---------------------------------------------------------------- GTable

GTable::GTable(double eta, double beta, double nu, double kappa)
    : eta_(std::abs(eta)), beta_(beta), nu_(nu), kappa_(kappa) {
    const double e = eta_;
    if (e < 1.0) {
        trivial_ = true;
        return;
    }
    trivial_ = false;
    const double s = s_of_beta(beta);
    M_ = integer_part(e);
    Ns_ = std::min(integer_part(std::pow(e, s)), M_);
    G_.assign(M_ + 1, 0.0);
    coef_.assign(M_ + 1, 0.0);
    const double fg = frak_g(nu, e, beta);
    const double n13 = std::cbrt(nu);
    for (int k = 1; k <= M_; ++k) {
        const double kk = k;
        const double left = e / ((2.0 * kk + 1.0) * kk);   // e/k - t_k
        const double right = e / ((2.0 * kk - 1.0) * kk);  // t_{k-1} - e/k
        double span;
        if (k <= Ns_) {
            const double r = std::pow(e, 1.0 - 3.0 * beta) / std::pow(kk, 2.0 - 3.0 * beta);
            coef_[k] = r;
            span = std::atan(right / r) + std::atan(left / r);
        } else {
            const double C = fg * std::pow(bracket(n13 * e / kk), -1.5) * std::pow(nu, beta) * e /
                             (kk * kk);
            coef_[k] = C;
            span = C * (std::atan(right) + std::atan(left));
        }
        G_[k] = G_[k - 1] - kappa * span;
    }
}

int GTable::interval_of(double t) const {
    int k = static_cast<int>(std::ceil((2.0 * eta_ / t - 1.0) / 2.0));
    k = std::clamp(k, 1, M_);
    while (k < M_ && t < t_k(k)) ++k;
    while (k > 1 && t > t_k(k - 1)) --k;
    return k;
}

double GTable::rate(double t) const {
    if (trivial_ || t >= 2.0 * eta_ || t < t_k(M_)) return 0.0;
    const int k = interval_of(t);
    const double d = t - eta_ / k;
    if (k <= Ns_) {
        const double r = coef_[k];
        return kappa_ * r / (r * r + d * d);
    }
    return kappa_ * coef_[k] / (1.0 + d * d);
}

LogVal GTable::eval(double t) const {
    if (trivial_ || t >= 2.0 * eta_) return {};
    if (t < t_k(M_)) return {G_[M_], 0.0};
    const int k = interval_of(t);
    const double kk = k;
    const double d = t - eta_ / kk;
    const double left = eta_ / ((2.0 * kk + 1.0) * kk);
    LogVal v;
    if (k <= Ns_) {
        const double r = coef_[k];
        v.log = G_[k] + kappa_ * (std::atan(d / r) + std::atan(left / r));
        v.dlog = kappa_ * r / (r * r + d * d);
    } else {
        const double C = coef_[k];
        v.log = G_[k] + kappa_ * C * (std::atan(d) + std::atan(left));
        v.dlog = kappa_ * C / (1.0 + d * d);
    }
    v.log = std::min(v.log, 0.0);
    return v;
}

// ---------------------------------------------------------------- point evaluators

LogVal w_eval(double t, int k, double eta, const MultiplierParams& p) {
    return WTable(eta, p.beta).wk(t, k, eta);
}

LogVal wR_eval(double t, double eta, const MultiplierParams& p) {
    return WTable(eta, p.beta).wR_special(t);
}

LogVal g_eval(double t, double eta, const MultiplierParams& p) {
    return GTable(eta, p.beta, p.nu, p.kappa).eval(t);
}

LogVal m_eval(double t, int k, double eta, double nu) {
    if (k == 0) return {};
    const double n13 = std::cbrt(nu);
    const double kk = k;
    LogVal v;
    v.log = (std::atan(n13 * (kk * t - eta)) + std::atan(n13 * eta)) / kk;
    const double d = eta - kk * t;
    v.dlog = n13 / (1.0 + n13 * n13 * d * d);
    return v;
}

double iota(int k, double eta) { return std::abs(static_cast<double>(k)) > std::abs(eta) ? k : eta; }

double frak_g(double nu, double eta, double beta) {
    const double s = s_of_beta(beta);
    const double x = std::pow(nu, -1.0 / 3.0) * std::pow(std::abs(eta), s - 1.0);
    return std::pow(std::sqrt(1.0 + x * x), 3.0 * beta);
}

double frak_w(double nu, double t, double eta, double beta) {
    const double s = s_of_beta(beta);
    const double e = std::abs(eta);
    const int Ns = e >= 1.0 ? integer_part(std::pow(e, s)) : 0;
    const double tb = 2.0 * e / (2.0 * Ns + 1.0);
    if (t < tb) return 1.0;
    const double x = std::cbrt(nu) * std::pow(e, 1.0 - s);
    return std::pow(std::sqrt(1.0 + x * x), -1.5 + 3.0 * beta);
}

// ---------------------------------------------------------------- lambda(t)

double LambdaSchedule::tail_integral(double t) {
    if (t <= 1.0) return 0.0;
    boost::math::quadrature::gauss_kronrod<double, 31> gk;
    return gk.integrate(tail_integrand, 1.0, t, 15, 1e-14);
}

double LambdaSchedule::tail_integral_inf() {
    static const double v = [] {
        boost::math::quadrature::exp_sinh<double> es;
        return es.integrate([](double x) { return tail_integrand(1.0 + x); }, 0.0,
                            std::numeric_limits<double>::infinity());
    }();
    return v;
}

double LambdaSchedule::saturating_delta(double lambda0, double lambda1) {
    const double l1t = 0.75 * lambda0 + 0.25 * lambda1;
    const double floor = 0.5 * (lambda0 + lambda1);
    return std::log((1.0 + l1t) / (1.0 + floor)) / tail_integral_inf();
}

LambdaSchedule::LambdaSchedule(const MultiplierParams& p)
    : lam1_(0.75 * p.lambda0 + 0.25 * p.lambda1), delta_(p.delta_lambda) {}

double LambdaSchedule::operator()(double t) const {
    if (t <= 1.0) return lam1_;
    return (1.0 + lam1_) * std::exp(-delta_ * tail_integral(t)) - 1.0;
}

double LambdaSchedule::dot(double t) const {
    // right derivative; zero on [0,1)
    if (t < 1.0) return 0.0;
    return -delta_ * tail_integrand(t) * (1.0 + (*this)(t));
}

double LambdaSchedule::at_infinity() const {
    return (1.0 + lam1_) * std::exp(-delta_ * tail_integral_inf()) - 1.0;
}

double lambda_of_t(double t, const MultiplierParams& p) { return LambdaSchedule(p)(t); }

// ---------------------------------------------------------------- bank

MultiplierBank::MultiplierBank(const MultiplierParams& p) : p_(p), lam_(p) { p_.validate(); }

const WTable& MultiplierBank::w(double eta_abs) {
    eta_abs = std::abs(eta_abs);
    std::lock_guard<std::mutex> lock(mu_);
    auto& slot = wt_[eta_abs];
    if (!slot) slot = std::make_unique<WTable>(eta_abs, p_.beta);
    return *slot;
}

const GTable& MultiplierBank::g(double eta_abs) {
    eta_abs = std::abs(eta_abs);
    std::lock_guard<std::mutex> lock(mu_);
    auto& slot = gt_[eta_abs];
    if (!slot) slot = std::make_unique<GTable>(eta_abs, p_.beta, p_.nu, p_.kappa);
    return *slot;
}

MultiplierParts MultiplierBank::parts(double t, int k, double eta) {
    return parts(t, k, eta, lam_(t));
}

MultiplierParts MultiplierBank::parts(double t, int k, double eta, double lam) {
    MultiplierParts out;
    const double n13 = std::cbrt(p_.nu);
    const double a = l1(k, eta);
    out.abs_pow_s = p_.s > 0.0 ? std::pow(a, p_.s) : 1.0;
    const double io = iota(k, eta);
    const LogVal wv = w(io).wk(t, k, io);
    const LogVal gv = g(io).eval(t);
    const LogVal mv = m_eval(t, k, eta, p_.nu);
    const double lb = std::log(bracket(a));
    const double expo = k != 0 ? p_.cM * n13 * t : 0.0;
    out.logA = expo + lam * out.abs_pow_s + p_.sigma * lb - wv.log - gv.log - mv.log;
    if (k != 0)
        out.logAgamma = std::log1p(p_.cM * n13 * t) + expo + lam * out.abs_pow_s +
                        p_.gamma * lb - mv.log;
    else
        out.logAgamma = lam * out.abs_pow_s + p_.gamma * lb;
    out.dlogw = wv.dlog;
    out.dlogg = gv.dlog;
    out.dlogm = mv.dlog;
    return out;
}

double MultiplierBank::log_A(double t, int k, double eta) { return parts(t, k, eta).logA; }

double MultiplierBank::log_Agamma(double t, int k, double eta) {
    return parts(t, k, eta).logAgamma;
}

double MultiplierBank::log_AR(double t, double eta) { return log_AR(t, eta, lam_(t)); }

double MultiplierBank::log_AR(double t, double eta, double lam) {
    const double e = std::abs(eta);
    const double ps = p_.s > 0.0 ? std::pow(e, p_.s) : 1.0;
    return lam * ps + p_.sigma * std::log(bracket(e)) - w(e).wR_special(t).log - g(e).eval(t).log;
}

LogVal MultiplierBank::wR(double t, double eta) { return w(eta).wR_special(t); }

// ---------------------------------------------------------------- growth

double log_w_growth(double eta, double beta) { return -WTable(eta, beta).log_w0(); }

double w_growth_comparator(double eta, double beta, double kappa, double C1) {
    const double s = s_of_beta(beta);
    const double e = std::abs(eta);
    const double mu = 2.0 * (2.0 - 3.0 * beta) * (1.0 + 2.0 * C1 * kappa);
    return 0.5 * mu * std::pow(e, s) - 0.25 * mu * s * std::log(e);
}

void dump_weight_table(std::ostream& os, double eta, const MultiplierParams& p) {
    const double e = std::abs(eta);
    const WTable W(e, p.beta);
    const GTable G(e, p.beta, p.nu, p.kappa);
    os << "eta,k,kind,t,w_NR,w_R,g,log_w_NR,log_w_R,log_g\n";
    const auto old = os.precision(17);
    auto row = [&](int k, const char* kind, double t) {
        const double a = W.nr(t).log, b = W.wR_special(t).log, c = G.eval(t).log;
        os << e << ',' << k << ',' << kind << ',' << t << ',' << std::exp(a) << ',' << std::exp(b) << ','
           << std::exp(c) << ',' << a << ',' << b << ',' << c << '\n';
    };
    if (e < 1.0) {
        row(0, "t_k", 0.0);
        os.precision(old);
        return;
    }
    const auto L = layout(e, p.beta);
    for (int k = 0; k <= L.Emax; ++k) {
        row(k, "t_k", L.t[k]);
        if (k >= 1 && k <= L.Ns) {
            row(k, "t_minus", L.tminus[k]);
            row(k, "critical", e / k);
            row(k, "t_plus", L.tplus[k]);
        }
    }
    os.precision(old);
}

}  // namespace couette
