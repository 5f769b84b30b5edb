#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

namespace couette {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double s_of_beta(double beta);

// integer part, tolerant to pow() landing one ulp below an integer
int integer_part(double x);

struct MultiplierParams {
    double beta = 1.0 / 6.0;
    double s = 1.0 / 3.0;
    double sigma = 11.0;
    double gamma = 7.0;
    double lambda0 = 1.0;
    double lambda1 = 0.5;
    double nu = 1e-4;
    double kappa = 0.5;
    double C1 = 1.0;
    double cM = 0.125;
    double c1 = 0.625;
    double delta_lambda = 0.0;

    // Fills s and picks delta_lambda when none is given, then validates.
    static MultiplierParams make(double beta, double nu, double lambda0 = 1.0,
                                 double lambda1 = 0.5, double sigma = 11.0, double gamma = 7.0,
                                 std::optional<double> delta_lambda = std::nullopt);
    void validate() const;
};

// Critical times for one |eta| >= 1, indexed by k = 0..E(|eta|).
struct CriticalLayout {
    double eta = 0.0;  // |eta|
    double beta = 0.0;
    double s = 0.0;
    int Ns = 0;    // E(|eta|^s)
    int Emax = 0;  // E(|eta|)
    std::vector<double> t;       // t_k = 2|eta|/(2k+1), t_0 = 2|eta|
    std::vector<double> r;       // |eta|^{1-3b}/k^{2-3b}
    std::vector<double> a;       // 8(1 - 1/r)
    std::vector<double> tminus;  // |eta|/k - r/8
    std::vector<double> tplus;   // |eta|/k + r/8
};

CriticalLayout layout(double eta, double beta);

enum class Region { outside, gap, IL, IR, tIL, tIR };
const char* region_name(Region r);

struct RegionInfo {
    Region region = Region::outside;
    bool resonant = false;
};

RegionInfo classify(double t, int k, double eta, double beta);

// log of a weight together with its right time derivative d/dt log
struct LogVal {
    double log = 0.0;
    double dlog = 0.0;
    double value() const;
};

class WTable {
public:
    WTable(double eta, double beta);

    const CriticalLayout& lay() const { return lay_; }
    bool trivial() const { return trivial_; }

    LogVal nr(double t) const;  // w_NR
    LogVal r(double t) const;   // w_R
    // w_k(t, eta) with the sign of k*eta selecting the resonant branch
    LogVal wk(double t, int k, double eta_signed) const;
    LogVal wR_special(double t) const;
    // log w_NR at t_k^+ for k = 1..Ns, and the plateau value at index Ns+1
    const std::vector<double>& log_plus() const { return lp_; }
    double log_w0() const;

private:
    LogVal inside(double t, int k, bool resonant) const;

    CriticalLayout lay_;
    bool trivial_ = true;
    std::vector<double> lp_;
};

class GTable {
public:
    GTable(double eta, double beta, double nu, double kappa);

    LogVal eval(double t) const;
    bool trivial() const { return trivial_; }
    double eta() const { return eta_; }
    int Emax() const { return M_; }
    int Ns() const { return Ns_; }
    double log_g0() const { return trivial_ ? 0.0 : G_.back(); }
    // d/dt log g from the ODE right-hand side, without the table
    double rate(double t) const;
    // interval [t_k, t_{k-1}] endpoints
    double t_k(int k) const { return 2.0 * eta_ / (2.0 * k + 1.0); }
    const std::vector<double>& log_at_tk() const { return G_; }

private:
    int interval_of(double t) const;

    double eta_ = 0.0, beta_ = 0.0, nu_ = 0.0, kappa_ = 0.5;
    bool trivial_ = true;
    int M_ = 0, Ns_ = 0;
    std::vector<double> G_;     // log g(t_k), k = 0..M
    std::vector<double> coef_;  // r_k (strong) or C_k (weak)
};

LogVal w_eval(double t, int k, double eta, const MultiplierParams& p);
LogVal wR_eval(double t, double eta, const MultiplierParams& p);
LogVal g_eval(double t, double eta, const MultiplierParams& p);
LogVal m_eval(double t, int k, double eta, double nu);

double iota(int k, double eta);
double frak_g(double nu, double eta, double beta);
double frak_w(double nu, double t, double eta, double beta);

// lambda(t) with the Cauchy-Kovalevskaya decay for t > 1
class LambdaSchedule {
public:
    explicit LambdaSchedule(const MultiplierParams& p);
    double operator()(double t) const;
    double dot(double t) const;
    double at_infinity() const;
    static double tail_integral(double t);  // int_1^t <tau>^{-5/4}
    static double tail_integral_inf();
    // delta that makes lambda(infinity) hit (lambda0+lambda1)/2 exactly
    static double saturating_delta(double lambda0, double lambda1);

private:
    double lam1_, delta_;
};

double lambda_of_t(double t, const MultiplierParams& p);

struct MultiplierParts {
    double logA = 0.0;
    double logAgamma = 0.0;
    double dlogw = 0.0;  // d/dt log w_k(t, iota)
    double dlogg = 0.0;  // d/dt log g(t, iota)
    double dlogm = 0.0;  // d/dt log m_k
    double abs_pow_s = 0.0;  // |k,eta|^s (1 when s = 0)
};

// Shared, lazily filled cache of WTable/GTable per frequency magnitude.
// Lookups are serialized; tables never move once built.
class MultiplierBank {
public:
    explicit MultiplierBank(const MultiplierParams& p);

    const MultiplierParams& params() const { return p_; }
    const LambdaSchedule& lambda() const { return lam_; }
    const WTable& w(double eta_abs);
    const GTable& g(double eta_abs);

    MultiplierParts parts(double t, int k, double eta);
    MultiplierParts parts(double t, int k, double eta, double lam);
    double log_A(double t, int k, double eta);
    double log_Agamma(double t, int k, double eta);
    double log_AR(double t, double eta);
    double log_AR(double t, double eta, double lam);
    LogVal wR(double t, double eta);

private:
    MultiplierParams p_;
    LambdaSchedule lam_;
    std::mutex mu_;
    std::map<double, std::unique_ptr<WTable>> wt_;
    std::map<double, std::unique_ptr<GTable>> gt_;
};

// log(1/w(0,eta)) as the product over strong resonances, and its
// Stirling-type comparator (mu/2)|eta|^s - (mu s/4) log|eta|.
double log_w_growth(double eta, double beta);

// Weight table at the breakpoints of one |eta|: t_k for every k, and t_k^-, eta/k, t_k^+
// for the strong resonances. Columns eta,k,kind,t,w_NR,w_R,g,log_w_NR,log_w_R,log_g.
void dump_weight_table(std::ostream& os, double eta, const MultiplierParams& p);
double w_growth_comparator(double eta, double beta, double kappa = 0.5, double C1 = 1.0);

}  // namespace couette
