#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace couette {

struct Offender {
    std::map<std::string, double> point;
    double value = 0.0;  // slack or statistic at the point
};

struct AuditReport {
    std::string id;
    std::size_t samples = 0;
    double worst_slack = 0.0;      // exact inequalities; NaN when not applicable
    double fitted_constant = 0.0;  // bounded-statistic claims; NaN when not applicable
    std::string band;              // what pass means, in words
    bool pass = false;
    std::vector<Offender> offending;  // capped at max_offenders
    std::map<std::string, double> stats;
};

inline constexpr std::size_t max_offenders = 32;

std::string to_json_string(const AuditReport& r);
std::string to_json_string(const std::vector<AuditReport>& rs);

// Gevrey elementary inequalities for 0 < s < 1, x >= y >= 0.
//   s2: |x^s - y^s| <= s/(K-1)^{1-s} |x-y|^s when |x-y| <= x/K, K > 1
//   s3: (x+y)^s <= (K/(1+K))^{1-s} (x^s + y^s) when y <= x <= K y
// s1 (|x^s - y^s| <= C |x-y|/(x^{1-s} + y^{1-s})) gets a fitted C, redone on twice the samples.
AuditReport check_elementary(double s, std::size_t n_samples, std::uint64_t seed);

// the three right-minus-left sides, relative to the right side; exposed for tests
double inq_s2_slack(double s, double K, double x, double y);
double inq_s3_slack(double s, double K, double x, double y);
double inq_s1_ratio(double s, double x, double y);

// nu (eta - k t)^2 + d_t m / m >= nu^{1/3}/2 for k != 0
double nu13_slack(double nu, int k, double eta, double t);
AuditReport check_nu13(std::size_t n_samples, std::uint64_t seed);

// Critical-time separation. Bit i of the mask is case (a) + i; bits 5 and 6 are (a') and (b').
struct SeparationSample {
    double xi = 0.0, eta = 0.0, t = 0.0;
    int m = 0, k = 0;
};
unsigned separation_cases(const SeparationSample& p, double beta, double alpha, double C);
// the largest C for which the disjunction still holds at p (+inf if no C is needed)
double separation_requirement(const SeparationSample& p, double beta, double alpha);
AuditReport check_separation(std::size_t n_samples, std::uint64_t seed, double alpha = 2.0,
                             double beta = 1.0 / 6.0);

std::vector<double> log_grid(double lo, double hi, int per_decade);

AuditReport check_w_growth(double beta, const std::vector<double>& eta_grid);
AuditReport check_g_growth(double beta, double nu, const std::vector<double>& eta_grid);

AuditReport check_w_comparison(double beta, std::size_t n_samples, std::uint64_t seed);
AuditReport check_g_comparison(double beta, double nu, std::size_t n_samples, std::uint64_t seed);

// Every declared audit at the given sample scale.
std::vector<AuditReport> run_all_audits(std::size_t n_samples, std::uint64_t seed);

}  // namespace couette
