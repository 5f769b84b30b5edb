#include <doctest.h>

#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <sstream>

#include "couette/toys.hpp"

using namespace couette;

namespace {

// adaptive Dormand-Prince on the strong system, independent of the RK4 code path
std::array<double, 2> strong_dopri(int k, double eta, double beta, double kappa,
                                   std::array<double, 2> y0) {
    using state = std::array<double, 2>;
    const double r = std::pow(eta, 1.0 - 3.0 * beta) / std::pow(k, 2.0 - 3.0 * beta);
    const double c = eta / k;
    auto rhs = [&](const state& y, state& dy, double t) {
        dy[0] = kappa * r / (1.0 + (t - c) * (t - c)) * y[1];
        dy[1] = kappa / r * y[0];
    };
    namespace ode = boost::numeric::odeint;
    state y = y0;
    ode::integrate_adaptive(ode::make_dense_output(1e-13, 1e-13, ode::runge_kutta_dopri5<state>()),
                            rhs, y, c - r / 8.0, c + r / 8.0, 0.01);
    return y;
}

}  // namespace

TEST_CASE("strong toy: zero data stays zero") {
    auto p = MultiplierParams::make(0.0, 1e-4);
    auto tr = integrate_strong(1, 100.0, p, {0.0, 0.0});
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        CHECK(tr.f_nr[i] == 0.0);
        CHECK(tr.f_r[i] == 0.0);
    }
}

TEST_CASE("strong toy: eta = 1e4, k = 1 against an adaptive oracle") {
    auto p = MultiplierParams::make(0.0, 1e-4);
    for (auto init : {std::array<double, 2>{1.0, 0.0}, {1.0, 1.0}}) {
        auto tr = integrate_strong(1, 1e4, p, init);
        CHECK(tr.richardson < 1e-8);
        const double ratio = tr.f_r.back() / tr.f_nr.front();
        CHECK(std::isfinite(ratio));
        CHECK(ratio > 0.0);
        auto ref = strong_dopri(1, 1e4, 0.0, 0.5, init);
        CHECK(tr.f_nr.back() == doctest::Approx(ref[0]).epsilon(1e-8));
        CHECK(tr.f_r.back() == doctest::Approx(ref[1]).epsilon(1e-8));
        CHECK(tr.t.front() == 1e4 - 1250.0);
        CHECK(tr.t.back() == 1e4 + 1250.0);
    }
}

TEST_CASE("strong toy: positivity and energy monotonicity") {
    auto p = MultiplierParams::make(1.0 / 6.0, 1e-4);
    for (int k : {1, 2, 5}) {
        auto tr = integrate_strong(k, 3e4, p, {1.0, 0.3});
        double prev = 0.0;
        for (std::size_t i = 0; i < tr.t.size(); ++i) {
            CHECK(tr.f_nr[i] > 0.0);
            CHECK(tr.f_r[i] > 0.0);
            const double en = tr.f_nr[i] * tr.f_nr[i] + tr.f_r[i] * tr.f_r[i];
            CHECK(en >= prev);
            prev = en;
        }
    }
}

TEST_CASE("strong toy: out-of-range k is rejected") {
    auto p = MultiplierParams::make(0.0, 1e-4);
    CHECK_THROWS(integrate_strong(11, 100.0, p, {1.0, 0.0}));
    CHECK_THROWS(integrate_strong(-1, 100.0, p, {1.0, 0.0}));
    CHECK_THROWS(integrate_strong(0, 100.0, p, {1.0, 0.0}));
}

TEST_CASE("strong toy: RK4 convergence order") {
    auto p = MultiplierParams::make(0.0, 1e-4);
    auto end = [&](int n) { return integrate_strong_fixed(1, 100.0, p, {1.0, 0.0}, n).f_nr.back(); };
    const double a = end(800), b = end(1600), c = end(3200);
    const double order = std::log2(std::abs(a - b) / std::abs(b - c));
    CHECK(order == doctest::Approx(4.0).epsilon(0.125));
}

// The weight jump across I~ is (|eta|^{1-3b}/|k|^{2-3b})^2. The toy system
// only amplifies by roughly the first power of that ratio, so the jump is an
// upper bound but not a tight one.
TEST_CASE("strong toy amplification is bounded by the weight jump") {
    auto p = MultiplierParams::make(0.0, 1e-4);
    for (double eta : {1e2, 1e4, 1e6})
        for (int k = 1; k <= 0.5 * std::sqrt(eta); k = 2 * k + 1) {
            const WTable W(eta, 0.0);
            const auto& L = W.lay();
            const double jump = std::exp(W.nr(L.tplus[k]).log - W.nr(L.tminus[k]).log);
            for (auto init : {std::array<double, 2>{1.0, 0.0}, {1.0, 1.0}}) {
                auto tr = integrate_strong(k, eta, p, init);
                const double amp = tr.f_nr.back() / tr.f_nr.front();
                CHECK(amp >= 1.0);
                CHECK(amp <= jump);
            }
        }
}

TEST_CASE("strong toy amplification within a factor 10 of the weight jump" * doctest::should_fail()) {
    auto p = MultiplierParams::make(0.0, 1e-4);
    const double eta = 1e4;
    for (int k = 1; k <= 50; k *= 7) {
        const double r = eta / (k * k);
        auto tr = integrate_strong(k, eta, p, {1.0, 0.0});
        const double amp = tr.f_nr.back() / tr.f_nr.front();
        CHECK(r * r / amp <= 10.0);
        CHECK(amp / (r * r) <= 10.0);
    }
}

TEST_CASE("weak toy matches the closed-form g") {
    for (auto [eta, beta, nu] : {std::tuple{1e3, 0.25, 1e-4}, {250.0, 0.0, 1e-4}, {5e3, 1.0 / 6.0, 1e-6}}) {
        auto p = MultiplierParams::make(beta, nu);
        auto tr = integrate_weak(eta, p);
        CHECK(tr.t.back() == doctest::Approx(2.0 * eta).epsilon(1e-15));
        CHECK(tr.log_g.back() == 0.0);
        const GTable G(eta, beta, nu, p.kappa);
        CHECK(std::abs(std::expm1(tr.log_g.front() - G.eval(0.0).log)) < 1e-8);
        CHECK(tr.t.front() == doctest::Approx(G.t_k(G.Emax())).epsilon(1e-14));
        for (std::size_t i = 0; i < tr.t.size(); i += 97)
            CHECK(std::abs(tr.log_g[i] - G.eval(tr.t[i]).log) < 1e-8);
        for (std::size_t i = 1; i < tr.t.size(); ++i) {
            CHECK(tr.t[i] > tr.t[i - 1]);
            CHECK(tr.log_g[i] >= tr.log_g[i - 1]);
        }
    }
}

TEST_CASE("weak toy convergence order") {
    auto p = MultiplierParams::make(0.0, 1e-4);
    const double a = integrate_weak_fixed(40.0, p, 1), b = integrate_weak_fixed(40.0, p, 2),
                 c = integrate_weak_fixed(40.0, p, 4);
    const double order = std::log2(std::abs(a - b) / std::abs(b - c));
    CHECK(order == doctest::Approx(4.0).epsilon(0.125));
}

TEST_CASE("weak toy log growth is bounded by a single exponent") {
    for (double beta : {0.0, 1.0 / 6.0}) {
        auto p = MultiplierParams::make(beta, 1e-4);
        std::vector<double> etas{10.0, 100.0, 1000.0, 10000.0};
        double mu = 0.0;
        for (double e : etas) mu = std::max(mu, -integrate_weak(e, p).log_g.front() / std::pow(e, p.s));
        CHECK(mu > 0.0);
        CHECK(mu < 10.0);
        for (double e : etas) CHECK(-integrate_weak(e, p).log_g.front() <= mu * std::pow(e, p.s) + 1e-12);
    }
}

TEST_CASE("cascade amplification") {
    auto p0 = MultiplierParams::make(0.0, 1e-4);
    CHECK(cascade_amplification(16.0, p0).log_product == doctest::Approx(2.0 * std::log(1024.0 / 9.0)).epsilon(1e-14));
    // Stirling oracle: 2 sum log(eta/k^2) = 4 sqrt(eta) - log eta - 2 log(2 pi) + o(1) at perfect squares
    const auto c = cascade_amplification(1e6, p0);
    CHECK(c.log_product == doctest::Approx(4000.0 - std::log(1e6) - 2.0 * std::log(2.0 * M_PI)).epsilon(1e-5));
    CHECK(c.log_product / c.leading == doctest::Approx(1.0).epsilon(0.01));
    double prev = 1e9;
    for (double e : {1e2, 1e3, 1e4, 1e5, 1e6}) {
        const auto ce = cascade_amplification(e, p0);
        const double dev = std::abs(ce.log_product / ce.leading - 1.0);
        CHECK(dev < prev);
        prev = dev;
    }
    auto p3 = MultiplierParams::make(1.0 / 3.0, 1e-4);
    CHECK(cascade_amplification(1e5, p3).log_product == 0.0);
}

TEST_CASE("toy CSV export") {
    auto p = MultiplierParams::make(0.0, 1e-4);
    auto tr = integrate_strong_fixed(1, 16.0, p, {1.0, 0.0}, 8);
    std::ostringstream os;
    write_csv(os, tr);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "t,f_NR,f_R");
    int rows = 0;
    while (std::getline(is, line)) {
        CHECK(std::count(line.begin(), line.end(), ',') == 2);
        ++rows;
    }
    CHECK(rows == 9);
}
