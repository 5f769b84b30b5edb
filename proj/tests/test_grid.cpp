#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "couette/grid.hpp"

using namespace couette;

namespace {

SpectralField random_field(const Grid& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    SpectralField f(g);
    for (auto& c : f.coef) c = cplx(nd(rng), nd(rng));
    f.enforce_hermitian();
    return f;
}

double max_abs_diff(const SpectralField& a, const SpectralField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.coef.size(); ++i) m = std::max(m, std::abs(a.coef[i] - b.coef[i]));
    return m;
}

double max_abs(const SpectralField& a) {
    double m = 0.0;
    for (auto& c : a.coef) m = std::max(m, std::abs(c));
    return m;
}

}  // namespace

TEST_CASE("grid sizes respect the dealiasing margin") {
    for (int K : {1, 5, 21, 42, 85}) {
        Grid g = Grid::make(K, 2 * K + 3, 3.0);
        CHECK(g.Nz >= 3 * K + 1);
        CHECK(g.Nv >= 3 * g.Mv + 1);
    }
    Grid g = Grid::from_physical_size(256, 256, 1.0);
    CHECK(g.Kx == 85);
    CHECK(g.Mv == 85);
    CHECK(fft_size_at_least(257) == 270);
    CHECK_THROWS_AS(Grid::make(-1, 2, 1.0), GridError);
}

TEST_CASE("constant and cos(z) transforms") {
    Grid g = Grid::make(4, 6, 2.0);
    PhysicalField u{g.Nz, g.Nv, std::vector<double>(static_cast<std::size_t>(g.Nz) * g.Nv, 1.0)};
    auto f = from_physical(u, g);
    CHECK(std::abs(f.at(0, 0) - cplx(1.0, 0.0)) < 1e-14);
    f.at(0, 0) = 0.0;
    CHECK(max_abs(f) < 1e-14);

    for (int iz = 0; iz < g.Nz; ++iz)
        for (int iv = 0; iv < g.Nv; ++iv) u(iz, iv) = std::cos(iz * g.dz());
    f = from_physical(u, g);
    CHECK(std::abs(f.at(1, 0) - 0.5) < 1e-14);
    CHECK(std::abs(f.at(-1, 0) - 0.5) < 1e-14);
    f.at(1, 0) = f.at(-1, 0) = 0.0;
    CHECK(max_abs(f) < 1e-14);
}

TEST_CASE("v coordinate and eta sign convention") {
    // sin(eta v) with eta = 2/Lv sampled on v = -pi Lv + iv dv
    Grid g = Grid::make(2, 5, 1.5);
    PhysicalField u{g.Nz, g.Nv, std::vector<double>(static_cast<std::size_t>(g.Nz) * g.Nv)};
    const double eta = g.eta(2);
    for (int iz = 0; iz < g.Nz; ++iz)
        for (int iv = 0; iv < g.Nv; ++iv) u(iz, iv) = std::sin(eta * (-M_PI * g.Lv + iv * g.dv()));
    auto f = from_physical(u, g);
    CHECK(std::abs(f.at(0, 2) - cplx(0.0, -0.5)) < 1e-13);
    CHECK(std::abs(f.at(0, -2) - cplx(0.0, 0.5)) < 1e-13);
}

TEST_CASE("random round trip across the grid matrix") {
    unsigned seed = 1;
    for (auto [K, M, L] : {std::tuple{3, 4, 1.0}, {7, 12, 2.5}, {16, 16, 1.0}, {21, 40, 4.0},
                           {42, 42, 1.0}, {85, 85, 3.0}}) {
        Grid g = Grid::make(K, M, L);
        Transform tr(g);
        auto f = random_field(g, seed++);
        auto back = tr.from_physical(tr.to_physical(f));
        CHECK(max_abs_diff(f, back) < 1e-12 * max_abs(f));
        CHECK(back.hermitian_defect() == 0.0);
        CHECK(back.finite());

        // physical-side round trip of a band-limited real field
        auto u = tr.to_physical(f);
        auto u2 = tr.to_physical(tr.from_physical(u));
        double m = 0.0, s = 0.0;
        for (std::size_t i = 0; i < u.data.size(); ++i) {
            m = std::max(m, std::abs(u.data[i] - u2.data[i]));
            s = std::max(s, std::abs(u.data[i]));
        }
        CHECK(m < 1e-12 * s);
    }
}

TEST_CASE("transform rejects mismatched sizes") {
    Grid g = Grid::make(3, 3, 1.0);
    PhysicalField u{g.Nz + 1, g.Nv, std::vector<double>(static_cast<std::size_t>(g.Nz + 1) * g.Nv)};
    CHECK_THROWS_AS(from_physical(u, g), GridError);
    Transform tr(g);
    SpectralField other(Grid::make(4, 3, 1.0));
    CHECK_THROWS_AS(tr.to_physical(other), GridError);
}

TEST_CASE("gevrey norm reduces to the Sobolev norm at s = 0") {
    Grid g = Grid::make(10, 20, 2.0);
    for (unsigned seed = 0; seed < 100; ++seed) {
        auto f = random_field(g, 100 + seed);
        const double a = gevrey_norm(f, 0.0, 0.7, 11.0);
        const double b = hsigma_norm(f, 11.0);
        CHECK(std::abs(a - b) <= 1e-12 * b);
    }
}

TEST_CASE("gevrey norm of single and paired modes") {
    Grid g = Grid::make(3, 6, 2.0);
    SpectralField f(g);
    f.at(1, 0) = 1.0;
    const double lam = 0.8, sig = 3.0;
    const double expect = std::exp(lam) * std::pow(std::sqrt(2.0), sig) * std::sqrt(g.deta());
    CHECK(gevrey_norm(f, 0.5, lam, sig) == doctest::Approx(expect).epsilon(1e-14));

    SpectralField h(g);
    h.at(-2, 3) = cplx(0.3, -0.4);
    const double nf = gevrey_norm(f, 0.5, lam, sig), nh = gevrey_norm(h, 0.5, lam, sig);
    CHECK(std::pow(gevrey_norm(f + h, 0.5, lam, sig), 2) ==
          doctest::Approx(nf * nf + nh * nh).epsilon(1e-14));

    auto r = random_field(g, 9);
    double prev = 0.0;
    for (double l : {0.0, 0.1, 0.5, 1.0}) {
        const double n = gevrey_norm(r, 0.5, l, 2.0);
        CHECK(n >= prev);
        prev = n;
    }
    prev = 0.0;
    for (double s : {0.0, 1.0, 4.0, 11.0}) {
        const double n = gevrey_norm(r, 0.5, 0.3, s);
        CHECK(n >= prev);
        prev = n;
    }
    CHECK(l2_norm(r) == doctest::Approx(hsigma_norm(r, 0.0)).epsilon(1e-14));
}

TEST_CASE("Littlewood-Paley cutoffs") {
    CHECK(lp_phi(0.5) == 1.0);
    CHECK(lp_phi(0.75) == 0.0);
    CHECK(lp_phi(0.6) > 0.0);
    CHECK(lp_phi(0.6) < 1.0);
    // |eta| = 3 lives in the shells {2, 4} only, with weights summing to one
    double total = lp_rho(0.5, 3.0);
    for (double N : {1.0, 2.0, 4.0, 8.0, 16.0}) {
        const double w = lp_rho(N, 3.0);
        if (N != 2.0 && N != 4.0) CHECK(w == 0.0);
        total += w;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
    // shell support (N/2, 3N/2)
    for (double N : {1.0, 2.0, 4.0, 32.0})
        for (int i = 0; i <= 400; ++i) {
            const double xi = 0.01 * i * N;
            if (lp_rho(N, xi) != 0.0) {
                CHECK(xi > N / 2);
                CHECK(xi < 1.5 * N);
            }
        }
    Grid g = Grid::make(2, 8, 1.0);
    CHECK_THROWS(lp_project(SpectralField(g), 3.0));
}

TEST_CASE("Littlewood-Paley reconstruction and Bernstein bounds") {
    Grid g = Grid::make(6, 200, 3.0);
    auto f = random_field(g, 42);
    SpectralField sum(g);
    for (double N : lp_levels(g)) {
        auto fN = lp_project(f, N);
        sum += fN;
        if (N >= 1.0 && l2_norm(fN) > 0.0) {
            const double ratio = l2_norm(dv(fN)) / l2_norm(fN);
            CHECK(ratio >= N / 2 - g.deta());
            CHECK(ratio <= 1.5 * N);
        }
    }
    for (std::size_t i = 0; i < f.coef.size(); ++i) CHECK(std::abs(sum.coef[i] - f.coef[i]) < 1e-14);

    // low-frequency partial sums
    SpectralField partial = lp_project(f, 0.5);
    for (double N = 1.0; N <= 32.0; N *= 2.0) {
        partial += lp_project(f, N);
        CHECK(max_abs_diff(partial, lp_low(f, 2.0 * N)) < 1e-14);
    }
}

TEST_CASE("zero and nonzero mode projections") {
    Grid g = Grid::make(5, 9, 2.0);
    auto f = random_field(g, 7);
    auto [p0, pn] = project_modes(f);
    CHECK(max_abs_diff(p0 + pn, f) == 0.0);
    CHECK(std::pow(l2_norm(f), 2) ==
          doctest::Approx(std::pow(l2_norm(p0), 2) + std::pow(l2_norm(pn), 2)).epsilon(1e-13));
    auto [a, b] = project_modes(p0);
    CHECK(max_abs(b) == 0.0);
    auto [c, d] = project_modes(pn);
    CHECK(max_abs(c) == 0.0);

    SpectralField cz(g);
    cz.at(1, 2) = cplx(0.5, 0.1);
    cz.at(-1, -2) = cplx(0.5, -0.1);
    CHECK(max_abs(project_modes(cz).first) == 0.0);
}

TEST_CASE("serialization round trips") {
    Grid g = Grid::make(3, 5, 1.25);
    auto f = random_field(g, 3);
    std::stringstream ss;
    write_binary(ss, f);
    CHECK(ss.str().size() == 4 + 4 + 4 + 8 + 16 * g.size());
    auto b = read_binary(ss);
    CHECK(b.grid.same_modes(g));
    CHECK(max_abs_diff(b, f) == 0.0);
    auto j = from_json_string(to_json_string(f));
    CHECK(max_abs_diff(j, f) == 0.0);
    std::stringstream bad("XXXX");
    CHECK_THROWS_AS(read_binary(bad), GridError);
}
