// OpenMP kernels against their serial twins on a 256^2 sheared-frame grid.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "couette/grid.hpp"
#include "couette/kernels.hpp"

using namespace couette;

namespace {

const Grid& grid() {
    static const Grid g = Grid::from_physical_size(256, 256, 2.0);
    return g;
}

std::vector<double> reals(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<double> v(n);
    for (auto& x : v) x = nd(rng);
    return v;
}

std::vector<cplx> coefs(std::size_t n, unsigned seed) {
    auto a = reals(2 * n, seed);
    std::vector<cplx> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = cplx(a[2 * i], a[2 * i + 1]);
    return v;
}

template <bool Par>
void BM_jacobian(benchmark::State& st) {
    const std::size_t n = static_cast<std::size_t>(grid().Nz) * grid().Nv;
    auto a = reals(n, 1), b = reals(n, 2), c = reals(n, 3), d = reals(n, 4);
    std::vector<double> out(n);
    for (auto _ : st) {
        if constexpr (Par)
            kernels::jacobian(a.data(), b.data(), c.data(), d.data(), out.data(), n);
        else
            kernels::jacobian_serial(a.data(), b.data(), c.data(), d.data(), out.data(), n);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Par>
void BM_viscous(benchmark::State& st) {
    std::vector<double> out(grid().size());
    for (auto _ : st) {
        if constexpr (Par)
            kernels::viscous_log_factor(grid(), 1e-4, 10.0, 10.05, out.data());
        else
            kernels::viscous_log_factor_serial(grid(), 1e-4, 10.0, 10.05, out.data());
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Par>
void BM_axpy(benchmark::State& st) {
    const std::size_t n = grid().size();
    auto x = coefs(n, 5), r = coefs(n, 6);
    auto lf = reals(n, 7);
    std::vector<cplx> y(n);
    for (auto _ : st) {
        if constexpr (Par)
            kernels::axpy_scaled(y.data(), x.data(), r.data(), 0.01, lf.data(), n);
        else
            kernels::axpy_scaled_serial(y.data(), x.data(), r.data(), 0.01, lf.data(), n);
        benchmark::DoNotOptimize(y.data());
    }
}

template <bool Par>
void BM_norm(benchmark::State& st) {
    const std::size_t n = grid().size();
    auto c = coefs(n, 8);
    auto lw = reals(n, 9);
    for (auto _ : st) {
        double s;
        if constexpr (Par)
            s = kernels::weighted_sq_sum(grid(), c.data(), lw.data());
        else
            s = kernels::weighted_sq_sum_serial(grid(), c.data(), lw.data());
        benchmark::DoNotOptimize(s);
    }
}

template <bool Par>
void BM_inverse_laplacian(benchmark::State& st) {
    const std::size_t n = grid().size();
    auto w = coefs(n, 10);
    std::vector<cplx> psi(n);
    for (auto _ : st) {
        if constexpr (Par)
            kernels::inverse_laplacian(grid(), w.data(), 12.5, psi.data());
        else
            kernels::inverse_laplacian_serial(grid(), w.data(), 12.5, psi.data());
        benchmark::DoNotOptimize(psi.data());
    }
}

}  // namespace

BENCHMARK(BM_jacobian<true>)->Name("jacobian/omp");
BENCHMARK(BM_jacobian<false>)->Name("jacobian/serial");
BENCHMARK(BM_viscous<true>)->Name("viscous_log_factor/omp");
BENCHMARK(BM_viscous<false>)->Name("viscous_log_factor/serial");
BENCHMARK(BM_axpy<true>)->Name("axpy_scaled/omp");
BENCHMARK(BM_axpy<false>)->Name("axpy_scaled/serial");
BENCHMARK(BM_norm<true>)->Name("weighted_sq_sum/omp");
BENCHMARK(BM_norm<false>)->Name("weighted_sq_sum/serial");
BENCHMARK(BM_inverse_laplacian<true>)->Name("inverse_laplacian/omp");
BENCHMARK(BM_inverse_laplacian<false>)->Name("inverse_laplacian/serial");

BENCHMARK_MAIN();
