#pragma once

// Hot loops shared by the solvers. Each OpenMP kernel has a *_serial twin
// that the tests and the benchmark compare against. Reductions are done per
// row and then summed in row order so results do not depend on thread count.

#include <cstddef>

#include "couette/grid.hpp"

namespace couette::kernels {

// out[i] = a[i]*b[i] - c[i]*d[i]
void jacobian(const double* a, const double* b, const double* c, const double* d, double* out,
              std::size_t n);
void jacobian_serial(const double* a, const double* b, const double* c, const double* d,
                     double* out, std::size_t n);

// coef[i] *= exp(logf[i])
void scale_log(cplx* coef, const double* logf, std::size_t n);
void scale_log_serial(cplx* coef, const double* logf, std::size_t n);

// y[i] = exp(logf[i]) * (x[i] + h * r[i]); logf may be null (factor 1)
void axpy_scaled(cplx* y, const cplx* x, const cplx* r, double h, const double* logf,
                 std::size_t n);
void axpy_scaled_serial(cplx* y, const cplx* x, const cplx* r, double h, const double* logf,
                        std::size_t n);

// -nu * int_{t0}^{t1} (k^2 + (eta - k tau)^2) dtau for every retained mode
void viscous_log_factor(const Grid& g, double nu, double t0, double t1, double* out);
void viscous_log_factor_serial(const Grid& g, double nu, double t0, double t1, double* out);

// sum_i exp(2 logw[i]) |c[i]|^2 (no deta); logw may be null
double weighted_sq_sum(const Grid& g, const cplx* c, const double* logw);
double weighted_sq_sum_serial(const Grid& g, const cplx* c, const double* logw);

// psi = -omega / (k^2 + (eta - k t)^2), psi(0,0) = 0
void inverse_laplacian(const Grid& g, const cplx* omega, double t, cplx* psi);
void inverse_laplacian_serial(const Grid& g, const cplx* omega, double t, cplx* psi);

}  // namespace couette::kernels
