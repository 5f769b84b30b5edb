#include "couette/kernels.hpp"

#include <cmath>
#include <vector>

namespace couette::kernels {

namespace {

inline double integral_sym(double k, double eta, double t0, double t1) {
    // int_{t0}^{t1} k^2 + (eta - k tau)^2 dtau, written without cancellation
    const double h = t1 - t0;
    const double a = eta - k * t0;
    const double b = eta - k * t1;
    return h * (k * k + (a * a + a * b + b * b) / 3.0);
}

inline double row_sum(const cplx* c, const double* logw, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double m = std::norm(c[i]);
        if (m == 0.0) continue;
        s += logw ? std::exp(2.0 * logw[i] + std::log(m)) : m;
    }
    return s;
}

}  // namespace

void jacobian(const double* a, const double* b, const double* c, const double* d, double* out,
              std::size_t n) {
    const long nn = static_cast<long>(n);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < nn; ++i) out[i] = a[i] * b[i] - c[i] * d[i];
}

void jacobian_serial(const double* a, const double* b, const double* c, const double* d,
                     double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i] - c[i] * d[i];
}

void scale_log(cplx* coef, const double* logf, std::size_t n) {
    const long nn = static_cast<long>(n);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < nn; ++i) coef[i] *= std::exp(logf[i]);
}

void scale_log_serial(cplx* coef, const double* logf, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) coef[i] *= std::exp(logf[i]);
}

void axpy_scaled(cplx* y, const cplx* x, const cplx* r, double h, const double* logf,
                 std::size_t n) {
    const long nn = static_cast<long>(n);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < nn; ++i) {
        const cplx v = x[i] + h * r[i];
        y[i] = logf ? v * std::exp(logf[i]) : v;
    }
}

void axpy_scaled_serial(cplx* y, const cplx* x, const cplx* r, double h, const double* logf,
                        std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const cplx v = x[i] + h * r[i];
        y[i] = logf ? v * std::exp(logf[i]) : v;
    }
}

void viscous_log_factor(const Grid& g, double nu, double t0, double t1, double* out) {
    const int nk = g.nk(), nj = g.nj();
#pragma omp parallel for schedule(static)
    for (int ik = 0; ik < nk; ++ik) {
        const double k = ik - g.Kx;
        for (int ij = 0; ij < nj; ++ij)
            out[static_cast<std::size_t>(ik) * nj + ij] =
                -nu * integral_sym(k, g.eta(ij - g.Mv), t0, t1);
    }
}

void viscous_log_factor_serial(const Grid& g, double nu, double t0, double t1, double* out) {
    const int nk = g.nk(), nj = g.nj();
    for (int ik = 0; ik < nk; ++ik) {
        const double k = ik - g.Kx;
        for (int ij = 0; ij < nj; ++ij)
            out[static_cast<std::size_t>(ik) * nj + ij] =
                -nu * integral_sym(k, g.eta(ij - g.Mv), t0, t1);
    }
}

double weighted_sq_sum(const Grid& g, const cplx* c, const double* logw) {
    const int nk = g.nk(), nj = g.nj();
    std::vector<double> rows(nk, 0.0);
#pragma omp parallel for schedule(static)
    for (int ik = 0; ik < nk; ++ik) {
        const std::size_t off = static_cast<std::size_t>(ik) * nj;
        rows[ik] = row_sum(c + off, logw ? logw + off : nullptr, nj);
    }
    double s = 0.0;
    for (double r : rows) s += r;
    return s;
}

double weighted_sq_sum_serial(const Grid& g, const cplx* c, const double* logw) {
    const int nk = g.nk(), nj = g.nj();
    double s = 0.0;
    for (int ik = 0; ik < nk; ++ik) {
        const std::size_t off = static_cast<std::size_t>(ik) * nj;
        s += row_sum(c + off, logw ? logw + off : nullptr, nj);
    }
    return s;
}

void inverse_laplacian(const Grid& g, const cplx* omega, double t, cplx* psi) {
    const int nk = g.nk(), nj = g.nj();
#pragma omp parallel for schedule(static)
    for (int ik = 0; ik < nk; ++ik) {
        const double k = ik - g.Kx;
        for (int ij = 0; ij < nj; ++ij) {
            const std::size_t i = static_cast<std::size_t>(ik) * nj + ij;
            const double e = g.eta(ij - g.Mv) - k * t;
            const double sym = k * k + e * e;
            psi[i] = sym > 0.0 ? -omega[i] / sym : cplx(0.0, 0.0);
        }
    }
}

void inverse_laplacian_serial(const Grid& g, const cplx* omega, double t, cplx* psi) {
    const int nk = g.nk(), nj = g.nj();
    for (int ik = 0; ik < nk; ++ik) {
        const double k = ik - g.Kx;
        for (int ij = 0; ij < nj; ++ij) {
            const std::size_t i = static_cast<std::size_t>(ik) * nj + ij;
            const double e = g.eta(ij - g.Mv) - k * t;
            const double sym = k * k + e * e;
            psi[i] = sym > 0.0 ? -omega[i] / sym : cplx(0.0, 0.0);
        }
    }
}

}  // namespace couette::kernels
