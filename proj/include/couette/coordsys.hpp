#pragma once

#include <iosfwd>
#include <vector>

#include "couette/grid.hpp"
#include "couette/weights.hpp"

namespace couette {

// 1-D functions of y are stored as SpectralFields with Kx = 0.
Grid profile_grid(const Grid& g);

// Zero x-mode of the velocity u^(1) and of the vorticity, from a sheared-frame field.
// u0_hat(eta) = i w_hat(0,eta)/eta, with the eta = 0 coefficient set to 0.
SpectralField zero_mode_velocity(const SpectralField& w);
SpectralField zero_mode_vorticity(const SpectralField& w);

struct CoordError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// t (v - y) = Phi solves (d_t - nu d_yy) Phi = u0 with Phi(0) = 0. The series sits on a
// uniform grid t_n = n dt. Each interval uses the degree-5 Lagrange interpolant of u0
// through the nearest six samples, integrated against the exact heat factor.
struct VSolution {
    double dt = 0.0;
    double nu = 0.0;
    std::vector<SpectralField> phi;   // t (v - y)
    std::vector<SpectralField> qbar;  // v - y; at t = 0 the limit u0(0)
    // relative L2 residual of d_t Phi + nu eta^2 Phi - u0 with a 6th-order
    // central difference for d_t Phi; only where the 7-point stencil fits (else -1)
    std::vector<double> heat_residual;
};

VSolution solve_v(const std::vector<SpectralField>& u0, double dt, double nu);

// the quadrature weights for one interval, exposed for testing
// W_i = int_{t_n}^{t_{n+1}} e^{-a (t_{n+1} - tau)} l_i(tau) dtau, nodes t_{first+i}
std::vector<double> duhamel_weights(double a, double dt, int n, int first, int npts);

struct CoordState {
    double t = 0.0;
    SpectralField qbar;  // v - y
    SpectralField h;     // v' - 1
    SpectralField v2;    // v''
    SpectralField q;     // (u0 - qbar)/t; zero and has_q = false for t < 1
    SpectralField hbar;  // -(f0 + h)/t; zero for t = 0
    bool has_q = false;
    double min_vprime = 1.0;
    bool diffeomorphism = true;  // v' > 0 everywhere
    double h_linf = 0.0;
    double chain_residual = 0.0;  // max |v' d_v v' - v''| on the physical grid
};

// v is read in y-variables (v ~ y for small data); h_linf records the size of that error.
CoordState derived_fields(const SpectralField& qbar, const SpectralField& u0,
                          const SpectralField& f0, double t, double nu);

struct CoordSeries {
    std::vector<CoordState> states;
    // || d_t v (4th-order central difference) - (q + nu v'') ||_{L2}, t >= 1 interior points;
    // -1 where not evaluated
    std::vector<double> dtv_residual;
};

CoordSeries coord_series(const std::vector<SpectralField>& u0, const std::vector<SpectralField>& f0,
                         double dt, double nu);

struct CoordEnergy {
    double q_A = 0.0;       // nu^beta t^3 ||A <d_v>^{-s} q||^2
    double q_gamma = 0.0;   // t^4 ||A^gamma q||^2
    double hbar_A = 0.0;    // nu^beta t^3 ||A <d_v>^{-s} hbar||^2
    double h_R = 0.0;       // eps nu^beta ||A^R h||^2
    double total() const { return q_A + q_gamma + hbar_A + h_R; }
};

CoordEnergy coord_energy(const CoordState& c, MultiplierBank& bank, double eps);

void write_csv(std::ostream& os, const CoordSeries& s, const std::vector<CoordEnergy>& e);

// sup over [0, 2 pi Lv) of a real profile, sampled on 4x the coefficient count
double profile_linf(const SpectralField& p);

}  // namespace couette
