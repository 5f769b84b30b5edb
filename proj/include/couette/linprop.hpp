#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "couette/fit.hpp"
#include "couette/grid.hpp"

namespace couette {

// int_{t0}^{t1} k^2 + (eta - k s)^2 ds, evaluated without cancellation.
double dissipation_integral(double k, double eta, double t0, double t1);

// nu * int_0^t k^2 + |eta - k s + k t|^2 ds, the lab-frame exponent.
double viscous_exponent(double k, double eta, double t, double nu);

struct EvolveResult {
    SpectralField field;
    long truncated = 0;    // output modes whose source lies off the grid or off the lattice
    double lost_l2 = 0.0;  // l2 norm of damped input that left the retained window
};

// Lab-frame propagator: w(t,k,eta) = w_in(k, eta + k t) exp(-viscous_exponent).
// The shift is exact when k t Lv is an integer; other modes are zeroed and counted.
EvolveResult exact_evolve(const SpectralField& w_in, double t, double nu);

// Sheared-frame propagator from t0 to t1. No shift, so nothing is lost.
SpectralField sheared_evolve(const SpectralField& w, double t0, double t1, double nu);

// psi = Delta_L^{-1} w with symbol -1/(k^2 + (eta - k t)^2) and psi(0,0) = 0.
SpectralField stream_function(const SpectralField& w, double t);
// Delta_L applied to f (symbol -(k^2 + (eta - k t)^2)).
SpectralField apply_laplacian(const SpectralField& f, double t);

// Lab-frame quantities computed from the sheared-frame vorticity at time t.
struct LinearNorms {
    double t = 0.0;
    double dy_psi = 0.0;         // ||d_y P_neq psi||
    double t_dx_psi = 0.0;       // <t> ||d_x P_neq psi||
    double dx_psi = 0.0;         // ||d_x P_neq psi||
    double omega_neq = 0.0;      // ||P_neq omega||
};

LinearNorms linear_norms(const SpectralField& w_sheared, double t);

struct DecayReport {
    double nu = 0.0;
    double h2_neq = 0.0;   // ||P_neq w_in||_{H^2}, the constant's normalizer
    double l2_neq = 0.0;   // ||P_neq w_in||
    std::vector<LinearNorms> rows;
    // fits of <t>||d_y psi||/h2, <t>^2||d_x psi||/h2 and ||P_neq w||/l2 against C e^{-c nu t^3}
    // (only when nu > 0), and power-law fits of ||d_y psi|| and ||d_x psi||
    bool has_exp = false;
    DecayFit dy_exp, dx_exp, omega_exp;
    DecayFit dy_power, dx_power;
};

// times must be increasing; power fits use the window, exponential fits all t >= window.t0
DecayReport decay_report(const SpectralField& w_in, double nu, const std::vector<double>& times,
                         FitWindow power_window = {});

void write_csv(std::ostream& os, const DecayReport& r);
std::string to_json_string(const DecayReport& r);

}  // namespace couette
