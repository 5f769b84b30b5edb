#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "couette/weights.hpp"

namespace couette {

struct ToyTrajectory {
    bool strong = true;
    int k = 0;
    double eta = 0.0, beta = 0.0, kappa = 0.5, nu = 0.0;
    std::vector<double> t;
    std::vector<double> f_nr;  // strong model
    std::vector<double> f_r;
    std::vector<double> log_g;  // weak model, log f^we with f^we(2|eta|) = 1
    int steps = 0;              // RK4 steps of the accepted resolution
    double richardson = 0.0;    // |y_h - y_{h/2}| / 15, relative
};

// RK4 on the strong-resonance system over the very critical interval, doubling
// the step count from max(256, 16|I~|) until the Richardson estimate is below tol.
ToyTrajectory integrate_strong(int k, double eta, const MultiplierParams& p,
                               std::array<double, 2> init, double tol = 1e-8,
                               int max_points = 20000);

// Same, with a fixed step count and no refinement. Used for convergence studies.
ToyTrajectory integrate_strong_fixed(int k, double eta, const MultiplierParams& p,
                                     std::array<double, 2> init, int n);

// Weak toy (the ODE defining g), integrated backward from g(2|eta|) = 1 one
// critical interval at a time, down to t_{E(|eta|)}.
ToyTrajectory integrate_weak(double eta, const MultiplierParams& p, double tol = 1e-10,
                             int max_points = 20000);
// log f^we(t_{E(|eta|)}) at a fixed refinement level (steps per interval scale)
double integrate_weak_fixed(double eta, const MultiplierParams& p, int refine);

struct CascadeGrowth {
    double log_product = 0.0;  // sum_{k<=E(|eta|^s)} (1+2 C1 kappa) log(|eta|^{1-3b}/k^{2-3b})
    double comparator = 0.0;   // (mu/2)|eta|^s - (mu s/4) log|eta|
    double leading = 0.0;      // (mu/2)|eta|^s
    int terms = 0;
};

CascadeGrowth cascade_amplification(double eta, const MultiplierParams& p);

void write_csv(std::ostream& os, const ToyTrajectory& tr);
void write_csv(const std::string& path, const ToyTrajectory& tr);

}  // namespace couette
