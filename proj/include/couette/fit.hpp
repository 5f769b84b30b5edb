#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace couette {

enum class DecayModel { exp_nu13, exp_cubic, power };

const char* model_name(DecayModel m);
DecayModel model_from_name(const std::string& s);

struct FitWindow {
    double t0 = 0.0;
    double t1 = 1e300;
};

// Least squares of log(value) against the model, restricted to the window.
//   exp_nu13:  C exp(-c nu^{1/3} t)
//   exp_cubic: C exp(-c nu t^3)
//   power:     C t^{-p}         (rate holds p)
struct DecayFit {
    DecayModel model = DecayModel::exp_nu13;
    double C = 0.0;
    double rate = 0.0;
    double residual = 0.0;  // root mean square of the log misfit
    double nu = 0.0;
    FitWindow window;
    int points = 0;
};

struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& v, DecayModel model,
                   FitWindow window, double nu = 0.0);

}  // namespace couette
