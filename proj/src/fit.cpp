#include "couette/fit.hpp"

#include <cmath>

namespace couette {

const char* model_name(DecayModel m) {
    switch (m) {
        case DecayModel::exp_nu13: return "exp_nu13";
        case DecayModel::exp_cubic: return "exp_cubic";
        case DecayModel::power: return "power";
    }
    return "?";
}

DecayModel model_from_name(const std::string& s) {
    if (s == "exp_nu13") return DecayModel::exp_nu13;
    if (s == "exp_cubic") return DecayModel::exp_cubic;
    if (s == "power") return DecayModel::power;
    throw FitError("unknown decay model '" + s + "'");
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& v, DecayModel model,
                   FitWindow window, double nu) {
    if (t.size() != v.size()) throw FitError("time and value series differ in length");
    if (model != DecayModel::power && !(nu > 0.0))
        throw FitError("exponential models need nu > 0");
    // regress y = a + b x, x the model abscissa, y = log v; then C = e^a, rate = -b
    double sxx = 0, sxy = 0;
    int n = 0;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < window.t0 || t[i] > window.t1) continue;
        if (!(v[i] > 0.0)) throw FitError("nonpositive value at t = " + std::to_string(t[i]));
        double x = 0.0;
        switch (model) {
            case DecayModel::exp_nu13: x = std::cbrt(nu) * t[i]; break;
            case DecayModel::exp_cubic: x = nu * t[i] * t[i] * t[i]; break;
            case DecayModel::power:
                if (!(t[i] > 0.0)) throw FitError("power model needs t > 0");
                x = std::log(t[i]);
                break;
        }
        xs.push_back(x);
        ys.push_back(std::log(v[i]));
        ++n;
    }
    if (n < 2) throw FitError("fewer than two points in the fit window");
    // centre for conditioning
    double mx = 0, my = 0;
    for (int i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    for (int i = 0; i < n; ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0)) throw FitError("degenerate abscissa in the fit window");
    const double b = sxy / sxx;
    const double a = my - b * mx;
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = ys[i] - (a + b * xs[i]);
        ss += r * r;
    }
    DecayFit f;
    f.model = model;
    f.C = std::exp(a);
    f.rate = -b;
    f.residual = std::sqrt(ss / n);
    f.nu = nu;
    f.window = window;
    f.points = n;
    return f;
}

}  // namespace couette
