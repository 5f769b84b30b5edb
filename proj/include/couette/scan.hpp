#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "couette/fit.hpp"
#include "couette/nlsolve.hpp"

namespace couette {

// Verdict thresholds live here, not in the code.
struct ScanSettings {
    std::vector<double> nus;
    std::vector<double> eps;
    double amp_bound = 2.0;        // stable needs amplification below this
    double rate_fraction = 0.5;    // and a fitted rate at least this fraction of the linear one
    double window_start = -1.0;    // < 0: 2 max|eta| on the grid
};

struct ScanCell {
    double nu = 0.0, eps = 0.0;
    double rate = 0.0;         // exp_nu13 fit of ||P_neq w|| on the window
    double linear_rate = 0.0;  // same fit for the linear evolution of the same data
    double fit_residual = 0.0;
    FitWindow window;
    double amplification = 0.0;  // max_t ||P_neq w(t)|| / ||P_neq w(0)||
    double t_amplification = 0.0;
    double final_ratio = 0.0;    // ||P_neq w(T)|| / ||P_neq w(0)||
    std::string verdict;         // "stable", "unstable" or "failed"
    std::string error;
};

struct ScanResult {
    ScanSettings settings;
    std::vector<ScanCell> cells;  // nu-major, in list order
};

struct ScanConfig {
    SimConfig base;
    ScanSettings settings;
};

// top-level SimConfig fields plus a "scan" object {nus, eps, amp_bound, rate_fraction, window_start}
ScanConfig scan_config_from_json_string(const std::string& text);

double default_window_start(const SimConfig& c);

// One cell. Throws nothing: failures land in verdict/error.
ScanCell scan_cell(const SimConfig& base, const ScanSettings& s, double nu, double eps);

// Cells run as independent jobs; the result order does not depend on scheduling.
ScanResult threshold_scan(const SimConfig& base, const ScanSettings& s);

std::vector<std::string> scan_columns();
void write_csv(std::ostream& os, const ScanResult& r);
std::string to_json_string(const ScanResult& r);
ScanResult scan_result_from_json_string(const std::string& text);

struct EmitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class EmitFormat { csv, json, plotdata };

// Writes <dir>/<stem>.csv, .json, or for plotdata the CSV plus <stem>.gp (a gnuplot script
// that reads only the CSV). Returns the paths written.
std::vector<std::string> emit(const ScanResult& r, const std::string& dir, const std::string& stem,
                              EmitFormat f);

}  // namespace couette
