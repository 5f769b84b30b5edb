#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "couette/grid.hpp"
#include "couette/weights.hpp"

namespace couette {

enum class Scheme { lawson_ralston3, ssp_rk3 };

struct InitSpec {
    std::string profile = "gevrey";  // "gevrey" or "modes"
    double eps = 1e-3;
    double beta = 1.0 / 6.0;
    double s = -1.0;        // < 0: s(beta)
    double lambda0 = -1.0;  // < 0: multipliers.lambda0
    double sigma = -1.0;    // < 0: multipliers.sigma
    std::uint64_t seed = 1;
    double zero_mode_boost = 1.0;  // extra factor on the k = 0 row before normalizing
    // profile evaluated at (k, eta - k pretilt): x-modes start tilted against the
    // shear and straighten out at t = pretilt
    double pretilt = 0.0;
    // "modes": coefficients {k, j, re, im}, used as given (Hermitian partner added)
    std::vector<std::array<double, 4>> modes;
};

struct SimConfig {
    int Nz = 256, Nv = 256;
    double Lv = 1.0;
    double nu = 1e-4;
    double t_final = 10.0;
    double cfl = 0.4;
    double dt_max = 0.1;
    Scheme scheme = Scheme::lawson_ralston3;
    bool nonlinear = true;
    double diag_every = 1.0;
    double checkpoint_every = 0.0;  // 0: none
    bool monitor_energy = true;
    bool check_zero_mode = true;
    double growth_abort = 1e6;
    double max_backward_log = 30.0;  // ssp_rk3 only
    InitSpec init;
    MultiplierParams multipliers;

    Grid grid() const { return Grid::from_physical_size(Nz, Nv, Lv); }
    void validate() const;
};

SimConfig config_from_json_string(const std::string& text);
SimConfig load_config(const std::string& path);
std::string to_json_string(const SimConfig& c);

// Gevrey profile Z e^{-lambda0 |k,eta|^s} <k,eta>^{-sigma-1} with random phases,
// normalized to Gevrey norm eps nu^beta; or explicit modes.
SpectralField init_data(const SimConfig& c);

struct SimState {
    SpectralField omega;  // sheared-frame vorticity
    double t = 0.0;
    long steps = 0;
};

struct StepResult {
    bool accepted = true;
    double dt = 0.0;            // step taken (or rejected)
    double suggested_dt = 0.0;  // largest admissible step from the start state
    double max_u = 0.0;
    double zero_mode_defect = 0.0;
    std::string reason;
};

class Stepper {
public:
    Stepper(const Grid& g, double nu, Scheme scheme, bool nonlinear, double cfl,
            double max_backward_log = 30.0);
    ~Stepper();

    // N = d_v psi d_z w - d_z psi d_v w with psi = Delta_L^{-1} w at time t.
    // Returns max |u| on the physical grid.
    double nonlinear(const SpectralField& w, double t, SpectralField& out);
    // max_j |N(0,j) + i eta_j FFT(w d_z psi)(0,j)| relative to the row scale
    double zero_mode_defect(const SpectralField& w, double t);
    double cfl_dt(const SpectralField& w, double t);

    // One step of size dt; rejected (state untouched) if dt breaks the CFL bound or,
    // for ssp_rk3, the backward integrating factor would exceed e^{max_backward_log}.
    StepResult step(SimState& s, double dt, bool check_zero_mode = false);
    // Same, but clips dt to the CFL bound instead of rejecting.
    StepResult advance(SimState& s, double dt_cap, bool check_zero_mode = false);

    const Grid& grid() const { return g_; }

private:
    struct Work;
    Grid g_;
    double nu_;
    Scheme scheme_;
    bool nl_;
    double cfl_;
    double max_back_;
    std::unique_ptr<Work> w_;
    double eval(const SpectralField& w, double t, SpectralField& out, double* defect);
    StepResult step_impl(SimState& s, double dt, bool check_zero_mode, bool clip);
};

struct EnergyDiag {
    double A2 = 0.0;           // ||A f||^2
    double Agamma2_neq = 0.0;  // ||A^gamma P_neq f||^2
    double ck_lambda = 0.0;    // |lambda'| || |k,eta|^{s/2} A f ||^2
    double ck_w = 0.0;         // sum (d_t w / w) |A f|^2
    double ck_g = 0.0;         // sum (d_t g / g) |A f|^2
    double dissipation = 0.0;  // nu || |Delta_L|^{1/2} A f ||^2
};

EnergyDiag energy_monitor(const SpectralField& f, double t, double nu, MultiplierBank& bank);

struct DiagRow {
    double t = 0.0;
    long steps = 0;
    double dt = 0.0;
    double l2 = 0.0, l2_neq = 0.0, l2_zero = 0.0, mean = 0.0;
    double max_u = 0.0;
    double zero_mode_defect = 0.0;  // worst since the previous row
    EnergyDiag energy;
};

std::vector<std::string> diag_columns();
void write_csv(std::ostream& os, const std::vector<DiagRow>& rows);

struct RunOptions {
    std::string checkpoint_dir;  // empty: no checkpoints written
    std::string restart_from;    // checkpoint path to continue from
    // called with the state at every diagnostic row, the initial one included
    std::function<void(const SimState&)> on_output;
};

struct RunResult {
    std::vector<DiagRow> rows;
    SimState final_state;
    bool aborted = false;
    std::string abort_reason;
    std::vector<std::string> checkpoints;
    long rejected = 0;
};

RunResult run(const SimConfig& c, const RunOptions& opt = {});
// Same, from a given state (the initial diagnostics are recorded at s.t).
RunResult run_from(const SimConfig& c, SimState s, const RunOptions& opt = {});

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void save_checkpoint(const std::string& path, const SimState& s);
SimState load_checkpoint(const std::string& path);

}  // namespace couette
