#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace couette {

using cplx = std::complex<double>;

struct GridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Truncated spectral box: k in [-Kx, Kx], eta = j / Lv with j in [-Mv, Mv].
// z has period 2*pi, v lives on [-pi*Lv, pi*Lv).
struct Grid {
    int Kx = 0;
    int Mv = 0;
    double Lv = 1.0;
    int Nz = 1;
    int Nv = 1;

    static Grid make(int Kx, int Mv, double Lv);
    // Largest retained modes for a given physical size under the 2/3 rule.
    static Grid from_physical_size(int Nz, int Nv, double Lv);

    int nk() const { return 2 * Kx + 1; }
    int nj() const { return 2 * Mv + 1; }
    std::size_t size() const { return static_cast<std::size_t>(nk()) * nj(); }
    std::size_t index(int k, int j) const {
        return static_cast<std::size_t>(k + Kx) * nj() + (j + Mv);
    }
    double deta() const { return 1.0 / Lv; }
    double eta(int j) const { return j / Lv; }
    double eta_max() const { return Mv / Lv; }
    double dz() const { return 2.0 * M_PI / Nz; }
    double dv() const { return 2.0 * M_PI * Lv / Nv; }

    bool same_modes(const Grid& o) const { return Kx == o.Kx && Mv == o.Mv && Lv == o.Lv; }
    bool operator==(const Grid& o) const { return same_modes(o) && Nz == o.Nz && Nv == o.Nv; }
};

// smallest 2^a 3^b 5^c >= n
int fft_size_at_least(int n);

// <x> = sqrt(1 + x^2), |k,eta| = |k| + |eta|
inline double bracket(double x) { return std::sqrt(1.0 + x * x); }
inline double l1(double k, double eta) { return std::abs(k) + std::abs(eta); }

struct SpectralField {
    Grid grid;
    std::vector<cplx> coef;

    SpectralField() = default;
    explicit SpectralField(const Grid& g) : grid(g), coef(g.size(), cplx(0.0, 0.0)) {}

    cplx& at(int k, int j) { return coef[grid.index(k, j)]; }
    const cplx& at(int k, int j) const { return coef[grid.index(k, j)]; }

    bool finite() const;
    // max |c(-k,-j) - conj c(k,j)|
    double hermitian_defect() const;
    void enforce_hermitian();

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(double a);
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double a, SpectralField f);

// Real samples, z-major: data[iz * Nv + iv] at z = 2 pi iz / Nz, v = -pi Lv + iv dv.
struct PhysicalField {
    int Nz = 0;
    int Nv = 0;
    std::vector<double> data;
    double& operator()(int iz, int iv) { return data[static_cast<std::size_t>(iz) * Nv + iv]; }
    double operator()(int iz, int iv) const { return data[static_cast<std::size_t>(iz) * Nv + iv]; }
};

// Owns FFTW plans and scratch buffers for one grid. Not safe for concurrent
// use of the same instance; create one per thread.
class Transform {
public:
    explicit Transform(const Grid& g);
    ~Transform();
    Transform(const Transform&) = delete;
    Transform& operator=(const Transform&) = delete;

    const Grid& grid() const { return grid_; }

    void to_physical(const SpectralField& f, double* out);
    void to_physical(const cplx* coef, double* out);
    PhysicalField to_physical(const SpectralField& f);
    void from_physical(const double* in, cplx* coef);
    SpectralField from_physical(const PhysicalField& u);

private:
    Grid grid_;
    int nvh_;
    double* real_ = nullptr;
    void* spec_ = nullptr;
    void* fwd_ = nullptr;
    void* bwd_ = nullptr;
};

PhysicalField to_physical(const SpectralField& f);
SpectralField from_physical(const PhysicalField& u, const Grid& g);

double l2_norm(const SpectralField& f);
double hsigma_norm(const SpectralField& f, double sigma);
// Rectangle-rule Gevrey norm; s = 0 drops the exponential weight.
double gevrey_norm(const SpectralField& f, double s, double lambda, double sigma);

// Littlewood-Paley in v.  N = 0.5 is the low cutoff phi(|d_v|).
double lp_phi(double xi);
double lp_rho(double N, double xi);
SpectralField lp_project(const SpectralField& f, double N);
SpectralField lp_low(const SpectralField& f, double N);
std::vector<double> lp_levels(const Grid& g);

std::pair<SpectralField, SpectralField> project_modes(const SpectralField& f);
SpectralField dv(const SpectralField& f);
SpectralField dz(const SpectralField& f);

// Binary container "CLSF": magic, int32 Kx, int32 Mv, float64 Lv, then
// (2Kx+1)(2Mv+1) float64 (re, im) pairs, k-major, little endian.
void write_binary(std::ostream& os, const SpectralField& f);
SpectralField read_binary(std::istream& is);
void save_binary(const std::string& path, const SpectralField& f);
SpectralField load_binary(const std::string& path);
std::string to_json_string(const SpectralField& f);
SpectralField from_json_string(const std::string& s);

}  // namespace couette
