#include "couette/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>

#include <json.hpp>

#include "couette/kernels.hpp"

namespace couette {

namespace {

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

bool smooth235(int n) {
    for (int p : {2, 3, 5})
        while (n % p == 0) n /= p;
    return n == 1;
}

double smooth_step(double x) {
    // 0 for x <= 0, 1 for x >= 1, C-infinity in between
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x);
    const double b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

template <class Fn>
SpectralField map_eta(const SpectralField& f, Fn fn) {
    SpectralField out(f.grid);
    const Grid& g = f.grid;
    for (int k = -g.Kx; k <= g.Kx; ++k)
        for (int j = -g.Mv; j <= g.Mv; ++j) out.at(k, j) = f.at(k, j) * fn(std::abs(g.eta(j)));
    return out;
}

}  // namespace

int fft_size_at_least(int n) {
    if (n < 1) n = 1;
    while (!smooth235(n)) ++n;
    return n;
}

Grid Grid::make(int Kx, int Mv, double Lv) {
    if (Kx < 0 || Mv < 0) throw GridError("mode counts must be nonnegative");
    if (!(Lv > 0.0) || !std::isfinite(Lv)) throw GridError("Lv must be positive");
    Grid g;
    g.Kx = Kx;
    g.Mv = Mv;
    g.Lv = Lv;
    g.Nz = fft_size_at_least(3 * Kx + 1);
    g.Nv = fft_size_at_least(3 * Mv + 1);
    return g;
}

Grid Grid::from_physical_size(int Nz, int Nv, double Lv) {
    if (Nz < 1 || Nv < 1) throw GridError("physical size must be positive");
    Grid g = make((Nz - 1) / 3, (Nv - 1) / 3, Lv);
    g.Nz = Nz;
    g.Nv = Nv;
    return g;
}

bool SpectralField::finite() const {
    for (const auto& c : coef)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
}

double SpectralField::hermitian_defect() const {
    double d = 0.0;
    for (int k = -grid.Kx; k <= grid.Kx; ++k)
        for (int j = -grid.Mv; j <= grid.Mv; ++j)
            d = std::max(d, std::abs(at(-k, -j) - std::conj(at(k, j))));
    return d;
}

void SpectralField::enforce_hermitian() {
    for (int k = -grid.Kx; k <= grid.Kx; ++k)
        for (int j = -grid.Mv; j <= grid.Mv; ++j) {
            if (k < 0 || (k == 0 && j < 0)) continue;
            if (k == 0 && j == 0) {
                at(0, 0) = cplx(at(0, 0).real(), 0.0);
                continue;
            }
            const cplx avg = 0.5 * (at(k, j) + std::conj(at(-k, -j)));
            at(k, j) = avg;
            at(-k, -j) = std::conj(avg);
        }
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
    if (!grid.same_modes(o.grid)) throw GridError("grid mismatch in +=");
    for (std::size_t i = 0; i < coef.size(); ++i) coef[i] += o.coef[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
    if (!grid.same_modes(o.grid)) throw GridError("grid mismatch in -=");
    for (std::size_t i = 0; i < coef.size(); ++i) coef[i] -= o.coef[i];
    return *this;
}

SpectralField& SpectralField::operator*=(double a) {
    for (auto& c : coef) c *= a;
    return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double a, SpectralField f) { return f *= a; }

Transform::Transform(const Grid& g) : grid_(g), nvh_(g.Nv / 2 + 1) {
    if (g.Nz < 2 * g.Kx + 1 || g.Nv < 2 * g.Mv + 1)
        throw GridError("physical grid too small for retained modes");
    std::lock_guard<std::mutex> lock(plan_mutex());
    real_ = fftw_alloc_real(static_cast<std::size_t>(g.Nz) * g.Nv);
    spec_ = fftw_alloc_complex(static_cast<std::size_t>(g.Nz) * nvh_);
    auto* sp = static_cast<fftw_complex*>(spec_);
    fwd_ = fftw_plan_dft_r2c_2d(g.Nz, g.Nv, real_, sp, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_2d(g.Nz, g.Nv, sp, real_, FFTW_ESTIMATE);
}

Transform::~Transform() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
    fftw_free(real_);
    fftw_free(spec_);
}

void Transform::to_physical(const cplx* coef, double* out) {
    const Grid& g = grid_;
    auto* sp = static_cast<fftw_complex*>(spec_);
    std::memset(sp, 0, sizeof(fftw_complex) * static_cast<std::size_t>(g.Nz) * nvh_);
    for (int k = -g.Kx; k <= g.Kx; ++k) {
        const int p = (k + g.Nz) % g.Nz;
        for (int j = 0; j <= g.Mv; ++j) {
            // the v origin sits at -pi Lv, hence the (-1)^j phase
            const cplx c = coef[g.index(k, j)] * ((j & 1) ? -1.0 : 1.0);
            sp[static_cast<std::size_t>(p) * nvh_ + j][0] = c.real();
            sp[static_cast<std::size_t>(p) * nvh_ + j][1] = c.imag();
        }
    }
    fftw_execute_dft_c2r(static_cast<fftw_plan>(bwd_), sp, real_);
    std::memcpy(out, real_, sizeof(double) * static_cast<std::size_t>(g.Nz) * g.Nv);
}

void Transform::to_physical(const SpectralField& f, double* out) {
    if (!f.grid.same_modes(grid_)) throw GridError("field does not match transform grid");
    to_physical(f.coef.data(), out);
}

PhysicalField Transform::to_physical(const SpectralField& f) {
    PhysicalField u;
    u.Nz = grid_.Nz;
    u.Nv = grid_.Nv;
    u.data.resize(static_cast<std::size_t>(u.Nz) * u.Nv);
    to_physical(f, u.data.data());
    return u;
}

void Transform::from_physical(const double* in, cplx* coef) {
    const Grid& g = grid_;
    auto* sp = static_cast<fftw_complex*>(spec_);
    std::memcpy(real_, in, sizeof(double) * static_cast<std::size_t>(g.Nz) * g.Nv);
    fftw_execute_dft_r2c(static_cast<fftw_plan>(fwd_), real_, sp);
    const double scale = 1.0 / (static_cast<double>(g.Nz) * g.Nv);
    for (int k = -g.Kx; k <= g.Kx; ++k) {
        const int p = (k + g.Nz) % g.Nz;
        for (int j = 0; j <= g.Mv; ++j) {
            const auto& y = sp[static_cast<std::size_t>(p) * nvh_ + j];
            coef[g.index(k, j)] = cplx(y[0], y[1]) * (scale * ((j & 1) ? -1.0 : 1.0));
        }
    }
    // fill the other half plane from the stored one so symmetry is exact
    for (int k = -g.Kx; k <= g.Kx; ++k)
        for (int j = 1; j <= g.Mv; ++j) coef[g.index(-k, -j)] = std::conj(coef[g.index(k, j)]);
    for (int k = 1; k <= g.Kx; ++k) coef[g.index(-k, 0)] = std::conj(coef[g.index(k, 0)]);
    coef[g.index(0, 0)] = cplx(coef[g.index(0, 0)].real(), 0.0);
}

SpectralField Transform::from_physical(const PhysicalField& u) {
    if (u.Nz != grid_.Nz || u.Nv != grid_.Nv ||
        u.data.size() != static_cast<std::size_t>(u.Nz) * u.Nv)
        throw GridError("physical array does not match grid");
    SpectralField f(grid_);
    from_physical(u.data.data(), f.coef.data());
    return f;
}

PhysicalField to_physical(const SpectralField& f) {
    Transform tr(f.grid);
    return tr.to_physical(f);
}

SpectralField from_physical(const PhysicalField& u, const Grid& g) {
    if (u.Nz != g.Nz || u.Nv != g.Nv) throw GridError("physical array does not match grid");
    Transform tr(g);
    return tr.from_physical(u);
}

namespace {

double log_weighted_norm(const SpectralField& f, const std::vector<double>& logw) {
    return std::sqrt(f.grid.deta() *
                     kernels::weighted_sq_sum(f.grid, f.coef.data(), logw.data()));
}

template <class Fn>
std::vector<double> log_weight(const Grid& g, Fn fn) {
    std::vector<double> w(g.size());
    for (int k = -g.Kx; k <= g.Kx; ++k)
        for (int j = -g.Mv; j <= g.Mv; ++j) w[g.index(k, j)] = fn(k, g.eta(j));
    return w;
}

}  // namespace

double l2_norm(const SpectralField& f) {
    return std::sqrt(f.grid.deta() * kernels::weighted_sq_sum(f.grid, f.coef.data(), nullptr));
}

double hsigma_norm(const SpectralField& f, double sigma) {
    auto w = log_weight(f.grid,
                        [&](int k, double eta) { return sigma * std::log(bracket(l1(k, eta))); });
    return log_weighted_norm(f, w);
}

double gevrey_norm(const SpectralField& f, double s, double lambda, double sigma) {
    if (!f.finite()) throw std::domain_error("gevrey_norm: non-finite coefficients");
    if (s < 0.0 || s > 1.0) throw std::invalid_argument("gevrey_norm: s outside [0,1]");
    auto w = log_weight(f.grid, [&](int k, double eta) {
        const double a = l1(k, eta);
        const double ex = s > 0.0 ? lambda * std::pow(a, s) : 0.0;
        return ex + sigma * std::log(bracket(a));
    });
    return log_weighted_norm(f, w);
}

double lp_phi(double xi) {
    const double a = std::abs(xi);
    if (a <= 0.5) return 1.0;
    if (a >= 0.75) return 0.0;
    return smooth_step((0.75 - a) / 0.25);
}

double lp_rho(double N, double xi) {
    if (N < 1.0) return lp_phi(xi);
    return lp_phi(xi / (2.0 * N)) - lp_phi(xi / N);
}

SpectralField lp_project(const SpectralField& f, double N) {
    if (!(N == 0.5 || (N >= 1.0 && std::exp2(std::round(std::log2(N))) == N)))
        throw std::invalid_argument("lp_project: N must be 1/2 or a power of two");
    return map_eta(f, [N](double a) { return lp_rho(N, a); });
}

SpectralField lp_low(const SpectralField& f, double N) {
    // f_{<N} = f_{1/2} + sum_{K<N} f_K = phi(|eta|/N)
    if (N <= 1.0) return lp_project(f, 0.5);
    return map_eta(f, [N](double a) { return lp_phi(a / N); });
}

std::vector<double> lp_levels(const Grid& g) {
    std::vector<double> lv{0.5};
    double N = 1.0;
    lv.push_back(N);
    while (N < g.eta_max()) {
        N *= 2.0;
        lv.push_back(N);
    }
    return lv;
}

std::pair<SpectralField, SpectralField> project_modes(const SpectralField& f) {
    SpectralField p0(f.grid), pn = f;
    for (int j = -f.grid.Mv; j <= f.grid.Mv; ++j) {
        p0.at(0, j) = f.at(0, j);
        pn.at(0, j) = 0.0;
    }
    return {p0, pn};
}

SpectralField dv(const SpectralField& f) {
    SpectralField out(f.grid);
    for (int k = -f.grid.Kx; k <= f.grid.Kx; ++k)
        for (int j = -f.grid.Mv; j <= f.grid.Mv; ++j)
            out.at(k, j) = cplx(0.0, f.grid.eta(j)) * f.at(k, j);
    return out;
}

SpectralField dz(const SpectralField& f) {
    SpectralField out(f.grid);
    for (int k = -f.grid.Kx; k <= f.grid.Kx; ++k)
        for (int j = -f.grid.Mv; j <= f.grid.Mv; ++j)
            out.at(k, j) = cplx(0.0, static_cast<double>(k)) * f.at(k, j);
    return out;
}

void write_binary(std::ostream& os, const SpectralField& f) {
    const char magic[4] = {'C', 'L', 'S', 'F'};
    const std::int32_t kx = f.grid.Kx, mv = f.grid.Mv;
    const double lv = f.grid.Lv;
    os.write(magic, 4);
    os.write(reinterpret_cast<const char*>(&kx), sizeof kx);
    os.write(reinterpret_cast<const char*>(&mv), sizeof mv);
    os.write(reinterpret_cast<const char*>(&lv), sizeof lv);
    os.write(reinterpret_cast<const char*>(f.coef.data()),
             static_cast<std::streamsize>(sizeof(cplx) * f.coef.size()));
    if (!os) throw std::runtime_error("write_binary: stream failure");
}

SpectralField read_binary(std::istream& is) {
    char magic[4];
    std::int32_t kx = 0, mv = 0;
    double lv = 0.0;
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "CLSF", 4) != 0)
        throw GridError("read_binary: bad magic");
    is.read(reinterpret_cast<char*>(&kx), sizeof kx);
    is.read(reinterpret_cast<char*>(&mv), sizeof mv);
    is.read(reinterpret_cast<char*>(&lv), sizeof lv);
    if (!is) throw GridError("read_binary: truncated header");
    SpectralField f(Grid::make(kx, mv, lv));
    is.read(reinterpret_cast<char*>(f.coef.data()),
            static_cast<std::streamsize>(sizeof(cplx) * f.coef.size()));
    if (!is) throw GridError("read_binary: truncated payload");
    return f;
}

void save_binary(const std::string& path, const SpectralField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    write_binary(os, f);
}

SpectralField load_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    return read_binary(is);
}

std::string to_json_string(const SpectralField& f) {
    nlohmann::json j;
    j["Kx"] = f.grid.Kx;
    j["Mv"] = f.grid.Mv;
    j["Lv"] = f.grid.Lv;
    auto arr = nlohmann::json::array();
    for (const auto& c : f.coef) arr.push_back({c.real(), c.imag()});
    j["coef"] = std::move(arr);
    return j.dump();
}

SpectralField from_json_string(const std::string& s) {
    const auto j = nlohmann::json::parse(s);
    SpectralField f(Grid::make(j.at("Kx").get<int>(), j.at("Mv").get<int>(),
                               j.at("Lv").get<double>()));
    const auto& arr = j.at("coef");
    if (arr.size() != f.coef.size()) throw GridError("coefficient count does not match header");
    for (std::size_t i = 0; i < arr.size(); ++i)
        f.coef[i] = cplx(arr[i].at(0).get<double>(), arr[i].at(1).get<double>());
    return f;
}

}  // namespace couette
