#include "sqg/field.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace sqg {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

double mode_abs(ModeIndex k) {
    return std::sqrt(static_cast<double>(k.k1) * k.k1 + static_cast<double>(k.k2) * k.k2);
}

double lambda_symbol(ModeIndex k) { return 2.0 * M_PI * mode_abs(k); }

ModeTable::ModeTable(int kmax) : kmax_(kmax) {
    if (kmax < 1) throw std::invalid_argument("ModeTable: kmax must be >= 1");
    const int w = 2 * kmax + 1;
    lookup_.assign(static_cast<std::size_t>(w) * w, -1);
    for (int k1 = -kmax; k1 <= kmax; ++k1) {
        for (int k2 = -kmax; k2 <= kmax; ++k2) {
            ModeIndex k{k1, k2};
            if (!in_half_lattice(k)) continue;
            lookup_[static_cast<std::size_t>(k1 + kmax) * w + (k2 + kmax)] =
                static_cast<int>(modes_.size());
            modes_.push_back(k);
            lambda_.push_back(lambda_symbol(k));
            abs2_.push_back(k1 * k1 + k2 * k2);
        }
    }
}

int ModeTable::index_of(ModeIndex k) const {
    if (std::abs(k.k1) > kmax_ || std::abs(k.k2) > kmax_) return -1;
    const int w = 2 * kmax_ + 1;
    return lookup_[static_cast<std::size_t>(k.k1 + kmax_) * w + (k.k2 + kmax_)];
}

std::shared_ptr<const ModeTable> ModeTable::get(int kmax) {
    static std::mutex mu;
    static std::map<int, std::shared_ptr<const ModeTable>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(kmax);
    if (it != cache.end()) return it->second;
    auto t = std::make_shared<const ModeTable>(kmax);
    cache.emplace(kmax, t);
    return t;
}

SpectralField::SpectralField(int kmax)
    : table_(ModeTable::get(kmax)), coeffs_(table_->size(), cplx(0.0, 0.0)) {}

SpectralField::SpectralField(int kmax, std::vector<cplx> coeffs)
    : table_(ModeTable::get(kmax)), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != table_->size())
        throw std::invalid_argument("SpectralField: coefficient count does not match kmax");
}

cplx SpectralField::coeff(ModeIndex k) const {
    if (k.k1 == 0 && k.k2 == 0) return cplx(0.0, 0.0);
    if (in_half_lattice(k)) {
        int i = table_->index_of(k);
        return i < 0 ? cplx(0.0, 0.0) : coeffs_[static_cast<std::size_t>(i)];
    }
    int i = table_->index_of(conj_mode(k));
    return i < 0 ? cplx(0.0, 0.0) : std::conj(coeffs_[static_cast<std::size_t>(i)]);
}

void SpectralField::set_coeff(ModeIndex k, cplx v) {
    if (k.k1 == 0 && k.k2 == 0)
        throw std::invalid_argument("SpectralField: mode (0,0) is excluded (zero mean)");
    if (in_half_lattice(k)) {
        int i = table_->index_of(k);
        if (i < 0) throw std::out_of_range("SpectralField: mode outside kmax");
        coeffs_[static_cast<std::size_t>(i)] = v;
    } else {
        int i = table_->index_of(conj_mode(k));
        if (i < 0) throw std::out_of_range("SpectralField: mode outside kmax");
        coeffs_[static_cast<std::size_t>(i)] = std::conj(v);
    }
}

double SpectralField::real_coeff(std::size_t i, Trig t) const {
    const cplx& c = coeffs_[i];
    return t == Trig::Sin ? -kSqrt2 * c.imag() : kSqrt2 * c.real();
}

void SpectralField::set_real_coeff(std::size_t i, Trig t, double x) {
    cplx& c = coeffs_[i];
    if (t == Trig::Sin)
        c = cplx(c.real(), -x / kSqrt2);
    else
        c = cplx(x / kSqrt2, c.imag());
}

void SpectralField::add_real_coeff(std::size_t i, Trig t, double dx) {
    cplx& c = coeffs_[i];
    if (t == Trig::Sin)
        c = cplx(c.real(), c.imag() - dx / kSqrt2);
    else
        c = cplx(c.real() + dx / kSqrt2, c.imag());
}

bool SpectralField::is_zero() const {
    for (const auto& c : coeffs_)
        if (c != cplx(0.0, 0.0)) return false;
    return true;
}

void SpectralField::check_compatible(const SpectralField& o) const {
    if (kmax() != o.kmax())
        throw std::invalid_argument("SpectralField: kmax mismatch in field arithmetic");
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
}

SpectralField& SpectralField::operator*=(double c) {
    for (auto& v : coeffs_) v *= c;
    return *this;
}

void SpectralField::axpy(double c, const SpectralField& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += c * o.coeffs_[i];
}

SpectralField resample(const SpectralField& f, int new_kmax) {
    if (new_kmax == f.kmax()) return f;
    SpectralField out(new_kmax);
    const auto& tf = f.table();
    for (std::size_t i = 0; i < tf.size(); ++i) {
        ModeIndex k = tf.mode(i);
        if (std::abs(k.k1) <= new_kmax && std::abs(k.k2) <= new_kmax)
            out.set_coeff(k, f.coeffs()[i]);
    }
    return out;
}

double l2_inner(const SpectralField& f, const SpectralField& g) {
    if (f.kmax() != g.kmax()) {
        // Pair at the common resolution; coefficients beyond either band are zero.
        int k = std::max(f.kmax(), g.kmax());
        return l2_inner(resample(f, k), resample(g, k));
    }
    double s = 0.0;
    const auto& a = f.coeffs();
    const auto& b = g.coeffs();
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return 2.0 * s;
}

double l2_norm(const SpectralField& f) { return std::sqrt(std::max(0.0, l2_inner(f, f))); }

std::vector<double> synthesize(const SpectralField& f, std::size_t n) {
    const int kmax = f.kmax();
    if (n < 2 * static_cast<std::size_t>(kmax) + 1)
        throw std::invalid_argument("synthesize: grid too small for the stored band");
    std::vector<cplx> buf(n * n, cplx(0.0, 0.0));
    const auto& t = f.table();
    auto wrap = [n](int k) { return static_cast<std::size_t>((k % static_cast<int>(n) + static_cast<int>(n)) % static_cast<int>(n)); };
    for (std::size_t i = 0; i < t.size(); ++i) {
        ModeIndex k = t.mode(i);
        buf[wrap(k.k1) * n + wrap(k.k2)] += f.coeffs()[i];
        buf[wrap(-k.k1) * n + wrap(-k.k2)] += std::conj(f.coeffs()[i]);
    }
    fft2_pow2(buf.data(), n, +1);
    std::vector<double> out(n * n);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = buf[i].real();
    return out;
}

SpectralField analyze(const std::vector<double>& grid, std::size_t n, int kmax) {
    if (grid.size() != n * n) throw std::invalid_argument("analyze: grid size mismatch");
    if (n < 2 * static_cast<std::size_t>(kmax) + 1)
        throw std::invalid_argument("analyze: grid too small for requested band");
    std::vector<cplx> buf(n * n);
    for (std::size_t i = 0; i < grid.size(); ++i) buf[i] = cplx(grid[i], 0.0);
    fft2_pow2(buf.data(), n, -1);
    const double inv = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    SpectralField out(kmax);
    auto& c = out.coeffs();
    const auto& t = out.table();
    auto wrap = [n](int k) { return static_cast<std::size_t>((k % static_cast<int>(n) + static_cast<int>(n)) % static_cast<int>(n)); };
    for (std::size_t i = 0; i < t.size(); ++i) {
        ModeIndex k = t.mode(i);
        c[i] = buf[wrap(k.k1) * n + wrap(k.k2)] * inv;
    }
    return out;
}

std::size_t dealiased_grid_size(int kmax, int grid_factor) {
    if (grid_factor < 2)
        throw std::invalid_argument("dealiased_grid_size: grid_factor must be >= 2");
    return next_pow2(static_cast<std::size_t>(grid_factor) * (2 * static_cast<std::size_t>(kmax) + 1));
}

}  // namespace sqg
