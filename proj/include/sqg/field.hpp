// Zero-mean real scalar fields on the 2-torus, stored as Fourier coefficients
// over the positive half-lattice; the conjugate modes are implied so the
// reconstructed field is real by construction.

#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "sqg/fft.hpp"

namespace sqg {

struct ModeIndex {
    int k1 = 0;
    int k2 = 0;

    bool operator==(const ModeIndex& o) const { return k1 == o.k1 && k2 == o.k2; }
    bool operator!=(const ModeIndex& o) const { return !(*this == o); }
};

// Positive half-lattice: k2 > 0, or k2 == 0 and k1 > 0.
inline bool in_half_lattice(ModeIndex k) { return k.k2 > 0 || (k.k2 == 0 && k.k1 > 0); }
inline ModeIndex conj_mode(ModeIndex k) { return {-k.k1, -k.k2}; }

// Euclidean |k| and the multiplier |2*pi*k| shared by every spectral operator.
double mode_abs(ModeIndex k);
double lambda_symbol(ModeIndex k);

// Enumeration of the half-lattice modes with |k|_inf <= kmax, sorted
// lexicographically by (k1, k2). Shared and immutable once built.
class ModeTable {
  public:
    explicit ModeTable(int kmax);

    int kmax() const { return kmax_; }
    std::size_t size() const { return modes_.size(); }
    const std::vector<ModeIndex>& modes() const { return modes_; }
    ModeIndex mode(std::size_t i) const { return modes_[i]; }
    // Index of a half-lattice mode, -1 if out of range or not canonical.
    int index_of(ModeIndex k) const;
    double lambda(std::size_t i) const { return lambda_[i]; }
    int abs2(std::size_t i) const { return abs2_[i]; }

    static std::shared_ptr<const ModeTable> get(int kmax);

  private:
    int kmax_;
    std::vector<ModeIndex> modes_;
    std::vector<int> lookup_;
    std::vector<double> lambda_;
    std::vector<int> abs2_;
};

// Which real trigonometric basis function of a half-lattice mode.
// For k in the positive half-lattice, e(k,Sin) = sqrt(2) sin(2 pi k.x) and
// e(k,Cos) = sqrt(2) cos(2 pi k.x); together they run over the real basis
// indexed by the full lattice.
enum class Trig : std::uint8_t { Sin = 0, Cos = 1 };

class SpectralField {
  public:
    SpectralField() : SpectralField(1) {}
    explicit SpectralField(int kmax);
    SpectralField(int kmax, std::vector<cplx> coeffs);

    int kmax() const { return table_->kmax(); }
    std::size_t mode_count() const { return coeffs_.size(); }
    const ModeTable& table() const { return *table_; }
    const std::vector<cplx>& coeffs() const { return coeffs_; }
    std::vector<cplx>& coeffs() { return coeffs_; }

    // Coefficient of exp(2*pi*i k.x) for any nonzero k; conjugate symmetry
    // is applied for modes outside the stored half-lattice.
    cplx coeff(ModeIndex k) const;
    void set_coeff(ModeIndex k, cplx v);

    // Real-basis coefficients <f, e(k,trig)> and their inverse.
    double real_coeff(std::size_t half_index, Trig t) const;
    void set_real_coeff(std::size_t half_index, Trig t, double x);
    void add_real_coeff(std::size_t half_index, Trig t, double dx);

    bool is_zero() const;

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(double c);
    // this += c * o
    void axpy(double c, const SpectralField& o);

    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double c, SpectralField a) { return a *= c; }

  private:
    std::shared_ptr<const ModeTable> table_;
    std::vector<cplx> coeffs_;

    void check_compatible(const SpectralField& o) const;
};

// Copy into a different resolution: zero-pad on extension, drop modes on
// truncation.
SpectralField resample(const SpectralField& f, int new_kmax);

// L2 inner product and norm (Parseval over both half-lattices).
double l2_inner(const SpectralField& f, const SpectralField& g);
double l2_norm(const SpectralField& f);

// Samples on the uniform n-by-n grid x = (j1/n, j2/n), row-major in (j1, j2).
std::vector<double> synthesize(const SpectralField& f, std::size_t n);
// Projection of grid samples back onto modes |k|_inf <= kmax.
SpectralField analyze(const std::vector<double>& grid, std::size_t n, int kmax);

// Grid size that makes products of two fields band-limited to kmax alias-free
// after truncation back to kmax (grid_factor >= 2).
std::size_t dealiased_grid_size(int kmax, int grid_factor);

}  // namespace sqg
