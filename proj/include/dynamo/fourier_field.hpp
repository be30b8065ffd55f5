#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dynamo/types.hpp"

namespace dynamo {

// Truncated Fourier representation of a vector field on the unit torus,
//   F(theta) = sum_{|k_i| <= N} F_hat(k) e^{2 pi i k.theta}.
// Dense cube storage, component-major; within a component the modes are laid
// out lexicographically with k1 outermost and k3 fastest.
class SpectralVectorField {
  public:
    explicit SpectralVectorField(int truncation);

    int truncation() const { return n_; }
    int side() const { return 2 * n_ + 1; }
    std::size_t modes_per_component() const { return std::size_t(side()) * side() * side(); }

    bool contains(const WaveIndex& k) const {
        return k[0] >= -n_ && k[0] <= n_ && k[1] >= -n_ && k[1] <= n_ && k[2] >= -n_ && k[2] <= n_;
    }

    std::size_t flat_index(const WaveIndex& k) const {
        const std::size_t m = std::size_t(side());
        return (std::size_t(k[0] + n_) * m + std::size_t(k[1] + n_)) * m + std::size_t(k[2] + n_);
    }

    Cplx& at(int comp, const WaveIndex& k) { return a_[comp * modes_per_component() + flat_index(k)]; }
    const Cplx& at(int comp, const WaveIndex& k) const {
        return a_[comp * modes_per_component() + flat_index(k)];
    }

    CVec3 mode(const WaveIndex& k) const {
        const std::size_t i = flat_index(k);
        const std::size_t m3 = modes_per_component();
        return {a_[i], a_[m3 + i], a_[2 * m3 + i]};
    }

    void set_mode(const WaveIndex& k, const CVec3& v) {
        const std::size_t i = flat_index(k);
        const std::size_t m3 = modes_per_component();
        a_[i] = v[0];
        a_[m3 + i] = v[1];
        a_[2 * m3 + i] = v[2];
    }

    std::span<Cplx> component(int comp) { return {a_.data() + comp * modes_per_component(), modes_per_component()}; }
    std::span<const Cplx> component(int comp) const {
        return {a_.data() + comp * modes_per_component(), modes_per_component()};
    }

    std::span<const Cplx> raw() const { return {a_.data(), a_.size()}; }
    std::span<Cplx> raw() { return {a_.data(), a_.size()}; }

    void set_zero();

    SpectralVectorField& operator+=(const SpectralVectorField& o);
    SpectralVectorField& operator-=(const SpectralVectorField& o);
    SpectralVectorField& operator*=(const Cplx& s);
    // this += s * o
    void axpy(const Cplx& s, const SpectralVectorField& o);

    // L2 norm of the field over the unit cell (Parseval: sqrt of sum of |coef|^2).
    double l2_norm() const;
    double max_abs_coef() const;
    std::size_t nonzero_modes(double threshold = 0.0) const;

  private:
    int n_;
    std::vector<Cplx> a_;
};

// Iterates k over the full truncation cube in storage order.
template <typename F>
void for_each_mode(int truncation, F&& fn) {
    for (int k1 = -truncation; k1 <= truncation; ++k1)
        for (int k2 = -truncation; k2 <= truncation; ++k2)
            for (int k3 = -truncation; k3 <= truncation; ++k3) fn(WaveIndex{k1, k2, k3});
}

CVec3 mean_part(const SpectralVectorField& f);
SpectralVectorField fluct_part(const SpectralVectorField& f);

// curl with a Bloch shift: multiplies mode k by i(2 pi k + kappa) wedge.
SpectralVectorField curl_bloch(const SpectralVectorField& f, const Vec3& kappa);
inline SpectralVectorField curl(const SpectralVectorField& f) { return curl_bloch(f, {0.0, 0.0, 0.0}); }

// Removes the component parallel to 2 pi k + kappa from every mode; modes with
// vanishing shifted wavevector are left untouched.
void leray_project(SpectralVectorField& f, const Vec3& kappa = {0.0, 0.0, 0.0});

// max_k |(2 pi k + kappa).F_hat(k)| normalized by max_k |k_shifted| max_k |F_hat|;
// zero for the zero field.
double divergence_defect(const SpectralVectorField& f, const Vec3& kappa = {0.0, 0.0, 0.0});

// max_k |F_hat(k) - conj(F_hat(-k))| / max_k |F_hat|; zero for the zero field.
double reality_defect(const SpectralVectorField& f);

// Replaces coefficients by their Hermitian average so the field is exactly real.
void enforce_reality(SpectralVectorField& f);

// sqrt(sum_k |k|^{2m} |F_hat(k)|^2) with the k = 0 weight equal to 1 when m = 0.
double index_seminorm(const SpectralVectorField& f, int m);

// H^s norm over the unit cell: weights (1 + |2 pi k|^2)^s.
double sobolev_norm(const SpectralVectorField& f, double s);

// Mean of A wedge B without forming the product field: sum_k A(-k) wedge B(k)
// over the overlap of the two truncation cubes.
CVec3 mean_of_wedge(const SpectralVectorField& a, const SpectralVectorField& b);

enum class WedgePath { Auto, Direct, Collocation };

// Pointwise cross product A wedge B truncated to max(N_A, N_B). Both routes are
// exact for every retained mode: Direct sums shifted products over the sparse
// support of the smaller field, Collocation multiplies on a grid padded far
// enough that no aliased image lands inside the output cube.
SpectralVectorField wedge(const SpectralVectorField& a, const SpectralVectorField& b,
                          WedgePath path = WedgePath::Auto);

// A divergence-free, mean-free, real velocity profile on the unit torus.
struct VelocityProfile {
    SpectralVectorField field;
    double sup_norm = 0.0;
    std::string name;
};

// Validates the three profile invariants against tol (relative) and returns the
// profile with exact symmetrization applied and its sup norm tabulated.
VelocityProfile make_profile(SpectralVectorField field, std::string name, double tol = 1e-10);

// U_ABC = (A sin 2pi z + C cos 2pi y, B sin 2pi x + A cos 2pi z, C sin 2pi y + B cos 2pi x).
// Raw coefficient cube of the ABC profile, no validation applied; the zero
// amplitudes are representable here while abc_flow rejects them.
SpectralVectorField abc_field(double a, double b, double c, int truncation);

VelocityProfile abc_flow(double a, double b, double c, int truncation);

// Random solenoidal profile with |k|^{-decay} shell amplitudes, unit L2 norm.
VelocityProfile random_profile(int truncation, double decay, std::uint64_t seed);

}  // namespace dynamo
