#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "dynamo/fourier_field.hpp"
#include "dynamo/types.hpp"

namespace dynamo {

using Mat3 = Eigen::Matrix3cd;

// curl(U wedge bbar) for a constant vector bbar, mode by mode.
SpectralVectorField curl_of_wedge_with_mean(const VelocityProfile& u, const CVec3& bbar);

// In-place (-Delta)^{-1}: divides mode k by -(2 pi)^2 |k|^2 and zeroes k = 0.
void apply_inverse_laplacian(SpectralVectorField& f);

// Leading-order corrector for a constant mean field: mode k of the solution is
// i k wedge (U_hat(k) wedge bbar) / (2 pi |k|^2), zero at k = 0.
SpectralVectorField cell_solve(const VelocityProfile& u, const CVec3& bbar);

struct AlphaResult {
    Mat3 alpha;
    double symmetry_defect;  // ||alpha - alpha^T||_F / ||alpha||_F
    double reality_defect;   // ||Im alpha||_F / ||alpha||_F
};

// Column j is the mean of U wedge cell_solve(U, e_j), evaluated through the
// full collocation product so it exercises the transform path end to end.
AlphaResult alpha_tensor(const VelocityProfile& u);

// Same matrix assembled from the closed lattice sum
//   sum_{k != 0} U_hat(-k) wedge [i k wedge (U_hat(k) wedge e_j)] / (2 pi |k|^2),
// no transforms involved. Independent route for cross-checking alpha_tensor.
Mat3 alpha_closed_sum(const VelocityProfile& u);

// Mean-field stability matrix  M(xi) = i xi wedge (alpha .) - |xi|^2 I.
Mat3 mean_matrix(const Mat3& alpha, const Vec3& xi);

// Largest real part among the eigenvalues of i e wedge (alpha .).
double gamma_of_direction(const Mat3& alpha, const Vec3& e);

// Eigenvalue of m with the largest real part and its phase-fixed eigenvector
// (largest-magnitude component made real positive).
std::pair<Cplx, CVec3> leading_eigenpair(const Mat3& m);

struct RationalSnap {
    std::int64_t num = 0;
    std::int64_t den = 1;
};

// Best rational approximation p/q to x with q <= max_den (continued fractions).
RationalSnap snap_rational(double x, std::int64_t max_den);

struct XiSelection {
    Vec3 direction{0, 0, 0};     // optimizing unit direction e
    double gamma = 0.0;          // gamma(e)
    Vec3 xi{0, 0, 0};            // selected wavevector (snapped if snapping enabled)
    Cplx lambda0;                // leading eigenvalue of M(xi)
    CVec3 mean_field;            // phase-fixed leading eigenvector of M(xi)
    bool snapped = false;
    Vec3 xi_unsnapped{0, 0, 0};  // r* e with r* = gamma / 2
    Cplx lambda_unsnapped;
    std::array<RationalSnap, 3> ratios{};  // xi_i = 2 pi ratios[i] when snapped
};

struct XiOptions {
    int direction_samples = 2048;       // Fibonacci-sphere sample count
    std::int64_t denominator_bound = 64;  // 0 disables snapping
};

// Scans unit directions (sphere samples, coordinate axes, eigendirections of the
// symmetrized alpha), maximizes gamma, and places xi at the top of the parabola
// lambda(r e) = gamma r - r^2. Ties break toward larger gamma then
// lexicographically larger direction. Throws NoUnstableDirection when no
// direction has gamma > 0, SnapDestroyedGrowth when rounding xi to rational
// coordinates kills the growth rate.
XiSelection select_xi(const Mat3& alpha, const XiOptions& opts = {});

}  // namespace dynamo
