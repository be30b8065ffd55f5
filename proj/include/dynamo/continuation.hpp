#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dynamo/alpha_zero.hpp"
#include "dynamo/fourier_field.hpp"

namespace dynamo {

struct CellSolveOptions {
    double tol = 1e-12;   // relative residual target
    int max_iters = 200;  // iteration budget before giving up
};

struct CellSolveInfo {
    int iterations = 0;
    double rel_residual = 0.0;
};

// The Bloch-perturbed cell operator acting on a fluctuation field. Mode k:
//   -(2 pi)^2 |k|^2 b(k)                       (cell diffusion)
//   + eps 2 pi i k wedge (U wedge b)(k)        (cell advection)
//   - 4 pi eps^2 (xi.k) b(k)                   (cross diffusion)
//   + eps^3 i xi wedge (U wedge b)(k), k != 0  (slow advection of the fluctuation)
//   - eps^4 (|xi|^2 + lambda) b(k)             (slow diffusion and growth)
SpectralVectorField apply_cell_operator(const VelocityProfile& u, const Vec3& xi, double eps, Cplx lambda,
                                        const SpectralVectorField& b);

// Right-hand side driving the fluctuation for a constant mean field bbar:
// mode k carries -2 pi i k wedge (U_hat(k) wedge bbar) - i eps^2 xi wedge (U_hat(k) wedge bbar).
SpectralVectorField cell_rhs(const VelocityProfile& u, const Vec3& xi, double eps, const CVec3& bbar);

// Preconditioned Richardson iteration for apply_cell_operator(.) = cell_rhs.
// At eps = 0 the first iterate already solves the system and equals
// cell_solve(u, bbar) coefficient for coefficient. Throws SolverDiverged when
// the residual stops contracting or the budget runs out.
SpectralVectorField solve_fluctuation(const VelocityProfile& u, const Vec3& xi, double eps, Cplx lambda,
                                      const CVec3& bbar, const CellSolveOptions& opts = {},
                                      CellSolveInfo* info = nullptr);

// Effective mean-field tensor at finite eps: column j is the mean of
// U wedge solve_fluctuation(u, xi, eps, lambda, e_j).
Mat3 alpha_eps(const VelocityProfile& u, const Vec3& xi, double eps, Cplx lambda,
               const CellSolveOptions& opts = {});

struct DispersionValue {
    Cplx f;        // det(i xi wedge (alpha_eps .) - |xi|^2 I - lambda I)
    double scale;  // (||A||_F / sqrt 3)^3 with A the matrix under the determinant
};

DispersionValue dispersion(const VelocityProfile& u, const Vec3& xi, double eps, Cplx lambda,
                           const CellSolveOptions& opts = {});

struct NewtonOptions {
    double f_tol = 1e-10;     // |f| <= f_tol * scale
    double step_abs = 1e-12;  // |d lambda| <= step_abs + step_rel |lambda|
    double step_rel = 1e-9;
    int max_iters = 50;
    CellSolveOptions cell;
};

struct NewtonResult {
    Cplx lambda;
    int iterations = 0;
    double residual = 0.0;  // |f| / scale at the accepted root
};

// Complex secant iteration on the dispersion determinant in lambda. Throws
// NoConvergence (budget exhausted or iterate left the trust region around the
// initial guess) and DerivativeVanished (secant slope collapsed).
NewtonResult newton_lambda(const VelocityProfile& u, const Vec3& xi, double eps, Cplx lambda_init,
                           const NewtonOptions& opts = {});

struct BranchPoint {
    double eps;
    Cplx lambda;
    double residual;
    int newton_iters;
};

struct Branch {
    Vec3 xi{0, 0, 0};
    std::vector<BranchPoint> points;
    bool truncated = false;      // stopped before reaching eps_max
    std::string stop_reason;     // empty when the full grid was traced
};

// Traces lambda(eps) on the uniform grid linspace(0, eps_max, samples) with
// quadratically extrapolated warm starts. Stops early (truncated = true) when a
// solve fails or the real part of lambda drops to zero or below; the offending
// sample, when it exists, is kept.
Branch continue_branch(const VelocityProfile& u, const Vec3& xi, Cplx lambda0, double eps_max, int samples,
                       const NewtonOptions& opts = {});

// Columns: epsilon,re_lambda,im_lambda,residual,newton_iters (17 significant digits).
void write_branch_csv(const std::string& path, const Branch& branch);

struct BlochMode {
    Vec3 xi{0, 0, 0};
    double eps = 0.0;
    Cplx lambda;
    CVec3 mean_field;               // unit leading eigenvector of the mean matrix
    SpectralVectorField fluctuation{0};
    double newton_residual = 0.0;
    bool box_defined = false;       // false at eps = 0 or for irrational data
    BoxSpec box;                    // minimal periodic box, valid when box_defined
};

// Assembles the full Bloch eigenstructure at one (xi, eps): Newton-refined
// lambda, the leading mean eigenvector (EigenvectorMismatch when the eigensolve
// disagrees with the dispersion root), its fluctuation, and the smallest box on
// which exp(i eps^2 xi.theta) is periodic, when one exists.
BlochMode build_mode(const VelocityProfile& u, const XiSelection& sel, double eps, Cplx lambda_init,
                     const NewtonOptions& opts = {});

// Mode serialization: JSON metadata at path, fluctuation field at path.field.
void save_mode(const std::string& path, const BlochMode& mode);
BlochMode load_mode(const std::string& path);

}  // namespace dynamo
