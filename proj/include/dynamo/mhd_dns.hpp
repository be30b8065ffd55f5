#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dynamo/continuation.hpp"
#include "dynamo/fourier_field.hpp"
#include "dynamo/types.hpp"

namespace dynamo {

// Truncated Fourier field on an integer box of T_i unit cells per axis: modes
// exp(2 pi i k.theta / T) with |k_i| <= N_i. Same dense storage conventions as
// the unit-cell field, with per-axis extents.
class BoxField {
  public:
    BoxField(const std::array<int, 3>& truncation, const BoxSpec& box);

    const std::array<int, 3>& truncation() const { return n_; }
    const BoxSpec& box() const { return box_; }
    int side(int axis) const { return 2 * n_[axis] + 1; }
    std::size_t modes_per_component() const { return std::size_t(side(0)) * side(1) * side(2); }

    bool contains(const WaveIndex& k) const {
        return k[0] >= -n_[0] && k[0] <= n_[0] && k[1] >= -n_[1] && k[1] <= n_[1] && k[2] >= -n_[2] &&
               k[2] <= n_[2];
    }

    std::size_t flat_index(const WaveIndex& k) const {
        return (std::size_t(k[0] + n_[0]) * side(1) + std::size_t(k[1] + n_[1])) * side(2) +
               std::size_t(k[2] + n_[2]);
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

    std::span<Cplx> component(int c) { return {a_.data() + c * modes_per_component(), modes_per_component()}; }
    std::span<const Cplx> component(int c) const {
        return {a_.data() + c * modes_per_component(), modes_per_component()};
    }

    // 2 pi k ./ T
    Vec3 phys_wave(const WaveIndex& k) const {
        return {kTwoPi * k[0] / double(box_.cells[0]), kTwoPi * k[1] / double(box_.cells[1]),
                kTwoPi * k[2] / double(box_.cells[2])};
    }

    void set_zero();
    BoxField& operator+=(const BoxField& o);
    BoxField& operator-=(const BoxField& o);
    BoxField& operator*=(double s);
    void axpy(double s, const BoxField& o);

    double l2_norm() const;
    double max_abs_coef() const;

  private:
    std::array<int, 3> n_;
    BoxSpec box_;
    std::vector<Cplx> a_;
};

template <typename F>
void for_each_box_mode(const std::array<int, 3>& n, F&& fn) {
    for (int k1 = -n[0]; k1 <= n[0]; ++k1)
        for (int k2 = -n[1]; k2 <= n[1]; ++k2)
            for (int k3 = -n[2]; k3 <= n[2]; ++k3) fn(WaveIndex{k1, k2, k3});
}

BoxField curl_box(const BoxField& f);
void leray_box(BoxField& f);
double divergence_defect_box(const BoxField& f);
double reality_defect_box(const BoxField& f);
double sobolev_norm_box(const BoxField& f, double s);

// Unit-cell field embedded periodically: mode k of the cell becomes box mode
// k_i T_i. Every cell mode must fit: N_i >= T_i * (cell truncation), else
// BoxMismatch.
BoxField tile_to_box(const SpectralVectorField& f, const std::array<int, 3>& truncation, const BoxSpec& box);

// Real part of (bbar + eps btilde) e^{i kappa.theta} realized on the box.
// Requires kappa T_i / (2 pi) integral (BoxMismatch otherwise): the Bloch phase
// must close on the box.
BoxField mode_to_box(const BlochMode& mode, const std::array<int, 3>& truncation);

// Truncation large enough for the tiled mode plus the first nonlinear
// sidebands: cell_truncation * T_i + 2 |shift_i|.
std::array<int, 3> box_truncation_for(const BlochMode& mode, int cell_truncation);

// Random real solenoidal box field, |k|^{-decay} amplitudes, unit L2 norm.
BoxField random_box_field(const std::array<int, 3>& truncation, const BoxSpec& box, double decay,
                          std::uint64_t seed);

struct MhdState {
    BoxField u;
    BoxField b;
    double t = 0.0;
};

struct MhdRhs {
    BoxField du;
    BoxField db;
};

struct MhdOptions {
    double cfl_c = 0.5;
    int sample_stride = 10;
};

class BoxTransformPlan;  // private FFT workspace

// Pseudo-spectral right-hand sides and exponential two-stage stepping for the
// rescaled incompressible MHD system linearized around (U, 0) plus its
// quadratic remainder:
//   du/dt = eps^-3 ( P[u wedge W + U wedge w + j wedge b + u wedge w_self] + Lap u )
//   db/dt = eps^-3 curl(U wedge b + u wedge b) + eps^-4 Lap b
// with W = curl U, w = curl u, j = curl b; every product is evaluated on a grid
// padded past 3N for exact convolution on the retained cube.
class MhdIntegrator {
  public:
    MhdIntegrator(const VelocityProfile& u_unit, const std::array<int, 3>& truncation, const BoxSpec& box,
                  double eps, double dt, const MhdOptions& opts = {});
    ~MhdIntegrator();

    double dt() const { return dt_; }
    double stability_bound() const { return bound_; }
    const std::array<int, 3>& truncation() const { return n_; }
    const BoxSpec& box() const { return box_; }
    const BoxField& tiled_background() const { return u_box_; }

    MhdState zero_state() const;

    // Full linear part (diffusion included), Leray-projected velocity channel.
    MhdRhs linear_rhs(const MhdState& state) const;
    // Quadratic part, Leray-projected velocity channel.
    MhdRhs nonlinear_q(const MhdState& state) const;
    // linear_rhs + nonlinear_q, summed channelwise; the step advances exactly
    // this decomposition (diffusion through the exponential factors, the rest
    // explicitly).
    MhdRhs full_rhs(const MhdState& state) const;

    void step(MhdState& state) const;

  private:
    void rhs_internal(const MhdState& state, bool with_diffusion, MhdRhs* lin, MhdRhs* nl) const;

    std::array<int, 3> n_;
    BoxSpec box_;
    double eps_;
    double dt_;
    double bound_;
    BoxField u_box_;
    std::unique_ptr<BoxTransformPlan> plan_;  // scratch transform buffers live inside
    std::array<std::vector<double>, 3> bg_u_, bg_w_;  // background and its curl on the grid
    mutable std::array<std::vector<double>, 3> g_u_, g_b_, g_w_, g_j_, g_p_;
    std::vector<double> factor_u_, phi1_u_, phi2_u_;
    std::vector<double> factor_b_, phi1_b_, phi2_b_;
};

struct InterpCheck {
    double lhs;   // ||(u,b)||_{H^r}
    double rhs;   // ||(u,b)||_{L2}^eta ||(u,b)||_{H^s}^{1-eta}
    double r;     // (1 - eta) s
    double eta;   // 1/2 - 5/(4s)
};

InterpCheck interp_check(const BoxField& u, const BoxField& b, double s);

struct ProbeResult {
    std::vector<double> ratios;
    double max_ratio = 0.0;
    double min_ratio = 0.0;
    double eta = 0.0;
};

// ||Q(state)||_{L2} / (eps^-3 ||state||_{L2}^{1+eta} ||state||_{H^s}^{1-eta})
// over seeded random solenoidal states of cycling spectral slopes.
ProbeResult q_estimate_probe(int samples, double s, double eps, std::uint64_t seed);

struct DeltaRun {
    double delta = 0.0;
    bool hit = false;
    double t_delta = 0.0;
    double shadow_max_dev = 0.0;   // worst relative deviation from delta e^{lambda t} b_L
    double shadow_limit_t = 0.0;   // last time the shadowing window was active
    std::vector<std::array<double, 5>> samples;  // t, l2, hs, div_u, div_b
};

struct InstabilityReport {
    std::vector<DeltaRun> runs;
    double threshold = 0.0;      // C0 in H^s units
    double base_norm = 0.0;      // ||U||_{H^s} on the box
    double lambda = 0.0;         // linear rate used for shadowing
    double slope = 0.0;          // fit t_delta ~ slope ln(1/delta) + intercept
    double intercept = 0.0;
    double fit_residual = 0.0;   // max |fit - t_delta|
    double spread = 0.0;         // max t_delta - min t_delta
};

struct InstabilityOptions {
    std::vector<double> deltas{1e-2, 1e-3, 1e-4};
    double threshold_frac = 0.1;
    double s = 4.0;
    double horizon = 60.0;
    double dt = 0.0;  // 0: 0.98 x stability bound
    int cell_truncation = 3;
    int sample_stride = 10;
    double shadow_amplitude = 0.01;
    double cfl_c = 0.5;
    std::string csv_dir;  // per-delta series written when nonempty
};

// Integrates delta (0, b_L) for each delta until threshold_frac ||U||_{H^s} is
// reached (t_delta) or the horizon passes (recorded, not fatal), tracking
// early-time shadowing of the linear mode. Fits t_delta against ln(1/delta).
InstabilityReport run_instability(const VelocityProfile& u_unit, const BlochMode& mode,
                                  const InstabilityOptions& opts = {});

void write_instability_csv(const std::string& path, const DeltaRun& run);

}  // namespace dynamo
