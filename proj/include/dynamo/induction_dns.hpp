#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dynamo/continuation.hpp"
#include "dynamo/fourier_field.hpp"

namespace dynamo {

// One sampled point of an integration: rescaled time, L2 norm, and the
// divergence defect in the shifted frame.
struct DnsSample {
    double t;
    double l2;
    double div_defect;
};

struct DnsSeries {
    std::vector<DnsSample> samples;
};

struct GrowthReport {
    double rate = 0.0;           // slope of log-norm over the fit window (rescaled time)
    double rate_rawtime = 0.0;   // same rate per unit of unscaled time (rate * eps^3)
    double t_start = 0.0;
    double t_end = 0.0;
    double fit_residual = 0.0;   // RMS deviation of log-norm from the fit
};

struct BlochDnsOptions {
    double cfl_c = 0.5;      // dt must satisfy dt <= cfl_c / (eps^-3 ||U||_inf 2 pi N)
    int sample_stride = 20;  // record every this many steps
};

// Pseudo-spectral integrator for the Bloch-frame induction equation in rescaled
// time,
//   dB/dt = eps^-3 (2 pi i k + i kappa) wedge (U wedge B) - eps^-4 |2 pi k + kappa|^2 B,
// kappa = eps^2 xi. The stiff diffusion is folded into exact exponential
// factors; the induction term is advanced with a two-stage exponential scheme
// (second order, exact on pure diffusion). The scheme is linear in the state.
class BlochIntegrator {
  public:
    BlochIntegrator(const VelocityProfile& u, double eps, const Vec3& xi, int truncation, double dt,
                    const BlochDnsOptions& opts = {});

    double dt() const { return dt_; }
    double stability_bound() const { return bound_; }
    const Vec3& kappa() const { return kappa_; }

    // One step in place; throws NanDetected when the norm stops being finite.
    void step(SpectralVectorField& b) const;

    // Applies the induction (non-diffusive) part of the right-hand side.
    SpectralVectorField induction_term(const SpectralVectorField& b) const;

    // Integrates to the horizon, sampling every sample_stride steps (plus the
    // initial and final states).
    DnsSeries run(SpectralVectorField& b, double horizon) const;

  private:
    const VelocityProfile& u_;
    double eps_;
    Vec3 xi_;
    Vec3 kappa_;
    int n_;
    double dt_;
    double bound_;
    int stride_;
    std::vector<double> factor_;   // e^{z}, z = -eps^-4 |2 pi k + kappa|^2 dt
    std::vector<double> phi1_dt_;  // dt (e^z - 1)/z
    std::vector<double> phi2_dt_;  // dt (e^z - 1 - z)/z^2
};

// Random complex solenoidal Bloch envelope: (2 pi k + kappa).B = 0 for every
// mode, |k|^{-decay} shell amplitudes, unit L2 norm.
SpectralVectorField random_bloch_state(int truncation, const Vec3& kappa, double decay, std::uint64_t seed);

// Rescaled residual of a constructed mode under the discrete Bloch operator:
// fluctuation rows are grouped at cell scale (multiplied through by eps^3), the
// mean row is kept at order one, and both are normalized by the combined
// amplitude. Throws DegenerateInput on a zero mode.
double validate_mode(const BlochMode& mode, const VelocityProfile& u);

// Least-squares slope of log(norm) over the trailing window of the series.
GrowthReport growth_rate(const std::vector<std::pair<double, double>>& series, double window_fraction = 0.5,
                         double eps = 1.0);

inline GrowthReport growth_rate(const DnsSeries& series, double window_fraction = 0.5, double eps = 1.0) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(series.samples.size());
    for (const auto& s : series.samples) pts.emplace_back(s.t, s.l2);
    return growth_rate(pts, window_fraction, eps);
}

// CSV rows t,l2_norm,log_norm,div_defect with 17 significant digits.
void write_series_csv(const std::string& path, const DnsSeries& series);

}  // namespace dynamo
