#include "dynamo/induction_dns.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dynamo/errors.hpp"
#include "dynamo/rng.hpp"

namespace dynamo {

namespace {

double phi1(double z) {
    if (std::abs(z) < 1e-5) return 1.0 + z * (0.5 + z / 6.0);
    return std::expm1(z) / z;
}

double phi2(double z) {
    if (std::abs(z) < 1e-5) return 0.5 + z * (1.0 / 6.0 + z / 24.0);
    return (std::expm1(z) - z) / (z * z);
}

}  // namespace

BlochIntegrator::BlochIntegrator(const VelocityProfile& u, double eps, const Vec3& xi, int truncation,
                                 double dt, const BlochDnsOptions& opts)
    : u_(u), eps_(eps), xi_(xi), n_(truncation), dt_(dt), stride_(opts.sample_stride) {
    if (eps <= 0.0) fail(Err::BadConfig, "integrator needs eps > 0");
    if (truncation < u.field.truncation())
        fail(Err::TruncationMismatch, "integration truncation below the profile's");
    const double e2 = eps * eps;
    kappa_ = {e2 * xi[0], e2 * xi[1], e2 * xi[2]};

    const double inv_e3 = 1.0 / (eps * eps * eps);
    bound_ = opts.cfl_c / (inv_e3 * u.sup_norm * kTwoPi * truncation);
    if (dt > bound_ * (1.0 + 1e-12))
        fail(Err::StabilityViolation,
             "dt " + std::to_string(dt) + " exceeds the advective bound " + std::to_string(bound_));

    const double inv_e4 = inv_e3 / eps;
    const std::size_t m3 = std::size_t(2 * n_ + 1) * (2 * n_ + 1) * (2 * n_ + 1);
    factor_.resize(m3);
    phi1_dt_.resize(m3);
    phi2_dt_.resize(m3);
    std::size_t i = 0;
    for_each_mode(n_, [&](const WaveIndex& k) {
        const Vec3 kt = {kTwoPi * k[0] + kappa_[0], kTwoPi * k[1] + kappa_[1], kTwoPi * k[2] + kappa_[2]};
        const double z = -inv_e4 * dot(kt, kt) * dt_;
        factor_[i] = std::exp(z);
        phi1_dt_[i] = dt_ * phi1(z);
        phi2_dt_[i] = dt_ * phi2(z);
        ++i;
    });
}

SpectralVectorField BlochIntegrator::induction_term(const SpectralVectorField& b) const {
    const SpectralVectorField w = wedge(u_.field, b);
    SpectralVectorField out(n_);
    const double inv_e3 = 1.0 / (eps_ * eps_ * eps_);
    for_each_mode(n_, [&](const WaveIndex& k) {
        const CVec3 ikt = {Cplx(0.0, kTwoPi * k[0] + kappa_[0]), Cplx(0.0, kTwoPi * k[1] + kappa_[1]),
                           Cplx(0.0, kTwoPi * k[2] + kappa_[2])};
        const CVec3 v = cross(ikt, w.mode(k));
        out.set_mode(k, Cplx(inv_e3) * v);
    });
    return out;
}

void BlochIntegrator::step(SpectralVectorField& b) const {
    if (b.truncation() != n_) fail(Err::TruncationMismatch, "state truncation differs from integrator");
    const SpectralVectorField n1 = induction_term(b);
    SpectralVectorField a(n_);
    const std::size_t m3 = b.modes_per_component();
    for (int c = 0; c < 3; ++c) {
        auto bc = b.component(c);
        auto n1c = n1.component(c);
        auto ac = a.component(c);
        for (std::size_t i = 0; i < m3; ++i) ac[i] = factor_[i] * bc[i] + phi1_dt_[i] * n1c[i];
    }
    const SpectralVectorField n2 = induction_term(a);
    double check = 0.0;
    for (int c = 0; c < 3; ++c) {
        auto bc = b.component(c);
        auto n1c = n1.component(c);
        auto n2c = n2.component(c);
        auto ac = a.component(c);
        for (std::size_t i = 0; i < m3; ++i) {
            bc[i] = ac[i] + phi2_dt_[i] * (n2c[i] - n1c[i]);
            check += std::norm(bc[i]);
        }
    }
    if (!std::isfinite(check)) fail(Err::NanDetected, "state norm overflowed during a step");
}

DnsSeries BlochIntegrator::run(SpectralVectorField& b, double horizon) const {
    DnsSeries series;
    const long total = std::lround(std::ceil(horizon / dt_ - 1e-9));
    series.samples.push_back({0.0, b.l2_norm(), divergence_defect(b, kappa_)});
    for (long i = 1; i <= total; ++i) {
        step(b);
        if (i % stride_ == 0 || i == total) {
            const double t = double(i) * dt_;
            series.samples.push_back({t, b.l2_norm(), divergence_defect(b, kappa_)});
        }
    }
    return series;
}

SpectralVectorField random_bloch_state(int truncation, const Vec3& kappa, double decay, std::uint64_t seed) {
    Rng rng(seed);
    SpectralVectorField f(truncation);
    for_each_mode(truncation, [&](const WaveIndex& k) {
        const double k2 = norm2(k);
        const double amp = k2 == 0.0 ? 1.0 : std::pow(k2, -0.5 * decay);
        CVec3 v;
        for (int c = 0; c < 3; ++c) v[c] = amp * Cplx(rng.gaussian(), rng.gaussian());
        f.set_mode(k, v);
    });
    leray_project(f, kappa);
    const double n = f.l2_norm();
    if (n == 0.0) fail(Err::DegenerateInput, "random state projected to zero");
    f *= Cplx(1.0 / n);
    return f;
}

double validate_mode(const BlochMode& mode, const VelocityProfile& u) {
    const int n = std::max(mode.fluctuation.truncation(), u.field.truncation());
    SpectralVectorField bt(n);
    for_each_mode(mode.fluctuation.truncation(),
                  [&](const WaveIndex& k) { bt.set_mode(k, mode.fluctuation.mode(k)); });
    bt.set_mode({0, 0, 0}, {Cplx(0), Cplx(0), Cplx(0)});

    const double amplitude =
        std::sqrt(norm(mode.mean_field) * norm(mode.mean_field) + mode.eps * mode.eps * bt.l2_norm() * bt.l2_norm());
    if (amplitude == 0.0) fail(Err::DegenerateInput, "zero mode");

    const double eps = mode.eps;
    const Vec3& xi = mode.xi;
    const Vec3 kappa = {eps * eps * xi[0], eps * eps * xi[1], eps * eps * xi[2]};
    const double e4 = eps * eps * eps * eps;
    const Cplx lam = mode.lambda;

    // Product through the dealiased collocation path, as the integrator uses.
    const SpectralVectorField wt = wedge(u.field, bt, WedgePath::Collocation);

    double acc = 0.0;
    for_each_mode(n, [&](const WaveIndex& k) {
        if (k[0] == 0 && k[1] == 0 && k[2] == 0) return;
        const CVec3 ub = cross(u.field.contains(k) ? u.field.mode(k) : CVec3{Cplx(0), Cplx(0), Cplx(0)},
                               mode.mean_field);
        const CVec3 wk = wt.mode(k);
        const CVec3 total = {ub[0] + eps * wk[0], ub[1] + eps * wk[1], ub[2] + eps * wk[2]};
        const CVec3 ikt = {Cplx(0.0, kTwoPi * k[0] + kappa[0]), Cplx(0.0, kTwoPi * k[1] + kappa[1]),
                           Cplx(0.0, kTwoPi * k[2] + kappa[2])};
        const CVec3 advect = cross(ikt, total);
        const Vec3 kt = {kTwoPi * k[0] + kappa[0], kTwoPi * k[1] + kappa[1], kTwoPi * k[2] + kappa[2]};
        const double diffuse = dot(kt, kt);
        const CVec3 bk = bt.mode(k);
        CVec3 r;
        for (int c = 0; c < 3; ++c) r[c] = advect[c] - diffuse * bk[c] - e4 * lam * bk[c];
        acc += std::norm(r[0]) + std::norm(r[1]) + std::norm(r[2]);
    });

    // Mean row stays order one: i xi wedge mean(U wedge btilde) - (|xi|^2 + lambda) bbar.
    const CVec3 w0 = wt.mode({0, 0, 0});
    const CVec3 ixi = {Cplx(0.0, xi[0]), Cplx(0.0, xi[1]), Cplx(0.0, xi[2])};
    const CVec3 mean_adv = cross(ixi, w0);
    const double xi2 = dot(xi, xi);
    CVec3 rm;
    for (int c = 0; c < 3; ++c) rm[c] = mean_adv[c] - (xi2 + lam) * mode.mean_field[c];
    acc += std::norm(rm[0]) + std::norm(rm[1]) + std::norm(rm[2]);

    return std::sqrt(acc) / amplitude;
}

GrowthReport growth_rate(const std::vector<std::pair<double, double>>& series, double window_fraction,
                         double eps) {
    if (series.size() < 10) fail(Err::DegenerateInput, "growth fit needs at least 10 samples");
    for (const auto& [t, v] : series)
        if (!(v > 0.0)) fail(Err::DegenerateInput, "growth fit needs positive norms");
    if (!(window_fraction > 0.0 && window_fraction <= 1.0)) fail(Err::BadConfig, "window fraction in (0, 1]");

    std::size_t start = std::size_t(double(series.size()) * (1.0 - window_fraction));
    if (series.size() - start < 3) start = series.size() - 3;

    double st = 0, sy = 0, stt = 0, sty = 0;
    const double m = double(series.size() - start);
    for (std::size_t i = start; i < series.size(); ++i) {
        const double t = series[i].first;
        const double y = std::log(series[i].second);
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    const double det = m * stt - st * st;
    if (det == 0.0) fail(Err::DegenerateInput, "degenerate time grid in growth fit");
    const double rate = (m * sty - st * sy) / det;
    const double intercept = (sy - rate * st) / m;

    double rss = 0.0;
    for (std::size_t i = start; i < series.size(); ++i) {
        const double d = std::log(series[i].second) - (intercept + rate * series[i].first);
        rss += d * d;
    }
    GrowthReport rep;
    rep.rate = rate;
    rep.rate_rawtime = rate * eps * eps * eps;
    rep.t_start = series[start].first;
    rep.t_end = series.back().first;
    rep.fit_residual = std::sqrt(rss / m);
    return rep;
}

void write_series_csv(const std::string& path, const DnsSeries& series) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) fail(Err::IoError, "cannot open '" + path + "' for writing");
    std::fputs("t,l2_norm,log_norm,div_defect\n", fp);
    for (const auto& s : series.samples)
        std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g\n", s.t, s.l2, std::log(s.l2), s.div_defect);
    if (std::fclose(fp) != 0) fail(Err::IoError, "close failed on '" + path + "'");
}

}  // namespace dynamo
