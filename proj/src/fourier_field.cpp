#include "dynamo/fourier_field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>

#include "dynamo/errors.hpp"
#include "dynamo/rng.hpp"
#include "dynamo/transforms.hpp"

namespace dynamo {

SpectralVectorField::SpectralVectorField(int truncation) : n_(truncation) {
    if (truncation < 0) fail(Err::BadConfig, "negative truncation");
    a_.assign(3 * modes_per_component(), Cplx(0.0, 0.0));
}

void SpectralVectorField::set_zero() { std::fill(a_.begin(), a_.end(), Cplx(0.0, 0.0)); }

static void check_same_truncation(const SpectralVectorField& a, const SpectralVectorField& b) {
    if (a.truncation() != b.truncation())
        fail(Err::TruncationMismatch, "field truncations " + std::to_string(a.truncation()) + " vs " +
                                          std::to_string(b.truncation()));
}

SpectralVectorField& SpectralVectorField::operator+=(const SpectralVectorField& o) {
    check_same_truncation(*this, o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
}

SpectralVectorField& SpectralVectorField::operator-=(const SpectralVectorField& o) {
    check_same_truncation(*this, o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
}

SpectralVectorField& SpectralVectorField::operator*=(const Cplx& s) {
    for (auto& v : a_) v *= s;
    return *this;
}

void SpectralVectorField::axpy(const Cplx& s, const SpectralVectorField& o) {
    check_same_truncation(*this, o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += s * o.a_[i];
}

double SpectralVectorField::l2_norm() const {
    double s = 0.0;
    for (const auto& v : a_) s += std::norm(v);
    return std::sqrt(s);
}

double SpectralVectorField::max_abs_coef() const {
    double m = 0.0;
    for (const auto& v : a_) m = std::max(m, std::abs(v));
    return m;
}

std::size_t SpectralVectorField::nonzero_modes(double threshold) const {
    std::size_t count = 0;
    const std::size_t m3 = modes_per_component();
    for (std::size_t i = 0; i < m3; ++i) {
        if (std::abs(a_[i]) > threshold || std::abs(a_[m3 + i]) > threshold ||
            std::abs(a_[2 * m3 + i]) > threshold)
            ++count;
    }
    return count;
}

CVec3 mean_part(const SpectralVectorField& f) { return f.mode({0, 0, 0}); }

SpectralVectorField fluct_part(const SpectralVectorField& f) {
    SpectralVectorField g = f;
    g.set_mode({0, 0, 0}, {Cplx(0), Cplx(0), Cplx(0)});
    return g;
}

SpectralVectorField curl_bloch(const SpectralVectorField& f, const Vec3& kappa) {
    SpectralVectorField g(f.truncation());
    for_each_mode(f.truncation(), [&](const WaveIndex& k) {
        const CVec3 ik = {Cplx(0.0, kTwoPi * k[0] + kappa[0]), Cplx(0.0, kTwoPi * k[1] + kappa[1]),
                          Cplx(0.0, kTwoPi * k[2] + kappa[2])};
        g.set_mode(k, cross(ik, f.mode(k)));
    });
    return g;
}

void leray_project(SpectralVectorField& f, const Vec3& kappa) {
    for_each_mode(f.truncation(), [&](const WaveIndex& k) {
        const Vec3 kt = {kTwoPi * k[0] + kappa[0], kTwoPi * k[1] + kappa[1], kTwoPi * k[2] + kappa[2]};
        const double kk = dot(kt, kt);
        if (kk == 0.0) return;
        CVec3 v = f.mode(k);
        const Cplx proj = (kt[0] * v[0] + kt[1] * v[1] + kt[2] * v[2]) / kk;
        v[0] -= proj * kt[0];
        v[1] -= proj * kt[1];
        v[2] -= proj * kt[2];
        f.set_mode(k, v);
    });
}

double divergence_defect(const SpectralVectorField& f, const Vec3& kappa) {
    double worst = 0.0;
    double max_mode = 0.0;
    double max_wave = 0.0;
    for_each_mode(f.truncation(), [&](const WaveIndex& k) {
        const Vec3 kt = {kTwoPi * k[0] + kappa[0], kTwoPi * k[1] + kappa[1], kTwoPi * k[2] + kappa[2]};
        const CVec3 v = f.mode(k);
        worst = std::max(worst, std::abs(kt[0] * v[0] + kt[1] * v[1] + kt[2] * v[2]));
        max_mode = std::max(max_mode, norm(v));
        max_wave = std::max(max_wave, norm(kt));
    });
    if (max_mode == 0.0 || max_wave == 0.0) return 0.0;
    return worst / (max_mode * max_wave);
}

double reality_defect(const SpectralVectorField& f) {
    double worst = 0.0;
    double max_mode = 0.0;
    for_each_mode(f.truncation(), [&](const WaveIndex& k) {
        const CVec3 v = f.mode(k);
        const CVec3 w = f.mode(-k);
        max_mode = std::max(max_mode, norm(v));
        const CVec3 d = {v[0] - std::conj(w[0]), v[1] - std::conj(w[1]), v[2] - std::conj(w[2])};
        worst = std::max(worst, norm(d));
    });
    if (max_mode == 0.0) return 0.0;
    return worst / max_mode;
}

void enforce_reality(SpectralVectorField& f) {
    const int n = f.truncation();
    for_each_mode(n, [&](const WaveIndex& k) {
        if (std::make_tuple(k[0], k[1], k[2]) > std::make_tuple(-k[0], -k[1], -k[2])) return;
        const CVec3 v = f.mode(k);
        const CVec3 w = f.mode(-k);
        CVec3 avg;
        for (int c = 0; c < 3; ++c) avg[c] = 0.5 * (v[c] + std::conj(w[c]));
        f.set_mode(k, avg);
        f.set_mode(-k, {std::conj(avg[0]), std::conj(avg[1]), std::conj(avg[2])});
    });
}

double index_seminorm(const SpectralVectorField& f, int m) {
    double s = 0.0;
    for_each_mode(f.truncation(), [&](const WaveIndex& k) {
        const double k2 = norm2(k);
        double w;
        if (k2 == 0.0)
            w = (m == 0) ? 1.0 : 0.0;  // |0|^0 = 1 by convention
        else
            w = std::pow(k2, m);
        if (w == 0.0) return;
        const CVec3 v = f.mode(k);
        s += w * (std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]));
    });
    return std::sqrt(s);
}

double sobolev_norm(const SpectralVectorField& f, double s) {
    double acc = 0.0;
    for_each_mode(f.truncation(), [&](const WaveIndex& k) {
        const double w = std::pow(1.0 + kTwoPi * kTwoPi * norm2(k), s);
        const CVec3 v = f.mode(k);
        acc += w * (std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]));
    });
    return std::sqrt(acc);
}

CVec3 mean_of_wedge(const SpectralVectorField& a, const SpectralVectorField& b) {
    const int n = std::min(a.truncation(), b.truncation());
    CVec3 acc{Cplx(0), Cplx(0), Cplx(0)};
    for_each_mode(n, [&](const WaveIndex& k) {
        const CVec3 p = a.mode(-k);
        const CVec3 q = b.mode(k);
        acc = acc + cross(p, q);
    });
    return acc;
}

namespace {

SpectralVectorField wedge_direct(const SpectralVectorField& a, const SpectralVectorField& b) {
    const int n_out = std::max(a.truncation(), b.truncation());
    SpectralVectorField out(n_out);
    // Iterate over the sparse support of a; scatter shifted b modes.
    std::vector<std::pair<WaveIndex, CVec3>> support;
    for_each_mode(a.truncation(), [&](const WaveIndex& k) {
        const CVec3 v = a.mode(k);
        if (std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]) > 0.0) support.emplace_back(k, v);
    });
    for (const auto& [p, ap] : support) {
        for_each_mode(b.truncation(), [&](const WaveIndex& q) {
            const WaveIndex k = {p[0] + q[0], p[1] + q[1], p[2] + q[2]};
            if (!out.contains(k)) return;
            const CVec3 bq = b.mode(q);
            CVec3 cur = out.mode(k);
            out.set_mode(k, cur + cross(ap, bq));
        });
    }
    return out;
}

SpectralVectorField wedge_collocation(const SpectralVectorField& a, const SpectralVectorField& b) {
    const int n_out = std::max(a.truncation(), b.truncation());
    // No aliased image of any exact product mode may land inside the output cube.
    const int m = padded_size(a.truncation() + b.truncation() + n_out + 1);
    GridWorkspace ga(m), gb(m);
    ga.load(a);
    gb.load(b);
    ga.cross_with(gb);
    SpectralVectorField out(n_out);
    ga.store(out);
    return out;
}

}  // namespace

SpectralVectorField wedge(const SpectralVectorField& a, const SpectralVectorField& b, WedgePath path) {
    if (path == WedgePath::Direct) return wedge_direct(a, b);
    if (path == WedgePath::Collocation) return wedge_collocation(a, b);
    const std::size_t nnz_a = a.nonzero_modes();
    if (nnz_a <= 64) return wedge_direct(a, b);
    if (b.nonzero_modes() <= 64) {
        // wedge is antisymmetric; run the sparse loop on b's support
        SpectralVectorField out = wedge_direct(b, a);
        out *= Cplx(-1.0);
        return out;
    }
    return wedge_collocation(a, b);
}

VelocityProfile make_profile(SpectralVectorField field, std::string name, double tol) {
    const double scale = field.max_abs_coef();
    if (scale == 0.0) fail(Err::DegenerateInput, "zero profile '" + name + "'");
    const CVec3 mean = mean_part(field);
    if (norm(mean) > tol * scale)
        fail(Err::NonzeroMean, "profile '" + name + "' mean magnitude " + std::to_string(norm(mean)));
    const double div = divergence_defect(field);
    if (div > tol) fail(Err::NotDivergenceFree, "profile '" + name + "' divergence defect " + std::to_string(div));
    const double re = reality_defect(field);
    if (re > tol) fail(Err::NotReal, "profile '" + name + "' reality defect " + std::to_string(re));

    enforce_reality(field);
    field.set_mode({0, 0, 0}, {Cplx(0), Cplx(0), Cplx(0)});

    VelocityProfile p{std::move(field), 0.0, std::move(name)};
    p.sup_norm = grid_sup_norm(p.field);
    return p;
}

SpectralVectorField abc_field(double a, double b, double c, int truncation) {
    if (truncation < 1) fail(Err::BadConfig, "abc_field needs truncation >= 1");
    SpectralVectorField f(truncation);
    // sin 2pi z = (e^{2pi i z} - e^{-2pi i z}) / 2i, cos 2pi z = (e^{2pi i z} + e^{-2pi i z}) / 2.
    const Cplx half(0.5, 0.0), mihalf(0.0, -0.5), ihalf(0.0, 0.5);
    // component pattern: (A sin z + C cos y, B sin x + A cos z, C sin y + B cos x) in angles 2pi(.)
    f.set_mode({0, 0, 1}, {mihalf * a, half * a, Cplx(0)});
    f.set_mode({0, 0, -1}, {ihalf * a, half * a, Cplx(0)});
    f.set_mode({1, 0, 0}, {Cplx(0), mihalf * b, half * b});
    f.set_mode({-1, 0, 0}, {Cplx(0), ihalf * b, half * b});
    f.set_mode({0, 1, 0}, {half * c, Cplx(0), mihalf * c});
    f.set_mode({0, -1, 0}, {half * c, Cplx(0), ihalf * c});
    return f;
}

VelocityProfile abc_flow(double a, double b, double c, int truncation) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "abc(%g,%g,%g)", a, b, c);
    return make_profile(abc_field(a, b, c, truncation), buf);
}

VelocityProfile random_profile(int truncation, double decay, std::uint64_t seed) {
    if (truncation < 1) fail(Err::BadConfig, "random_profile needs truncation >= 1");
    Rng rng(seed);
    SpectralVectorField f(truncation);
    // Draw the lexicographically positive half of the cube; mirror conjugates.
    for_each_mode(truncation, [&](const WaveIndex& k) {
        if (std::make_tuple(k[0], k[1], k[2]) <= std::make_tuple(0, 0, 0)) return;
        const double amp = std::pow(norm2(k), -0.5 * decay);
        CVec3 v;
        for (int c = 0; c < 3; ++c) v[c] = amp * Cplx(rng.gaussian(), rng.gaussian());
        f.set_mode(k, v);
        f.set_mode(-k, {std::conj(v[0]), std::conj(v[1]), std::conj(v[2])});
    });
    leray_project(f);
    const double n = f.l2_norm();
    f *= Cplx(1.0 / n, 0.0);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "random(N=%d,p=%g,seed=%llu)", truncation, decay,
                  static_cast<unsigned long long>(seed));
    return make_profile(std::move(f), buf);
}

}  // namespace dynamo
