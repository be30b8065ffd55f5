#include "dynamo/alpha_zero.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dynamo/errors.hpp"

namespace dynamo {

SpectralVectorField curl_of_wedge_with_mean(const VelocityProfile& u, const CVec3& bbar) {
    const auto& uf = u.field;
    SpectralVectorField out(uf.truncation());
    for_each_mode(uf.truncation(), [&](const WaveIndex& k) {
        const CVec3 uk = uf.mode(k);
        const CVec3 uxb = cross(uk, bbar);
        const CVec3 ik = {Cplx(0.0, kTwoPi * k[0]), Cplx(0.0, kTwoPi * k[1]), Cplx(0.0, kTwoPi * k[2])};
        out.set_mode(k, cross(ik, uxb));
    });
    return out;
}

void apply_inverse_laplacian(SpectralVectorField& f) {
    for_each_mode(f.truncation(), [&](const WaveIndex& k) {
        const double k2 = norm2(k);
        if (k2 == 0.0) {
            f.set_mode(k, {Cplx(0), Cplx(0), Cplx(0)});
            return;
        }
        const double factor = -1.0 / (kTwoPi * kTwoPi * k2);
        const CVec3 v = f.mode(k);
        f.set_mode(k, {factor * v[0], factor * v[1], factor * v[2]});
    });
}

SpectralVectorField cell_solve(const VelocityProfile& u, const CVec3& bbar) {
    // Laplacian balance: mode k of the corrector is i k wedge (U_hat wedge bbar)
    // / (2 pi |k|^2), realized as (-Delta)^{-1} applied to -curl(U wedge bbar) so
    // the perturbed solver's epsilon = 0 limit reproduces it exactly.
    SpectralVectorField rhs = curl_of_wedge_with_mean(u, bbar);
    rhs *= Cplx(-1.0);
    apply_inverse_laplacian(rhs);
    return rhs;
}

namespace {

Mat3 matrix_defects(const Mat3& alpha, double& sym, double& real) {
    const double scale = alpha.norm();
    if (scale == 0.0) {
        sym = 0.0;
        real = 0.0;
        return alpha;
    }
    sym = (alpha - alpha.transpose()).norm() / scale;
    real = alpha.imag().norm() / scale;
    return alpha;
}

}  // namespace

AlphaResult alpha_tensor(const VelocityProfile& u) {
    Mat3 a;
    for (int j = 0; j < 3; ++j) {
        CVec3 ej{Cplx(0), Cplx(0), Cplx(0)};
        ej[j] = Cplx(1.0);
        const SpectralVectorField corr = cell_solve(u, ej);
        const SpectralVectorField prod = wedge(u.field, corr, WedgePath::Collocation);
        const CVec3 col = mean_part(prod);
        for (int i = 0; i < 3; ++i) a(i, j) = col[i];
    }
    AlphaResult r{a, 0.0, 0.0};
    matrix_defects(a, r.symmetry_defect, r.reality_defect);
    return r;
}

Mat3 alpha_closed_sum(const VelocityProfile& u) {
    const auto& uf = u.field;
    Mat3 a = Mat3::Zero();
    for (int j = 0; j < 3; ++j) {
        CVec3 ej{Cplx(0), Cplx(0), Cplx(0)};
        ej[j] = Cplx(1.0);
        CVec3 acc{Cplx(0), Cplx(0), Cplx(0)};
        for_each_mode(uf.truncation(), [&](const WaveIndex& k) {
            const double k2 = norm2(k);
            if (k2 == 0.0) return;
            const CVec3 uk = uf.mode(k);
            const CVec3 umk = uf.mode(-k);
            const CVec3 kc = {Cplx(k[0]), Cplx(k[1]), Cplx(k[2])};
            const CVec3 inner_w = cross(kc, cross(uk, ej));
            const Cplx factor = Cplx(0.0, 1.0) / (kTwoPi * k2);
            acc = acc + cross(umk, factor * inner_w);
        });
        for (int i = 0; i < 3; ++i) a(i, j) = acc[i];
    }
    return a;
}

Mat3 mean_matrix(const Mat3& alpha, const Vec3& xi) {
    Mat3 m;
    const double xi2 = dot(xi, xi);
    for (int j = 0; j < 3; ++j) {
        const CVec3 col = {alpha(0, j), alpha(1, j), alpha(2, j)};
        const CVec3 ixc = Cplx(0.0, 1.0) * cross(to_cplx(xi), col);
        for (int i = 0; i < 3; ++i) m(i, j) = ixc[i];
        m(j, j) -= xi2;
    }
    return m;
}

double gamma_of_direction(const Mat3& alpha, const Vec3& e) {
    Mat3 g;
    for (int j = 0; j < 3; ++j) {
        const CVec3 col = {alpha(0, j), alpha(1, j), alpha(2, j)};
        const CVec3 ixc = Cplx(0.0, 1.0) * cross(to_cplx(e), col);
        for (int i = 0; i < 3; ++i) g(i, j) = ixc[i];
    }
    Eigen::ComplexEigenSolver<Mat3> es(g, false);
    double best = -1e300;
    for (int i = 0; i < 3; ++i) best = std::max(best, es.eigenvalues()(i).real());
    return best;
}

std::pair<Cplx, CVec3> leading_eigenpair(const Mat3& m) {
    Eigen::ComplexEigenSolver<Mat3> es(m, true);
    int lead = 0;
    for (int i = 1; i < 3; ++i)
        if (es.eigenvalues()(i).real() > es.eigenvalues()(lead).real()) lead = i;
    Eigen::Vector3cd v = es.eigenvectors().col(lead);
    // Phase fix: rotate so the largest-magnitude component (lowest index on
    // exact magnitude ties) is real and positive, then normalize.
    int big = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(v(i)) > std::abs(v(big))) big = i;
    if (std::abs(v(big)) == 0.0) fail(Err::DegenerateInput, "zero eigenvector");
    const Cplx phase = std::conj(v(big)) / std::abs(v(big));
    v *= phase;
    v /= v.norm();
    return {es.eigenvalues()(lead), CVec3{v(0), v(1), v(2)}};
}

RationalSnap snap_rational(double x, std::int64_t max_den) {
    if (max_den < 1) fail(Err::BadConfig, "snap_rational needs max_den >= 1");
    const bool neg = x < 0.0;
    const double v = std::abs(x);

    // Enumerate continued-fraction convergents and their semiconvergents with
    // denominator within the bound; the best approximant is among them.
    std::int64_t best_p = std::llround(v), best_q = 1;
    double best_err = std::abs(v - double(best_p));
    auto consider = [&](std::int64_t p, std::int64_t q) {
        if (q < 1 || q > max_den) return;
        const double err = std::abs(v - double(p) / double(q));
        if (err < best_err || (err == best_err && q < best_q)) {
            best_err = err;
            best_p = p;
            best_q = q;
        }
    };

    std::int64_t p_prev = 1, q_prev = 0;  // h_{-1}/k_{-1}
    std::int64_t p_cur = std::int64_t(std::floor(v)), q_cur = 1;
    consider(p_cur, q_cur);
    double frac = v - std::floor(v);
    for (int iter = 0; iter < 64 && frac > 1e-15; ++iter) {
        const double inv = 1.0 / frac;
        const double a_f = std::floor(inv);
        if (a_f > 9e17) break;
        const std::int64_t a = std::int64_t(a_f);
        frac = inv - a_f;
        // semiconvergents t*p_cur + p_prev for t = 1..a
        for (std::int64_t t = 1; t <= a; ++t) {
            const std::int64_t q = t * q_cur + q_prev;
            if (q > max_den) break;
            consider(t * p_cur + p_prev, q);
        }
        const std::int64_t p_next = a * p_cur + p_prev;
        const std::int64_t q_next = a * q_cur + q_prev;
        p_prev = p_cur;
        q_prev = q_cur;
        p_cur = p_next;
        q_cur = q_next;
        if (q_cur > max_den) break;
    }
    const std::int64_t g = std::gcd(best_p < 0 ? -best_p : best_p, best_q);
    if (g > 1) {
        best_p /= g;
        best_q /= g;
    }
    return {neg ? -best_p : best_p, best_q};
}

namespace {

// Golden-angle spiral on the unit sphere.
Vec3 fibonacci_direction(int i, int n) {
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = kTwoPi * (i / golden - std::floor(i / golden));
    return {r * std::cos(phi), r * std::sin(phi), z};
}

bool lex_less(const Vec3& a, const Vec3& b) {
    for (int i = 0; i < 3; ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

}  // namespace

XiSelection select_xi(const Mat3& alpha, const XiOptions& opts) {
    std::vector<Vec3> candidates;
    candidates.reserve(opts.direction_samples + 12);
    for (int i = 0; i < opts.direction_samples; ++i)
        candidates.push_back(fibonacci_direction(i, opts.direction_samples));
    for (int axis = 0; axis < 3; ++axis) {
        Vec3 e{0, 0, 0};
        e[axis] = 1.0;
        candidates.push_back(e);
        e[axis] = -1.0;
        candidates.push_back(e);
    }
    // Eigendirections of the symmetrized real part; for normal alpha these are
    // exactly the extremal directions of gamma.
    Eigen::Matrix3d sym = 0.5 * (alpha.real() + alpha.real().transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(sym);
    for (int i = 0; i < 3; ++i) {
        Eigen::Vector3d v = es.eigenvectors().col(i);
        candidates.push_back({v(0), v(1), v(2)});
        candidates.push_back({-v(0), -v(1), -v(2)});
    }

    Vec3 best_e{0, 0, 0};
    double best_gamma = -1e300;
    for (const Vec3& e : candidates) {
        const double n = norm(e);
        if (n == 0.0) continue;
        const Vec3 eu = (1.0 / n) * e;
        const double g = gamma_of_direction(alpha, eu);
        if (g > best_gamma + 1e-15 || (std::abs(g - best_gamma) <= 1e-15 && lex_less(best_e, eu))) {
            best_gamma = g;
            best_e = eu;
        }
    }
    if (!(best_gamma > 0.0))
        fail(Err::NoUnstableDirection,
             "no direction with positive gamma (best " + std::to_string(best_gamma) + ")");

    XiSelection sel;
    sel.direction = best_e;
    sel.gamma = best_gamma;
    const double r_star = 0.5 * best_gamma;
    sel.xi_unsnapped = r_star * best_e;
    {
        auto [lam, vec] = leading_eigenpair(mean_matrix(alpha, sel.xi_unsnapped));
        sel.lambda_unsnapped = lam;
        sel.xi = sel.xi_unsnapped;
        sel.lambda0 = lam;
        sel.mean_field = vec;
    }

    if (opts.denominator_bound > 0) {
        Vec3 snapped;
        for (int i = 0; i < 3; ++i) {
            sel.ratios[i] = snap_rational(sel.xi_unsnapped[i] / kTwoPi, opts.denominator_bound);
            snapped[i] = kTwoPi * double(sel.ratios[i].num) / double(sel.ratios[i].den);
        }
        sel.snapped = true;
        sel.xi = snapped;
        auto [lam, vec] = leading_eigenpair(mean_matrix(alpha, snapped));
        sel.lambda0 = lam;
        sel.mean_field = vec;
        if (!(lam.real() > 0.0))
            fail(Err::SnapDestroyedGrowth, "rational xi lost growth: Re lambda = " + std::to_string(lam.real()));
    }
    return sel;
}

}  // namespace dynamo
