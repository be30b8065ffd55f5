#include "dynamo/continuation.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "json.hpp"

#include "dynamo/errors.hpp"
#include "dynamo/field_io.hpp"

namespace dynamo {

SpectralVectorField apply_cell_operator(const VelocityProfile& u, const Vec3& xi, double eps, Cplx lambda,
                                        const SpectralVectorField& b) {
    if (b.truncation() != u.field.truncation())
        fail(Err::TruncationMismatch, "operator truncation differs from field");
    const SpectralVectorField w = wedge(u.field, b);
    const double xi2 = dot(xi, xi);
    const double e2 = eps * eps;
    const double e3 = e2 * eps;
    const double e4 = e2 * e2;
    const CVec3 ixi = {Cplx(0.0, xi[0]), Cplx(0.0, xi[1]), Cplx(0.0, xi[2])};

    SpectralVectorField out(b.truncation());
    for_each_mode(b.truncation(), [&](const WaveIndex& k) {
        const CVec3 bk = b.mode(k);
        const CVec3 wk = w.mode(k);
        const double k2 = norm2(k);
        const Cplx diag = Cplx(-kTwoPi * kTwoPi * k2 - 2.0 * kTwoPi * e2 * dot(xi, {double(k[0]), double(k[1]), double(k[2])}) -
                                   e4 * xi2,
                               0.0) -
                          e4 * lambda;
        const CVec3 ik = {Cplx(0.0, kTwoPi * k[0]), Cplx(0.0, kTwoPi * k[1]), Cplx(0.0, kTwoPi * k[2])};
        CVec3 v = diag * bk;
        if (eps != 0.0) {
            const CVec3 adv = cross(ik, wk);
            v = v + Cplx(eps) * adv;
            if (k2 != 0.0) {
                const CVec3 slow = cross(ixi, wk);
                v = v + Cplx(e3) * slow;
            }
        }
        out.set_mode(k, v);
    });
    return out;
}

SpectralVectorField cell_rhs(const VelocityProfile& u, const Vec3& xi, double eps, const CVec3& bbar) {
    SpectralVectorField rhs = curl_of_wedge_with_mean(u, bbar);
    rhs *= Cplx(-1.0);
    if (eps != 0.0) {
        const double e2 = eps * eps;
        const CVec3 ixi = {Cplx(0.0, xi[0]), Cplx(0.0, xi[1]), Cplx(0.0, xi[2])};
        const auto& uf = u.field;
        for_each_mode(uf.truncation(), [&](const WaveIndex& k) {
            const CVec3 uxb = cross(uf.mode(k), bbar);
            const CVec3 extra = cross(ixi, uxb);
            CVec3 v = rhs.mode(k);
            v = v - Cplx(e2) * extra;
            rhs.set_mode(k, v);
        });
    }
    return rhs;
}

SpectralVectorField solve_fluctuation(const VelocityProfile& u, const Vec3& xi, double eps, Cplx lambda,
                                      const CVec3& bbar, const CellSolveOptions& opts, CellSolveInfo* info) {
    const SpectralVectorField rhs = cell_rhs(u, xi, eps, bbar);
    const double rhs_norm = rhs.l2_norm();
    SpectralVectorField b(rhs.truncation());
    if (rhs_norm == 0.0) {
        if (info) *info = {0, 0.0};
        return b;
    }
    double prev_rel = -1.0;
    for (int iter = 0;; ++iter) {
        SpectralVectorField r = rhs;
        if (iter > 0) r -= apply_cell_operator(u, xi, eps, lambda, b);
        const double rel = r.l2_norm() / rhs_norm;
        if (rel <= opts.tol) {
            if (info) *info = {iter, rel};
            return b;
        }
        if (iter >= opts.max_iters)
            fail(Err::SolverDiverged, "fluctuation solve hit the iteration budget at residual " +
                                          std::to_string(rel));
        if (prev_rel >= 0.0 && rel > 4.0 * prev_rel && rel > 1.0)
            fail(Err::SolverDiverged, "fluctuation solve residual growing: " + std::to_string(rel));
        prev_rel = rel;
        apply_inverse_laplacian(r);
        b += r;
    }
}

Mat3 alpha_eps(const VelocityProfile& u, const Vec3& xi, double eps, Cplx lambda, const CellSolveOptions& opts) {
    Mat3 a;
    for (int j = 0; j < 3; ++j) {
        CVec3 ej{Cplx(0), Cplx(0), Cplx(0)};
        ej[j] = Cplx(1.0);
        const SpectralVectorField bt = solve_fluctuation(u, xi, eps, lambda, ej, opts);
        // Same product route as alpha_tensor so the eps = 0 reduction is exact
        // coefficient for coefficient, not merely to rounding.
        const SpectralVectorField prod = wedge(u.field, bt, WedgePath::Collocation);
        const CVec3 col = mean_part(prod);
        for (int i = 0; i < 3; ++i) a(i, j) = col[i];
    }
    return a;
}

DispersionValue dispersion(const VelocityProfile& u, const Vec3& xi, double eps, Cplx lambda,
                           const CellSolveOptions& opts) {
    const Mat3 a = alpha_eps(u, xi, eps, lambda, opts);
    Mat3 m = mean_matrix(a, xi);
    m -= lambda * Mat3::Identity();
    const double scale_base = m.norm() / std::sqrt(3.0);
    return {m.determinant(), scale_base * scale_base * scale_base};
}

NewtonResult newton_lambda(const VelocityProfile& u, const Vec3& xi, double eps, Cplx lambda_init,
                           const NewtonOptions& opts) {
    const double xi2 = dot(xi, xi);
    const double trust_radius = std::max(0.3 * std::max(std::abs(lambda_init), xi2), 1e6 * opts.step_abs);

    Cplx mu_prev = lambda_init;
    DispersionValue f_prev = dispersion(u, xi, eps, mu_prev, opts.cell);
    if (std::abs(f_prev.f) <= opts.f_tol * f_prev.scale)
        return {mu_prev, 0, f_prev.scale > 0 ? std::abs(f_prev.f) / f_prev.scale : 0.0};

    const double seed = 1e-4 * std::max({std::abs(lambda_init), xi2, 1e-12});
    Cplx mu = lambda_init + Cplx(seed, 0.0);
    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        const DispersionValue f_cur = dispersion(u, xi, eps, mu, opts.cell);
        const Cplx df = f_cur.f - f_prev.f;
        const double denom_floor = 1e-14 * (std::abs(f_cur.f) + std::abs(f_prev.f));
        if (std::abs(df) <= denom_floor || df == Cplx(0.0))
            fail(Err::DerivativeVanished, "secant slope collapsed at iteration " + std::to_string(iter));
        const Cplx step = f_cur.f * (mu - mu_prev) / df;
        mu_prev = mu;
        f_prev = f_cur;
        mu = mu - step;
        if (std::abs(mu - lambda_init) > trust_radius)
            fail(Err::NoConvergence, "iterate left the trust region around the initial guess");
        const bool f_ok = std::abs(f_cur.f) <= opts.f_tol * f_cur.scale;
        const bool step_ok = std::abs(step) <= opts.step_abs + opts.step_rel * std::abs(mu);
        if (f_ok && step_ok) {
            const DispersionValue f_acc = dispersion(u, xi, eps, mu, opts.cell);
            const double resid = f_acc.scale > 0 ? std::abs(f_acc.f) / f_acc.scale : 0.0;
            return {mu, iter, resid};
        }
    }
    fail(Err::NoConvergence, "newton budget of " + std::to_string(opts.max_iters) + " iterations exhausted");
}

Branch continue_branch(const VelocityProfile& u, const Vec3& xi, Cplx lambda0, double eps_max, int samples,
                       const NewtonOptions& opts) {
    if (samples < 1) fail(Err::BadConfig, "branch needs at least one sample");
    if (!(eps_max > 0.0)) fail(Err::BadConfig, "branch needs eps_max > 0");
    Branch br;
    br.xi = xi;
    for (int i = 0; i < samples; ++i) {
        // A one-sample grid degenerates to the eps = 0 endpoint.
        const double eps = samples == 1 ? 0.0 : eps_max * double(i) / double(samples - 1);
        // Warm start: quadratic extrapolation through the latest samples.
        Cplx guess = lambda0;
        const auto& pts = br.points;
        if (pts.size() == 1) {
            guess = pts[0].lambda;
        } else if (pts.size() == 2) {
            const double t = (eps - pts[0].eps) / (pts[1].eps - pts[0].eps);
            guess = pts[0].lambda + t * (pts[1].lambda - pts[0].lambda);
        } else if (pts.size() >= 3) {
            const auto& p0 = pts[pts.size() - 3];
            const auto& p1 = pts[pts.size() - 2];
            const auto& p2 = pts[pts.size() - 1];
            const double x0 = p0.eps, x1 = p1.eps, x2 = p2.eps, x = eps;
            guess = p0.lambda * ((x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2))) +
                    p1.lambda * ((x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2))) +
                    p2.lambda * ((x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1)));
        }
        try {
            const NewtonResult nr = newton_lambda(u, xi, eps, guess, opts);
            br.points.push_back({eps, nr.lambda, nr.residual, nr.iterations});
            if (nr.lambda.real() <= 0.0) {
                br.truncated = true;
                br.stop_reason = "nonpositive growth rate";
                return br;
            }
        } catch (const Error& e) {
            br.truncated = true;
            br.stop_reason = e.what();
            return br;
        }
    }
    return br;
}

void write_branch_csv(const std::string& path, const Branch& branch) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) fail(Err::IoError, "cannot open '" + path + "' for writing");
    std::fputs("epsilon,re_lambda,im_lambda,residual,newton_iters\n", fp);
    for (const auto& p : branch.points)
        std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g,%d\n", p.eps, p.lambda.real(), p.lambda.imag(), p.residual,
                     p.newton_iters);
    if (std::fclose(fp) != 0) fail(Err::IoError, "close failed on '" + path + "'");
}

namespace {

// Minimal T with eps^2 xi_i T integral in 2 pi units, from xi_i = 2 pi p/q and
// eps^2 = pe/qe: T_i = q qe / gcd(p pe, q qe).
std::int64_t minimal_period(const RationalSnap& xi_ratio, std::int64_t pe, std::int64_t qe) {
    const std::int64_t p = (xi_ratio.num < 0 ? -xi_ratio.num : xi_ratio.num) * pe;
    const std::int64_t q = xi_ratio.den * qe;
    if (p == 0) return 1;
    return q / std::gcd(p, q);
}

}  // namespace

BlochMode build_mode(const VelocityProfile& u, const XiSelection& sel, double eps, Cplx lambda_init,
                     const NewtonOptions& opts) {
    const NewtonResult nr = newton_lambda(u, sel.xi, eps, lambda_init, opts);

    const Mat3 a = alpha_eps(u, sel.xi, eps, nr.lambda, opts.cell);
    const Mat3 m = mean_matrix(a, sel.xi);
    auto [lam_eig, bbar] = leading_eigenpair(m);
    const double scale = std::max({std::abs(nr.lambda), dot(sel.xi, sel.xi), 1e-12});
    if (std::abs(lam_eig - nr.lambda) > 1e-6 * scale)
        fail(Err::EigenvectorMismatch, "mean eigensolve disagrees with dispersion root by " +
                                           std::to_string(std::abs(lam_eig - nr.lambda)));

    BlochMode mode;
    mode.xi = sel.xi;
    mode.eps = eps;
    mode.lambda = nr.lambda;
    mode.mean_field = bbar;
    mode.newton_residual = nr.residual;
    mode.fluctuation = solve_fluctuation(u, sel.xi, eps, nr.lambda, bbar, opts.cell);

    mode.box_defined = false;
    if (eps != 0.0 && sel.snapped) {
        const RationalSnap e2 = snap_rational(eps * eps, 1000000);
        if (std::abs(eps * eps - double(e2.num) / double(e2.den)) <= 1e-12 * eps * eps && e2.num > 0) {
            for (int i = 0; i < 3; ++i) mode.box.cells[i] = minimal_period(sel.ratios[i], e2.num, e2.den);
            mode.box_defined = true;
        }
    }
    return mode;
}

void save_mode(const std::string& path, const BlochMode& mode) {
    save_field(path + ".field", mode.fluctuation, false);
    nlohmann::json j = {
        {"xi", {mode.xi[0], mode.xi[1], mode.xi[2]}},
        {"eps", mode.eps},
        {"lambda", {mode.lambda.real(), mode.lambda.imag()}},
        {"mean_field_re", {mode.mean_field[0].real(), mode.mean_field[1].real(), mode.mean_field[2].real()}},
        {"mean_field_im", {mode.mean_field[0].imag(), mode.mean_field[1].imag(), mode.mean_field[2].imag()}},
        {"newton_residual", mode.newton_residual},
        {"box_defined", mode.box_defined},
        {"box", {mode.box.cells[0], mode.box.cells[1], mode.box.cells[2]}},
    };
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) fail(Err::IoError, "cannot open '" + path + "' for writing");
    const std::string text = j.dump(2) + "\n";
    if (std::fwrite(text.data(), 1, text.size(), fp) != text.size()) {
        std::fclose(fp);
        fail(Err::IoError, "short write on '" + path + "'");
    }
    if (std::fclose(fp) != 0) fail(Err::IoError, "close failed on '" + path + "'");
}

BlochMode load_mode(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) fail(Err::IoError, "cannot open '" + path + "' for reading");
    std::string text;
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof(buf), fp)) > 0) text.append(buf, got);
    std::fclose(fp);
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) fail(Err::IoError, "malformed mode file '" + path + "'");

    LoadedField lf = load_field(path + ".field");
    BlochMode mode{.fluctuation = std::move(lf.field)};
    try {
        for (int i = 0; i < 3; ++i) mode.xi[i] = j.at("xi").at(i).get<double>();
        mode.eps = j.at("eps").get<double>();
        mode.lambda = Cplx(j.at("lambda").at(0).get<double>(), j.at("lambda").at(1).get<double>());
        for (int i = 0; i < 3; ++i)
            mode.mean_field[i] =
                Cplx(j.at("mean_field_re").at(i).get<double>(), j.at("mean_field_im").at(i).get<double>());
        mode.newton_residual = j.at("newton_residual").get<double>();
        mode.box_defined = j.at("box_defined").get<bool>();
        for (int i = 0; i < 3; ++i) mode.box.cells[i] = j.at("box").at(i).get<std::int64_t>();
    } catch (const nlohmann::json::exception& e) {
        fail(Err::IoError, "mode file missing fields in '" + path + "': " + e.what());
    }
    return mode;
}

}  // namespace dynamo
