#include "dynamo/cli_runner.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <limits>

#include "CLI11.hpp"
#include "json.hpp"

#include "dynamo/alpha_zero.hpp"
#include "dynamo/continuation.hpp"
#include "dynamo/field_io.hpp"
#include "dynamo/induction_dns.hpp"
#include "dynamo/mhd_dns.hpp"

namespace dynamo {

namespace {

std::string one_line(std::string s) {
    for (auto& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

void error_line(const std::string& kind, const std::string& msg) {
    std::fprintf(stderr, "error: %s: %s\n", kind.c_str(), one_line(msg).c_str());
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) fail(Err::IoError, "cannot create output directory " + cfg.output_dir);
    return cfg.output_dir + "/" + name;
}

void write_text(const std::string& path, const std::string& body) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) fail(Err::IoError, "cannot open " + path + " for writing");
    const bool ok = std::fwrite(body.data(), 1, body.size(), f) == body.size();
    if (std::fclose(f) != 0 || !ok) fail(Err::IoError, "write failed for " + path);
}

nlohmann::json json_cvec(const CVec3& v) {
    return {{v[0].real(), v[0].imag()}, {v[1].real(), v[1].imag()}, {v[2].real(), v[2].imag()}};
}

nlohmann::json json_vec(const Vec3& v) { return {v[0], v[1], v[2]}; }

nlohmann::json json_mat_re(const Mat3& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < 3; ++i) rows.push_back({m(i, 0).real(), m(i, 1).real(), m(i, 2).real()});
    return rows;
}

nlohmann::json json_mat_im(const Mat3& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < 3; ++i) rows.push_back({m(i, 0).imag(), m(i, 1).imag(), m(i, 2).imag()});
    return rows;
}

std::vector<double> parse_numbers(const std::string& text, std::size_t want, const std::string& what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string tok = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            fail(Err::BadConfig, "cannot parse " + what + " from '" + text + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.size() != want) fail(Err::BadConfig, what + " needs " + std::to_string(want) + " numbers");
    return out;
}

nlohmann::json flow_manifest(const RunConfig& cfg, const std::string& name, double sup_norm) {
    const FlowSpec spec = parse_flow_spec(cfg.flow);
    return {{"kind", spec.kind}, {"params", spec.params}, {"name", name},
            {"truncation", cfg.truncation}, {"sup_norm", sup_norm}};
}

XiOptions xi_options(const RunConfig& cfg) {
    XiOptions xo;
    xo.direction_samples = cfg.direction_samples;
    xo.denominator_bound = cfg.denominator_bound;
    return xo;
}

NewtonOptions newton_options(const RunConfig& cfg) {
    NewtonOptions no;
    no.f_tol = config_tol(cfg, "newton", no.f_tol);
    no.cell.tol = config_tol(cfg, "cell", no.cell.tol);
    return no;
}

nlohmann::json selection_json(const XiSelection& sel) {
    nlohmann::json ratios = nlohmann::json::array();
    for (const auto& r : sel.ratios) ratios.push_back({r.num, r.den});
    return {{"direction", json_vec(sel.direction)},
            {"gamma", sel.gamma},
            {"xi", json_vec(sel.xi)},
            {"lambda0", {sel.lambda0.real(), sel.lambda0.imag()}},
            {"mean_field", json_cvec(sel.mean_field)},
            {"snapped", sel.snapped},
            {"ratios_over_2pi", ratios},
            {"xi_unsnapped", json_vec(sel.xi_unsnapped)},
            {"lambda_unsnapped", {sel.lambda_unsnapped.real(), sel.lambda_unsnapped.imag()}}};
}

// Initial Bloch envelope of a stored mode: mean row plus eps-weighted
// fluctuation rows, on a cube wide enough for the integrator.
SpectralVectorField mode_state(const BlochMode& mode, int truncation) {
    SpectralVectorField b(truncation);
    b.set_mode({0, 0, 0}, mode.mean_field);
    for_each_mode(mode.fluctuation.truncation(), [&](const WaveIndex& k) {
        if (k[0] == 0 && k[1] == 0 && k[2] == 0) return;
        const CVec3 v = mode.fluctuation.mode(k);
        b.set_mode(k, {mode.eps * v[0], mode.eps * v[1], mode.eps * v[2]});
    });
    return b;
}

}  // namespace

double config_tol(const RunConfig& cfg, const std::string& name, double fallback) {
    const auto it = cfg.tolerances.find(name);
    return it == cfg.tolerances.end() ? fallback : it->second;
}

FlowSpec parse_flow_spec(const std::string& spec) {
    const std::size_t colon = spec.find(':');
    FlowSpec out;
    out.kind = spec.substr(0, colon == std::string::npos ? spec.size() : colon);
    if (colon != std::string::npos) out.params = spec.substr(colon + 1);
    if (out.kind == "abc") {
        parse_numbers(out.params, 3, "abc amplitudes");
    } else if (out.kind == "file") {
        if (out.params.empty()) fail(Err::BadConfig, "file flow needs a path");
    } else if (out.kind == "random") {
        if (!out.params.empty()) fail(Err::BadConfig, "random flow takes no inline params");
    } else {
        fail(Err::BadConfig, "unknown flow kind '" + out.kind + "'");
    }
    return out;
}

SpectralVectorField flow_field(const RunConfig& cfg) {
    const FlowSpec spec = parse_flow_spec(cfg.flow);
    if (cfg.truncation < 1) fail(Err::BadConfig, "truncation must be at least 1");
    if (spec.kind == "abc") {
        const auto p = parse_numbers(spec.params, 3, "abc amplitudes");
        return abc_field(p[0], p[1], p[2], cfg.truncation);
    }
    if (spec.kind == "file") return load_field(spec.params).field;
    return random_profile(cfg.truncation, cfg.decay, cfg.seed).field;
}

VelocityProfile flow_profile(const RunConfig& cfg) {
    const FlowSpec spec = parse_flow_spec(cfg.flow);
    if (cfg.truncation < 1) fail(Err::BadConfig, "truncation must be at least 1");
    if (spec.kind == "abc") {
        const auto p = parse_numbers(spec.params, 3, "abc amplitudes");
        return abc_flow(p[0], p[1], p[2], cfg.truncation);
    }
    if (spec.kind == "file") {
        const std::string base = std::filesystem::path(spec.params).filename().string();
        return make_profile(load_field(spec.params).field, "file:" + base);
    }
    return random_profile(cfg.truncation, cfg.decay, cfg.seed);
}

int exit_code_for(const Error& e) {
    switch (e.kind()) {
        case Err::BadConfig:
        case Err::NonzeroMean:
        case Err::NotDivergenceFree:
        case Err::NotReal:
        case Err::TruncationMismatch:
        case Err::BoxMismatch:
        case Err::DegenerateInput:
            return 2;
        case Err::IoError:
            return 3;
        case Err::NoUnstableDirection:
            return 4;
        case Err::HorizonExceeded:
            return 7;
        default:
            return 1;
    }
}

int cmd_alpha(const RunConfig& cfg) {
    const SpectralVectorField f = flow_field(cfg);
    nlohmann::json doc;
    if (f.max_abs_coef() == 0.0) {
        const Mat3 zero = Mat3::Zero();
        doc = {{"flow", flow_manifest(cfg, "zero", 0.0)},
               {"alpha_re", json_mat_re(zero)},
               {"alpha_im", json_mat_im(zero)},
               {"symmetry_defect", 0.0},
               {"reality_defect", 0.0}};
    } else {
        const VelocityProfile u = flow_profile(cfg);
        const AlphaResult ar = alpha_tensor(u);
        doc = {{"flow", flow_manifest(cfg, u.name, u.sup_norm)},
               {"alpha_re", json_mat_re(ar.alpha)},
               {"alpha_im", json_mat_im(ar.alpha)},
               {"symmetry_defect", ar.symmetry_defect},
               {"reality_defect", ar.reality_defect}};
    }
    write_text(out_path(cfg, "alpha.json"), doc.dump(2) + "\n");
    return 0;
}

int cmd_find_xi(const RunConfig& cfg) {
    const VelocityProfile u = flow_profile(cfg);
    const AlphaResult ar = alpha_tensor(u);
    const XiSelection sel = select_xi(ar.alpha, xi_options(cfg));
    nlohmann::json doc = selection_json(sel);
    doc["flow"] = flow_manifest(cfg, u.name, u.sup_norm);
    doc["alpha_symmetry_defect"] = ar.symmetry_defect;
    write_text(out_path(cfg, "xi.json"), doc.dump(2) + "\n");
    return 0;
}

int cmd_branch(const RunConfig& cfg) {
    if (cfg.steps < 1) fail(Err::BadConfig, "steps must be at least 1");
    const VelocityProfile u = flow_profile(cfg);
    const AlphaResult ar = alpha_tensor(u);
    const XiSelection sel = select_xi(ar.alpha, xi_options(cfg));
    const NewtonOptions no = newton_options(cfg);

    nlohmann::json xj = selection_json(sel);
    xj["flow"] = flow_manifest(cfg, u.name, u.sup_norm);
    write_text(out_path(cfg, "xi.json"), xj.dump(2) + "\n");

    const Branch br = continue_branch(u, sel.xi, sel.lambda0, cfg.epsilon_max, cfg.steps, no);
    write_branch_csv(out_path(cfg, "branch.csv"), br);
    if (br.truncated)
        std::fprintf(stderr, "note: branch stopped early: %s\n", one_line(br.stop_reason).c_str());

    bool mode_failed = false;
    for (const double e : cfg.mode_eps) {
        Cplx guess = sel.lambda0;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : br.points)
            if (std::abs(p.eps - e) < best) {
                best = std::abs(p.eps - e);
                guess = p.lambda;
            }
        char name[64];
        std::snprintf(name, sizeof name, "mode_%g.json", e);
        try {
            const BlochMode mode = build_mode(u, sel, e, guess, no);
            save_mode(out_path(cfg, name), mode);
        } catch (const Error& err) {
            std::fprintf(stderr, "note: mode at eps=%g skipped: %s\n", e, one_line(err.what()).c_str());
            mode_failed = true;
        }
    }

    if (br.truncated) {
        error_line("BranchTruncated", br.stop_reason + " before epsilon_max");
        return 5;
    }
    if (mode_failed) {
        error_line("ModeFailed", "one or more requested mode files could not be built");
        return 1;
    }
    return 0;
}

int cmd_validate(const RunConfig& cfg) {
    if (cfg.mode_path.empty()) fail(Err::BadConfig, "validate-dns needs --mode");
    const BlochMode mode = load_mode(cfg.mode_path);
    if (!(mode.eps > 0.0)) fail(Err::BadConfig, "stored mode has eps <= 0; nothing to integrate");

    const SpectralVectorField raw = flow_field(cfg);
    VelocityProfile u{SpectralVectorField(1), 0.0, "zero"};
    if (raw.max_abs_coef() != 0.0) u = flow_profile(cfg);

    const int n_dns =
        std::max({cfg.truncation, u.field.truncation(), mode.fluctuation.truncation()});
    double mode_residual = -1.0;
    if (u.sup_norm > 0.0) mode_residual = validate_mode(mode, u);

    // The advective bound degenerates to +inf for the zero flow; the horizon
    // then caps the step so the run still samples a clean decay curve.
    BlochDnsOptions dopt;
    const double e3 = 1.0 / (mode.eps * mode.eps * mode.eps);
    double bound = std::numeric_limits<double>::infinity();
    if (u.sup_norm > 0.0) bound = dopt.cfl_c / (e3 * u.sup_norm * kTwoPi * n_dns);
    double dt = cfg.dt > 0.0 ? cfg.dt : std::min(0.9 * bound, cfg.horizon / 400.0);

    VelocityProfile uz{SpectralVectorField(n_dns), 0.0, "zero"};
    const VelocityProfile& uref = u.sup_norm > 0.0 ? u : uz;
    BlochIntegrator integ(uref, mode.eps, mode.xi, n_dns, dt, dopt);

    SpectralVectorField b = mode_state(mode, n_dns);
    const DnsSeries series = integ.run(b, cfg.horizon);
    write_series_csv(out_path(cfg, "growth.csv"), series);

    const GrowthReport rep = growth_rate(series, 0.5, mode.eps);
    const double lam = mode.lambda.real();
    const double tol = config_tol(cfg, "growth", 0.02);
    const double rel = lam != 0.0 ? std::abs(rep.rate - lam) / std::abs(lam)
                                  : std::numeric_limits<double>::infinity();

    nlohmann::json doc = {{"rate", rep.rate},
                          {"rate_rawtime", rep.rate_rawtime},
                          {"t_start", rep.t_start},
                          {"t_end", rep.t_end},
                          {"fit_residual", rep.fit_residual},
                          {"lambda", {mode.lambda.real(), mode.lambda.imag()}},
                          {"rel_error", rel},
                          {"growth_tol", tol},
                          {"mode_residual", mode_residual},
                          {"flow", flow_manifest(cfg, uref.name, uref.sup_norm)}};
    write_text(out_path(cfg, "validate.json"), doc.dump(2) + "\n");

    if (rep.rate <= 0.0) {
        error_line("NoGrowth", "measured rate " + std::to_string(rep.rate) + " is not positive");
        return 6;
    }
    if (rel > tol) {
        error_line("GrowthMismatch", "relative error " + std::to_string(rel) + " exceeds tolerance");
        return 1;
    }
    return 0;
}

int cmd_nonlinear(const RunConfig& cfg) {
    if (cfg.mode_path.empty()) fail(Err::BadConfig, "nonlinear needs --mode");
    if (cfg.deltas.empty()) fail(Err::BadConfig, "delta list is empty");
    for (std::size_t i = 0; i + 1 < cfg.deltas.size(); ++i)
        if (!(cfg.deltas[i] > cfg.deltas[i + 1])) fail(Err::BadConfig, "delta list must decrease strictly");
    for (const double d : cfg.deltas)
        if (!(d > 0.0)) fail(Err::BadConfig, "deltas must be positive");

    const BlochMode mode = load_mode(cfg.mode_path);
    const VelocityProfile u = flow_profile(cfg);

    InstabilityOptions io;
    io.deltas = cfg.deltas;
    io.threshold_frac = cfg.threshold_frac;
    io.s = cfg.sobolev_s;
    io.horizon = cfg.nl_horizon;
    io.dt = cfg.dt;
    io.cell_truncation = cfg.cell_truncation;
    io.csv_dir = cfg.output_dir;
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) fail(Err::IoError, "cannot create output directory " + cfg.output_dir);

    const InstabilityReport rep = run_instability(u, mode, io);

    std::string body;
    char line[256];
    for (const auto& run : rep.runs) {
        std::snprintf(line, sizeof line, "delta=%.17g hit=%d t_delta=%.17g shadow_max_dev=%.17g\n",
                      run.delta, run.hit ? 1 : 0, run.t_delta, run.shadow_max_dev);
        body += line;
    }
    std::snprintf(line, sizeof line,
                  "slope=%.17g intercept=%.17g fit_residual=%.17g spread=%.17g threshold=%.17g "
                  "base_norm=%.17g lambda=%.17g\n",
                  rep.slope, rep.intercept, rep.fit_residual, rep.spread, rep.threshold, rep.base_norm,
                  rep.lambda);
    body += line;
    write_text(out_path(cfg, "instability.txt"), body);

    for (const auto& run : rep.runs)
        if (!run.hit) {
            error_line("HorizonExceeded",
                       "delta " + std::to_string(run.delta) + " never reached the threshold");
            return 7;
        }
    const double tol = config_tol(cfg, "affinity", 0.10);
    if (rep.fit_residual > tol * rep.spread) {
        error_line("AffinityViolated", "fit residual exceeds " + std::to_string(tol) + " of the spread");
        return 1;
    }
    return 0;
}

int cmd_check(const RunConfig& cfg) {
    int failures = 0;
    const auto check = [&](const char* label, bool ok) {
        if (ok) {
            std::printf("ok %s\n", label);
        } else {
            ++failures;
            error_line("CheckFailed", label);
        }
    };

    try {
        const VelocityProfile u = abc_flow(1.0, 1.0, 1.0, 2);
        const AlphaResult ar = alpha_tensor(u);
        const Mat3 closed = alpha_closed_sum(u);
        check("alpha_two_routes", (ar.alpha - closed).norm() <= 1e-12 * closed.norm());

        const VelocityProfile r = random_profile(4, 3.0, cfg.seed);
        const SpectralVectorField w1 = wedge(u.field, r.field, WedgePath::Direct);
        const SpectralVectorField w2 = wedge(u.field, r.field, WedgePath::Collocation);
        SpectralVectorField diff = w1;
        diff -= w2;
        check("wedge_two_paths", diff.max_abs_coef() <= 1e-12 * std::max(1.0, w1.max_abs_coef()));

        const std::string tmp = out_path(cfg, "check_roundtrip.field");
        save_field(tmp, r.field, true);
        const LoadedField back = load_field(tmp);
        bool same = back.field.truncation() == r.field.truncation();
        if (same)
            for (int c = 0; c < 3 && same; ++c) {
                const auto a = back.field.component(c);
                const auto b = r.field.component(c);
                for (std::size_t i = 0; i < a.size(); ++i)
                    if (a[i] != b[i]) {
                        same = false;
                        break;
                    }
            }
        std::filesystem::remove(tmp);
        check("field_io_roundtrip", same);

        const CVec3 e1{Cplx(1), Cplx(0), Cplx(0)};
        const SpectralVectorField direct = cell_solve(u, e1);
        const SpectralVectorField iter = solve_fluctuation(u, {0, 0, 0}, 0.0, Cplx(0.0), e1);
        SpectralVectorField d2 = direct;
        d2 -= iter;
        check("cell_solve_reduction", d2.max_abs_coef() == 0.0);

        const RationalSnap g = snap_rational(0.5 * (1.0 + std::sqrt(5.0)), 64);
        check("rational_snap", g.num == 89 && g.den == 55);

        MhdIntegrator mi(u, {4, 4, 4}, BoxSpec{}, 0.5, 1e-4);
        MhdState st = mi.zero_state();
        for (int i = 0; i < 5; ++i) mi.step(st);
        check("mhd_zero_equilibrium", st.u.l2_norm() == 0.0 && st.b.l2_norm() == 0.0);
    } catch (const Error& e) {
        ++failures;
        error_line(err_name(e.kind()), e.what());
    }

    return failures == 0 ? 0 : 1;
}

namespace {

void add_common(CLI::App* sub, RunConfig& cfg, std::vector<std::string>& tol_specs) {
    sub->add_option("--flow", cfg.flow, "abc:A,B,C | file:PATH | random")->capture_default_str();
    sub->add_option("--N", cfg.truncation, "spectral truncation")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    sub->add_option("--decay", cfg.decay, "random-flow spectral slope")->capture_default_str();
    sub->add_option("--output", cfg.output_dir, "output directory")->capture_default_str();
    sub->add_option("--threads", cfg.threads, "worker cap (results are cap-independent)")
        ->capture_default_str();
    sub->add_option("--tol", tol_specs, "named tolerance, e.g. growth=0.02")->take_all();
}

int resolve_threads(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (flag_value < 0) fail(Err::BadConfig, "thread cap must be positive");
    const char* env = std::getenv("ALPHA_DYNAMO_THREADS");
    if (!env || !*env) return 1;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (!end || *end != '\0' || v < 1) fail(Err::BadConfig, "ALPHA_DYNAMO_THREADS must be a positive integer");
    return int(v);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    RunConfig cfg;
    std::vector<std::string> tol_specs;

    CLI::App app{"alpha-effect dynamo pipeline"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from a config file (sections per subcommand)");

    CLI::App* alpha = app.add_subcommand("alpha", "compute the effective tensor of a flow");
    add_common(alpha, cfg, tol_specs);

    CLI::App* findxi = app.add_subcommand("find-xi", "select the optimal mean wavevector");
    add_common(findxi, cfg, tol_specs);
    findxi->add_option("--samples", cfg.direction_samples, "direction samples")->capture_default_str();
    findxi->add_option("--denominator-bound", cfg.denominator_bound, "rational snap bound, 0 disables")
        ->capture_default_str();

    CLI::App* branch = app.add_subcommand("branch", "continue lambda(eps) from the eps=0 root");
    add_common(branch, cfg, tol_specs);
    branch->add_option("--samples", cfg.direction_samples, "direction samples")->capture_default_str();
    branch->add_option("--denominator-bound", cfg.denominator_bound, "rational snap bound, 0 disables")
        ->capture_default_str();
    branch->add_option("--epsilon-max", cfg.epsilon_max, "end of the eps grid")->capture_default_str();
    branch->add_option("--steps", cfg.steps, "grid sample count")->capture_default_str();
    branch->add_option("--mode-eps", cfg.mode_eps, "write a mode file at each of these eps")->take_all();

    CLI::App* validate = app.add_subcommand("validate-dns", "integrate a stored mode and compare rates");
    add_common(validate, cfg, tol_specs);
    validate->add_option("--mode", cfg.mode_path, "mode file from branch")->required();
    validate->add_option("--horizon", cfg.horizon, "integration horizon, rescaled time")
        ->capture_default_str();
    validate->add_option("--dt", cfg.dt, "time step (0: from the advective bound)")->capture_default_str();

    CLI::App* nonlinear = app.add_subcommand("nonlinear", "run the delta-sweep instability experiment");
    add_common(nonlinear, cfg, tol_specs);
    nonlinear->add_option("--mode", cfg.mode_path, "mode file from branch")->required();
    nonlinear->add_option("--delta", cfg.deltas, "perturbation amplitudes, strictly decreasing")
        ->take_all();
    nonlinear->add_option("--threshold-frac", cfg.threshold_frac, "threshold as a fraction of ||U||_{H^s}")
        ->capture_default_str();
    nonlinear->add_option("--s", cfg.sobolev_s, "Sobolev exponent")->capture_default_str();
    nonlinear->add_option("--horizon", cfg.nl_horizon, "per-delta horizon, rescaled time")
        ->capture_default_str();
    nonlinear->add_option("--dt", cfg.dt, "time step (0: from the advective bound)")->capture_default_str();
    nonlinear->add_option("--cell-truncation", cfg.cell_truncation, "retained cell modes per axis")
        ->capture_default_str();

    CLI::App* check = app.add_subcommand("check", "run the fast invariant suite");
    add_common(check, cfg, tol_specs);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::printf("%s", app.help().c_str());
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::printf("%s", app.help("", CLI::AppFormatMode::All).c_str());
        return 0;
    } catch (const CLI::ParseError& e) {
        error_line("BadConfig", e.what());
        return 2;
    }

    try {
        for (const auto& spec : tol_specs) {
            const std::size_t eq = spec.find('=');
            if (eq == std::string::npos || eq == 0)
                fail(Err::BadConfig, "tolerance must look like name=value: " + spec);
            const double v = parse_numbers(spec.substr(eq + 1), 1, "tolerance value")[0];
            if (!(v > 0.0)) fail(Err::BadConfig, "tolerances must be positive: " + spec);
            cfg.tolerances[spec.substr(0, eq)] = v;
        }
        if (cfg.truncation < 1) fail(Err::BadConfig, "truncation must be at least 1");

        cfg.threads = resolve_threads(cfg.threads);
        const std::string tstr = std::to_string(cfg.threads);
        setenv("ALPHA_DYNAMO_THREADS", tstr.c_str(), 1);

        if (alpha->parsed()) return cmd_alpha(cfg);
        if (findxi->parsed()) return cmd_find_xi(cfg);
        if (branch->parsed()) return cmd_branch(cfg);
        if (validate->parsed()) return cmd_validate(cfg);
        if (nonlinear->parsed()) return cmd_nonlinear(cfg);
        if (check->parsed()) return cmd_check(cfg);
        fail(Err::BadConfig, "no subcommand given");
    } catch (const Error& e) {
        error_line(err_name(e.kind()), e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        error_line("Unexpected", e.what());
        return 1;
    }
    return 1;
}

}  // namespace dynamo
