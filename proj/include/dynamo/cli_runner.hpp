#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dynamo/errors.hpp"
#include "dynamo/fourier_field.hpp"

namespace dynamo {

// Everything a subcommand needs, filled from flags (a config file may seed
// them; explicit flags win).
struct RunConfig {
    std::string flow = "abc:1,1,1";  // abc:A,B,C | file:PATH | random
    int truncation = 8;
    double epsilon_max = 0.2;
    int steps = 20;
    std::int64_t denominator_bound = 64;
    std::uint64_t seed = 1;
    double decay = 4.0;  // random-flow spectral slope
    std::map<std::string, double> tolerances;
    std::string output_dir = ".";
    int threads = 0;  // 0: take ALPHA_DYNAMO_THREADS, else 1

    int direction_samples = 2048;
    std::vector<double> mode_eps;  // branch: a mode file per entry
    std::string mode_path;         // validate-dns / nonlinear input
    double horizon = 0.2;          // validate-dns, rescaled time
    double dt = 0.0;               // 0: a safe fraction of the advective bound
    std::vector<double> deltas{1e-2, 1e-3, 1e-4};
    double threshold_frac = 0.1;
    double sobolev_s = 4.0;
    double nl_horizon = 60.0;
    int cell_truncation = 3;
};

// Named tolerance with a fallback: growth (0.02), affinity (0.10),
// newton (1e-10), cell (1e-12).
double config_tol(const RunConfig& cfg, const std::string& name, double fallback);

struct FlowSpec {
    std::string kind;    // abc | file | random
    std::string params;  // text after the colon
};

FlowSpec parse_flow_spec(const std::string& spec);

// The flow's raw coefficients, before profile validation; lets the zero flow
// through so commands that tolerate it can answer trivially.
SpectralVectorField flow_field(const RunConfig& cfg);
VelocityProfile flow_profile(const RunConfig& cfg);

int exit_code_for(const Error& e);

int cmd_alpha(const RunConfig& cfg);
int cmd_find_xi(const RunConfig& cfg);
int cmd_branch(const RunConfig& cfg);
int cmd_validate(const RunConfig& cfg);
int cmd_nonlinear(const RunConfig& cfg);
int cmd_check(const RunConfig& cfg);

// Full argument-vector entry point; never calls exit. Errors print one
// "error: <kind>: <message>" line on standard error.
int run_cli(int argc, const char* const* argv);

}  // namespace dynamo
