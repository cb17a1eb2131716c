#include "mfl/error.hpp"
#include "mfl/harness.hpp"

namespace mfl {

namespace {

// Shared McKean-OU settings: theta* = (-1, 1, 0.5) started away from the
// stationary mean so the information matrix is nondegenerate.
#define MFL_OU_BASE         \
    "model = mckean_ou\n"   \
    "theta = [-1, 1, 0.5]\n" \
    "init = gaussian\n"     \
    "init_mean = 3\n"       \
    "init_var = 0.5\n"      \
    "T = 1\n"

const std::vector<SuiteEntry>& smoke() {
    static const std::vector<SuiteEntry> entries = {
        {"simulate_ou", "kind = simulate\nmodel = mckean_ou\ntheta = [-1, 1, 0.5]\ninit_mean = 1\ninit_var = 0.5\n"
                        "N = 100\nT = 1\nm = 100\nR = 2\nseed = 42\n"},
        {"estimate_ou", "kind = estimate\n" MFL_OU_BASE "N = 200\nm = 100\nR = 4\nseed = 7\n"},
        {"estimate_gen_linear",
         "kind = estimate\nmodel = gen_linear\nkernel_f = identity\nkernel_g = gaussian_bump\n"
         "theta = [-1, 0.5]\ninit_mean = 0.5\ninit_var = 1\nN = 200\nT = 1\nm = 100\nR = 2\n"
         "method = quasi_newton\nstarts = 4\nseed = 8\n"},
        {"fisher_ou", "kind = fisher\n" MFL_OU_BASE "N = 256\nm = 100\nexpect_degenerate = false\nseed = 9\n"},
        {"fisher_ou_stationary",
         "kind = fisher\nmodel = mckean_ou\ntheta = [-1, 1, 0.5]\ninit_mean = 1\ninit_var = 0.5\n"
         "N = 256\nT = 1\nm = 100\nexpect_degenerate = true\nseed = 10\n"},
        {"lan_ou", "kind = lan\n" MFL_OU_BASE "N = 200\nm = 100\nR = 40\nu = [1, 0, 0]\nseed = 11\n"},
        {"normality_ou", "kind = normality\n" MFL_OU_BASE "N = 200\nm = 100\nR = 40\ncov_tol = 0.6\nseed = 12\n"},
        {"risk_ou", "kind = risk\n" MFL_OU_BASE "N = 200\nm = 100\nR = 40\nloss = squared_norm\n"
                    "risk_low = 0.5\nrisk_high = 1.6\nseed = 13\n"},
        {"chaos_rate_ou", "kind = chaos-rate\n" MFL_OU_BASE "N_levels = [100, 400, 1600]\nm = 50\nR = 10\nseed = 14\n"},
        {"kl_proxy_ou", "kind = kl-proxy\nmodel = mckean_ou\ntheta = [-1, 0, 0.5]\ninit_mean = 3\ninit_var = 0.5\nT = 1\n"
                        "N_levels = [50, 100, 200]\nm = 50\nR = 10\nseed = 15\n"},
        {"nondegeneracy_gen_linear",
         "kind = nondegeneracy\nmodel = gen_linear\nkernel_f = identity\nkernel_g = gaussian_bump\n"
         "theta = [-1, 0.5]\ninit_mean = 0\ninit_var = 1\nN = 200\nexpect_nondegenerate = true\nseed = 16\n"},
        {"nondegeneracy_constant_features",
         "kind = nondegeneracy\nmodel = gen_linear\nkernel_f = one\nkernel_g = one\n"
         "theta = [-1, 0.5]\ninit_mean = 0\ninit_var = 1\nN = 200\nexpect_nondegenerate = false\nseed = 17\n"},
        {"identifiability_double_layer",
         "kind = identifiability\nmodel = double_layer\ndim = 1\ntheta = [1, 0.5, 0.5, 2]\n"
         "theta_prime = [1.2, 0.5, 0.5, 2]\nseed = 18\n"},
    };
    return entries;
}

const std::vector<SuiteEntry>& acceptance() {
    static const std::vector<SuiteEntry> entries = {
        {"normality_ou", "kind = normality\n" MFL_OU_BASE "N = 2000\nm = 400\nR = 200\nseed = 101\n"},
        {"lan_ou", "kind = lan\n" MFL_OU_BASE "N = 1000\nm = 400\nR = 200\nu = [1, 0, 0]\nseed = 102\n"},
        {"risk_ou", "kind = risk\n" MFL_OU_BASE "N = 2000\nm = 400\nR = 200\nloss = squared_norm\nseed = 103\n"},
        {"fisher_convergence_ou",
         "kind = fisher\n" MFL_OU_BASE "N_levels = [64, 256, 1024, 4096]\nm = 400\nR = 20\nseed = 104\n"},
        {"chaos_rate_ou", "kind = chaos-rate\n" MFL_OU_BASE "N_levels = [100, 1000, 10000]\nm = 200\nR = 20\nseed = 105\n"},
        {"kl_proxy_ou", "kind = kl-proxy\nmodel = mckean_ou\ntheta = [-1, 0, 0.5]\ninit_mean = 3\ninit_var = 0.5\nT = 1\n"
                        "N_levels = [100, 1000, 10000]\nN_ref = 100000\nm = 100\nR = 20\nseed = 106\n"},
        {"fisher_ou_stationary",
         "kind = fisher\nmodel = mckean_ou\ntheta = [-1, 1, 0.5]\ninit_mean = 1\ninit_var = 0.5\n"
         "T = 1\nm = 800\nexpect_degenerate = true\nseed = 107\n"},
        {"nondegeneracy_constant_features",
         "kind = nondegeneracy\nmodel = gen_linear\nkernel_f = one\nkernel_g = one\n"
         "theta = [-1, 0.5]\ninit_mean = 0\ninit_var = 1\nN = 1000\nexpect_nondegenerate = false\nseed = 108\n"},
    };
    return entries;
}

#undef MFL_OU_BASE

}  // namespace

std::vector<std::string> suite_names() { return {"smoke", "acceptance"}; }

std::vector<SuiteEntry> suite_entries(std::string_view suite) {
    if (suite == "smoke") return smoke();
    if (suite == "acceptance") return acceptance();
    throw ConfigError("unknown suite '" + std::string(suite) + "' (known: smoke, acceptance)");
}

}  // namespace mfl
