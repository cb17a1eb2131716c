#include "mfl/mfl.h"

#include "mfl/config.hpp"
#include "mfl/error.hpp"
#include "mfl/harness.hpp"
#include "mfl/io.hpp"
#include "mfl/parallel.hpp"

#include <fstream>
#include <new>
#include <optional>
#include <sstream>
#include <string>

struct mfl_model {
    mfl::DriftModel model;
};

struct mfl_paths {
    mfl::ParticlePaths paths;
};

struct mfl_config {
    mfl::ExperimentConfig config;
    std::string kind;
};

struct mfl_result {
    bool pass = false;
    std::string summary;
    std::string manifest;
};

namespace {

thread_local std::string g_last_error;

mfl_status set_error(mfl_status s, const std::string& msg) {
    g_last_error = msg;
    return s;
}

mfl_status to_status(mfl::ErrorCode c) {
    switch (c) {
        case mfl::ErrorCode::domain: return MFL_ERR_DOMAIN;
        case mfl::ErrorCode::shape: return MFL_ERR_SHAPE;
        case mfl::ErrorCode::numeric: return MFL_ERR_NUMERIC;
        case mfl::ErrorCode::blow_up: return MFL_ERR_BLOW_UP;
        case mfl::ErrorCode::singular: return MFL_ERR_SINGULAR;
        case mfl::ErrorCode::unsupported: return MFL_ERR_UNSUPPORTED;
        case mfl::ErrorCode::config: return MFL_ERR_CONFIG;
        case mfl::ErrorCode::io: return MFL_ERR_IO;
        case mfl::ErrorCode::non_convergence: return MFL_ERR_NON_CONVERGENCE;
    }
    return MFL_ERR_INTERNAL;
}

// Runs fn, translating exceptions into status codes.
template <class Fn>
mfl_status guarded(Fn&& fn) {
    g_last_error.clear();
    try {
        fn();
        return MFL_OK;
    } catch (const mfl::Error& e) {
        return set_error(to_status(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return set_error(MFL_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(MFL_ERR_INTERNAL, e.what());
    } catch (...) {
        return set_error(MFL_ERR_INTERNAL, "unknown error");
    }
}

void require(bool ok, const char* what) {
    if (!ok) throw mfl::Error(mfl::ErrorCode::domain, what);
}

mfl::ParamVector theta_of(const double* theta, std::size_t p) {
    require(theta != nullptr, "theta is NULL");
    return mfl::ParamVector(Eigen::Map<const mfl::Vec>(theta, static_cast<Eigen::Index>(p)));
}

mfl::ConfigOverrides overrides_of(const char* const* keys, const char* const* values, std::size_t n) {
    mfl::ConfigOverrides ov;
    for (std::size_t k = 0; k < n; ++k) {
        require(keys && values && keys[k] && values[k], "override key/value is NULL");
        ov.emplace_back(keys[k], values[k]);
    }
    return ov;
}

mfl_status parse_into(const std::string& text, const char* const* keys, const char* const* values, std::size_t n,
                      mfl_config** out) {
    return guarded([&] {
        require(out != nullptr, "out is NULL");
        *out = nullptr;
        const mfl::ConfigParseResult r = mfl::parse_config(text, overrides_of(keys, values, n));
        if (!r.ok()) {
            std::string msg;
            for (const auto& e : r.errors) msg += (msg.empty() ? "" : "\n") + e;
            throw mfl::ConfigError(msg);
        }
        auto* c = new mfl_config{*r.config, std::string(mfl::kind_name(r.config->kind))};
        *out = c;
    });
}

}  // namespace

extern "C" {

const char* mfl_version(void) { return mfl::kVersion.data(); }

const char* mfl_last_error(void) { return g_last_error.c_str(); }

const char* mfl_status_name(mfl_status status) {
    switch (status) {
        case MFL_OK: return "ok";
        case MFL_ERR_DOMAIN: return "domain";
        case MFL_ERR_SHAPE: return "shape";
        case MFL_ERR_NUMERIC: return "numeric";
        case MFL_ERR_BLOW_UP: return "blow_up";
        case MFL_ERR_SINGULAR: return "singular";
        case MFL_ERR_UNSUPPORTED: return "unsupported";
        case MFL_ERR_CONFIG: return "config";
        case MFL_ERR_IO: return "io";
        case MFL_ERR_NON_CONVERGENCE: return "non_convergence";
        case MFL_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case MFL_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

mfl_status mfl_model_create(const char* family, size_t dim, const double* lower, const double* upper, size_t p,
                            const char* kernel_f, const char* kernel_g, double sigma, mfl_model** out) {
    if (!family || !out) return set_error(MFL_ERR_INVALID_ARGUMENT, "family and out must be non-NULL");
    *out = nullptr;
    return guarded([&] {
        const mfl::Family fam = mfl::family_from_name(family);
        std::optional<mfl::ParamBox> box;
        if (lower == nullptr && upper == nullptr) {
            box = mfl::default_box(fam);
        } else {
            require(lower && upper, "lower and upper must both be given or both NULL");
            box.emplace(Eigen::Map<const mfl::Vec>(lower, static_cast<Eigen::Index>(p)),
                        Eigen::Map<const mfl::Vec>(upper, static_cast<Eigen::Index>(p)));
        }
        auto kernel = [](const char* name) -> const mfl::Kernel& {
            if (!name) throw mfl::ConfigError("kernel name is NULL");
            return mfl::kernel_by_name(name);
        };
        switch (fam) {
            case mfl::Family::mckean_ou: *out = new mfl_model{mfl::DriftModel::mckean_ou(*box, sigma)}; break;
            case mfl::Family::gen_linear:
                *out = new mfl_model{mfl::DriftModel::gen_linear(kernel(kernel_f), kernel(kernel_g), *box, sigma)};
                break;
            case mfl::Family::double_layer:
                *out = new mfl_model{mfl::DriftModel::double_layer(dim == 0 ? 1 : dim, *box, sigma)};
                break;
            case mfl::Family::nonlinear_f:
                *out = new mfl_model{mfl::DriftModel::nonlinear_f(kernel(kernel_f), kernel(kernel_g), *box, sigma)};
                break;
        }
    });
}

void mfl_model_destroy(mfl_model* model) { delete model; }

mfl_status mfl_model_num_params(const mfl_model* model, size_t* p) {
    if (!model || !p) return set_error(MFL_ERR_INVALID_ARGUMENT, "NULL argument");
    *p = model->model.num_params();
    return MFL_OK;
}

mfl_status mfl_model_drift(const mfl_model* model, const double* theta, size_t p, double t, const double* x,
                           const double* atoms, size_t n_atoms, double* out) {
    if (!model || !x || !atoms || !out) return set_error(MFL_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] {
        const std::size_t d = model->model.dim();
        const mfl::EmpiricalMeasure nu(std::vector<double>(atoms, atoms + n_atoms * d), d);
        const mfl::Vec b = mfl::drift_eval(model->model, theta_of(theta, p), t, {x, d}, nu);
        for (std::size_t k = 0; k < d; ++k) out[k] = b(static_cast<Eigen::Index>(k));
    });
}

mfl_status mfl_simulate(const mfl_model* model, const double* theta, size_t p, size_t particles, double horizon,
                        size_t steps, mfl_init_kind init, double init_a, double init_b, uint64_t seed,
                        mfl_paths** out) {
    if (!model || !out) return set_error(MFL_ERR_INVALID_ARGUMENT, "NULL argument");
    *out = nullptr;
    return guarded([&] {
        mfl::InitialLaw law = mfl::InitialLaw::point(init_a);
        if (init == MFL_INIT_GAUSSIAN) law = mfl::InitialLaw::gaussian(init_a, init_b);
        if (init == MFL_INIT_UNIFORM) law = mfl::InitialLaw::uniform(init_a, init_b);
        *out = new mfl_paths{mfl::simulate_particles(model->model, theta_of(theta, p), particles,
                                                     mfl::TimeGrid(horizon, steps), law, seed)};
    });
}

void mfl_paths_destroy(mfl_paths* paths) { delete paths; }

mfl_status mfl_paths_shape(const mfl_paths* paths, size_t* particles, size_t* steps, size_t* dim) {
    if (!paths) return set_error(MFL_ERR_INVALID_ARGUMENT, "NULL argument");
    if (particles) *particles = paths->paths.particles();
    if (steps) *steps = paths->paths.steps();
    if (dim) *dim = paths->paths.dim();
    return MFL_OK;
}

mfl_status mfl_paths_data(const mfl_paths* paths, const double** data, size_t* length) {
    if (!paths || !data) return set_error(MFL_ERR_INVALID_ARGUMENT, "NULL argument");
    *data = paths->paths.data().data();
    if (length) *length = paths->paths.data().size();
    return MFL_OK;
}

mfl_status mfl_paths_write(const mfl_paths* paths, const char* csv_path, const char* meta_path) {
    if (!paths || !csv_path || !meta_path) return set_error(MFL_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] {
        std::ofstream csv(csv_path, std::ios::binary);
        std::ofstream meta(meta_path, std::ios::binary);
        if (!csv || !meta) throw mfl::IoError("cannot open output files");
        mfl::write_paths_csv(csv, {&paths->paths, 1});
        meta << mfl::paths_metadata_json(mfl::paths_metadata(paths->paths, 1));
        if (!csv || !meta) throw mfl::IoError("write failed");
    });
}

mfl_status mfl_paths_read(const char* csv_path, const char* meta_path, mfl_paths** out) {
    if (!csv_path || !meta_path || !out) return set_error(MFL_ERR_INVALID_ARGUMENT, "NULL argument");
    *out = nullptr;
    return guarded([&] {
        std::ifstream meta(meta_path, std::ios::binary);
        std::ifstream csv(csv_path, std::ios::binary);
        if (!csv || !meta) throw mfl::IoError("cannot open input files");
        std::stringstream ms;
        ms << meta.rdbuf();
        const mfl::PathsMetadata m = mfl::parse_paths_metadata(ms.str());
        auto reps = mfl::read_paths_csv(csv, m);
        if (reps.size() != 1) throw mfl::IoError("expected exactly one replication");
        *out = new mfl_paths{std::move(reps.front())};
    });
}

mfl_status mfl_log_likelihood(const mfl_model* model, const double* theta, size_t p, const mfl_paths* paths,
                              double* out) {
    if (!model || !paths || !out) return set_error(MFL_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] { *out = mfl::log_likelihood_discrete(model->model, theta_of(theta, p), paths->paths).value; });
}

mfl_status mfl_score(const mfl_model* model, const double* theta, size_t p, const mfl_paths* paths, double* out) {
    if (!model || !paths || !out) return set_error(MFL_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] {
        const mfl::Vec s = mfl::score_discrete(model->model, theta_of(theta, p), paths->paths);
        for (Eigen::Index k = 0; k < s.size(); ++k) out[k] = s(k);
    });
}

mfl_status mfl_empirical_fisher(const mfl_model* model, const double* theta, size_t p, const mfl_paths* paths,
                                double* out) {
    if (!model || !paths || !out) return set_error(MFL_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] {
        const mfl::FisherMatrix f = mfl::empirical_fisher(model->model, theta_of(theta, p), paths->paths);
        for (Eigen::Index a = 0; a < f.values.rows(); ++a) {
            for (Eigen::Index b = 0; b < f.values.cols(); ++b) out[a * f.values.cols() + b] = f.values(a, b);
        }
    });
}

mfl_status mfl_ou_limit_fisher(const double* theta3, double mean0, double var0, double sigma, double horizon,
                               size_t steps, double* out9) {
    if (!theta3 || !out9) return set_error(MFL_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] {
        const mfl::FisherMatrix f =
            mfl::ou_limit_fisher({theta_of(theta3, 3), mean0, var0, sigma}, mfl::TimeGrid(horizon, steps));
        for (Eigen::Index a = 0; a < 3; ++a) {
            for (Eigen::Index b = 0; b < 3; ++b) out9[a * 3 + b] = f.values(a, b);
        }
    });
}

mfl_status mfl_mle(const mfl_model* model, const mfl_paths* paths, const double* theta_init, size_t p,
                   mfl_method method, uint64_t seed, double* theta_hat, int* converged) {
    if (!model || !paths || !theta_hat) return set_error(MFL_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] {
        mfl::EstimateResult r;
        if (method == MFL_METHOD_LINEAR) {
            r = mfl::mle_linear(model->model, paths->paths);
        } else {
            mfl::MultiStartOptions ms;
            ms.seed = seed;
            r = mfl::mle_numeric(model->model, paths->paths, theta_of(theta_init, p), ms);
        }
        for (std::size_t k = 0; k < r.theta_hat.size(); ++k) theta_hat[k] = r.theta_hat[k];
        if (converged) *converged = r.converged ? 1 : 0;
    });
}

mfl_status mfl_config_parse(const char* text, const char* const* keys, const char* const* values, size_t n,
                            mfl_config** out) {
    if (!text || !out) return set_error(MFL_ERR_INVALID_ARGUMENT, "NULL argument");
    return parse_into(text, keys, values, n, out);
}

mfl_status mfl_config_parse_file(const char* path, const char* const* keys, const char* const* values, size_t n,
                                 mfl_config** out) {
    if (!path || !out) return set_error(MFL_ERR_INVALID_ARGUMENT, "NULL argument");
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        *out = nullptr;
        return set_error(MFL_ERR_CONFIG, std::string("cannot read config file '") + path + "'");
    }
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_into(ss.str(), keys, values, n, out);
}

void mfl_config_destroy(mfl_config* config) { delete config; }

mfl_status mfl_config_hash(const mfl_config* config, uint64_t* hash) {
    if (!config || !hash) return set_error(MFL_ERR_INVALID_ARGUMENT, "NULL argument");
    *hash = config->config.hash();
    return MFL_OK;
}

const char* mfl_config_kind(const mfl_config* config) { return config ? config->kind.c_str() : ""; }

const char* mfl_config_out(const mfl_config* config) { return config ? config->config.out.c_str() : ""; }

mfl_status mfl_run(const mfl_config* config, const char* out_dir, unsigned threads, mfl_result** out) {
    if (!config || !out) return set_error(MFL_ERR_INVALID_ARGUMENT, "NULL argument");
    *out = nullptr;
    return guarded([&] {
        const std::string dir = out_dir ? out_dir : config->config.out;
        const mfl::RunManifest m = mfl::run(config->config, dir, mfl::resolve_threads(threads));
        *out = new mfl_result{m.pass, mfl::format_summary(m.summary), m.to_json()};
    });
}

mfl_status mfl_verify(const char* suite, const char* out_dir, unsigned threads, const uint64_t* seed,
                      mfl_result** out) {
    if (!suite || !out_dir || !out) return set_error(MFL_ERR_INVALID_ARGUMENT, "NULL argument");
    *out = nullptr;
    return guarded([&] {
        std::optional<std::uint64_t> s;
        if (seed) s = *seed;
        const mfl::SuiteResult r = mfl::verify(suite, out_dir, mfl::resolve_threads(threads), s);
        std::string summary;
        std::string manifest;
        for (const auto& [name, m] : r.runs) {
            summary += name + ": " + (m.pass ? "pass" : "fail") + "\n";
            for (const auto& [k, v] : m.summary) {
                if (k == "error") summary += "  error: " + v + "\n";
            }
        }
        summary += std::string("suite_pass: ") + (r.pass ? "true" : "false") + "\n";
        *out = new mfl_result{r.pass, summary, manifest};
    });
}

void mfl_result_destroy(mfl_result* result) { delete result; }

int mfl_result_pass(const mfl_result* result) { return result && result->pass ? 1 : 0; }

const char* mfl_result_summary(const mfl_result* result) { return result ? result->summary.c_str() : ""; }

const char* mfl_result_manifest(const mfl_result* result) { return result ? result->manifest.c_str() : ""; }

}  // extern "C"
