#include "mfl/harness.hpp"

#include "mfl/error.hpp"
#include "mfl/io.hpp"
#include "mfl/parallel.hpp"
#include "mfl/rng.hpp"

#include <json.hpp>

#include <boost/version.hpp>

#include <Eigen/Core>

#include <chrono>
#include <fstream>
#include <sstream>

namespace mfl {

namespace {

namespace fs = std::filesystem;

class ArtifactWriter {
public:
    explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    void write(const std::string& name, const std::string& content) {
        const fs::path path = dir_ / name;
        written_.push_back(path);
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open " + path.string() + " for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!f) throw IoError("write failed for " + path.string());
        records.push_back({name, content.size(), fnv1a64(content)});
    }

    void rollback() noexcept {
        std::error_code ec;
        for (const auto& p : written_) fs::remove(p, ec);
    }

    std::vector<ArtifactRecord> records;

private:
    fs::path dir_;
    std::vector<fs::path> written_;
};

std::string text(double v) { return format_double(v); }
std::string text(bool b) { return b ? "true" : "false"; }
std::string text(std::size_t v) { return std::to_string(v); }

std::string text(const Vec& v) {
    std::string s = "[";
    for (Eigen::Index k = 0; k < v.size(); ++k) s += (k ? ", " : "") + format_double(v(k));
    return s + "]";
}

template <class T>
std::string csv_row(std::initializer_list<T> xs) {
    std::string s;
    for (const auto& x : xs) s += (s.empty() ? "" : ",") + x;
    return s + "\n";
}

struct Outcome {
    bool pass = true;
    Summary summary;
    void add(std::string key, std::string value) { summary.emplace_back(std::move(key), std::move(value)); }
};

MultiStartOptions multistart(const ExperimentConfig& cfg, std::uint64_t seed) {
    MultiStartOptions ms;
    ms.starts = cfg.starts;
    ms.seed = derive_seed(seed, {stream_tag::multistart});
    ms.threads = 1;
    return ms;
}

EstimateResult estimate_one(const ExperimentConfig& cfg, const DriftModel& model, const ParticlePaths& paths,
                            std::uint64_t seed) {
    if (cfg.method == EstimateMethod::linear_solve) return mle_linear(model, paths);
    return mle_numeric(model, paths, ParamVector(cfg.theta), multistart(cfg, seed));
}

std::size_t reference_or(const ExperimentConfig& cfg, std::size_t fallback) {
    return cfg.reference_atoms == 0 ? fallback : cfg.reference_atoms;
}

void add_fisher(Outcome& out, const std::string& prefix, const FisherMatrix& f) {
    out.add(prefix + "_det", text(f.determinant()));
    out.add(prefix + "_threshold", text(degeneracy_threshold(f.values)));
    out.add(prefix + "_min_eigenvalue", text(f.min_eigenvalue()));
    out.add(prefix + "_degenerate", text(f.degenerate()));
}

std::string matrix_csv(const Mat& m) {
    std::ostringstream os;
    write_matrix_csv(os, m);
    return os.str();
}

Outcome run_simulate(const ExperimentConfig& cfg, ArtifactWriter& w, unsigned threads) {
    const SimulationSetup s = cfg.setup(threads);
    std::vector<ParticlePaths> reps(s.replications);
    parallel_for(s.replications, threads, [&](std::size_t r) {
        reps[r] = simulate_particles(s.model, s.theta, s.particles, s.grid, s.init, replication_seed(s.seed, r));
    });
    std::ostringstream csv;
    write_paths_csv(csv, reps);
    w.write("paths.csv", csv.str());
    PathsMetadata meta = paths_metadata(reps.front(), reps.size());
    meta.seed = cfg.seed;
    w.write("paths.meta.json", paths_metadata_json(meta));

    Outcome out;
    out.add("N", text(s.particles));
    out.add("m", text(s.grid.steps()));
    out.add("T", text(s.grid.horizon()));
    out.add("dim", text(s.model.dim()));
    out.add("R", text(s.replications));
    const EmpiricalMeasure terminal = reps.front().measure(s.grid.steps());
    out.add("terminal_mean_rep0", text(terminal.mean()(0)));
    out.add("terminal_second_moment_rep0", text(terminal.abs_moment(2.0)));
    if (s.model.family() == Family::mckean_ou) {
        const OUMoments mom{s.theta, s.init.mean(), s.init.variance(), s.model.diffusion().scalar_sigma()};
        out.add("law_mean_T", text(ou_mean(mom, s.grid.horizon())));
        out.add("law_second_moment_T", text(ou_second_moment(mom, s.grid.horizon())));
    }
    return out;
}

Outcome run_estimate(const ExperimentConfig& cfg, ArtifactWriter& w, unsigned threads) {
    const SimulationSetup s = cfg.setup(threads);
    std::vector<EstimateResult> est(s.replications);
    parallel_for(s.replications, threads, [&](std::size_t r) {
        const std::uint64_t seed = replication_seed(s.seed, r);
        const ParticlePaths paths = simulate_particles(s.model, s.theta, s.particles, s.grid, s.init, seed);
        est[r] = estimate_one(cfg, s.model, paths, seed);
    });
    std::vector<std::size_t> ids(s.replications);
    for (std::size_t r = 0; r < ids.size(); ++r) ids[r] = r;
    std::ostringstream csv;
    write_estimates_csv(csv, ids, est);
    w.write("estimates.csv", csv.str());

    // Log-likelihood along each coordinate through the first estimate, across the box.
    const ParticlePaths first =
        simulate_particles(s.model, s.theta, s.particles, s.grid, s.init, replication_seed(s.seed, 0));
    const Vec center = est.front().theta_hat.vec();
    const ParamBox& box = s.model.box();
    std::vector<Vec> points;
    for (Eigen::Index k = 0; k < center.size(); ++k) {
        for (int a = 0; a <= 20; ++a) {
            Vec t = center;
            t(k) = box.lower()(k) + (box.upper()(k) - box.lower()(k)) * a / 20.0;
            if (validate_theta(s.model, ParamVector(t)).ok) points.push_back(t);
        }
    }
    std::vector<double> ll(points.size());
    parallel_for(points.size(), threads, [&](std::size_t q) {
        ll[q] = log_likelihood_discrete(s.model, ParamVector(points[q]), first).value;
    });
    if (!points.empty()) {
        std::ostringstream scan;
        write_likelihood_scan(scan, points, ll);
        w.write("likelihood_scan.csv", scan.str());
    }

    Outcome out;
    std::size_t converged = 0;
    Vec mean_hat = Vec::Zero(center.size());
    for (const auto& e : est) {
        converged += e.converged ? 1 : 0;
        mean_hat += e.theta_hat.vec() / static_cast<double>(est.size());
    }
    out.add("method", std::string(method_name(cfg.method)));
    out.add("R", text(s.replications));
    out.add("converged", text(converged));
    out.add("theta_true", text(s.theta.vec()));
    out.add("theta_hat_mean", text(mean_hat));
    out.add("theta_hat_rep0", text(center));
    out.pass = converged == est.size();
    return out;
}

Outcome run_fisher(const ExperimentConfig& cfg, ArtifactWriter& w, unsigned threads) {
    const SimulationSetup s = cfg.setup(threads);
    const FisherMatrix limit = limit_information(s, reference_or(cfg, 10000));
    w.write("fisher_limit.csv", matrix_csv(limit.values));
    Outcome out;
    add_fisher(out, "limit", limit);
    if (s.particles > 0) {
        const ParticlePaths paths =
            simulate_particles(s.model, s.theta, s.particles, s.grid, s.init, replication_seed(s.seed, 0));
        const FisherMatrix emp = empirical_fisher(s.model, s.theta, paths);
        w.write("fisher_empirical.csv", matrix_csv(emp.values));
        add_fisher(out, "empirical", emp);
        out.add("empirical_error_frobenius", text((emp.values - limit.values).norm()));
    }
    if (!cfg.levels.empty()) {
        const FisherConvergenceReport rep = fisher_convergence(s, cfg.levels, limit);
        std::string csv = "N,rep,error\n";
        for (std::size_t l = 0; l < rep.levels.size(); ++l) {
            for (std::size_t r = 0; r < rep.errors[l].size(); ++r) {
                csv += csv_row({text(rep.levels[l]), text(r), text(rep.errors[l][r])});
            }
            out.add("median_error_N" + text(rep.levels[l]), text(rep.median_error[l]));
        }
        w.write("fisher_convergence.csv", csv);
        bool decreasing = true;
        for (std::size_t l = 1; l < rep.median_error.size(); ++l) {
            decreasing = decreasing && rep.median_error[l] < rep.median_error[l - 1];
        }
        out.add("median_error_strictly_decreasing", text(decreasing));
        out.pass = out.pass && decreasing;
    }
    if (cfg.expect_degenerate) {
        out.add("expect_degenerate", text(*cfg.expect_degenerate));
        out.pass = out.pass && limit.degenerate() == *cfg.expect_degenerate;
    }
    return out;
}

Outcome run_lan(const ExperimentConfig& cfg, ArtifactWriter& w, unsigned threads) {
    const SimulationSetup s = cfg.setup(threads);
    const FisherMatrix info = limit_information(s, reference_or(cfg, 10000));
    const LanReport rep = lan_experiment(s, *cfg.u, info);
    std::string csv = "rep,zeta\n";
    for (std::size_t r = 0; r < rep.zeta.size(); ++r) csv += csv_row({text(r), text(rep.zeta[r])});
    w.write("lan.csv", csv);
    Outcome out;
    out.add("u", text(rep.u));
    out.add("R", text(s.replications));
    out.add("mean", text(rep.mean));
    out.add("variance", text(rep.variance));
    out.add("predicted_mean", text(rep.predicted_mean));
    out.add("predicted_variance", text(rep.predicted_variance));
    out.add("ks_statistic", text(rep.ks_statistic));
    out.add("ks_p_value", text(rep.ks_p_value));
    out.add("degenerate", text(rep.degenerate));
    out.add("mean_pass", text(rep.mean_pass));
    out.add("ks_pass", text(rep.ks_pass));
    out.pass = rep.pass();
    return out;
}

NormalityOptions normality_options(const ExperimentConfig& cfg) {
    NormalityOptions o;
    o.method = cfg.method;
    o.ks_level = cfg.ks_level;
    o.covariance_tolerance = cfg.covariance_tolerance;
    o.multistart.starts = cfg.starts;
    return o;
}

void add_normality(Outcome& out, const NormalityReport& rep, ArtifactWriter& w) {
    const auto p = rep.errors.cols();
    std::string csv = "rep";
    for (Eigen::Index k = 0; k < p; ++k) csv += ",err_" + std::to_string(k);
    csv += "\n";
    for (Eigen::Index r = 0; r < rep.errors.rows(); ++r) {
        csv += text(rep.replication[static_cast<std::size_t>(r)]);
        for (Eigen::Index k = 0; k < p; ++k) csv += "," + text(rep.errors(r, k));
        csv += "\n";
    }
    w.write("normality.csv", csv);
    std::ostringstream est;
    write_estimates_csv(est, rep.replication, rep.estimates);
    w.write("estimates.csv", est.str());
    out.add("successes", text(rep.estimates.size()));
    out.add("failures", text(rep.failures));
    for (std::size_t k = 0; k < rep.ks.size(); ++k) out.add("ks_p_value_" + std::to_string(k), text(rep.ks[k].p_value));
    out.add("covariance_error", text(rep.covariance_error));
    out.add("ks_pass", text(rep.ks_pass));
    out.add("covariance_pass", text(rep.covariance_pass));
}

Outcome run_normality(const ExperimentConfig& cfg, ArtifactWriter& w, unsigned threads) {
    const SimulationSetup s = cfg.setup(threads);
    const FisherMatrix info = limit_information(s, reference_or(cfg, 10000));
    const NormalityReport rep = normality_experiment(s, info, normality_options(cfg));
    Outcome out;
    out.add("method", std::string(method_name(cfg.method)));
    out.add("R", text(s.replications));
    add_normality(out, rep, w);
    out.pass = rep.pass();
    return out;
}

Outcome run_risk(const ExperimentConfig& cfg, ArtifactWriter& w, unsigned threads) {
    const SimulationSetup s = cfg.setup(threads);
    const FisherMatrix info = limit_information(s, reference_or(cfg, 10000));
    const RiskReport rep = risk_experiment(s, info, cfg.loss, normality_options(cfg));
    std::string csv = "rep,loss\n";
    for (std::size_t k = 0; k < rep.losses.size(); ++k) {
        csv += csv_row({text(rep.normality.replication[k]), text(rep.losses[k])});
    }
    w.write("risk.csv", csv);
    Outcome out;
    out.add("loss", loss_name(cfg.loss));
    out.add("R", text(s.replications));
    out.add("empirical_risk", text(rep.empirical_risk));
    out.add("standard_error", text(rep.standard_error));
    out.add("gaussian_bound", text(rep.gaussian_bound));
    out.add("ratio", text(rep.ratio));
    out.add("band", "[" + text(cfg.risk_low) + ", " + text(cfg.risk_high) + "]");
    add_normality(out, rep.normality, w);
    out.pass = rep.ratio >= cfg.risk_low && rep.ratio <= cfg.risk_high;
    return out;
}

Outcome run_chaos(const ExperimentConfig& cfg, ArtifactWriter& w, unsigned threads) {
    SimulationSetup s = cfg.setup(threads);
    ChaosOptions opts;
    opts.levels = cfg.levels;
    opts.reference_atoms = cfg.reference_atoms;
    const RateReport rep = chaos_rate(s, opts);
    std::string csv = "N,rep,distance\n";
    Outcome out;
    for (std::size_t l = 0; l < rep.levels.size(); ++l) {
        for (std::size_t r = 0; r < rep.distances[l].size(); ++r) {
            csv += csv_row({text(rep.levels[l]), text(r), text(rep.distances[l][r])});
        }
        out.add("median_distance_N" + text(rep.levels[l]), text(rep.median_distance[l]));
    }
    w.write("chaos.csv", csv);
    out.add("reference", rep.exact_reference ? "exact_gaussian_quantiles"
                                             : (rep.coupling_bound ? "coupling_bound" : "reference_cloud"));
    out.add("reference_atoms", text(rep.exact_reference ? std::size_t{0} : rep.reference_atoms));
    out.add("slope", text(rep.fit.slope));
    out.add("intercept", text(rep.fit.intercept));
    out.add("band", "[" + text(cfg.slope_low) + ", " + text(cfg.slope_high) + "]");
    out.pass = rep.fit.slope < 0.0 && rep.fit.slope >= cfg.slope_low && rep.fit.slope <= cfg.slope_high;
    return out;
}

Outcome run_kl(const ExperimentConfig& cfg, ArtifactWriter& w, unsigned threads) {
    const SimulationSetup base = cfg.setup(threads);
    const std::vector<std::size_t> levels = cfg.levels.empty() ? std::vector<std::size_t>{cfg.particles} : cfg.levels;
    std::size_t max_n = 0;
    for (auto n : levels) max_n = std::max(max_n, n);
    const std::size_t atoms = reference_or(cfg, 10 * max_n);
    const MeasureFlow flow = reference_flow(base.model, base.theta, atoms, base.grid, base.init,
                                            derive_seed(base.seed, {stream_tag::reference}), 1);
    std::string csv = "N,rep,value\n";
    Outcome out;
    out.add("reference_atoms", text(atoms));
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t l = 0; l < levels.size(); ++l) {
        SimulationSetup s = base;
        s.particles = levels[l];
        s.seed = derive_seed(base.seed, {stream_tag::sweep, l});
        const KlReport rep = kl_proxy(s, flow);
        for (std::size_t r = 0; r < rep.values.size(); ++r) csv += csv_row({text(levels[l]), text(r), text(rep.values[r])});
        out.add("estimate_N" + text(levels[l]), text(rep.estimate));
        out.add("standard_error_N" + text(levels[l]), text(rep.standard_error));
        lo = std::min(lo, rep.estimate);
        hi = std::max(hi, rep.estimate);
    }
    w.write("kl.csv", csv);
    const double ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    out.add("max_min_ratio", text(ratio));
    out.pass = ratio <= cfg.kl_ratio_max;
    return out;
}

Outcome run_nondegeneracy(const ExperimentConfig& cfg, ArtifactWriter& w, unsigned /*threads*/) {
    const DriftModel model = cfg.model();
    const EmpiricalMeasure sample(
        sample_initial(cfg.init, cfg.particles, model.dim(), derive_seed(cfg.seed, {stream_tag::initial})),
        model.dim());
    const NondegeneracyVerdict v = nondegeneracy_t0(model, model.box(), sample, cfg.nondegeneracy);
    std::string csv = "field,index,value\n";
    const auto dump = [&](const std::string& name, const Vec& x) {
        for (Eigen::Index k = 0; k < x.size(); ++k) csv += csv_row({name, std::to_string(k), text(x(k))});
    };
    dump("theta", v.theta);
    dump("theta_prime", v.theta_prime);
    dump("z", v.z);
    w.write("nondegeneracy.csv", csv);
    Outcome out;
    out.add("nondegenerate", text(v.nondegenerate));
    out.add("min_max_value", text(v.min_max_value));
    out.add("threshold", text(cfg.nondegeneracy.threshold));
    out.add("pairs_checked", text(v.pairs_checked));
    out.add("directions_checked", text(v.directions_checked));
    out.add("witness_theta", text(v.theta));
    out.add("witness_theta_prime", text(v.theta_prime));
    out.add("witness_z", text(v.z));
    if (cfg.expect_nondegenerate) {
        out.add("expect_nondegenerate", text(*cfg.expect_nondegenerate));
        out.pass = v.nondegenerate == *cfg.expect_nondegenerate;
    }
    return out;
}

Outcome run_identifiability(const ExperimentConfig& cfg, ArtifactWriter& w, unsigned /*threads*/) {
    const Vec& a = cfg.theta;
    const Vec& b = *cfg.theta_prime;
    std::vector<double> xi(cfg.xi_points);
    std::string csv = "xi,h_theta,h_theta_prime,abs_diff\n";
    for (std::size_t k = 0; k < xi.size(); ++k) {
        xi[k] = cfg.xi_max * static_cast<double>(k) / static_cast<double>(xi.size() - 1);
        const double ha = double_layer_fourier_factor(a, cfg.dim, xi[k]);
        const double hb = double_layer_fourier_factor(b, cfg.dim, xi[k]);
        csv += csv_row({text(xi[k]), text(ha), text(hb), text(std::abs(xi[k]) * std::abs(ha - hb))});
    }
    w.write("fourier.csv", csv);
    const double gap = identifiability_fourier_check(a, b, cfg.dim, xi);
    const bool distinct = a != b;
    Outcome out;
    out.add("max_gap", text(gap));
    out.add("tolerance", text(cfg.identifiability_tolerance));
    out.add("parameters_distinct", text(distinct));
    out.add("separated", text(gap > cfg.identifiability_tolerance));
    out.pass = (gap > cfg.identifiability_tolerance) == distinct;
    return out;
}

std::map<std::string, std::string> versions() {
    return {
        {"mfl", std::string(kVersion)},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"boost", BOOST_LIB_VERSION},
        {"compiler", __VERSION__},
        {"schema", std::to_string(kSchemaVersion)},
    };
}

}  // namespace

std::string format_summary(const Summary& summary) {
    std::string s;
    for (const auto& [k, v] : summary) s += k + ": " + v + "\n";
    return s;
}

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = kind;
    j["config_hash"] = hex64(config_hash);
    nlohmann::ordered_json arts = nlohmann::ordered_json::array();
    for (const auto& a : artifacts) arts.push_back({{"file", a.file}, {"bytes", a.bytes}, {"fnv1a64", hex64(a.hash)}});
    j["artifacts"] = arts;
    j["versions"] = versions;
    j["wall_clock_seconds"] = wall_clock_seconds;
    j["pass"] = pass;
    nlohmann::ordered_json sum = nlohmann::ordered_json::object();
    for (const auto& [k, v] : summary) sum[k] = v;
    j["summary"] = sum;
    return j.dump(2) + "\n";
}

RunManifest run(const ExperimentConfig& cfg, const fs::path& out_dir, unsigned threads) {
    const auto start = std::chrono::steady_clock::now();
    ArtifactWriter w(out_dir);
    RunManifest m;
    m.kind = std::string(kind_name(cfg.kind));
    m.config_hash = cfg.hash();
    m.versions = versions();
    try {
        w.write("config.txt", cfg.canonical());
        Outcome out;
        switch (cfg.kind) {
            case ExperimentKind::simulate: out = run_simulate(cfg, w, threads); break;
            case ExperimentKind::estimate: out = run_estimate(cfg, w, threads); break;
            case ExperimentKind::fisher: out = run_fisher(cfg, w, threads); break;
            case ExperimentKind::lan: out = run_lan(cfg, w, threads); break;
            case ExperimentKind::normality: out = run_normality(cfg, w, threads); break;
            case ExperimentKind::risk: out = run_risk(cfg, w, threads); break;
            case ExperimentKind::chaos_rate: out = run_chaos(cfg, w, threads); break;
            case ExperimentKind::kl_proxy: out = run_kl(cfg, w, threads); break;
            case ExperimentKind::nondegeneracy: out = run_nondegeneracy(cfg, w, threads); break;
            case ExperimentKind::identifiability: out = run_identifiability(cfg, w, threads); break;
        }
        Summary head{{"kind", m.kind}, {"model", std::string(family_name(cfg.family))},
                     {"config_hash", hex64(m.config_hash)}, {"seed", std::to_string(cfg.seed)}};
        head.insert(head.end(), out.summary.begin(), out.summary.end());
        head.emplace_back("pass", text(out.pass));
        m.summary = std::move(head);
        m.pass = out.pass;
        w.write("summary.txt", format_summary(m.summary));
    } catch (const Error& e) {
        w.rollback();
        throw Error(e.code(), "experiment '" + m.kind + "' failed: " + e.what());
    } catch (...) {
        w.rollback();
        throw;
    }
    m.artifacts = w.records;
    m.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    try {
        w.write("manifest.json", m.to_json());
    } catch (...) {
        w.rollback();
        throw;
    }
    return m;
}

SuiteResult verify(std::string_view suite, const fs::path& out_dir, unsigned threads,
                   std::optional<std::uint64_t> seed) {
    const auto entries = suite_entries(suite);
    SuiteResult result;
    result.suite = std::string(suite);
    result.pass = true;
    std::string report;
    for (const auto& e : entries) {
        ConfigOverrides ov;
        if (seed) ov.emplace_back("seed", std::to_string(*seed));
        const ExperimentConfig cfg = parse_config_or_throw(e.config_text, ov);
        RunManifest m;
        try {
            m = run(cfg, out_dir / e.name, threads);
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& err) {
            m.kind = std::string(kind_name(cfg.kind));
            m.config_hash = cfg.hash();
            m.pass = false;
            m.summary = {{"error", err.what()}};
        }
        report += e.name + ": " + (m.pass ? "pass" : "fail") + "\n";
        result.pass = result.pass && m.pass;
        result.runs.emplace_back(e.name, std::move(m));
    }
    report += std::string("suite_pass: ") + (result.pass ? "true" : "false") + "\n";
    fs::create_directories(out_dir);
    std::ofstream(out_dir / "suite_summary.txt", std::ios::binary) << report;
    return result;
}

}  // namespace mfl
