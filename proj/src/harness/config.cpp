#include "mfl/config.hpp"

#include "mfl/error.hpp"
#include "mfl/io.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

namespace mfl {

namespace {

constexpr std::pair<ExperimentKind, std::string_view> kKinds[] = {
    {ExperimentKind::simulate, "simulate"},
    {ExperimentKind::estimate, "estimate"},
    {ExperimentKind::fisher, "fisher"},
    {ExperimentKind::lan, "lan"},
    {ExperimentKind::normality, "normality"},
    {ExperimentKind::risk, "risk"},
    {ExperimentKind::chaos_rate, "chaos-rate"},
    {ExperimentKind::kl_proxy, "kl-proxy"},
    {ExperimentKind::nondegeneracy, "nondegeneracy"},
    {ExperimentKind::identifiability, "identifiability"},
};

const std::set<std::string, std::less<>> kKeys = {
    "kind",        "model",       "dim",          "sigma",          "lower",
    "upper",       "kernel_f",    "kernel_g",     "link",           "theta",
    "theta_prime", "u",           "loss",         "loss_c",         "N",
    "N_levels",    "N_ref",       "R",            "T",              "m",
    "seed",        "init",        "init_mean",    "init_var",       "init_a",
    "init_b",      "init_x",      "method",       "starts",         "out",
    "ks_level",    "cov_tol",     "risk_low",     "risk_high",      "slope_low",
    "slope_high",  "kl_ratio_max", "expect_degenerate", "expect_nondegenerate", "pairs",
    "directions",  "x_points",    "threshold",    "xi_max",         "xi_points",
    "identifiability_tol",
};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

struct Entry {
    std::string value;
    std::size_t line = 0;  // 0: command-line override
};

std::string where(const Entry& e) { return e.line == 0 ? "override" : "line " + std::to_string(e.line); }

/// Typed access with error collection; every failure is appended, nothing throws.
class Reader {
public:
    Reader(const std::map<std::string, Entry>& entries, std::vector<std::string>& errors)
        : entries_(entries), errors_(errors) {}

    [[nodiscard]] bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::optional<std::string> text(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        return it->second.value;
    }

    std::optional<std::string> required_text(const std::string& key, std::string_view why) const {
        auto v = text(key);
        if (!v) errors_.push_back("missing required key '" + key + "' (" + std::string(why) + ")");
        return v;
    }

    double real(const std::string& key, double fallback) const {
        const auto v = text(key);
        if (!v) return fallback;
        double x = 0.0;
        if (!parse_double(*v, x)) {
            bad(key, "expected a finite number");
            return fallback;
        }
        return x;
    }

    std::size_t count(const std::string& key, std::size_t fallback, std::size_t minimum) const {
        const auto v = text(key);
        if (!v) return fallback;
        std::uint64_t x = 0;
        if (!parse_u64(*v, x)) {
            bad(key, "expected a nonnegative integer");
            return fallback;
        }
        if (x < minimum) {
            bad(key, "must be at least " + std::to_string(minimum));
            return fallback;
        }
        return static_cast<std::size_t>(x);
    }

    std::uint64_t u64(const std::string& key, std::uint64_t fallback) const {
        const auto v = text(key);
        if (!v) return fallback;
        std::uint64_t x = 0;
        if (!parse_u64(*v, x)) {
            bad(key, "expected an unsigned 64-bit integer");
            return fallback;
        }
        return x;
    }

    std::optional<bool> flag(const std::string& key) const {
        const auto v = text(key);
        if (!v) return std::nullopt;
        if (*v == "true" || *v == "1" || *v == "yes") return true;
        if (*v == "false" || *v == "0" || *v == "no") return false;
        bad(key, "expected true or false");
        return std::nullopt;
    }

    std::optional<Vec> vector(const std::string& key) const {
        const auto v = text(key);
        if (!v) return std::nullopt;
        std::vector<double> xs;
        if (!parse_list(*v, xs) || xs.empty()) {
            bad(key, "expected a list of finite numbers like [1, 2.5]");
            return std::nullopt;
        }
        return Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
    }

    std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> fallback) const {
        const auto v = text(key);
        if (!v) return fallback;
        std::string body = trim(*v);
        if (body.size() >= 2 && body.front() == '[' && body.back() == ']') body = body.substr(1, body.size() - 2);
        std::vector<std::size_t> out;
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            std::uint64_t x = 0;
            if (!parse_u64(trim(item), x) || x == 0) {
                bad(key, "expected a list of positive integers like [100, 1000]");
                return fallback;
            }
            out.push_back(static_cast<std::size_t>(x));
        }
        if (out.empty()) bad(key, "list is empty");
        return out;
    }

    void bad(const std::string& key, const std::string& what) const {
        const auto it = entries_.find(key);
        const std::string at = it == entries_.end() ? "" : " (" + where(it->second) + ")";
        errors_.push_back("key '" + key + "'" + at + ": " + what);
    }

private:
    const std::map<std::string, Entry>& entries_;
    std::vector<std::string>& errors_;
};

bool needs_particles(ExperimentKind k) {
    return k != ExperimentKind::chaos_rate && k != ExperimentKind::identifiability;
}

}  // namespace

std::string_view kind_name(ExperimentKind kind) {
    for (const auto& [k, n] : kKinds) {
        if (k == kind) return n;
    }
    return "unknown";
}

std::optional<ExperimentKind> kind_from_name(std::string_view name) {
    for (const auto& [k, n] : kKinds) {
        if (n == name) return k;
    }
    return std::nullopt;
}

std::vector<std::string> kind_names() {
    std::vector<std::string> out;
    for (const auto& kv : kKinds) out.emplace_back(kv.second);
    return out;
}

ParamBox default_box(Family family) {
    switch (family) {
        case Family::mckean_ou:
            return {(Vec(3) << -3.0, -5.0, 0.0).finished(), (Vec(3) << -0.25, 5.0, 2.0).finished()};
        case Family::gen_linear: return {Vec::Constant(2, -5.0), Vec::Constant(2, 5.0)};
        case Family::double_layer:
            return {(Vec(4) << 0.1, 0.3, 0.1, 1.5).finished(), (Vec(4) << 5.0, 0.8, 5.0, 3.0).finished()};
        case Family::nonlinear_f: return {Vec::Constant(1, 0.05), Vec::Constant(1, 5.0)};
    }
    throw DomainError("unknown family");
}

std::vector<std::string> config_keys() { return {kKeys.begin(), kKeys.end()}; }

DriftModel ExperimentConfig::model() const {
    ParamBox box(lower, upper);
    switch (family) {
        case Family::mckean_ou: return DriftModel::mckean_ou(box, sigma);
        case Family::gen_linear:
            return DriftModel::gen_linear(kernel_by_name(kernel_f), kernel_by_name(kernel_g), box, sigma);
        case Family::double_layer: return DriftModel::double_layer(dim, box, sigma);
        case Family::nonlinear_f:
            return DriftModel::nonlinear_f(kernel_by_name(link), kernel_by_name(kernel_g), box, sigma);
    }
    throw DomainError("unknown family");
}

SimulationSetup ExperimentConfig::setup(unsigned threads) const {
    return {model(), ParamVector(theta), init, grid(), particles, replications, seed, threads};
}

std::string ExperimentConfig::canonical() const {
    std::string s;
    for (const auto& [k, v] : entries) {
        if (k == "out") continue;
        s += k;
        s += '=';
        s += v;
        s += '\n';
    }
    return s;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(canonical()); }

ConfigParseResult parse_config(std::string_view text, const ConfigOverrides& overrides) {
    ConfigParseResult result;
    auto& errors = result.errors;
    std::map<std::string, Entry> entries;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']' && line.find('=') == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(line_no) + ": expected 'key = value', got '" + line + "'");
            continue;
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            errors.push_back("line " + std::to_string(line_no) + ": empty key");
            continue;
        }
        if (!kKeys.count(key)) {
            errors.push_back("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
            continue;
        }
        if (const auto it = entries.find(key); it != entries.end()) {
            errors.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key +
                             "' (first defined on line " + std::to_string(it->second.line) + ")");
            continue;
        }
        entries.emplace(std::move(key), Entry{std::move(value), line_no});
    }
    for (const auto& [k, v] : overrides) {
        if (!kKeys.count(k)) {
            errors.push_back("override: unknown key '" + k + "'");
            continue;
        }
        entries[k] = Entry{trim(v), 0};
    }

    Reader rd(entries, errors);
    ExperimentConfig cfg;

    const auto kind_text = rd.required_text("kind", "experiment kind");
    bool kind_ok = false;
    if (kind_text) {
        if (const auto k = kind_from_name(*kind_text)) {
            cfg.kind = *k;
            kind_ok = true;
        } else {
            rd.bad("kind", "unknown experiment kind '" + *kind_text + "'");
        }
    }

    const auto model_text = rd.required_text("model", "model family");
    bool family_ok = false;
    if (model_text) {
        try {
            cfg.family = family_from_name(*model_text);
            family_ok = true;
        } catch (const ConfigError& e) {
            rd.bad("model", e.what());
        }
    }

    cfg.dim = rd.count("dim", 1, 1);
    if (family_ok && cfg.family != Family::double_layer && cfg.dim != 1) {
        rd.bad("dim", "only double_layer supports dim > 1");
    }
    cfg.sigma = rd.real("sigma", 1.0);
    if (!(cfg.sigma > 0.0)) rd.bad("sigma", "must be positive");

    if (family_ok) {
        const ParamBox def = default_box(cfg.family);
        cfg.lower = rd.vector("lower").value_or(def.lower());
        cfg.upper = rd.vector("upper").value_or(def.upper());
        const auto p = static_cast<Eigen::Index>(family_num_params(cfg.family));
        if (cfg.lower.size() != p || cfg.upper.size() != p) {
            errors.push_back("box: lower and upper need " + std::to_string(p) + " entries for " +
                             std::string(family_name(cfg.family)));
        }
    }

    auto kernel = [&](const std::string& key, bool needed, std::string& slot) {
        const auto v = rd.text(key);
        if (!v) {
            if (needed) errors.push_back("missing required key '" + key + "' for model " + *model_text);
            return;
        }
        try {
            slot = std::string(kernel_by_name(*v).name);
        } catch (const ConfigError& e) {
            std::string names;
            for (const auto& n : kernel_names()) names += (names.empty() ? "" : ", ") + n;
            rd.bad(key, std::string(e.what()) + "; known kernels: " + names);
        }
    };
    if (family_ok) {
        kernel("kernel_f", cfg.family == Family::gen_linear, cfg.kernel_f);
        kernel("kernel_g", cfg.family == Family::gen_linear || cfg.family == Family::nonlinear_f, cfg.kernel_g);
        kernel("link", cfg.family == Family::nonlinear_f, cfg.link);
    }

    if (const auto t = rd.vector("theta")) {
        cfg.theta = *t;
    } else if (!rd.has("theta")) {
        errors.push_back("missing required key 'theta'");
    }
    cfg.theta_prime = rd.vector("theta_prime");
    cfg.u = rd.vector("u");

    cfg.horizon = rd.real("T", 1.0);
    if (!(cfg.horizon > 0.0)) rd.bad("T", "must be positive");
    cfg.steps = rd.count("m", 100, 1);
    cfg.replications = rd.count("R", 1, 1);
    cfg.seed = rd.u64("seed", 0);
    cfg.out = rd.text("out").value_or("out");
    cfg.reference_atoms = rd.count("N_ref", 0, 0);
    cfg.starts = rd.count("starts", 8, 1);

    if (kind_ok) {
        const ExperimentKind k = cfg.kind;
        if (k == ExperimentKind::chaos_rate) {
            cfg.levels = rd.counts("N_levels", {100, 1000, 10000});
        } else if (k == ExperimentKind::kl_proxy || k == ExperimentKind::fisher) {
            cfg.levels = rd.counts("N_levels", {});
        }
        const bool has_levels = !cfg.levels.empty();
        if (k == ExperimentKind::nondegeneracy) {
            cfg.particles = rd.count("N", 1000, 1);
        } else if (k == ExperimentKind::fisher) {
            cfg.particles = rd.count("N", 0, 1);
        } else if (needs_particles(k)) {
            if (!rd.has("N") && !has_levels) {
                errors.push_back("missing required key 'N' for kind " + std::string(kind_name(k)));
            }
            cfg.particles = rd.count("N", 0, 1);
        }
        if (k == ExperimentKind::lan && !cfg.u && !rd.has("u")) errors.push_back("missing required key 'u' for kind lan");
        if (k == ExperimentKind::identifiability) {
            if (!cfg.theta_prime && !rd.has("theta_prime")) {
                errors.push_back("missing required key 'theta_prime' for kind identifiability");
            }
            if (family_ok && cfg.family != Family::double_layer) {
                rd.bad("model", "identifiability is defined for double_layer only");
            }
        }
    }

    // Initial law.
    const std::string init_kind = rd.text("init").value_or("gaussian");
    try {
        if (init_kind == "gaussian") {
            cfg.init = InitialLaw::gaussian(rd.real("init_mean", 0.0), rd.real("init_var", 1.0));
        } else if (init_kind == "uniform") {
            cfg.init = InitialLaw::uniform(rd.real("init_a", 0.0), rd.real("init_b", 1.0));
        } else if (init_kind == "point") {
            cfg.init = InitialLaw::point(rd.real("init_x", 0.0));
        } else {
            rd.bad("init", "expected gaussian, uniform or point");
        }
    } catch (const Error& e) {
        rd.bad("init", e.what());
    }

    // Estimation method: linear families default to the closed-form solve.
    if (const auto m = rd.text("method")) {
        if (*m == "linear_solve") {
            cfg.method = EstimateMethod::linear_solve;
            if (family_ok && (cfg.family == Family::double_layer || cfg.family == Family::nonlinear_f)) {
                rd.bad("method", "linear_solve needs a drift linear in theta (mckean_ou or gen_linear)");
            }
        } else if (*m == "quasi_newton") {
            cfg.method = EstimateMethod::quasi_newton;
        } else {
            rd.bad("method", "expected linear_solve or quasi_newton");
        }
    } else if (family_ok) {
        cfg.method = (cfg.family == Family::mckean_ou || cfg.family == Family::gen_linear)
                         ? EstimateMethod::linear_solve
                         : EstimateMethod::quasi_newton;
    }

    try {
        cfg.loss = loss_by_name(rd.text("loss").value_or("squared_norm"), rd.real("loss_c", 0.0));
    } catch (const ConfigError& e) {
        rd.bad("loss", e.what());
    }

    cfg.ks_level = rd.real("ks_level", 0.01);
    cfg.covariance_tolerance = rd.real("cov_tol", 0.25);
    cfg.risk_low = rd.real("risk_low", 0.8);
    cfg.risk_high = rd.real("risk_high", 1.3);
    cfg.slope_low = rd.real("slope_low", -0.7);
    cfg.slope_high = rd.real("slope_high", -0.2);
    cfg.kl_ratio_max = rd.real("kl_ratio_max", 3.0);
    cfg.expect_degenerate = rd.flag("expect_degenerate");
    cfg.expect_nondegenerate = rd.flag("expect_nondegenerate");
    cfg.nondegeneracy.random_pairs = rd.count("pairs", 32, 0);
    cfg.nondegeneracy.directions = rd.count("directions", 64, 1);
    cfg.nondegeneracy.x_points = rd.count("x_points", 101, 2);
    cfg.nondegeneracy.threshold = rd.real("threshold", 1e-10);
    cfg.nondegeneracy.seed = cfg.seed;
    cfg.xi_max = rd.real("xi_max", 10.0);
    cfg.xi_points = rd.count("xi_points", 201, 2);
    cfg.identifiability_tolerance = rd.real("identifiability_tol", 1e-8);

    // Model and parameter constraints, only once the pieces parsed.
    if (errors.empty()) {
        try {
            const DriftModel model = cfg.model();
            const auto check = [&](const std::string& key, const Vec& v) {
                const ValidationReport rep = validate_theta(model, ParamVector(v));
                for (const auto& msg : rep.violations) rd.bad(key, msg);
            };
            check("theta", cfg.theta);
            if (cfg.theta_prime) check("theta_prime", *cfg.theta_prime);
            if (cfg.u && static_cast<std::size_t>(cfg.u->size()) != model.num_params()) {
                rd.bad("u", "needs " + std::to_string(model.num_params()) + " entries");
            }
        } catch (const Error& e) {
            errors.push_back(std::string("model: ") + e.what());
        }
    }

    if (errors.empty()) {
        for (const auto& [k, e] : entries) cfg.entries.emplace(k, e.value);
        result.config = std::move(cfg);
    }
    return result;
}

ExperimentConfig parse_config_or_throw(std::string_view text, const ConfigOverrides& overrides) {
    auto r = parse_config(text, overrides);
    if (!r.ok()) {
        std::string msg;
        for (const auto& e : r.errors) msg += (msg.empty() ? "" : "\n") + e;
        throw ConfigError(msg);
    }
    return std::move(*r.config);
}

}  // namespace mfl
