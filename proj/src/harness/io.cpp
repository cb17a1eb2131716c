#include "mfl/io.hpp"

#include "mfl/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace mfl {

namespace {

std::string_view strip(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto c = line.find(',', pos);
        out.push_back(line.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos));
        if (c == std::string_view::npos) break;
        pos = c + 1;
    }
    return out;
}

double field_double(std::string_view s, std::size_t line) {
    double v = 0.0;
    if (!parse_double(s, v)) throw IoError("line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
    return v;
}

std::uint64_t field_u64(std::string_view s, std::size_t line) {
    std::uint64_t v = 0;
    if (!parse_u64(s, v)) throw IoError("line " + std::to_string(line) + ": bad integer '" + std::string(s) + "'");
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return {buf, r.ptr};
}

bool parse_double(std::string_view s, double& out) {
    s = strip(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size() || !std::isfinite(v)) return false;
    out = v;
    return true;
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
    s = strip(s);
    if (s.empty()) return false;
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) return false;
    out = v;
    return true;
}

bool parse_list(std::string_view s, std::vector<double>& out) {
    s = strip(s);
    if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
    out.clear();
    if (strip(s).empty()) return true;
    for (auto item : split_commas(s)) {
        double v = 0.0;
        if (!parse_double(item, v)) return false;
        out.push_back(v);
    }
    return true;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    const auto r = std::to_chars(buf, buf + 16, v, 16);
    std::string s(buf, r.ptr);
    return std::string(16 - s.size(), '0') + s;
}

void write_paths_csv(std::ostream& os, std::span<const ParticlePaths> reps) {
    if (reps.empty()) throw ShapeError("write_paths_csv: no replications");
    const std::size_t d = reps.front().dim();
    os << "rep,particle,step,time";
    for (std::size_t k = 0; k < d; ++k) os << ",x" << k;
    os << '\n';
    for (std::size_t r = 0; r < reps.size(); ++r) {
        const ParticlePaths& p = reps[r];
        if (p.dim() != d) throw ShapeError("write_paths_csv: replications differ in dimension");
        for (std::size_t i = 0; i < p.particles(); ++i) {
            for (std::size_t j = 0; j <= p.steps(); ++j) {
                os << r << ',' << i << ',' << j << ',' << format_double(p.grid().time(j));
                for (std::size_t k = 0; k < d; ++k) os << ',' << format_double(p.at(i, j, k));
                os << '\n';
            }
        }
    }
}

PathsMetadata paths_metadata(const ParticlePaths& paths, std::size_t replications) {
    PathsMetadata m;
    m.model = paths.model_tag;
    m.theta = paths.theta;
    m.particles = paths.particles();
    m.steps = paths.steps();
    m.dim = paths.dim();
    m.replications = replications;
    m.horizon = paths.grid().horizon();
    m.seed = paths.seed;
    return m;
}

std::string paths_metadata_json(const PathsMetadata& meta) {
    nlohmann::ordered_json j;
    j["schema_version"] = meta.schema_version;
    j["model"] = meta.model;
    nlohmann::ordered_json theta = nlohmann::ordered_json::array();
    for (double v : meta.theta) theta.push_back(format_double(v));
    j["theta"] = theta;
    j["N"] = meta.particles;
    j["m"] = meta.steps;
    j["T"] = format_double(meta.horizon);
    j["dim"] = meta.dim;
    j["replications"] = meta.replications;
    j["seed"] = std::to_string(meta.seed);
    return j.dump(2) + "\n";
}

PathsMetadata parse_paths_metadata(std::string_view json) {
    PathsMetadata m;
    try {
        const auto j = nlohmann::json::parse(json);
        m.schema_version = j.at("schema_version").get<int>();
        if (m.schema_version != kSchemaVersion) {
            throw IoError("unsupported paths schema version " + std::to_string(m.schema_version));
        }
        m.model = j.at("model").get<std::string>();
        for (const auto& v : j.at("theta")) m.theta.push_back(field_double(v.get<std::string>(), 0));
        m.particles = j.at("N").get<std::size_t>();
        m.steps = j.at("m").get<std::size_t>();
        m.horizon = field_double(j.at("T").get<std::string>(), 0);
        m.dim = j.at("dim").get<std::size_t>();
        m.replications = j.at("replications").get<std::size_t>();
        m.seed = field_u64(j.at("seed").get<std::string>(), 0);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("paths metadata: ") + e.what());
    }
    return m;
}

std::vector<ParticlePaths> read_paths_csv(std::istream& is, const PathsMetadata& meta) {
    const TimeGrid grid(meta.horizon, meta.steps);
    std::vector<ParticlePaths> reps;
    for (std::size_t r = 0; r < meta.replications; ++r) {
        reps.emplace_back(meta.particles, grid, meta.dim);
        reps.back().seed = meta.seed;
        reps.back().model_tag = meta.model;
        reps.back().theta = meta.theta;
    }
    std::string line;
    if (!std::getline(is, line)) throw IoError("paths CSV is empty");
    const std::size_t width = 4 + meta.dim;
    if (split_commas(strip(line)).size() != width) throw IoError("paths CSV header does not match dimension");
    std::size_t line_no = 1;
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (strip(line).empty()) continue;
        const auto f = split_commas(strip(line));
        if (f.size() != width) throw IoError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) + " fields");
        const auto r = field_u64(f[0], line_no);
        const auto i = field_u64(f[1], line_no);
        const auto j = field_u64(f[2], line_no);
        if (r >= meta.replications || i >= meta.particles || j > meta.steps) {
            throw IoError("line " + std::to_string(line_no) + ": index out of range");
        }
        for (std::size_t k = 0; k < meta.dim; ++k) reps[r].at(i, j, k) = field_double(f[4 + k], line_no);
        ++rows;
    }
    if (rows != meta.replications * meta.particles * (meta.steps + 1)) throw IoError("paths CSV has missing rows");
    return reps;
}

void write_matrix_csv(std::ostream& os, const Mat& m) {
    os << "row,col,value\n";
    for (Eigen::Index a = 0; a < m.rows(); ++a) {
        for (Eigen::Index b = 0; b < m.cols(); ++b) os << a << ',' << b << ',' << format_double(m(a, b)) << '\n';
    }
}

Mat read_matrix_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("matrix CSV is empty");
    std::vector<std::tuple<std::size_t, std::size_t, double>> cells;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (strip(line).empty()) continue;
        const auto f = split_commas(strip(line));
        if (f.size() != 3) throw IoError("line " + std::to_string(line_no) + ": expected row,col,value");
        const auto a = field_u64(f[0], line_no);
        const auto b = field_u64(f[1], line_no);
        cells.emplace_back(a, b, field_double(f[2], line_no));
        rows = std::max<std::size_t>(rows, a + 1);
        cols = std::max<std::size_t>(cols, b + 1);
    }
    Mat m = Mat::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (const auto& [a, b, v] : cells) m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
    return m;
}

void write_likelihood_scan(std::ostream& os, std::span<const Vec> thetas, std::span<const double> loglik) {
    if (thetas.size() != loglik.size() || thetas.empty()) throw ShapeError("likelihood scan: size mismatch");
    const auto p = thetas.front().size();
    for (Eigen::Index k = 0; k < p; ++k) os << "theta_" << k << ',';
    os << "loglik\n";
    for (std::size_t r = 0; r < thetas.size(); ++r) {
        for (Eigen::Index k = 0; k < p; ++k) os << format_double(thetas[r](k)) << ',';
        os << format_double(loglik[r]) << '\n';
    }
}

void write_estimates_csv(std::ostream& os, std::span<const std::size_t> reps, std::span<const EstimateResult> est) {
    if (reps.size() != est.size()) throw ShapeError("estimates: size mismatch");
    const std::size_t p = est.empty() ? 0 : est.front().theta_hat.size();
    os << "rep,method,converged,iters";
    for (std::size_t k = 0; k < p; ++k) os << ",theta_hat_" << k;
    os << ",score_norm,boundary_flags\n";
    for (std::size_t r = 0; r < est.size(); ++r) {
        const EstimateResult& e = est[r];
        os << reps[r] << ',' << method_name(e.method) << ',' << (e.converged ? 1 : 0) << ',' << e.iterations;
        for (std::size_t k = 0; k < p; ++k) os << ',' << format_double(e.theta_hat[k]);
        os << ',' << format_double(e.score_norm) << ',';
        for (bool b : e.boundary_active) os << (b ? '1' : '0');
        os << '\n';
    }
}

}  // namespace mfl
