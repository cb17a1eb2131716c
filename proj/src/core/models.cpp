#include "mfl/models.hpp"

#include "mfl/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace mfl {

namespace {

double k_identity(double x) { return x; }
double k_identity_d(double) { return 1.0; }
double k_gauss(double x) { return std::exp(-x * x); }
double k_gauss_d(double x) { return -2.0 * x * std::exp(-x * x); }
double k_tanh(double x) { return std::tanh(x); }
double k_tanh_d(double x) {
    const double th = std::tanh(x);
    return 1.0 - th * th;
}
double k_zero(double) { return 0.0; }
double k_one(double) { return 1.0; }

constexpr std::array<Kernel, 5> kRegistry{{
    {"identity", &k_identity, &k_identity_d},
    {"gaussian_bump", &k_gauss, &k_gauss_d},
    {"tanh", &k_tanh, &k_tanh_d},
    {"zero", &k_zero, &k_zero},
    {"one", &k_one, &k_zero},
}};

std::string fmt_interval(const ParamBox& box, std::size_t k) {
    std::ostringstream os;
    os << "[" << box.lower()(static_cast<Eigen::Index>(k)) << ", " << box.upper()(static_cast<Eigen::Index>(k))
       << "]";
    return os.str();
}

bool intervals_overlap(const ParamBox& box, Eigen::Index a, Eigen::Index b) {
    return !(box.upper()(a) < box.lower()(b) || box.upper()(b) < box.lower()(a));
}

}  // namespace

ParamVector::ParamVector(Vec values) : values_(std::move(values)) {
    if (!values_.allFinite()) throw DomainError("parameter vector has non-finite entries");
}

ParamVector::ParamVector(std::initializer_list<double> values)
    : ParamVector(Vec(Eigen::Map<const Vec>(values.begin(), static_cast<Eigen::Index>(values.size())))) {}

ParamBox::ParamBox(Vec lower, Vec upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size()) throw ShapeError("box bounds differ in length");
    if (!lower_.allFinite() || !upper_.allFinite()) throw DomainError("box bounds must be finite");
    for (Eigen::Index k = 0; k < lower_.size(); ++k) {
        if (lower_(k) > upper_(k)) {
            throw DomainError("box lower bound exceeds upper bound for theta_" + std::to_string(k + 1));
        }
    }
}

bool ParamBox::contains(const Vec& theta) const {
    if (theta.size() != lower_.size()) return false;
    return ((theta.array() >= lower_.array()) && (theta.array() <= upper_.array())).all();
}

Vec ParamBox::project(const Vec& theta) const { return theta.cwiseMax(lower_).cwiseMin(upper_); }

std::string_view family_name(Family family) {
    switch (family) {
        case Family::mckean_ou: return "mckean_ou";
        case Family::gen_linear: return "gen_linear";
        case Family::double_layer: return "double_layer";
        case Family::nonlinear_f: return "nonlinear_f";
    }
    return "unknown";
}

Family family_from_name(std::string_view name) {
    for (Family f : {Family::mckean_ou, Family::gen_linear, Family::double_layer, Family::nonlinear_f}) {
        if (family_name(f) == name) return f;
    }
    throw ConfigError("unknown model family '" + std::string(name) + "'");
}

std::size_t family_num_params(Family family) {
    switch (family) {
        case Family::mckean_ou: return 3;
        case Family::gen_linear: return 2;
        case Family::double_layer: return 4;
        case Family::nonlinear_f: return 1;
    }
    return 0;
}

const Kernel& kernel_by_name(std::string_view name) {
    for (const auto& k : kRegistry) {
        if (k.name == name) return k;
    }
    throw ConfigError("unknown kernel '" + std::string(name) + "'");
}

std::vector<std::string> kernel_names() {
    std::vector<std::string> names;
    for (const auto& k : kRegistry) names.emplace_back(k.name);
    return names;
}

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> atoms, std::size_t dim)
    : atoms_(std::move(atoms)), dim_(dim), mean_(Vec::Zero(static_cast<Eigen::Index>(dim))) {
    if (dim_ == 0) throw ShapeError("measure dimension must be positive");
    if (atoms_.empty()) throw DomainError("empirical measure must have at least one atom");
    if (atoms_.size() % dim_ != 0) throw ShapeError("atom buffer is not a multiple of the dimension");
    for (double v : atoms_) {
        if (!std::isfinite(v)) throw DomainError("empirical measure has non-finite atoms");
    }
    for (std::size_t j = 0; j < size(); ++j) {
        for (std::size_t k = 0; k < dim_; ++k) mean_(static_cast<Eigen::Index>(k)) += atoms_[j * dim_ + k];
    }
    mean_ /= static_cast<double>(size());
}

double EmpiricalMeasure::abs_moment(double r) const {
    double sum = 0.0;
    for (std::size_t j = 0; j < size(); ++j) {
        double sq = 0.0;
        for (std::size_t k = 0; k < dim_; ++k) sq += atoms_[j * dim_ + k] * atoms_[j * dim_ + k];
        sum += std::pow(std::sqrt(sq), r);
    }
    return sum / static_cast<double>(size());
}

double EmpiricalMeasure::variance() const {
    double sum = 0.0;
    for (std::size_t j = 0; j < size(); ++j) {
        for (std::size_t k = 0; k < dim_; ++k) {
            const double c = atoms_[j * dim_ + k] - mean_(static_cast<Eigen::Index>(k));
            sum += c * c;
        }
    }
    return sum / static_cast<double>(size());
}

DiffusionSpec::DiffusionSpec(Mat sigma) : sigma_(std::move(sigma)) {
    if (sigma_.rows() == 0 || sigma_.rows() != sigma_.cols()) throw ShapeError("sigma must be a square matrix");
    if (!sigma_.allFinite()) throw DomainError("sigma must be finite");
    c_ = sigma_ * sigma_.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> eig(c_);
    const Vec& ev = eig.eigenvalues();
    if (ev.minCoeff() <= 0.0) throw DomainError("c = sigma sigma^T must be positive definite");
    const Mat& q = eig.eigenvectors();
    c_inv_ = q * ev.cwiseInverse().asDiagonal() * q.transpose();
    c_inv_sqrt_ = q * ev.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose();
    const Mat off = sigma_ - sigma_(0, 0) * Mat::Identity(sigma_.rows(), sigma_.cols());
    scalar_ = off.cwiseAbs().maxCoeff() == 0.0;
    if (scalar_) {
        const double s2 = sigma_(0, 0) * sigma_(0, 0);
        c_inv_ = Mat::Identity(sigma_.rows(), sigma_.cols()) / s2;
        c_inv_sqrt_ = Mat::Identity(sigma_.rows(), sigma_.cols()) / std::abs(sigma_(0, 0));
    }
}

DiffusionSpec DiffusionSpec::scalar(double sigma, std::size_t dim) {
    if (!(sigma != 0.0) || !std::isfinite(sigma)) throw DomainError("scalar diffusion must be finite and nonzero");
    return DiffusionSpec(sigma * Mat::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
}

std::vector<std::string> box_constraint_violations(Family family, const ParamBox& box) {
    std::vector<std::string> out;
    if (box.size() != family_num_params(family)) {
        out.push_back("box has " + std::to_string(box.size()) + " coordinates, family " +
                      std::string(family_name(family)) + " needs " + std::to_string(family_num_params(family)));
        return out;
    }
    switch (family) {
        case Family::mckean_ou:
            if (box.lower()(0) <= 0.0 && box.upper()(0) >= 0.0) {
                out.push_back("theta_1 interval " + fmt_interval(box, 0) +
                              " contains 0 (non-degeneracy requires theta_1 != 0)");
            }
            if (intervals_overlap(box, 0, 2)) {
                out.push_back("theta_1 interval " + fmt_interval(box, 0) + " and theta_3 interval " +
                              fmt_interval(box, 2) + " intersect (non-degeneracy requires theta_1 != theta_3)");
            }
            break;
        case Family::double_layer:
            if (box.lower().minCoeff() <= 0.0) out.push_back("double-layer box must lie in (0, inf)^4");
            if (intervals_overlap(box, 1, 3)) {
                out.push_back("theta_2 interval " + fmt_interval(box, 1) + " and theta_4 interval " +
                              fmt_interval(box, 3) + " intersect (identifiability requires them disjoint)");
            }
            break;
        case Family::nonlinear_f:
            if (box.lower()(0) <= 0.0) out.push_back("nonlinear-link box must lie in (0, inf)");
            break;
        case Family::gen_linear: break;
    }
    return out;
}

DriftModel::DriftModel(Family family, std::size_t dim, ParamBox box, DiffusionSpec diffusion)
    : family_(family), dim_(dim), box_(std::move(box)), diffusion_(std::move(diffusion)) {
    if (diffusion_.dim() != dim_) throw ShapeError("diffusion dimension differs from model dimension");
    const auto bad = box_constraint_violations(family_, box_);
    if (!bad.empty()) {
        std::string msg = "invalid parameter box for " + std::string(family_name(family_)) + ":";
        for (const auto& b : bad) msg += " " + b + ";";
        throw DomainError(msg);
    }
}

DriftModel DriftModel::mckean_ou(ParamBox box, double sigma) {
    return DriftModel(Family::mckean_ou, 1, std::move(box), DiffusionSpec::scalar(sigma, 1));
}

DriftModel DriftModel::gen_linear(const Kernel& f, const Kernel& g, ParamBox box, double sigma) {
    DriftModel m(Family::gen_linear, 1, std::move(box), DiffusionSpec::scalar(sigma, 1));
    m.f_ = &f;
    m.g_ = &g;
    return m;
}

DriftModel DriftModel::double_layer(std::size_t dim, ParamBox box, double sigma) {
    if (dim == 0) throw ShapeError("dimension must be at least 1");
    return DriftModel(Family::double_layer, dim, std::move(box), DiffusionSpec::scalar(sigma, dim));
}

DriftModel DriftModel::double_layer(ParamBox box, DiffusionSpec diffusion) {
    const std::size_t dim = diffusion.dim();
    return DriftModel(Family::double_layer, dim, std::move(box), std::move(diffusion));
}

DriftModel DriftModel::nonlinear_f(const Kernel& link, const Kernel& g, ParamBox box, double sigma) {
    DriftModel m(Family::nonlinear_f, 1, std::move(box), DiffusionSpec::scalar(sigma, 1));
    m.link_ = &link;
    m.g_ = &g;
    return m;
}

std::string DriftModel::tag() const {
    std::string s(family_name(family_));
    switch (family_) {
        case Family::gen_linear:
            s += "(f=" + std::string(f_->name) + ",g=" + std::string(g_->name) + ")";
            break;
        case Family::nonlinear_f:
            s += "(F=" + std::string(link_->name) + ",g=" + std::string(g_->name) + ")";
            break;
        case Family::double_layer: s += "(d=" + std::to_string(dim_) + ")"; break;
        case Family::mckean_ou: break;
    }
    return s;
}

void DriftModel::require_valid(const ParamVector& theta) const {
    if (theta.size() != num_params()) {
        throw ShapeError("theta has length " + std::to_string(theta.size()) + ", model expects " +
                         std::to_string(num_params()));
    }
    if (!box_.contains(theta.vec())) throw DomainError("theta lies outside the parameter box");
}

Vec double_layer_potential_gradient(const Vec& theta, std::span<const double> x) {
    double sq = 0.0;
    for (double v : x) sq += v * v;
    const double a = 2.0 * theta(0) * theta(1) * std::exp(-theta(1) * sq) -
                     2.0 * theta(2) * theta(3) * std::exp(-theta(3) * sq);
    Vec out(static_cast<Eigen::Index>(x.size()));
    for (std::size_t k = 0; k < x.size(); ++k) out(static_cast<Eigen::Index>(k)) = a * x[k];
    return out;
}

void DriftModel::evaluate(const Vec& theta, double /*t*/, std::span<const double> x, const EmpiricalMeasure& nu,
                          std::span<double> out) const {
    switch (family_) {
        case Family::mckean_ou:
            out[0] = theta(0) * x[0] + theta(1) - theta(2) * (x[0] - nu.mean()(0));
            return;
        case Family::gen_linear:
            out[0] = theta(0) * f_->value(x[0]) + theta(1) * kernel_convolve(*g_, nu, x[0]);
            return;
        case Family::nonlinear_f:
            out[0] = link_->value(theta(0) * kernel_convolve(*g_, nu, x[0]));
            return;
        case Family::double_layer: {
            std::fill(out.begin(), out.end(), 0.0);
            const std::size_t n = nu.size();
            for (std::size_t j = 0; j < n; ++j) {
                const auto y = nu.atom(j);
                double sq = 0.0;
                for (std::size_t k = 0; k < dim_; ++k) sq += (x[k] - y[k]) * (x[k] - y[k]);
                const double a = 2.0 * theta(0) * theta(1) * std::exp(-theta(1) * sq) -
                                 2.0 * theta(2) * theta(3) * std::exp(-theta(3) * sq);
                for (std::size_t k = 0; k < dim_; ++k) out[k] += a * (x[k] - y[k]);
            }
            for (auto& v : out) v /= static_cast<double>(n);
            return;
        }
    }
}

void DriftModel::evaluate_with_gradient(const Vec& theta, double t, std::span<const double> x,
                                        const EmpiricalMeasure& nu, std::span<double> b, Mat& grad) const {
    const auto p = static_cast<Eigen::Index>(num_params());
    const auto d = static_cast<Eigen::Index>(dim_);
    grad.setZero(d, p);
    switch (family_) {
        case Family::mckean_ou:
        case Family::gen_linear: {
            const Vec phi = features(t, x[0], nu);
            grad.row(0) = phi.transpose();
            b[0] = phi.dot(theta);
            return;
        }
        case Family::nonlinear_f: {
            const double conv = kernel_convolve(*g_, nu, x[0]);
            b[0] = link_->value(theta(0) * conv);
            grad(0, 0) = conv * link_->derivative(theta(0) * conv);
            return;
        }
        case Family::double_layer: {
            std::fill(b.begin(), b.end(), 0.0);
            const std::size_t n = nu.size();
            for (std::size_t j = 0; j < n; ++j) {
                const auto y = nu.atom(j);
                double sq = 0.0;
                for (std::size_t k = 0; k < dim_; ++k) sq += (x[k] - y[k]) * (x[k] - y[k]);
                const double e2 = std::exp(-theta(1) * sq);
                const double e4 = std::exp(-theta(3) * sq);
                const double a = 2.0 * theta(0) * theta(1) * e2 - 2.0 * theta(2) * theta(3) * e4;
                const double g1 = 2.0 * theta(1) * e2;
                const double g2 = 2.0 * theta(0) * (1.0 - theta(1) * sq) * e2;
                const double g3 = -2.0 * theta(3) * e4;
                const double g4 = -2.0 * theta(2) * (1.0 - theta(3) * sq) * e4;
                for (std::size_t k = 0; k < dim_; ++k) {
                    const double z = x[k] - y[k];
                    const auto kk = static_cast<Eigen::Index>(k);
                    b[k] += a * z;
                    grad(kk, 0) += g1 * z;
                    grad(kk, 1) += g2 * z;
                    grad(kk, 2) += g3 * z;
                    grad(kk, 3) += g4 * z;
                }
            }
            const double inv_n = 1.0 / static_cast<double>(n);
            for (auto& v : b) v *= inv_n;
            grad *= inv_n;
            return;
        }
    }
}

Vec DriftModel::features(double /*t*/, double x, const EmpiricalMeasure& nu) const {
    switch (family_) {
        case Family::mckean_ou: return Vec{{x, 1.0, -(x - nu.mean()(0))}};
        case Family::gen_linear: return Vec{{f_->value(x), kernel_convolve(*g_, nu, x)}};
        default: throw UnsupportedError("features are defined only for drifts linear in theta");
    }
}

Vec drift_eval(const DriftModel& model, const ParamVector& theta, double t, std::span<const double> x,
               const EmpiricalMeasure& nu) {
    model.require_valid(theta);
    if (x.size() != model.dim() || nu.dim() != model.dim()) throw ShapeError("drift_eval: dimension mismatch");
    for (double v : x) {
        if (!std::isfinite(v)) throw DomainError("drift_eval: non-finite state");
    }
    Vec out(static_cast<Eigen::Index>(model.dim()));
    model.evaluate(theta.vec(), t, x, nu, {out.data(), model.dim()});
    return out;
}

Mat drift_grad_theta(const DriftModel& model, const ParamVector& theta, double t, std::span<const double> x,
                     const EmpiricalMeasure& nu) {
    model.require_valid(theta);
    if (x.size() != model.dim() || nu.dim() != model.dim()) {
        throw ShapeError("drift_grad_theta: dimension mismatch");
    }
    Vec b(static_cast<Eigen::Index>(model.dim()));
    Mat grad;
    model.evaluate_with_gradient(theta.vec(), t, x, nu, {b.data(), model.dim()}, grad);
    return grad;
}

ValidationReport validate_theta(const DriftModel& model, const ParamVector& theta) {
    ValidationReport r;
    auto fail = [&](std::string msg) {
        r.ok = false;
        r.violations.push_back(std::move(msg));
    };
    if (theta.size() != model.num_params()) {
        fail("theta has length " + std::to_string(theta.size()) + ", expected " +
             std::to_string(model.num_params()));
        return r;
    }
    const Vec& v = theta.vec();
    for (std::size_t k = 0; k < theta.size(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        if (v(kk) < model.box().lower()(kk) || v(kk) > model.box().upper()(kk)) {
            std::ostringstream os;
            os << "theta_" << k + 1 << " = " << v(kk) << " outside theta_" << k + 1 << " interval "
               << fmt_interval(model.box(), k);
            fail(os.str());
        }
    }
    switch (model.family()) {
        case Family::mckean_ou:
            if (v(0) == 0.0) fail("theta_1 = 0 violates the non-degeneracy constraint theta_1 != 0");
            if (v(0) == v(2)) fail("theta_1 = theta_3 violates the non-degeneracy constraint theta_1 != theta_3");
            break;
        case Family::double_layer:
            if (v.minCoeff() <= 0.0) fail("double-layer parameters must be positive");
            if (v(1) == v(3)) fail("theta_2 = theta_4 violates the identifiability constraint theta_2 != theta_4");
            break;
        case Family::nonlinear_f:
            if (v(0) <= 0.0) fail("nonlinear-link parameter must be positive");
            break;
        case Family::gen_linear: break;
    }
    return r;
}

double kernel_convolve(const Kernel& kernel, const EmpiricalMeasure& nu, double x) {
    if (nu.size() == 0) throw DomainError("kernel_convolve: empty measure");
    const auto atoms = nu.atoms();
    double sum = 0.0;
    for (double y : atoms) sum += kernel.value(x - y);
    return sum / static_cast<double>(atoms.size());
}

}  // namespace mfl
