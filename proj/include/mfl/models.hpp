#pragma once

// Parametric drift families b(theta; t, x, nu) for mean-field particle systems,
// their theta-gradients, the constant diffusion coefficient and the box Theta.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mfl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A parameter point theta. Entries are finite by construction.
class ParamVector {
public:
    ParamVector() = default;
    explicit ParamVector(Vec values);
    ParamVector(std::initializer_list<double> values);

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
    [[nodiscard]] double operator[](std::size_t k) const { return values_(static_cast<Eigen::Index>(k)); }
    [[nodiscard]] const Vec& vec() const noexcept { return values_; }

private:
    Vec values_;
};

/// Compact box lower <= theta <= upper.
class ParamBox {
public:
    ParamBox() = default;
    ParamBox(Vec lower, Vec upper);

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(lower_.size()); }
    [[nodiscard]] const Vec& lower() const noexcept { return lower_; }
    [[nodiscard]] const Vec& upper() const noexcept { return upper_; }
    [[nodiscard]] bool contains(const Vec& theta) const;
    [[nodiscard]] Vec center() const { return 0.5 * (lower_ + upper_); }
    [[nodiscard]] Vec project(const Vec& theta) const;

private:
    Vec lower_;
    Vec upper_;
};

enum class Family { mckean_ou, gen_linear, double_layer, nonlinear_f };

[[nodiscard]] std::string_view family_name(Family family);
/// Throws ConfigError for unknown names.
[[nodiscard]] Family family_from_name(std::string_view name);
[[nodiscard]] std::size_t family_num_params(Family family);

/// Scalar function on R with its derivative, drawn from a fixed registry.
struct Kernel {
    std::string_view name;
    double (*value)(double) = nullptr;
    double (*derivative)(double) = nullptr;
};

/// Registry lookup: identity, gaussian_bump (exp(-x^2)), tanh, zero, one.
[[nodiscard]] const Kernel& kernel_by_name(std::string_view name);
[[nodiscard]] std::vector<std::string> kernel_names();

/// Uniform atomic measure (1/N) sum_j delta_{y_j} on R^d.
class EmpiricalMeasure {
public:
    EmpiricalMeasure(std::vector<double> atoms, std::size_t dim);

    [[nodiscard]] std::size_t size() const noexcept { return atoms_.size() / dim_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::span<const double> atom(std::size_t j) const {
        return {atoms_.data() + j * dim_, dim_};
    }
    [[nodiscard]] std::span<const double> atoms() const noexcept { return atoms_; }
    /// First moment, cached at construction.
    [[nodiscard]] const Vec& mean() const noexcept { return mean_; }
    /// (1/N) sum_j |y_j|^r with the Euclidean norm.
    [[nodiscard]] double abs_moment(double r) const;
    /// (1/N) sum_j |y_j - mean|^2.
    [[nodiscard]] double variance() const;

private:
    std::vector<double> atoms_;
    std::size_t dim_;
    Vec mean_;
};

/// Constant diffusion matrix sigma with c = sigma sigma^T and its symmetric inverse root.
class DiffusionSpec {
public:
    DiffusionSpec() = default;
    explicit DiffusionSpec(Mat sigma);
    static DiffusionSpec scalar(double sigma, std::size_t dim);

    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(sigma_.rows()); }
    [[nodiscard]] const Mat& sigma() const noexcept { return sigma_; }
    [[nodiscard]] const Mat& c() const noexcept { return c_; }
    [[nodiscard]] const Mat& c_inv() const noexcept { return c_inv_; }
    [[nodiscard]] const Mat& c_inv_sqrt() const noexcept { return c_inv_sqrt_; }
    /// sigma is a multiple of the identity; the hot loops take a scalar path then.
    [[nodiscard]] bool is_scalar() const noexcept { return scalar_; }
    [[nodiscard]] double scalar_sigma() const noexcept { return sigma_(0, 0); }

private:
    Mat sigma_;
    Mat c_;
    Mat c_inv_;
    Mat c_inv_sqrt_;
    bool scalar_ = false;
};

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> violations;
};

/// One of the four drift families together with its box and diffusion.
/// Immutable after construction.
class DriftModel {
public:
    static DriftModel mckean_ou(ParamBox box, double sigma = 1.0);
    static DriftModel gen_linear(const Kernel& f, const Kernel& g, ParamBox box, double sigma = 1.0);
    static DriftModel double_layer(std::size_t dim, ParamBox box, double sigma = 1.0);
    static DriftModel double_layer(ParamBox box, DiffusionSpec diffusion);
    static DriftModel nonlinear_f(const Kernel& link, const Kernel& g, ParamBox box, double sigma = 1.0);

    [[nodiscard]] Family family() const noexcept { return family_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t num_params() const noexcept { return family_num_params(family_); }
    [[nodiscard]] const ParamBox& box() const noexcept { return box_; }
    [[nodiscard]] const DiffusionSpec& diffusion() const noexcept { return diffusion_; }
    [[nodiscard]] const Kernel& kernel_f() const noexcept { return *f_; }
    [[nodiscard]] const Kernel& kernel_g() const noexcept { return *g_; }
    [[nodiscard]] const Kernel& link() const noexcept { return *link_; }
    /// McKeanOU and GenLinear: drift affine in theta with theta-free gradient.
    [[nodiscard]] bool linear_in_theta() const noexcept {
        return family_ == Family::mckean_ou || family_ == Family::gen_linear;
    }
    /// Drift of the form integral of a kernel against nu (everything but NonlinearF).
    [[nodiscard]] bool linear_in_measure() const noexcept { return family_ != Family::nonlinear_f; }
    /// Human-readable description including kernel names.
    [[nodiscard]] std::string tag() const;

    /// b(theta; t, x, nu) into out (length d). No box check.
    void evaluate(const Vec& theta, double t, std::span<const double> x, const EmpiricalMeasure& nu,
                  std::span<double> out) const;
    /// Drift into b (length d) and its theta-gradient into grad (d x p). No box check.
    void evaluate_with_gradient(const Vec& theta, double t, std::span<const double> x,
                                const EmpiricalMeasure& nu, std::span<double> b, Mat& grad) const;
    /// theta-free gradient row phi(x, nu) for the linear families (d = 1).
    [[nodiscard]] Vec features(double t, double x, const EmpiricalMeasure& nu) const;

    /// Throws DomainError unless theta has the right length and lies in the box.
    void require_valid(const ParamVector& theta) const;

private:
    DriftModel(Family family, std::size_t dim, ParamBox box, DiffusionSpec diffusion);

    Family family_ = Family::mckean_ou;
    std::size_t dim_ = 1;
    ParamBox box_;
    DiffusionSpec diffusion_;
    const Kernel* f_ = nullptr;
    const Kernel* g_ = nullptr;
    const Kernel* link_ = nullptr;
};

/// Box-level family constraints (0 not in the theta_1 interval, disjoint intervals, positivity).
[[nodiscard]] std::vector<std::string> box_constraint_violations(Family family, const ParamBox& box);

[[nodiscard]] Vec drift_eval(const DriftModel& model, const ParamVector& theta, double t,
                             std::span<const double> x, const EmpiricalMeasure& nu);
[[nodiscard]] Mat drift_grad_theta(const DriftModel& model, const ParamVector& theta, double t,
                                   std::span<const double> x, const EmpiricalMeasure& nu);
[[nodiscard]] ValidationReport validate_theta(const DriftModel& model, const ParamVector& theta);

/// (1/N) sum_j kernel(x - y_j) for a scalar kernel on R.
[[nodiscard]] double kernel_convolve(const Kernel& kernel, const EmpiricalMeasure& nu, double x);

/// (1/N) sum_j kernel(x - y_j) for any callable taking a d-vector; returns double or Vec.
template <class F>
[[nodiscard]] auto kernel_convolve(F&& kernel, const EmpiricalMeasure& nu, std::span<const double> x)
    -> decltype(kernel(Vec{}));

/// grad U_theta(x) = 2 t1 t2 x exp(-t2|x|^2) - 2 t3 t4 x exp(-t4|x|^2).
[[nodiscard]] Vec double_layer_potential_gradient(const Vec& theta, std::span<const double> x);

}  // namespace mfl

#include "mfl/detail/models_impl.hpp"
