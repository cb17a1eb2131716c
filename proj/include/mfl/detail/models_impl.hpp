#pragma once

#include "mfl/error.hpp"

namespace mfl {

template <class F>
auto kernel_convolve(F&& kernel, const EmpiricalMeasure& nu, std::span<const double> x)
    -> decltype(kernel(Vec{})) {
    if (nu.size() == 0) throw DomainError("kernel_convolve: empty measure");
    if (x.size() != nu.dim()) throw ShapeError("kernel_convolve: point dimension differs from measure");
    Vec diff(static_cast<Eigen::Index>(nu.dim()));
    auto accumulate = [&](std::size_t j) {
        const auto y = nu.atom(j);
        for (std::size_t k = 0; k < nu.dim(); ++k) diff(static_cast<Eigen::Index>(k)) = x[k] - y[k];
        return kernel(diff);
    };
    auto sum = accumulate(0);
    for (std::size_t j = 1; j < nu.size(); ++j) sum += accumulate(j);
    return sum / static_cast<double>(nu.size());
}

}  // namespace mfl
