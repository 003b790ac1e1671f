#pragma once

#include <functional>
#include <vector>

namespace specmono {

struct GaussRule {
    std::vector<double> x;  // nodes on [-1, 1]
    std::vector<double> w;
};

/// Gauss-Legendre rule with n nodes, cached per n.
const GaussRule& gauss_legendre(int n);

/// Integral over [a, b] of a function with inverse-square-root behaviour at
/// both endpoints, via x = m + w sin(theta).
double endpoint_singular_integral(const std::function<double(double)>& f, double a, double b, int nodes);

}  // namespace specmono
