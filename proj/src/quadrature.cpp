#include "specmono/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace specmono {

const GaussRule& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return *it->second;
    auto rule = std::make_unique<GaussRule>();
    gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(static_cast<size_t>(n));
    rule->x.resize(n);
    rule->w.resize(n);
    for (int i = 0; i < n; ++i)
        gsl_integration_glfixed_point(-1.0, 1.0, static_cast<size_t>(i), &rule->x[i], &rule->w[i], table);
    gsl_integration_glfixed_table_free(table);
    return *cache.emplace(n, std::move(rule)).first->second;
}

double endpoint_singular_integral(const std::function<double(double)>& f, double a, double b, int nodes) {
    const GaussRule& rule = gauss_legendre(nodes);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = 0.0;
    for (size_t i = 0; i < rule.x.size(); ++i) {
        const double theta = 0.5 * M_PI * rule.x[i];
        const double c = std::cos(theta);
        sum += rule.w[i] * f(mid + half * std::sin(theta)) * half * c;
    }
    return 0.5 * M_PI * sum;
}

}  // namespace specmono
