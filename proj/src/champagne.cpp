#include "specmono/champagne.hpp"

#include "specmono/quadrature.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <limits>

namespace specmono::champagne {

namespace {

constexpr int kDigits = std::numeric_limits<double>::digits - 4;

// Polynomial in s = r^2 whose roots are the turning points:
// 2 r^2 (E - V) = -2 s^3 + 2 s^2 + 2 E s - j^2.
double g(double s, double E, double j) { return -2.0 * s * s * s + 2.0 * s * s + 2.0 * E * s - j * j; }
double dg(double s, double E) { return -6.0 * s * s + 4.0 * s + 2.0 * E; }

double bracketed_root(double E, double j, double lo, double hi) {
    // a few bisection steps pin the bracket before Newton takes over
    double glo = g(lo, E, j);
    for (int it = 0; it < 30; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid, E, j);
        if ((gm < 0) == (glo < 0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    std::uintmax_t iters = 100;
    return boost::math::tools::newton_raphson_iterate(
        [&](double s) { return std::make_pair(g(s, E, j), dg(s, E)); }, 0.5 * (lo + hi), lo, hi, kDigits, iters);
}

double s_min(double j) {
    // 4 s^3 - 2 s^2 - j^2 = 0, unique root s >= 1/2
    if (j == 0.0) return 0.5;
    std::uintmax_t iters = 200;
    auto f = [&](double s) { return std::make_pair(4 * s * s * s - 2 * s * s - j * j, 12 * s * s - 4 * s); };
    return boost::math::tools::newton_raphson_iterate(f, 0.5 + j * j, 0.5, 1.0 + std::abs(j), kDigits, iters);
}

}  // namespace

double effective_minimum(double j) {
    const double s = s_min(j);
    return j * j / (2.0 * s) - s + s * s;
}

Radial radial(double E, double j, int nodes) {
    Radial out;
    const double sm = s_min(j);
    const double vmin = j * j / (2.0 * sm) - sm + sm * sm;
    if (!(E > vmin)) fail(ErrorKind::OutsideRegularRegion, "energy below the effective potential minimum");
    double s_in, s_out;
    if (j == 0.0) {
        const double disc = std::sqrt(1.0 + 4.0 * E);
        s_in = E >= 0.0 ? 0.0 : 0.5 * (1.0 - disc);
        s_out = 0.5 * (1.0 + disc);
    } else {
        s_in = bracketed_root(E, j, 0.0, sm);
        s_out = bracketed_root(E, j, sm, 2.0 + std::abs(E));
    }
    const double r_in = std::sqrt(s_in), r_out = std::sqrt(s_out);
    out.r_inner = r_in;
    out.r_outer = r_out;

    auto pr = [&](double r) {
        const double v = 2.0 * E - (r > 0 ? j * j / (r * r) : 0.0) + 2.0 * r * r - 2.0 * r * r * r * r;
        return std::sqrt(std::max(v, 0.0));
    };
    out.action = endpoint_singular_integral(pr, r_in, r_out, nodes) / M_PI;
    out.period = 2.0 * endpoint_singular_integral(
                           [&](double r) {
                               const double p = pr(r);
                               return p > 0 ? 1.0 / p : 0.0;
                           },
                           r_in, r_out, nodes);

    if (j == 0.0) {
        out.theta = E > 0.0 ? M_PI : 0.0;
    } else {
        // u = 1/r keeps the integrand regular when the inner turning point
        // collapses towards the origin
        const double u_lo = 1.0 / r_out, u_hi = 1.0 / r_in;
        auto integrand = [&](double u) {
            const double iu2 = 1.0 / (u * u);
            const double v = 2.0 * E - j * j * u * u + 2.0 * iu2 - 2.0 * iu2 * iu2;
            return v > 0 ? 1.0 / std::sqrt(v) : 0.0;
        };
        out.theta = 2.0 * j * endpoint_singular_integral(integrand, u_lo, u_hi, nodes);
    }
    return out;
}

int sector(const Vec2& c) {
    const double angle = std::atan2(c.y(), c.x());
    const int s = static_cast<int>(std::floor((angle + M_PI / 4.0) / (M_PI / 2.0)));
    return ((s % 4) + 4) % 4;
}

double branch_shift(double j, int sec) { return sec == 0 ? std::max(0.0, -j) : 0.0; }

double branch_shift_slope(double j, int sec) { return (sec == 0 && j < 0.0) ? -1.0 : 0.0; }

double energy_for_action(double action, double j, int nodes) {
    if (!(action > 0.0)) fail(ErrorKind::OutsideRegularRegion, "non-positive radial action");
    const double vmin = effective_minimum(j);
    double lo = vmin, hi = vmin + 1.0;
    while (radial(hi, j, nodes).action < action) {
        lo = hi;
        hi = vmin + 2.0 * (hi - vmin);
        if (hi > 1e6) fail(ErrorKind::OutsideRegularRegion, "radial action out of range");
    }
    // secant-like guess from the harmonic approximation near the bottom
    double guess = std::min(hi, std::max(lo, vmin + action * (hi - vmin) / radial(hi, j, nodes).action));
    std::uintmax_t iters = 100;
    auto f = [&](double E) {
        if (E <= vmin) return std::make_pair(-action, 1.0);
        const Radial r = radial(E, j, nodes);
        return std::make_pair(r.action - action, r.period / (2.0 * M_PI));
    };
    return boost::math::tools::newton_raphson_iterate(f, guess, lo, hi, kDigits, iters);
}

}  // namespace specmono::champagne
