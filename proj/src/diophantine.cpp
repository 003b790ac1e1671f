#include "specmono/diophantine.hpp"

#include <omp.h>

#include <cmath>
#include <limits>
#include <cstdlib>
#include <random>
#include <sstream>

namespace specmono {

int configure_threads_from_env(const char* var) {
    if (const char* v = std::getenv(var)) {
        char* end = nullptr;
        const long n = std::strtol(v, &end, 10);
        if (end != v && n > 0) omp_set_num_threads(static_cast<int>(n));
    }
    return omp_get_max_threads();
}

int max_threads() { return omp_get_max_threads(); }

void DiophantineParams::validate() const {
    if (!(alpha > 0.0)) fail(ErrorKind::InvalidParameter, "alpha must be positive");
    if (!(d > 0.0)) fail(ErrorKind::InvalidParameter, "d must be positive");
    if (k_max < 8) fail(ErrorKind::InvalidParameter, "k_max must be at least 8");
}

DiophantineResult is_diophantine(const Vec2& omega, const DiophantineParams& params) {
    params.validate();
    DiophantineResult res;
    res.k_max = params.k_max;
    res.ratio = std::numeric_limits<double>::infinity();
    // enumerate over the smaller frequency component; only k_b near the
    // resonance line can come within alpha
    const int b = std::abs(omega[0]) >= std::abs(omega[1]) ? 0 : 1;
    const int s = 1 - b;
    const double wb = omega[b], ws = omega[s];
    if (wb == 0.0) {
        res.worst_k = Vec2i::Zero();
        res.worst_k[b] = 1;
        res.ratio = 0.0;
        return res;
    }
    const double reach = params.alpha / std::abs(wb);
    const double p = 1.0 + params.d;
    for (int ks = 0; ks <= params.k_max; ++ks) {
        const double centre = -ks * ws / wb;
        int lo = static_cast<int>(std::ceil(centre - reach));
        int hi = static_cast<int>(std::floor(centre + reach));
        lo = std::max(lo, -params.k_max);
        hi = std::min(hi, params.k_max);
        for (int kb = lo; kb <= hi; ++kb) {
            if (ks == 0 && kb <= 0) continue;  // k and -k are equivalent
            const double norm = std::hypot(static_cast<double>(kb), static_cast<double>(ks));
            const double r = std::abs(kb * wb + ks * ws) * std::pow(norm, p) / params.alpha;
            if (r < res.ratio) {
                res.ratio = r;
                res.worst_k[b] = kb;
                res.worst_k[s] = ks;
            }
            if (r < 1.0) return res;
        }
    }
    res.ok = true;
    return res;
}

Vec2 frequency_at(const ActionChart& chart, const Vec2& c) {
    return chart.differential(c).inverse().row(0).transpose();
}

namespace {

Vec2 dq_gradient(const ActionChart& chart, const Vec2& xi) {
    Vec2 g;
    for (int i = 0; i < 2; ++i) {
        const double step = 1e-6 * std::max(1.0, std::abs(xi[i]));
        Vec2 a = xi, b = xi;
        a[i] += step;
        b[i] -= step;
        g[i] = (chart.average_q(a) - chart.average_q(b)) / (2.0 * step);
    }
    return g;
}

bool try_frequency(const ActionChart& chart, const Vec2& c, Vec2& out) {
    if (!chart.model->is_regular(c)) return false;
    try {
        out = frequency_at(chart, c);
        return true;
    } catch (const Error&) {
        return false;
    }
}

}  // namespace

GoodValueCheck check_good_value(const ActionChart& chart, const Vec2& c, const DiophantineParams& params, double step,
                                double dq_threshold_factor, bool require_wedge) {
    GoodValueCheck chk;
    const SymbolModel& m = *chart.model;
    chk.regular = m.is_regular(c);
    chk.far_from_critical = true;
    for (const Vec2& v : m.critical_values)
        if ((c - v).norm() < params.alpha) chk.far_from_critical = false;
    if (!chk.regular) return chk;
    ActionEval ev;
    try {
        ev = chart.evaluate(c);
    } catch (const Error&) {
        chk.regular = false;
        return chk;
    }
    const Vec2 omega = ev.dphi_inv.inverse().row(0).transpose();
    chk.diophantine = is_diophantine(omega, params).ok;
    const Vec2 dq = dq_gradient(chart, ev.xi);
    chk.dq_ok = dq.norm() >= dq_threshold_factor * params.alpha;

    Vec2 up, down;
    const bool has_up = try_frequency(chart, c + Vec2(0.0, step), up);
    const bool has_down = try_frequency(chart, c - Vec2(0.0, step), down);
    Vec2 domega = Vec2::Zero();
    if (has_up && has_down)
        domega = (up - down) / (2.0 * step);
    else if (has_up)
        domega = (up - omega) / step;
    else if (has_down)
        domega = (omega - down) / step;
    chk.domega_ok = (has_up || has_down) && domega.norm() >= params.alpha;

    if (require_wedge) chk.wedge_ok = std::abs(omega.x() * dq.y() - omega.y() * dq.x()) >= 1e-8;
    return chk;
}

namespace {

std::vector<double> segment_grid(const ActionChart& chart, double E, int grid, double& spacing) {
    if (grid <= 0) fail(ErrorKind::EmptySegment, "grid must be positive");
    const double dx = E - chart.center.x();
    const double h2 = chart.radius * chart.radius - dx * dx;
    if (h2 <= 0.0) fail(ErrorKind::EmptySegment, "energy line misses the chart domain");
    const double half = std::sqrt(h2);
    const double lo = chart.center.y() - half;
    spacing = 2.0 * half / grid;
    std::vector<double> gs(grid);
    for (int i = 0; i < grid; ++i) gs[i] = lo + (i + 0.5) * spacing;
    return gs;
}

}  // namespace

std::vector<double> good_values(const ActionChart& chart, double E, const DiophantineParams& params, int grid) {
    params.validate();
    double spacing = 0.0;
    const std::vector<double> gs = segment_grid(chart, E, grid, spacing);
    std::vector<double> out;
    for (double G : gs)
        if (check_good_value(chart, Vec2(E, G), params, spacing).ok()) out.push_back(G);
    return out;
}

std::vector<double> kam_good_values(const ActionChart& chart, const Vec2& a, const DiophantineParams& params, int grid) {
    params.validate();
    const double lambda = chart.model->lambda;
    if (lambda > params.alpha * params.alpha / 10.0) {
        std::ostringstream os;
        os << "lambda " << lambda << " exceeds alpha^2/10 = " << params.alpha * params.alpha / 10.0;
        fail(ErrorKind::LambdaTooLarge, os.str());
    }
    double spacing = 0.0;
    const std::vector<double> ks = segment_grid(chart, a.x(), grid, spacing);
    std::vector<double> out;
    for (double K : ks)
        if (check_good_value(chart, Vec2(a.x(), K), params, spacing, 0.5, true).ok()) out.push_back(K);
    return out;
}

BadFraction bad_fraction(const FrequencyBox& box, const DiophantineParams& params, long samples, std::uint64_t seed,
                         Exec exec) {
    params.validate();
    if (samples <= 0) fail(ErrorKind::InvalidParameter, "samples must be positive");
    if (!(box.hi.x() > box.lo.x() && box.hi.y() > box.lo.y()))
        fail(ErrorKind::InvalidParameter, "frequency box has no area");
    // draw serially so the sample set does not depend on the thread count
    std::vector<Vec2> pts(static_cast<size_t>(samples));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(box.lo.x(), box.hi.x()), uy(box.lo.y(), box.hi.y());
    for (auto& p : pts) {
        p.x() = ux(rng);
        p.y() = uy(rng);
    }
    long bad = 0;
    if (exec == Exec::Parallel) {
#pragma omp parallel for reduction(+ : bad) schedule(dynamic, 256)
        for (long i = 0; i < samples; ++i)
            if (!is_diophantine(pts[static_cast<size_t>(i)], params).ok) ++bad;
    } else {
        for (long i = 0; i < samples; ++i)
            if (!is_diophantine(pts[static_cast<size_t>(i)], params).ok) ++bad;
    }
    BadFraction out;
    out.samples = samples;
    out.fraction = static_cast<double>(bad) / samples;
    out.standard_error = std::sqrt(out.fraction * (1.0 - out.fraction) / samples);
    return out;
}

}  // namespace specmono
