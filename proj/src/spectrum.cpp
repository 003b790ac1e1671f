#include "specmono/spectrum.hpp"

#include <cmath>
#include <exception>
#include <random>
#include <sstream>
#include <unordered_map>

namespace specmono {

void check_regime(double h, double eps, double delta) {
    std::ostringstream os;
    if (!(delta > 0.0 && delta < 1.0)) {
        os << "delta " << delta << " outside (0, 1)";
        fail(ErrorKind::RegimeViolation, os.str());
    }
    if (!(h > 0.0) || !(h < eps)) {
        os << "need 0 < h < eps, got h = " << h << ", eps = " << eps;
        fail(ErrorKind::RegimeViolation, os.str());
    }
    if (eps > 1.1 * std::pow(h, delta)) {
        os << "eps = " << eps << " exceeds h^delta = " << std::pow(h, delta);
        fail(ErrorKind::RegimeViolation, os.str());
    }
}

GoodRectangle good_rectangle(const Vec2& a, double eps, double h, double delta, double C) {
    check_regime(h, eps, delta);
    if (!(C >= 1.0)) fail(ErrorKind::InvalidParameter, "C must be at least 1");
    GoodRectangle r;
    r.center = cplx(a.x(), eps * a.y());
    r.half_width = std::pow(h, delta) / C;
    r.half_height = eps * r.half_width;
    r.anchor = a;
    r.C = C;
    r.h = h;
    r.eps = eps;
    r.delta = delta;
    return r;
}

std::vector<size_t> SpectrumCloud::select(const GoodRectangle& rect) const {
    std::vector<size_t> idx;
    for (size_t i = 0; i < points.size(); ++i)
        if (rect.contains(points[i].mu)) idx.push_back(i);
    return idx;
}

namespace {

cplx jitter(const SynthesisOptions& opt, double h, const Vec2i& k, int domain) {
    if (!opt.jitter_exponent) return {0.0, 0.0};
    const double mag = std::pow(h, *opt.jitter_exponent) / std::sqrt(2.0);
    std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                      static_cast<std::uint32_t>(k.x()), static_cast<std::uint32_t>(k.y()),
                      static_cast<std::uint32_t>(domain)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> u(-mag, mag);
    const double re = u(rng);
    return {re, u(rng)};
}

}  // namespace

SpectrumCloud synthesize_rectangle(const ActionChart& chart, const Vec2& a, const GoodRectangle& rect,
                                   const SynthesisOptions& options) {
    SpectrumCloud cloud;
    cloud.h = rect.h;
    cloud.eps = rect.eps;
    cloud.delta = rect.delta;
    cloud.lambda = chart.model->lambda;
    cloud.jitter_exponent = options.jitter_exponent;
    cloud.seed = options.seed;
    cloud.model_name = chart.model->name;
    cloud.anchors = {a};

    const double h = rect.h, eps = rect.eps;
    const Vec2 eta = chart.maslov().cast<double>();
    const Vec2 tau = chart.action_offset();
    const cplx kappa = options.eps2_coeff * eps * eps + options.h_coeff * h;
    // corrections move the lattice by kappa (1 + <q>); enumerate around the
    // value whose shifted image lands on the anchor
    ActionEval ev;
    Vec2 shift = Vec2::Zero();
    try {
        ev = chart.evaluate(a);
        if (kappa != cplx(0.0, 0.0)) {
            for (int it = 0; it < 3; ++it) {
                const double q = chart.average_q(ev.xi);
                shift = Vec2(kappa.real() * (1.0 + q), kappa.imag() * (1.0 + q) / eps);
                ev = chart.evaluate(a - shift);
            }
        }
    } catch (const Error& e) {
        cloud.empty_warning = true;
        cloud.diagnostic = std::string("anchor outside the chart image: ") + e.what();
        return cloud;
    }
    // the rectangle is the square of half-size w around a after chi^-1
    const double w = rect.half_width;
    Vec2 reach;
    for (int i = 0; i < 2; ++i) reach[i] = 1.5 * w * (std::abs(ev.dphi_inv(i, 0)) + std::abs(ev.dphi_inv(i, 1))) + 2 * h;
    Vec2i klo, khi;
    for (int i = 0; i < 2; ++i) {
        klo[i] = static_cast<int>(std::floor((ev.xi[i] - reach[i] + tau[i]) / h + eta[i] / 4.0));
        khi[i] = static_cast<int>(std::ceil((ev.xi[i] + reach[i] + tau[i]) / h + eta[i] / 4.0));
    }
    for (int k1 = klo.x(); k1 <= khi.x(); ++k1) {
        for (int k2 = klo.y(); k2 <= khi.y(); ++k2) {
            const Vec2i k(k1, k2);
            const Vec2 xi = h * (k.cast<double>() - eta / 4.0) - tau;
            Vec2 c;
            try {
                c = chart.momentum(xi);
            } catch (const Error&) {
                continue;
            }
            if (std::abs(c.x() + shift.x() - a.x()) > 2 * w || std::abs(c.y() + shift.y() - a.y()) > 2 * w) continue;
            const double q = chart.average_q(xi);
            cplx mu(c.x(), eps * q);
            mu += kappa * (1.0 + q);
            mu += jitter(options, h, k, chart.domain);
            if (!rect.contains(mu)) continue;
            cloud.points.push_back(SpectrumPoint{mu, true, k, a, chart.domain});
        }
    }
    if (cloud.points.empty()) {
        cloud.empty_warning = true;
        cloud.diagnostic = "no lattice point inside the rectangle";
    }
    return cloud;
}

SpectrumCloud kam_synthesize(const ActionChart& chart, const Vec2& a, const GoodRectangle& rect,
                             const DiophantineParams& params, const SynthesisOptions& options) {
    params.validate();
    const double lambda = chart.model->lambda;
    if (lambda > params.alpha * params.alpha / 10.0) {
        std::ostringstream os;
        os << "lambda " << lambda << " exceeds alpha^2/10 = " << params.alpha * params.alpha / 10.0;
        fail(ErrorKind::LambdaTooLarge, os.str());
    }
    return synthesize_rectangle(chart, a, rect, options);
}

namespace {

struct CellKey {
    long long x, y;
    bool operator==(const CellKey& o) const { return x == o.x && y == o.y; }
};

struct CellHash {
    size_t operator()(const CellKey& k) const {
        return std::hash<long long>()(k.x) ^ (std::hash<long long>()(k.y) * 0x9e3779b97f4a7c15ULL);
    }
};

}  // namespace

SpectrumCloud synthesize_anchors(const ModelPtr& model, const std::vector<Vec2>& anchors, const BandParams& band,
                                 const SynthesisOptions& options, Exec exec) {
    check_regime(band.h, band.eps, band.delta);
    const long n = static_cast<long>(anchors.size());
    std::vector<SpectrumCloud> parts(anchors.size());
    std::vector<std::exception_ptr> errors(anchors.size());
    auto work = [&](long i) {
        try {
            const Vec2& a = anchors[static_cast<size_t>(i)];
            const GoodRectangle rect = good_rectangle(a, band.eps, band.h, band.delta, band.C);
            const ActionChart chart{model, a, 2.0 * rect.half_width, model->domain_of(a)};
            parts[static_cast<size_t>(i)] = synthesize_rectangle(chart, a, rect, options);
        } catch (...) {
            errors[static_cast<size_t>(i)] = std::current_exception();
        }
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (long i = 0; i < n; ++i) work(i);
    } else {
        for (long i = 0; i < n; ++i) work(i);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    SpectrumCloud cloud;
    cloud.h = band.h;
    cloud.eps = band.eps;
    cloud.delta = band.delta;
    cloud.lambda = model->lambda;
    cloud.jitter_exponent = options.jitter_exponent;
    cloud.seed = options.seed;
    cloud.model_name = model->name;
    cloud.anchors = anchors;

    // same torus seen from two anchors: identical (domain, k), or, across
    // chart domains, the same position up to jitter
    const double noise = options.jitter_exponent ? 2.0 * std::pow(band.h, *options.jitter_exponent) / band.eps : 0.0;
    const double tol = 0.05 * band.h + noise;
    std::unordered_map<CellKey, std::vector<size_t>, CellHash> grid;
    auto cell_of = [&](const cplx& z) {
        return CellKey{static_cast<long long>(std::floor(z.real() / tol)),
                       static_cast<long long>(std::floor(z.imag() / band.eps / tol))};
    };
    for (const SpectrumCloud& part : parts) {
        for (const SpectrumPoint& p : part.points) {
            const CellKey key = cell_of(p.mu);
            bool dup = false;
            for (long long dx = -1; dx <= 1 && !dup; ++dx)
                for (long long dy = -1; dy <= 1 && !dup; ++dy) {
                    auto it = grid.find(CellKey{key.x + dx, key.y + dy});
                    if (it == grid.end()) continue;
                    for (size_t j : it->second) {
                        const SpectrumPoint& q = cloud.points[j];
                        if ((q.domain == p.domain && q.k == p.k) ||
                            (std::abs(q.mu.real() - p.mu.real()) <= tol &&
                             std::abs(q.mu.imag() - p.mu.imag()) / band.eps <= tol)) {
                            dup = true;
                            break;
                        }
                    }
                }
            if (dup) continue;
            grid[key].push_back(cloud.points.size());
            cloud.points.push_back(p);
        }
    }
    if (cloud.points.empty()) {
        cloud.empty_warning = true;
        cloud.diagnostic = anchors.empty() ? "no anchors survived the good-value filter" : "no points synthesized";
    }
    return cloud;
}

bool is_good_value(const ModelPtr& model, const Vec2& c, const DiophantineParams& params, double step) {
    if (!model->is_regular(c)) return false;
    int dom = 0;
    try {
        dom = model->domain_of(c);
    } catch (const Error&) {
        return false;
    }
    const ActionChart chart{model, c, step, dom};
    if (model->lambda > 0.0) {
        if (model->lambda > params.alpha * params.alpha / 10.0) return false;
        return check_good_value(chart, c, params, step, 0.5, true).ok();
    }
    return check_good_value(chart, c, params, step).ok();
}

std::vector<Vec2> band_anchors(const ModelPtr& model, const Region& region, const DiophantineParams& params, int grid,
                               AnchorFilter filter) {
    if (grid <= 0) fail(ErrorKind::EmptySegment, "grid must be positive");
    params.validate();
    std::vector<Vec2> anchors;
    const double dE = (region.hi.x() - region.lo.x()) / grid;
    const double dG = (region.hi.y() - region.lo.y()) / grid;
    for (int i = 0; i < grid; ++i) {
        const double E = region.lo.x() + (i + 0.5) * dE;
        for (int j = 0; j < grid; ++j) {
            const Vec2 c(E, region.lo.y() + (j + 0.5) * dG);
            const bool keep = filter == AnchorFilter::Grid ? model->is_regular(c) : is_good_value(model, c, params, dG);
            if (keep) anchors.push_back(c);
        }
    }
    return anchors;
}

SpectrumCloud synthesize_band(const ModelPtr& model, const Region& region, const BandParams& band,
                              const DiophantineParams& params, int grid, const SynthesisOptions& options,
                              AnchorFilter filter, Exec exec) {
    check_regime(band.h, band.eps, band.delta);
    const std::vector<Vec2> anchors = band_anchors(model, region, params, grid, filter);
    SpectrumCloud cloud = synthesize_anchors(model, anchors, band, options, exec);
    if (anchors.empty()) cloud.diagnostic = "empty good-value set: no anchors survived the exclusions";
    return cloud;
}

}  // namespace specmono
