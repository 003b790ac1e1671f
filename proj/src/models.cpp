#include "specmono/models.hpp"

#include "specmono/champagne.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace specmono {

bool SymbolModel::near_critical(const Vec2& c, double margin) const {
    for (const Vec2& v : critical_values)
        if ((c - v).norm() < exclusion_radius + margin) return true;
    return false;
}

bool SymbolModel::is_regular(const Vec2& c) const { return region.contains(c); }

bool RegularRegion::contains(const Vec2& c) const {
    if (c.x() <= lo.x() || c.y() <= lo.y() || c.x() >= hi.x() || c.y() >= hi.y()) return false;
    for (const Disk& d : holes)
        if ((c - d.center).norm() < d.radius) return false;
    return !admissible || admissible(c);
}

bool RegularRegion::contains_disk(const Vec2& c, double radius) const {
    if (c.x() - radius <= lo.x() || c.y() - radius <= lo.y() || c.x() + radius >= hi.x() ||
        c.y() + radius >= hi.y())
        return false;
    for (const Disk& d : holes)
        if ((c - d.center).norm() < d.radius + radius) return false;
    if (!admissible) return true;
    if (!admissible(c)) return false;
    for (int k = 0; k < 16; ++k) {
        const double t = 2.0 * M_PI * k / 16.0;
        if (!admissible(c + radius * Vec2(std::cos(t), std::sin(t)))) return false;
    }
    return true;
}

HolonomyClass HolonomyClass::of(const Mat2i& m, std::vector<std::string> loop) {
    HolonomyClass h;
    h.representative = m;
    h.determinant = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    h.trace = m(0, 0) + m(1, 1);
    h.loop = std::move(loop);
    return h;
}

Vec2 ActionChart::action_map(const Vec2& c) const { return model->action(c, domain).xi; }
Mat2 ActionChart::differential(const Vec2& c) const { return model->action(c, domain).dphi_inv; }
ActionEval ActionChart::evaluate(const Vec2& c) const { return model->action(c, domain); }
Vec2 ActionChart::momentum(const Vec2& xi) const { return model->momentum(xi, domain); }
Vec2 ActionChart::frequency(const Vec2& xi) const { return model->frequency(xi, domain); }
double ActionChart::average_q(const Vec2& xi) const { return model->average_q(xi, domain); }
Vec2i ActionChart::maslov() const { return model->maslov.at(domain); }
Vec2 ActionChart::action_offset() const { return model->action_offset.at(domain); }

ModelPtr flat_model(const Mat2& shear, const Vec2& offset) {
    if (std::abs(shear.determinant()) < 1e-14 * std::max(1.0, shear.squaredNorm()))
        fail(ErrorKind::SingularMatrix, "flat_model shear is singular");
    auto m = std::make_shared<SymbolModel>();
    const Mat2 inv = shear.inverse();
    m->name = "flat";
    m->region.lo = Vec2(-10.0, -10.0);
    m->region.hi = Vec2(10.0, 10.0);
    m->maslov = {Vec2i::Zero()};
    m->action_offset = {Vec2::Zero()};
    m->domain_of = [](const Vec2&) { return 0; };
    m->action = [shear, offset](const Vec2& c, int) { return ActionEval{shear * c + offset, shear}; };
    m->momentum = [inv, offset](const Vec2& xi, int) -> Vec2 { return inv * (xi - offset); };
    m->frequency = [inv](const Vec2&, int) -> Vec2 { return inv.row(0).transpose(); };
    m->average_q = [inv, offset](const Vec2& xi, int) { return inv.row(1).dot(xi - offset); };
    m->p1_average = [](const Vec2& xi, int) { return xi.x() * xi.x(); };
    return m;
}

ModelPtr quadratic_model() {
    auto m = std::make_shared<SymbolModel>();
    m->name = "quadratic";
    m->region.lo = Vec2(0.0, -2.0);
    m->region.hi = Vec2(10.0, 2.0);
    m->region.admissible = [](const Vec2& c) { return 2.0 * c.x() - c.y() * c.y() > 1e-3; };
    m->maslov = {Vec2i::Zero()};
    m->action_offset = {Vec2::Zero()};
    m->domain_of = [](const Vec2&) { return 0; };
    m->action = [](const Vec2& c, int) {
        const double a = 2.0 * c.x() - c.y() * c.y();
        if (a <= 0.0) fail(ErrorKind::OutsideRegularRegion, "outside the quadratic model image");
        const double x1 = std::sqrt(a);
        Mat2 d;
        d << 1.0 / x1, -c.y() / x1, 0.0, 1.0;
        return ActionEval{Vec2(x1, c.y()), d};
    };
    m->momentum = [](const Vec2& xi, int) { return Vec2(0.5 * xi.squaredNorm(), xi.y()); };
    m->frequency = [](const Vec2& xi, int) { return xi; };
    m->average_q = [](const Vec2& xi, int) { return xi.y(); };
    m->p1_average = [](const Vec2& xi, int) { return xi.x() * xi.x(); };
    return m;
}

ModelPtr champagne_bottle(const ChampagneOptions& options) {
    if (options.exclusion_radius <= 0.0 || options.quadrature_nodes < 8)
        fail(ErrorKind::InvalidParameter, "champagne_bottle options");
    auto m = std::make_shared<SymbolModel>();
    const int nodes = options.quadrature_nodes;
    const double excl = options.exclusion_radius;
    m->name = "champagne_bottle";
    m->critical_values = {Vec2::Zero()};
    m->exclusion_radius = excl;
    m->region.lo = Vec2(-0.25, -1.0);
    m->region.hi = Vec2(2.5, 1.0);
    m->region.holes = {Disk{Vec2::Zero(), excl}};
    m->region.admissible = [](const Vec2& c) { return c.x() - champagne::effective_minimum(c.y()) > 5e-3; };
    m->maslov.assign(4, Vec2i::Zero());
    m->action_offset.assign(4, Vec2::Zero());
    m->domain_of = [excl](const Vec2& c) {
        if (c.norm() < excl) fail(ErrorKind::OutsideRegularRegion, "inside the focus-focus exclusion disk");
        return champagne::sector(c);
    };
    m->action = [nodes, excl](const Vec2& c, int dom) {
        if (c.norm() < excl) fail(ErrorKind::OutsideRegularRegion, "inside the focus-focus exclusion disk");
        const double j = c.y();
        const champagne::Radial r = champagne::radial(c.x(), j, nodes);
        ActionEval out;
        out.xi = Vec2(r.action + champagne::branch_shift(j, dom), j);
        out.dphi_inv << r.period / (2.0 * M_PI), -r.theta / (2.0 * M_PI) + champagne::branch_shift_slope(j, dom), 0.0,
            1.0;
        return out;
    };
    m->momentum = [nodes](const Vec2& xi, int dom) {
        const double j = xi.y();
        return Vec2(champagne::energy_for_action(xi.x() - champagne::branch_shift(j, dom), j, nodes), j);
    };
    m->frequency = [nodes](const Vec2& xi, int dom) {
        const double j = xi.y();
        const double E = champagne::energy_for_action(xi.x() - champagne::branch_shift(j, dom), j, nodes);
        const champagne::Radial r = champagne::radial(E, j, nodes);
        const double slope = champagne::branch_shift_slope(j, dom);
        return Vec2(2.0 * M_PI / r.period, (r.theta - 2.0 * M_PI * slope) / r.period);
    };
    m->average_q = [](const Vec2& xi, int) { return xi.y(); };
    // the radial action squared, a function of (E, j) alone
    m->p1_average = [](const Vec2& xi, int dom) {
        const double ir = xi.x() - champagne::branch_shift(xi.y(), dom);
        return ir * ir;
    };
    return m;
}

namespace {

Vec2 gradient_p1(const SymbolModel& base, const Vec2& xi, int dom) {
    Vec2 g;
    for (int i = 0; i < 2; ++i) {
        const double step = 1e-6 * std::max(1.0, std::abs(xi[i]));
        Vec2 a = xi, b = xi;
        a[i] += step;
        b[i] -= step;
        g[i] = (base.p1_average(a, dom) - base.p1_average(b, dom)) / (2.0 * step);
    }
    return g;
}

}  // namespace

ModelPtr perturbed_model(const ModelPtr& base, double lambda) {
    if (lambda < 0.0) fail(ErrorKind::InvalidParameter, "negative lambda");
    if (lambda == 0.0) return base;
    if (!base->p1_average) fail(ErrorKind::InvalidParameter, "base model has no <p1> provider");
    auto m = std::make_shared<SymbolModel>(*base);
    m->name = base->name + "+lambda";
    m->lambda = lambda;
    m->momentum = [base, lambda](const Vec2& xi, int dom) {
        Vec2 c = base->momentum(xi, dom);
        c.x() += lambda * base->p1_average(xi, dom);
        return c;
    };
    m->frequency = [base, lambda](const Vec2& xi, int dom) -> Vec2 {
        return base->frequency(xi, dom) + lambda * gradient_p1(*base, xi, dom);
    };
    m->action = [base, lambda](const Vec2& c, int dom) {
        // fixed point of xi = base_action(c - lambda <p1>(xi) e1); contraction rate O(lambda)
        ActionEval ev = base->action(c, dom);
        for (int it = 0; it < 60; ++it) {
            Vec2 cb = c;
            cb.x() -= lambda * base->p1_average(ev.xi, dom);
            const ActionEval next = base->action(cb, dom);
            const double change = (next.xi - ev.xi).norm();
            ev = next;
            if (change <= 1e-15 * (1.0 + ev.xi.norm())) break;
        }
        Mat2 dphi = ev.dphi_inv.inverse();
        dphi.row(0) += lambda * gradient_p1(*base, ev.xi, dom).transpose();
        return ActionEval{ev.xi, dphi.inverse()};
    };
    return m;
}

ModelPtr with_p1(const ModelPtr& base, std::function<double(const Vec2&, int)> p1) {
    auto m = std::make_shared<SymbolModel>(*base);
    m->p1_average = std::move(p1);
    return m;
}

ModelPtr with_metadata(const ModelPtr& base, const Vec2i& maslov, const Vec2& offset) {
    auto m = std::make_shared<SymbolModel>(*base);
    m->maslov.assign(base->maslov.size(), maslov);
    m->action_offset.assign(base->action_offset.size(), offset);
    return m;
}

ActionChart action_chart_at(const ModelPtr& model, const Vec2& c, double radius) {
    if (!(radius > 0.0)) fail(ErrorKind::InvalidParameter, "chart radius must be positive");
    if (!model->region.contains_disk(c, radius)) {
        std::ostringstream os;
        os << "disk of radius " << radius << " around (" << c.x() << ", " << c.y() << ") leaves the regular region";
        fail(ErrorKind::OutsideRegularRegion, os.str());
    }
    return ActionChart{model, c, radius, model->domain_of(c)};
}

namespace {

std::vector<Vec2> lens_samples(const ActionChart& a, const ActionChart& b, int samples) {
    const Vec2 axis = b.center - a.center;
    const double d = axis.norm();
    if (d == 0.0) {
        std::vector<Vec2> pts;
        const double r = 0.5 * std::min(a.radius, b.radius);
        for (int k = 0; k < samples; ++k) {
            const double t = 2.0 * M_PI * k / samples;
            pts.push_back(a.center + (k == 0 ? 0.0 : r) * Vec2(std::cos(t), std::sin(t)));
        }
        return pts;
    }
    if (d >= a.radius + b.radius) return {};
    const Vec2 e = axis / d;
    const Vec2 n(-e.y(), e.x());
    const double x0 = std::max(-a.radius, d - b.radius), x1 = std::min(a.radius, d + b.radius);
    std::vector<Vec2> pts;
    for (int k = 0; k < samples; ++k) {
        const double x = x0 + (x1 - x0) * (0.05 + 0.9 * (k + 0.5) / samples);
        const double ha = std::sqrt(std::max(0.0, a.radius * a.radius - x * x));
        const double hb = std::sqrt(std::max(0.0, b.radius * b.radius - (x - d) * (x - d)));
        const double y = 0.3 * std::min(ha, hb) * ((k % 3) - 1);
        pts.push_back(a.center + x * e + y * n);
    }
    return pts;
}

}  // namespace

ClassicalTransition classical_transition(const ActionChart& chart_i, const ActionChart& chart_j, int overlap_samples) {
    if (overlap_samples < 1) fail(ErrorKind::InvalidParameter, "overlap_samples must be positive");
    std::vector<Vec2> pts;
    for (const Vec2& c : lens_samples(chart_i, chart_j, overlap_samples))
        if (chart_i.contains(c) && chart_j.contains(c) && chart_i.model->is_regular(c)) pts.push_back(c);
    if (pts.empty()) fail(ErrorKind::NoOverlap, "chart domains do not overlap");

    Mat2 mean = Mat2::Zero();
    std::vector<Mat2> ds;
    std::vector<std::pair<Vec2, Vec2>> xis;
    for (const Vec2& c : pts) {
        const ActionEval ei = chart_i.evaluate(c), ej = chart_j.evaluate(c);
        ds.push_back(ei.dphi_inv * ej.dphi_inv.inverse());
        xis.emplace_back(ei.xi, ej.xi);
        mean += ds.back();
    }
    mean /= static_cast<double>(ds.size());
    ClassicalTransition out;
    out.matrix = round_matrix(mean);
    for (const Mat2& d : ds) out.deviation = std::max(out.deviation, max_abs(d - out.matrix.cast<double>()));
    if (out.deviation >= 0.1) {
        std::ostringstream os;
        os << "pre-rounding deviation " << out.deviation;
        fail(ErrorKind::NonIntegerTransition, os.str());
    }
    const int det = out.matrix.determinant();
    if (det != 1 && det != -1) fail(ErrorKind::NonUnimodular, "classical transition determinant " + std::to_string(det));
    out.affine = Vec2::Zero();
    for (const auto& [xi_i, xi_j] : xis) out.affine += xi_i - out.matrix.cast<double>() * xi_j;
    out.affine /= static_cast<double>(xis.size());
    return out;
}

HolonomyClass classical_holonomy(const ModelPtr& model, const std::vector<Vec2>& loop, double radius) {
    if (loop.size() < 3) fail(ErrorKind::OpenLoop, "loop needs at least three points");
    if ((loop.front() - loop.back()).norm() > 1e-12) fail(ErrorKind::OpenLoop, "first and last loop points differ");
    const size_t n = loop.size() - 1;
    std::vector<ActionChart> charts;
    charts.reserve(n);
    for (size_t k = 0; k < n; ++k) charts.push_back(action_chart_at(model, loop[k], radius));
    Mat2i h = Mat2i::Identity();
    std::vector<std::string> ids;
    for (size_t k = 0; k < n; ++k) {
        h = h * classical_transition(charts[k], charts[(k + 1) % n], 8).matrix;
        ids.push_back("c" + std::to_string(k));
    }
    return HolonomyClass::of(h, ids);
}

IsoenergeticReport isoenergetic_check(const ActionChart& chart, int samples) {
    IsoenergeticReport rep;
    if (samples < 1) fail(ErrorKind::InvalidParameter, "samples must be positive");
    rep.min_abs_det = std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
        // golden-angle spiral inside 80% of the disk
        const double r = 0.8 * chart.radius * std::sqrt((k + 0.5) / samples);
        const double t = k * M_PI * (3.0 - std::sqrt(5.0));
        const Vec2 c = chart.center + r * Vec2(std::cos(t), std::sin(t));
        const Vec2 xi = chart.action_map(c);
        Mat2 dw;
        for (int i = 0; i < 2; ++i) {
            const double step = 1e-4 * std::max(1.0, std::abs(xi[i]));
            Vec2 a = xi, b = xi;
            a[i] += step;
            b[i] -= step;
            dw.col(i) = (chart.frequency(a) - chart.frequency(b)) / (2.0 * step);
        }
        const double det = std::abs(dw.determinant());
        rep.min_abs_det = std::min(rep.min_abs_det, det);
        if (det <= 1e-8) rep.failing.push_back(c);
    }
    rep.ok = rep.failing.empty();
    return rep;
}

std::vector<Vec2> circle_loop(const Vec2& center, double radius, int points, double phase) {
    std::vector<Vec2> loop;
    for (int k = 0; k < points; ++k) {
        const double t = phase + 2.0 * M_PI * k / points;
        loop.push_back(center + radius * Vec2(std::cos(t), std::sin(t)));
    }
    loop.push_back(loop.front());
    return loop;
}

Mat2 finite_difference_differential(const ActionChart& chart, const Vec2& c, double step) {
    Mat2 d;
    for (int i = 0; i < 2; ++i) {
        Vec2 a = c, b = c;
        a[i] += step;
        b[i] -= step;
        d.col(i) = (chart.action_map(a) - chart.action_map(b)) / (2.0 * step);
    }
    return d;
}

}  // namespace specmono
