#include "specmono/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace specmono {

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_deg(double a) {
    a = std::fmod(a, 360.0);
    return a < 0.0 ? a + 360.0 : a;
}

}  // namespace

ModelPtr make_model(const ModelSpec& spec) {
    ModelPtr base;
    if (spec.name == "champagne") {
        ChampagneOptions o;
        o.exclusion_radius = spec.exclusion_radius;
        o.quadrature_nodes = spec.quadrature_nodes;
        base = champagne_bottle(o);
    } else if (spec.name == "flat") {
        base = flat_model(spec.shear, spec.offset);
    } else if (spec.name == "quadratic") {
        base = quadratic_model();
    } else {
        fail(ErrorKind::InvalidParameter, "unknown model " + spec.name);
    }
    if (spec.lambda != 0.0) return perturbed_model(base, spec.lambda);
    return base;
}

bool OpenSpec::contains(const Vec2& c) const {
    if (shape == Shape::Box) return c.x() >= lo.x() && c.x() <= hi.x() && c.y() >= lo.y() && c.y() <= hi.y();
    const Vec2 d = c - center;
    const double r = d.norm();
    if (r < r_in || r > r_out) return false;
    const double span = to_deg - from_deg;
    if (span >= 360.0) return true;
    const double a = wrap_deg(std::atan2(d.y(), d.x()) * 180.0 / kPi - from_deg);
    return a <= span + 1e-12;
}

OpenSpec arc_open(const std::string& id, const Vec2& center, double from_deg, double to_deg) {
    OpenSpec o;
    o.id = id;
    o.shape = OpenSpec::Shape::Arc;
    o.center = center;
    o.from_deg = from_deg;
    o.to_deg = to_deg;
    return o;
}

OpenSpec box_open(const std::string& id, const Vec2& lo, const Vec2& hi) {
    OpenSpec o;
    o.id = id;
    o.shape = OpenSpec::Shape::Box;
    o.lo = lo;
    o.hi = hi;
    return o;
}

std::vector<OpenSpec> annulus_covering(const Vec2& center) {
    return {arc_open("U0", center, -30.0, 130.0), arc_open("U1", center, 60.0, 150.0),
            arc_open("U2", center, 100.0, 250.0), arc_open("U3", center, 220.0, 340.0)};
}

std::vector<std::string> annulus_loop() { return {"U0", "U1", "U2", "U3", "U0"}; }

PipelineConfig champagne_annulus_config() {
    PipelineConfig cfg;
    cfg.model.name = "champagne";
    cfg.band = BandParams{1e-2, 1e-3, 0.5, 10.0};
    cfg.anchors.mode = AnchorSpec::Mode::Circle;
    cfg.anchors.center = Vec2::Zero();
    cfg.anchors.radius = 0.15;
    cfg.anchors.count = 180;
    cfg.chart.C = cfg.band.C;
    cfg.chart.link_radius = 0.06;
    cfg.opens = annulus_covering(Vec2::Zero());
    cfg.loop = annulus_loop();
    return cfg;
}

std::vector<Vec2> make_anchors(const ModelPtr& model, const AnchorSpec& spec, const DiophantineParams& params) {
    switch (spec.mode) {
        case AnchorSpec::Mode::List:
            return spec.points;
        case AnchorSpec::Mode::Band:
            return band_anchors(model, spec.region, params, spec.grid, spec.filter);
        case AnchorSpec::Mode::Circle:
            break;
    }
    if (spec.count < 3 || !(spec.radius > 0.0)) fail(ErrorKind::InvalidParameter, "circle anchors need count >= 3");
    params.validate();
    const double step = 2.0 * kPi * spec.radius / spec.count;
    std::vector<Vec2> out;
    for (int t = 0; t < spec.count; ++t) {
        const double a = (spec.phase_deg + 360.0 * t / spec.count) * kPi / 180.0;
        const Vec2 c = spec.center + spec.radius * Vec2(std::cos(a), std::sin(a));
        const bool keep = spec.filter == AnchorFilter::Grid ? model->is_regular(c)
                                                            : is_good_value(model, c, params, step);
        if (keep) out.push_back(c);
    }
    return out;
}

std::vector<PseudoChart> build_pseudo_charts(const SpectrumCloud& cloud, const std::vector<OpenSpec>& opens,
                                             const PseudoChartOptions& options) {
    std::vector<bool> used(cloud.anchors.size(), false);
    for (size_t a = 0; a < cloud.anchors.size(); ++a)
        for (const OpenSpec& o : opens)
            if (o.contains(cloud.anchors[a])) used[a] = true;
    std::vector<Vec2> fit_anchors;
    std::vector<long> slot(cloud.anchors.size(), -1);
    for (size_t a = 0; a < cloud.anchors.size(); ++a)
        if (used[a]) {
            slot[a] = static_cast<long>(fit_anchors.size());
            fit_anchors.push_back(cloud.anchors[a]);
        }
    const std::vector<MicroChart> micro = fit_micro_charts(cloud, fit_anchors, options);

    std::vector<PseudoChart> charts;
    for (const OpenSpec& o : opens) {
        std::vector<Vec2> anchors;
        std::vector<MicroChart> mc;
        for (size_t a = 0; a < cloud.anchors.size(); ++a)
            if (o.contains(cloud.anchors[a])) {
                anchors.push_back(cloud.anchors[a]);
                mc.push_back(micro[static_cast<size_t>(slot[a])]);
            }
        if (anchors.empty()) fail(ErrorKind::InsufficientPoints, "open set " + o.id + " contains no anchors");
        try {
            PseudoChart pc = assemble_from_micro_charts(mc, anchors, cloud.h, cloud.eps, cloud.delta, options);
            pc.id = o.id;
            charts.push_back(std::move(pc));
        } catch (const Error& e) {
            throw Error(e.kind(), "open set " + o.id + ": " + e.detail());
        }
    }
    return charts;
}

SpectrumCloud generate_cloud(const ModelPtr& model, const PipelineConfig& cfg) {
    check_regime(cfg.band.h, cfg.band.eps, cfg.band.delta);
    const std::vector<Vec2> anchors = make_anchors(model, cfg.anchors, cfg.diophantine);
    SpectrumCloud cloud = synthesize_anchors(model, anchors, cfg.band, cfg.synthesis, cfg.exec);
    if (anchors.empty()) cloud.diagnostic = "empty good-value set: no anchors survived the exclusions";
    return cloud;
}

PipelineResult run_pipeline(const ModelPtr& model, const PipelineConfig& cfg) {
    PipelineResult r;
    r.cloud = generate_cloud(model, cfg);
    PseudoChartOptions opt = cfg.chart;
    opt.exec = cfg.exec;
    r.charts = build_pseudo_charts(r.cloud, cfg.opens, opt);
    r.cocycle = build_cocycle(r.charts, make_covering(r.charts), cfg.transition_samples, cfg.exec);
    if (!cfg.loop.empty()) r.holonomy = holonomy(r.cocycle, cfg.loop);
    return r;
}

HolonomyClass classical_reference(const ModelPtr& model, const PipelineConfig& cfg) {
    if (cfg.anchors.mode != AnchorSpec::Mode::Circle)
        fail(ErrorKind::InvalidParameter, "classical reference loop needs circle anchors");
    return classical_holonomy(model,
                              circle_loop(cfg.anchors.center, cfg.anchors.radius, cfg.classical_points,
                                          cfg.anchors.phase_deg * kPi / 180.0),
                              cfg.classical_radius);
}

LambdaInvarianceReport lambda_invariance_check(const ModelPtr& base, const std::vector<double>& lambdas,
                                               const PipelineConfig& cfg) {
    LambdaInvarianceReport rep;
    rep.lambdas = lambdas;
    if (lambdas.empty()) fail(ErrorKind::InvalidParameter, "no lambda values given");
    std::vector<ModelPtr> models;
    for (double l : lambdas) {
        if (l > cfg.diophantine.alpha * cfg.diophantine.alpha / 10.0) {
            std::ostringstream os;
            os << "lambda " << l << " exceeds alpha^2/10";
            fail(ErrorKind::LambdaTooLarge, os.str());
        }
        models.push_back(perturbed_model(base, l));
    }
    std::vector<Vec2> common = make_anchors(models[0], cfg.anchors, cfg.diophantine);
    for (size_t m = 1; m < models.size(); ++m) {
        const std::vector<Vec2> other = make_anchors(models[m], cfg.anchors, cfg.diophantine);
        std::vector<Vec2> keep;
        for (const Vec2& a : common)
            if (std::any_of(other.begin(), other.end(), [&](const Vec2& b) { return (a - b).norm() == 0.0; }))
                keep.push_back(a);
        common = std::move(keep);
    }
    rep.anchors = common;
    PipelineConfig c = cfg;
    c.anchors.mode = AnchorSpec::Mode::List;
    c.anchors.points = common;
    for (size_t m = 0; m < models.size(); ++m) {
        const PipelineResult r = run_pipeline(models[m], c);
        rep.edges.push_back(r.cocycle.matrices);
        rep.holonomy.push_back(r.holonomy);
    }
    rep.ok = true;
    for (size_t m = 1; m < rep.edges.size() && rep.ok; ++m)
        if (rep.edges[m] != rep.edges[0]) {
            rep.ok = false;
            std::ostringstream os;
            os << "edge matrices at lambda " << lambdas[m] << " differ from lambda " << lambdas[0];
            rep.mismatch = os.str();
        }
    return rep;
}

}  // namespace specmono
