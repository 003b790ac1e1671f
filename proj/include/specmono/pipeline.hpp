#pragma once

#include "specmono/charts.hpp"
#include "specmono/monodromy.hpp"

#include <limits>
#include <string>
#include <vector>

namespace specmono {

struct ModelSpec {
    std::string name = "champagne";  // champagne | flat | quadratic
    Mat2 shear = Mat2::Identity();    // flat only
    Vec2 offset = Vec2::Zero();       // flat only
    double lambda = 0.0;
    double exclusion_radius = 0.05;
    int quadrature_nodes = 128;
};

ModelPtr make_model(const ModelSpec& spec);

/// Open set of a covering: an annular sector (angles in degrees, taken
/// counter-clockwise from `from_deg` to `to_deg`) or an axis-aligned box.
struct OpenSpec {
    enum class Shape { Arc, Box };
    std::string id;
    Shape shape = Shape::Arc;
    Vec2 center = Vec2::Zero();
    double r_in = 0.0;
    double r_out = std::numeric_limits<double>::infinity();
    double from_deg = 0.0;
    double to_deg = 360.0;
    Vec2 lo = Vec2::Zero();
    Vec2 hi = Vec2::Zero();

    bool contains(const Vec2& c) const;
};

OpenSpec arc_open(const std::string& id, const Vec2& center, double from_deg, double to_deg);
OpenSpec box_open(const std::string& id, const Vec2& lo, const Vec2& hi);

struct AnchorSpec {
    enum class Mode { Circle, Band, List };
    Mode mode = Mode::Circle;
    Vec2 center = Vec2::Zero();
    double radius = 0.15;
    int count = 180;
    double phase_deg = 0.0;
    Region region{Vec2::Zero(), Vec2::Zero()};
    int grid = 10;
    AnchorFilter filter = AnchorFilter::GoodValues;
    std::vector<Vec2> points;
};

struct PipelineConfig {
    ModelSpec model;
    BandParams band;
    DiophantineParams diophantine;
    SynthesisOptions synthesis;
    PseudoChartOptions chart;
    AnchorSpec anchors;
    std::vector<OpenSpec> opens;
    std::vector<std::string> loop;
    int transition_samples = 8;
    int classical_points = 64;
    double classical_radius = 0.02;
    Exec exec = Exec::Parallel;
};

/// Four-open annulus around `center`; U1 and U3 are disjoint and the loop is
/// U0 -> U1 -> U2 -> U3 -> U0.
std::vector<OpenSpec> annulus_covering(const Vec2& center);
std::vector<std::string> annulus_loop();

/// Champagne-bottle defaults: good anchors on the circle of radius 0.15
/// around the critical value, annulus covering, h = 1e-3, eps = 1e-2.
PipelineConfig champagne_annulus_config();

std::vector<Vec2> make_anchors(const ModelPtr& model, const AnchorSpec& spec, const DiophantineParams& params);

/// One pseudo-chart per open set, each assembled from the anchors inside it.
/// Micro-charts are fitted once per anchor and shared.
std::vector<PseudoChart> build_pseudo_charts(const SpectrumCloud& cloud, const std::vector<OpenSpec>& opens,
                                             const PseudoChartOptions& options);

struct PipelineResult {
    SpectrumCloud cloud;
    std::vector<PseudoChart> charts;
    TransitionCocycle cocycle;
    HolonomyClass holonomy;
};

SpectrumCloud generate_cloud(const ModelPtr& model, const PipelineConfig& config);
PipelineResult run_pipeline(const ModelPtr& model, const PipelineConfig& config);

/// Classical holonomy along the anchor circle (circle anchor mode only).
HolonomyClass classical_reference(const ModelPtr& model, const PipelineConfig& config);

struct LambdaInvarianceReport {
    bool ok = false;
    std::vector<double> lambdas;
    std::vector<std::map<std::pair<int, int>, Mat2i>> edges;  // per lambda
    std::vector<HolonomyClass> holonomy;
    std::vector<Vec2> anchors;  // good for every lambda
    std::string mismatch;
    explicit operator bool() const { return ok; }
};

/// Runs the pipeline for p + lambda <p1> with each lambda on a common anchor
/// set and compares the edge matrices exactly.
LambdaInvarianceReport lambda_invariance_check(const ModelPtr& base, const std::vector<double>& lambdas,
                                               const PipelineConfig& config);

}  // namespace specmono
