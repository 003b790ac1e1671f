#pragma once

#include "specmono/parallel.hpp"
#include "specmono/spectrum.hpp"

#include <optional>
#include <string>
#include <vector>

namespace specmono {

struct FitOptions {
    int neighbors = 8;
    double cluster_radius = 0.1;  // fraction of the shortest difference
    double min_sin = 0.05;
    int max_iterations = 10;
    bool quadratic = true;         // used when at least 12 points are present
    double label_tolerance = 0.25; // max |A^-1 r|_inf accepted, in label units
};

/// Affine lattice chart of one rectangle: chi^-1(mu) ~ A k + b (+ quadratic
/// terms), in absolute chi^-1 units. Labels are normalized so that the first
/// basis vector is the most horizontal one with positive x, det A > 0, and the
/// point nearest the rectangle centre has label (0, 0).
struct MicroChart {
    GoodRectangle rectangle;
    std::vector<size_t> indices;  // into the cloud the chart was fitted on
    std::vector<Vec2> positions;  // chi^-1 of the fitted points
    std::vector<Vec2i> labels;
    Mat2 A = Mat2::Identity();
    Vec2 b = Vec2::Zero();
    bool has_quadratic = false;
    Eigen::Matrix<double, 2, 3> quadratic = Eigen::Matrix<double, 2, 3>::Zero();  // k1^2, k1 k2, k2^2
    double residual = 0.0;           // max |chi^-1(mu) - model(k)|
    double relative_residual = 0.0;  // residual / h
    double label_residual = 0.0;     // max |A^-1 r|_inf
    int iterations = 0;

    Vec2 predict(const Vec2i& k) const;
};

/// chi^-1: (Re z, Im z / eps).
Vec2 chi_inverse(const cplx& z, double eps);

MicroChart fit_micro_chart(const std::vector<cplx>& points, const GoodRectangle& rect, const FitOptions& options = {});

/// Fits the cloud points lying in the rectangle.
MicroChart fit_micro_chart(const SpectrumCloud& cloud, const GoodRectangle& rect, const FitOptions& options = {});

struct PseudoChartOptions {
    FitOptions fit;
    double C = 10.0;
    double link_radius = 0.0;  // 0 selects h^delta / (2C)
    int degree = 3;
    double ridge = 1e-8;
    double align_threshold = 0.2;
    int reference = -1;  // -1 selects the anchor nearest the anchor centroid
    Exec exec = Exec::Parallel;
};

struct PseudoChart {
    std::string id;
    double h = 0.0;
    double eps = 0.0;
    double delta = 0.5;
    std::vector<Vec2> anchors;
    std::vector<MicroChart> micro_charts;
    std::vector<Mat2i> frames;  // k_reference = frames[i] * k_i
    std::vector<double> align_deviation;
    int reference = 0;
    Mat2 alignment_frame = Mat2::Identity();  // affine part A of the reference micro-chart
    Vec2 origin = Vec2::Zero();
    double scale = 1.0;
    int degree = 3;
    Eigen::MatrixXd coefficients;  // 2 x monomial count
    std::vector<Vec2> offsets;     // fitted per-rectangle translations
    double domain_radius = 0.0;

    bool in_domain(const Vec2& c) const;
    Vec2 value(const Vec2& c) const;
    Mat2 differential(const Vec2& c) const;
};

/// One micro-chart per anchor rectangle; errors name the failing rectangle.
std::vector<MicroChart> fit_micro_charts(const SpectrumCloud& cloud, const std::vector<Vec2>& anchors,
                                         const PseudoChartOptions& options = {});
/// Fits micro-charts on every anchor rectangle, aligns them to the reference
/// rectangle along the anchor link graph and fits the common leading term.
PseudoChart assemble_pseudo_chart(const SpectrumCloud& cloud, const std::vector<Vec2>& anchors,
                                  const PseudoChartOptions& options = {});

/// Same, reusing micro-charts fitted beforehand (one per anchor).
PseudoChart assemble_from_micro_charts(const std::vector<MicroChart>& micro, const std::vector<Vec2>& anchors,
                                       double h, double eps, double delta, const PseudoChartOptions& options = {});

Mat2 leading_term_differential(const PseudoChart& pc, const Vec2& c);

/// Monomials x^a y^b with a + b <= degree, ordered by total degree.
std::vector<std::pair<int, int>> monomials(int degree);

}  // namespace specmono
