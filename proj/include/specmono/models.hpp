#pragma once

#include "specmono/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace specmono {

struct Disk {
    Vec2 center;
    double radius = 0.0;
};

/// Outer box minus excluded disks, optionally intersected with an
/// admissibility predicate (e.g. the image of the momentum map).
struct RegularRegion {
    Vec2 lo{-1.0, -1.0};
    Vec2 hi{1.0, 1.0};
    std::vector<Disk> holes;
    std::function<bool(const Vec2&)> admissible;

    bool contains(const Vec2& c) const;
    bool contains_disk(const Vec2& c, double radius) const;
};

struct ActionEval {
    Vec2 xi;
    Mat2 dphi_inv;  // differential of c -> xi
};

/// Value-space description of an integrable (or lambda-perturbed) system.
/// Chart domains are integers; providers receive the domain whose branch of
/// the action map they must use.
struct SymbolModel {
    std::string name;
    RegularRegion region;
    std::vector<Vec2> critical_values;
    double exclusion_radius = 0.05;
    double lambda = 0.0;
    std::vector<Vec2i> maslov;        // per domain
    std::vector<Vec2> action_offset;  // per domain

    std::function<int(const Vec2&)> domain_of;
    std::function<ActionEval(const Vec2&, int)> action;   // c -> (xi, dphi^-1)
    std::function<Vec2(const Vec2&, int)> momentum;       // xi -> phi(xi) = (p, <q>)
    std::function<Vec2(const Vec2&, int)> frequency;      // xi -> omega
    std::function<double(const Vec2&, int)> average_q;    // xi -> <q>
    std::function<double(const Vec2&, int)> p1_average;   // optional, xi -> <p1>

    int domain_count() const { return static_cast<int>(maslov.size()); }
    bool near_critical(const Vec2& c, double margin = 0.0) const;
    bool is_regular(const Vec2& c) const;
};

using ModelPtr = std::shared_ptr<const SymbolModel>;

struct ActionChart {
    ModelPtr model;
    Vec2 center;
    double radius = 0.0;
    int domain = 0;

    Vec2 action_map(const Vec2& c) const;
    Mat2 differential(const Vec2& c) const;
    ActionEval evaluate(const Vec2& c) const;
    Vec2 momentum(const Vec2& xi) const;
    Vec2 frequency(const Vec2& xi) const;
    double average_q(const Vec2& xi) const;
    Vec2i maslov() const;
    Vec2 action_offset() const;
    bool contains(const Vec2& c) const { return (c - center).norm() < radius; }
};

struct HolonomyClass {
    Mat2i representative = Mat2i::Identity();
    int determinant = 1;
    int trace = 2;
    std::vector<std::string> loop;

    static HolonomyClass of(const Mat2i& m, std::vector<std::string> loop = {});
    bool is_identity() const { return representative == Mat2i::Identity(); }
};

struct ClassicalTransition {
    Mat2i matrix;
    Vec2 affine;
    double deviation = 0.0;
};

struct IsoenergeticReport {
    bool ok = false;
    double min_abs_det = 0.0;
    std::vector<Vec2> failing;
    explicit operator bool() const { return ok; }
};

/// phi^-1(c) = shear * c + offset on the whole plane.
ModelPtr flat_model(const Mat2& shear, const Vec2& offset = Vec2::Zero());

/// p(xi) = |xi|^2 / 2, <q> = xi_2 on the half-plane xi_1 > 0.
ModelPtr quadratic_model();

struct ChampagneOptions {
    double exclusion_radius = 0.05;
    int quadrature_nodes = 128;
};

/// H = |p|^2/2 - r^2 + r^4 with q the angular momentum.
ModelPtr champagne_bottle(const ChampagneOptions& options = {});

/// Quasi-integrable model with p_lambda = p + lambda <p1>; the base model must
/// provide p1_average.
ModelPtr perturbed_model(const ModelPtr& base, double lambda);

/// Copy of a model with a different <p1> provider.
ModelPtr with_p1(const ModelPtr& base, std::function<double(const Vec2&, int)> p1);

/// Copy of a model with its Maslov index and action offset replaced on every domain.
ModelPtr with_metadata(const ModelPtr& base, const Vec2i& maslov, const Vec2& offset);

ActionChart action_chart_at(const ModelPtr& model, const Vec2& c, double radius);

ClassicalTransition classical_transition(const ActionChart& chart_i, const ActionChart& chart_j, int overlap_samples);

HolonomyClass classical_holonomy(const ModelPtr& model, const std::vector<Vec2>& loop, double radius);

IsoenergeticReport isoenergetic_check(const ActionChart& chart, int samples);

/// Closed polygon sampling a circle, first point repeated at the end.
std::vector<Vec2> circle_loop(const Vec2& center, double radius, int points, double phase = 0.0);

/// Central-difference Jacobian of c -> xi on a fixed chart domain.
Mat2 finite_difference_differential(const ActionChart& chart, const Vec2& c, double step);

}  // namespace specmono
