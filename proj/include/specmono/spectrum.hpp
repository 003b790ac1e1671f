#pragma once

#include "specmono/diophantine.hpp"
#include "specmono/models.hpp"
#include "specmono/parallel.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace specmono {

using cplx = std::complex<double>;

/// Throws RegimeViolation unless 0 < h < eps <= 1.1 h^delta and 0 < delta < 1.
void check_regime(double h, double eps, double delta);

struct GoodRectangle {
    cplx center;
    double half_width = 0.0;
    double half_height = 0.0;
    Vec2 anchor;
    double C = 10.0;
    double h = 0.0;
    double eps = 0.0;
    double delta = 0.5;

    bool contains(const cplx& z) const {
        return std::abs(z.real() - center.real()) <= half_width && std::abs(z.imag() - center.imag()) <= half_height;
    }
};

GoodRectangle good_rectangle(const Vec2& a, double eps, double h, double delta, double C);

struct SynthesisOptions {
    std::optional<int> jitter_exponent = 8;  // nullopt switches the O(h^inf) noise off
    cplx eps2_coeff{0.0, 0.0};
    cplx h_coeff{0.0, 0.0};
    std::uint64_t seed = 1;
};

struct SpectrumPoint {
    cplx mu;
    bool labeled = false;
    Vec2i k{0, 0};
    Vec2 anchor{0.0, 0.0};
    int domain = 0;
};

struct SpectrumCloud {
    std::vector<SpectrumPoint> points;
    double h = 0.0;
    double eps = 0.0;
    double lambda = 0.0;
    double delta = 0.5;
    std::optional<int> jitter_exponent;
    std::uint64_t seed = 1;
    std::string model_name;
    std::vector<Vec2> anchors;
    bool empty_warning = false;
    std::string diagnostic;

    size_t size() const { return points.size(); }
    /// Points with the given rectangle, by index.
    std::vector<size_t> select(const GoodRectangle& rect) const;
};

/// Eigenvalues mu_k = p(xi_k) + i eps <q>(xi_k) + corrections + jitter for
/// xi_k = h (k - eta/4) - tau, kept when inside the rectangle. The O(eps^2)
/// and O(h) corrections enter as (eps2_coeff eps^2 + h_coeff h)(1 + <q>(xi_k)).
SpectrumCloud synthesize_rectangle(const ActionChart& chart, const Vec2& a, const GoodRectangle& rect,
                                   const SynthesisOptions& options);

/// Same enumeration with the quasi-integrable leading term; the chart's model
/// carries lambda and must satisfy lambda <= alpha^2 / 10.
SpectrumCloud kam_synthesize(const ActionChart& chart, const Vec2& a, const GoodRectangle& rect,
                             const DiophantineParams& params, const SynthesisOptions& options);

struct BandParams {
    double eps = 1e-2;
    double h = 1e-4;
    double delta = 0.5;
    double C = 10.0;
};

/// Union over the given anchors, de-duplicated; points from different
/// anchors describing the same eigenvalue are merged keeping the first.
SpectrumCloud synthesize_anchors(const ModelPtr& model, const std::vector<Vec2>& anchors, const BandParams& band,
                                 const SynthesisOptions& options, Exec exec = Exec::Parallel);

enum class AnchorFilter { GoodValues, Grid };

struct Region {
    Vec2 lo;
    Vec2 hi;
};

/// Anchors on an E grid with G restricted to good values (or every grid
/// value for analytic models whose frequency is constant).
std::vector<Vec2> band_anchors(const ModelPtr& model, const Region& region, const DiophantineParams& params, int grid,
                               AnchorFilter filter = AnchorFilter::GoodValues);

SpectrumCloud synthesize_band(const ModelPtr& model, const Region& region, const BandParams& band,
                              const DiophantineParams& params, int grid, const SynthesisOptions& options,
                              AnchorFilter filter = AnchorFilter::GoodValues, Exec exec = Exec::Parallel);

/// Single-point good-value test on an arbitrary model (chart domain chosen
/// from c); `step` is the frequency-derivative spacing. Models with lambda > 0
/// use the quasi-integrable clauses.
bool is_good_value(const ModelPtr& model, const Vec2& c, const DiophantineParams& params, double step);

}  // namespace specmono
