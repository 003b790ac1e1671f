#pragma once

#include "specmono/models.hpp"
#include "specmono/parallel.hpp"

#include <cstdint>
#include <vector>

namespace specmono {

struct DiophantineParams {
    double alpha = 0.05;
    double d = 1.0;
    int k_max = 10000;

    void validate() const;
};

struct DiophantineResult {
    bool ok = false;
    int k_max = 0;        // truncation actually used
    Vec2i worst_k{0, 0};  // lattice vector with the smallest |<w,k>| |k|^(1+d)
    double ratio = 0.0;   // that minimum divided by alpha; ok iff ratio >= 1
    explicit operator bool() const { return ok; }
};

/// |<w,k>| >= alpha / |k|^(1+d) for all nonzero k with |k|_inf <= k_max.
/// Stops at the first violation.
DiophantineResult is_diophantine(const Vec2& omega, const DiophantineParams& params);

struct GoodValueCheck {
    bool regular = false;
    bool far_from_critical = false;
    bool diophantine = false;
    bool dq_ok = false;
    bool domega_ok = false;
    bool wedge_ok = true;
    bool ok() const { return regular && far_from_critical && diophantine && dq_ok && domega_ok && wedge_ok; }
};

/// Frequency at the torus over c, from the first row of (dphi^-1)^-1.
Vec2 frequency_at(const ActionChart& chart, const Vec2& c);

/// The four exclusion clauses at one value c; `step` is the spacing used for
/// the derivative of the frequency along the energy line.
GoodValueCheck check_good_value(const ActionChart& chart, const Vec2& c, const DiophantineParams& params, double step,
                                double dq_threshold_factor = 1.0, bool require_wedge = false);

/// Grid-sampled G on {E} x R inside the chart disk surviving all exclusions.
std::vector<double> good_values(const ActionChart& chart, double E, const DiophantineParams& params, int grid);

/// Values K = <q> on the deformed energy line through a surviving the
/// quasi-integrable exclusions. Requires lambda <= alpha^2 / 10.
std::vector<double> kam_good_values(const ActionChart& chart, const Vec2& a, const DiophantineParams& params, int grid);

struct FrequencyBox {
    Vec2 lo;
    Vec2 hi;
};

struct BadFraction {
    double fraction = 0.0;
    double standard_error = 0.0;
    long samples = 0;
};

BadFraction bad_fraction(const FrequencyBox& box, const DiophantineParams& params, long samples, std::uint64_t seed,
                         Exec exec = Exec::Parallel);

}  // namespace specmono
