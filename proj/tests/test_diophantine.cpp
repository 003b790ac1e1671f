#include "doctest.h"

#include "specmono/diophantine.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace specmono;

namespace {

// Direct enumeration of every nonzero k in the box, both signs.
bool brute_diophantine(const Vec2& w, double alpha, double d, int kmax) {
    for (int k1 = -kmax; k1 <= kmax; ++k1)
        for (int k2 = -kmax; k2 <= kmax; ++k2) {
            if (k1 == 0 && k2 == 0) continue;
            const double n = std::hypot(double(k1), double(k2));
            if (std::abs(w.x() * k1 + w.y() * k2) * std::pow(n, 1.0 + d) < alpha) return false;
        }
    return true;
}

}  // namespace

TEST_CASE("is_diophantine on simple frequencies") {
    DiophantineParams p;
    p.alpha = 0.05;
    p.k_max = 200;
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    const DiophantineResult golden = is_diophantine(Vec2(1.0, phi), p);
    CHECK(golden.ok);
    CHECK(golden.ratio >= 1.0);

    const DiophantineResult rational = is_diophantine(Vec2(1.0, 2.0), p);
    CHECK_FALSE(rational.ok);
    CHECK(rational.ratio < 1.0);
    const Vec2i k = rational.worst_k;
    CHECK(k.x() + 2 * k.y() == 0);
    CHECK(k != Vec2i(0, 0));
}

TEST_CASE("is_diophantine agrees with exhaustive enumeration") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.5, 2.5);
    DiophantineParams p;
    p.alpha = 0.03;
    p.k_max = 40;
    int disagreements = 0;
    for (int t = 0; t < 300; ++t) {
        const Vec2 w(u(rng), u(rng) * (t % 2 ? -1.0 : 1.0));
        if (is_diophantine(w, p).ok != brute_diophantine(w, p.alpha, p.d, p.k_max)) ++disagreements;
    }
    CHECK(disagreements == 0);
}

TEST_CASE("Diophantine condition is monotone in alpha and invariant under scaling of both by a unit") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(1.0, 2.0);
    DiophantineParams lo, hi;
    lo.alpha = 0.02;
    hi.alpha = 0.08;
    lo.k_max = hi.k_max = 100;
    for (int t = 0; t < 200; ++t) {
        const Vec2 w(u(rng), u(rng));
        if (is_diophantine(w, hi).ok) CHECK(is_diophantine(w, lo).ok);
        CHECK(is_diophantine(w, lo).ok == is_diophantine(-w, lo).ok);
    }
}

TEST_CASE("parameter validation") {
    DiophantineParams p;
    p.alpha = 0.0;
    CHECK_THROWS_AS(is_diophantine(Vec2(1, 1), p), Error);
    p.alpha = 0.1;
    p.k_max = 2;
    CHECK_THROWS_AS(is_diophantine(Vec2(1, 1), p), Error);
}

TEST_CASE("good values on the champagne bottle") {
    const ModelPtr m = champagne_bottle();
    const ActionChart chart = action_chart_at(m, Vec2(0.4, 0.2), 0.05);
    DiophantineParams p;
    const std::vector<double> gs = good_values(chart, 0.4, p, 64);
    CHECK(!gs.empty());
    DiophantineParams strict = p;
    strict.alpha = 0.5;
    const std::vector<double> fewer = good_values(chart, 0.4, strict, 64);
    CHECK(fewer.size() < gs.size());
    for (double g : fewer) CHECK(std::find(gs.begin(), gs.end(), g) != gs.end());
    const double spacing = 0.1 / 64;
    for (double g : gs) {
        const Vec2 c(0.4, g);
        CHECK(chart.contains(c));
        CHECK(check_good_value(chart, c, p, spacing).diophantine);
        CHECK(is_diophantine(frequency_at(chart, c), p).ok);
    }
    CHECK_THROWS_AS(good_values(chart, 0.4, p, 0), Error);
    CHECK_THROWS_AS(good_values(chart, 3.0, p, 16), Error);
}

TEST_CASE("frequency_at is the model frequency at the action") {
    const ModelPtr m = champagne_bottle();
    const Vec2 c(0.3, -0.25);
    const ActionChart chart = action_chart_at(m, c, 0.02);
    const Vec2 w = frequency_at(chart, c);
    CHECK((w - chart.frequency(chart.action_map(c))).norm() < 1e-8);
}

TEST_CASE("flat models have no good values") {
    const ModelPtr m = flat_model(Mat2::Identity());
    const ActionChart chart = action_chart_at(m, Vec2::Zero(), 0.5);
    CHECK(good_values(chart, 0.0, DiophantineParams{}, 32).empty());
}

TEST_CASE("KAM good values require a small coupling") {
    const ModelPtr base = champagne_bottle();
    DiophantineParams p;
    p.alpha = 0.05;
    const ActionChart big = action_chart_at(perturbed_model(base, 0.1), Vec2(0.4, 0.2), 0.05);
    CHECK_THROWS_AS(kam_good_values(big, Vec2(0.4, 0.2), p, 32), Error);
    const ActionChart small = action_chart_at(perturbed_model(base, 1e-4), Vec2(0.4, 0.2), 0.05);
    CHECK(!kam_good_values(small, Vec2(0.4, 0.2), p, 32).empty());
}

TEST_CASE("bad_fraction: determinism, serial reference and an independent estimate") {
    DiophantineParams p;
    p.alpha = 0.05;
    p.k_max = 200;
    const FrequencyBox box{Vec2(1.0, 1.0), Vec2(2.0, 2.0)};
    const BadFraction a = bad_fraction(box, p, 4000, 42, Exec::Parallel);
    const BadFraction b = bad_fraction(box, p, 4000, 42, Exec::Serial);
    CHECK(a.fraction == b.fraction);
    CHECK(a.samples == 4000);
    CHECK(a.fraction <= 5 * p.alpha);

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(1.0, 2.0);
    int bad = 0;
    const int n = 1500;
    for (int t = 0; t < n; ++t)
        if (!brute_diophantine(Vec2(u(rng), u(rng)), p.alpha, p.d, 60)) ++bad;
    // truncation at 60 only misses violations with |k| > 60, which carry
    // measure O(alpha / 60)
    const double ref = double(bad) / n;
    const double se = std::sqrt(ref * (1 - ref) / n) + a.standard_error;
    CHECK(std::abs(ref - a.fraction) < 4 * se + 0.01);

    CHECK_THROWS_AS(bad_fraction(box, p, 0, 1), Error);
    CHECK_THROWS_AS(bad_fraction(FrequencyBox{Vec2(1, 1), Vec2(1, 2)}, p, 10, 1), Error);
}

TEST_CASE("scaling up a Diophantine frequency keeps it Diophantine") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(1.0, 2.0), s(1.0, 3.0);
    DiophantineParams p;
    p.alpha = 0.05;
    p.k_max = 100;
    for (int t = 0; t < 200; ++t) {
        const Vec2 w(u(rng), u(rng));
        if (is_diophantine(w, p).ok) CHECK(is_diophantine(s(rng) * w, p).ok);
    }
}

TEST_CASE("resonant frequencies fail for every alpha") {
    DiophantineParams p;
    p.k_max = 50;
    for (double alpha : {1e-3, 1e-8, 1e-14}) {
        p.alpha = alpha;
        CHECK_FALSE(is_diophantine(Vec2(1.0, 2.0), p).ok);
        CHECK_FALSE(is_diophantine(Vec2(3.0, -7.0), p).ok);
        CHECK_FALSE(is_diophantine(Vec2(0.5, 1.25), p).ok);
    }
}
