#include "doctest.h"

#include "specmono/spectrum.hpp"

#include <cmath>
#include <map>
#include <set>
#include <tuple>

using namespace specmono;

namespace {

Mat2 shear() {
    Mat2 S;
    S << 1.0, 0.3, 0.0, 1.0;
    return S;
}

}  // namespace

TEST_CASE("regime checks") {
    CHECK_NOTHROW(check_regime(1e-4, 1e-2, 0.5));
    CHECK_THROWS_AS(check_regime(1e-2, 1e-2, 0.5), Error);
    CHECK_THROWS_AS(check_regime(1e-4, 2e-2, 0.5), Error);
    CHECK_THROWS_AS(check_regime(1e-4, 1e-2, 1.0), Error);
    CHECK_THROWS_AS(check_regime(0.0, 1e-2, 0.5), Error);
    try {
        check_regime(1e-3, 1e-3, 0.5);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::RegimeViolation);
    }
}

TEST_CASE("good rectangle geometry") {
    const GoodRectangle r = good_rectangle(Vec2(0.3, 0.2), 1e-2, 1e-4, 0.5, 10.0);
    CHECK(r.half_width == doctest::Approx(1e-3));
    CHECK(r.half_height == doctest::Approx(1e-5));
    CHECK(r.center == cplx(0.3, 2e-3));
    CHECK(r.contains(cplx(0.3 + 0.9e-3, 2e-3 - 0.9e-5)));
    CHECK_FALSE(r.contains(cplx(0.3, 2e-3 + 1.1e-5)));
    CHECK_THROWS_AS(good_rectangle(Vec2(0, 0), 1e-2, 1e-4, 0.5, 0.5), Error);
}

TEST_CASE("flat model spectrum is the sheared lattice") {
    const Vec2 offset(0.01, -0.02);
    const ModelPtr m = with_metadata(flat_model(shear(), offset), Vec2i(2, 1), Vec2(3e-5, 0.0));
    const double h = 1e-4, eps = 1e-2;
    const Vec2 a(0.2, 0.1);
    const GoodRectangle rect = good_rectangle(a, eps, h, 0.5, 10.0);
    const ActionChart chart = action_chart_at(m, a, 0.01);
    SynthesisOptions opt;
    opt.jitter_exponent.reset();
    const SpectrumCloud cloud = synthesize_rectangle(chart, a, rect, opt);
    REQUIRE(cloud.size() > 100);
    const Mat2 Sinv = shear().inverse();
    std::set<std::pair<int, int>> seen;
    for (const SpectrumPoint& p : cloud.points) {
        CHECK(rect.contains(p.mu));
        CHECK(p.labeled);
        CHECK(seen.insert({p.k.x(), p.k.y()}).second);
        const Vec2 xi = h * (p.k.cast<double>() - Vec2(2, 1) / 4.0) - Vec2(3e-5, 0.0);
        const Vec2 c = Sinv * (xi - offset);
        CHECK(std::abs(p.mu.real() - c.x()) < 1e-15);
        CHECK(std::abs(p.mu.imag() - eps * c.y()) < 1e-17);
    }
    // every lattice point whose image lies in the rectangle is present
    const Vec2 lo = shear() * (a - Vec2(2e-3, 2e-3)) + offset;
    int expected = 0;
    for (int k1 = int(std::floor(lo.x() / h)) - 40; k1 <= int(std::floor(lo.x() / h)) + 80; ++k1)
        for (int k2 = int(std::floor(lo.y() / h)) - 40; k2 <= int(std::floor(lo.y() / h)) + 80; ++k2) {
            const Vec2 xi = h * (Vec2(k1, k2) - Vec2(2, 1) / 4.0) - Vec2(3e-5, 0.0);
            const Vec2 c = Sinv * (xi - offset);
            if (rect.contains(cplx(c.x(), eps * c.y()))) ++expected;
        }
    CHECK(int(cloud.size()) == expected);
}

TEST_CASE("champagne rectangle holds the lattice count predicted by the Jacobian") {
    const ModelPtr m = champagne_bottle();
    const double h = 2.5e-5, eps = 5e-3;
    for (const Vec2& a : {Vec2(0.3, 0.2), Vec2(-0.1, 0.05), Vec2(0.1, -0.12)}) {
        const GoodRectangle rect = good_rectangle(a, eps, h, 0.5, 10.0);
        const ActionChart chart = action_chart_at(m, a, 0.01);
        SynthesisOptions opt;
        const SpectrumCloud cloud = synthesize_rectangle(chart, a, rect, opt);
        const double area = 4.0 * rect.half_width * rect.half_width;
        const double expected = area * std::abs(chart.differential(a).determinant()) / (h * h);
        CAPTURE(a.x());
        CAPTURE(a.y());
        CHECK(double(cloud.size()) == doctest::Approx(expected).epsilon(0.15));
    }
}

TEST_CASE("jitter is bounded, seeded and reproducible") {
    const ModelPtr m = champagne_bottle();
    const double h = 1e-3, eps = 1e-2;
    const Vec2 a(0.3, 0.2);
    const GoodRectangle rect = good_rectangle(a, eps, h, 0.5, 10.0);
    const ActionChart chart = action_chart_at(m, a, 0.01);
    SynthesisOptions clean, noisy, again, other;
    clean.jitter_exponent.reset();
    noisy.jitter_exponent = again.jitter_exponent = other.jitter_exponent = 2;
    other.seed = 2;
    const SpectrumCloud c0 = synthesize_rectangle(chart, a, rect, clean);
    const SpectrumCloud c1 = synthesize_rectangle(chart, a, rect, noisy);
    const SpectrumCloud c2 = synthesize_rectangle(chart, a, rect, again);
    const SpectrumCloud c3 = synthesize_rectangle(chart, a, rect, other);
    std::map<std::pair<int, int>, cplx> base;
    for (const auto& p : c0.points) base[{p.k.x(), p.k.y()}] = p.mu;
    REQUIRE(c1.size() == c2.size());
    bool differs = false;
    for (size_t i = 0; i < c1.size(); ++i) {
        CHECK(c1.points[i].mu == c2.points[i].mu);
        auto it = base.find({c1.points[i].k.x(), c1.points[i].k.y()});
        if (it == base.end()) continue;
        const cplx d = c1.points[i].mu - it->second;
        CHECK(std::abs(d.real()) <= h * h / std::sqrt(2.0));
        CHECK(std::abs(d.imag()) <= h * h / std::sqrt(2.0));
    }
    for (size_t i = 0; i < std::min(c1.size(), c3.size()); ++i)
        if (c1.points[i].mu != c3.points[i].mu) differs = true;
    CHECK(differs);
}

TEST_CASE("correction terms shift every point by kappa (1 + <q>)") {
    const ModelPtr m = champagne_bottle();
    const double h = 1e-3, eps = 1e-2;
    const Vec2 a(0.3, 0.2);
    const GoodRectangle rect = good_rectangle(a, eps, h, 0.5, 10.0);
    const ActionChart chart = action_chart_at(m, a, 0.01);
    SynthesisOptions plain, shifted;
    plain.jitter_exponent.reset();
    shifted.jitter_exponent.reset();
    shifted.eps2_coeff = cplx(0.01, -0.02);
    shifted.h_coeff = cplx(-0.005, 0.0);
    const cplx kappa = shifted.eps2_coeff * eps * eps + shifted.h_coeff * h;
    const SpectrumCloud c0 = synthesize_rectangle(chart, a, rect, plain);
    const SpectrumCloud c1 = synthesize_rectangle(chart, a, rect, shifted);
    std::map<std::pair<int, int>, cplx> base;
    for (const auto& p : c0.points) base[{p.k.x(), p.k.y()}] = p.mu;
    int compared = 0;
    for (const auto& p : c1.points) {
        auto it = base.find({p.k.x(), p.k.y()});
        if (it == base.end()) continue;
        const double q = it->second.imag() / eps;
        CHECK(std::abs(p.mu - it->second - kappa * (1.0 + q)) < 1e-15);
        ++compared;
    }
    CHECK(compared > 10);
}

TEST_CASE("KAM synthesis enforces the coupling bound") {
    const ModelPtr m = perturbed_model(champagne_bottle(), 0.1);
    const Vec2 a(0.3, 0.2);
    const GoodRectangle rect = good_rectangle(a, 1e-2, 1e-3, 0.5, 10.0);
    const ActionChart chart = action_chart_at(m, a, 0.01);
    DiophantineParams p;
    try {
        kam_synthesize(chart, a, rect, p, SynthesisOptions{});
        FAIL("expected LambdaTooLarge");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::LambdaTooLarge);
    }
    const ModelPtr ok = perturbed_model(champagne_bottle(), 1e-4);
    CHECK(kam_synthesize(action_chart_at(ok, a, 0.01), a, rect, p, SynthesisOptions{}).size() > 10);
}

TEST_CASE("multi-anchor synthesis: serial reference, de-duplication") {
    const ModelPtr m = champagne_bottle();
    std::vector<Vec2> anchors;
    for (int i = 0; i < 12; ++i) anchors.push_back(Vec2(0.3 + 0.002 * i, 0.2));  // overlapping rectangles
    const BandParams band{1e-2, 1e-3, 0.5, 10.0};
    SynthesisOptions opt;
    const SpectrumCloud par = synthesize_anchors(m, anchors, band, opt, Exec::Parallel);
    const SpectrumCloud ser = synthesize_anchors(m, anchors, band, opt, Exec::Serial);
    REQUIRE(par.size() == ser.size());
    for (size_t i = 0; i < par.size(); ++i) CHECK(par.points[i].mu == ser.points[i].mu);
    std::set<std::tuple<int, int, int>> labels;
    for (const auto& p : par.points) CHECK(labels.insert({p.domain, p.k.x(), p.k.y()}).second);
    size_t total = 0;
    for (const Vec2& a : anchors) {
        const GoodRectangle rect = good_rectangle(a, band.eps, band.h, band.delta, band.C);
        total += synthesize_rectangle(ActionChart{m, a, 2 * rect.half_width, m->domain_of(a)}, a, rect, opt).size();
    }
    CHECK(par.size() < total);
    for (const Vec2& a : anchors) {
        const GoodRectangle rect = good_rectangle(a, band.eps, band.h, band.delta, band.C);
        for (size_t i : par.select(rect)) CHECK(rect.contains(par.points[i].mu));
    }
}

TEST_CASE("band anchors and empty good-value sets") {
    const ModelPtr flat = flat_model(shear());
    const Region region{Vec2(0.0, 0.0), Vec2(1.0, 1.0)};
    DiophantineParams p;
    CHECK(band_anchors(flat, region, p, 4, AnchorFilter::Grid).size() == 16);
    CHECK(band_anchors(flat, region, p, 4, AnchorFilter::GoodValues).empty());
    const SpectrumCloud empty = synthesize_band(flat, region, BandParams{}, p, 4, SynthesisOptions{});
    CHECK(empty.empty_warning);
    CHECK(!empty.diagnostic.empty());
    CHECK(empty.size() == 0);

    const ModelPtr m = champagne_bottle();
    const auto anchors = band_anchors(m, Region{Vec2(0.3, 0.1), Vec2(0.5, 0.3)}, p, 6);
    CHECK(!anchors.empty());
    for (const Vec2& a : anchors) CHECK(is_good_value(m, a, p, 0.2 / 6));
    CHECK_FALSE(is_good_value(m, Vec2(0.0, 0.01), p, 0.01));
}

TEST_CASE("points move by O(lambda) at fixed labels") {
    const ModelPtr base = champagne_bottle();
    const Vec2 a(0.3, 0.2);
    const GoodRectangle rect = good_rectangle(a, 1e-2, 1e-3, 0.5, 10.0);
    SynthesisOptions opt;
    std::map<std::pair<int, int>, cplx> ref;
    for (const auto& p : synthesize_rectangle(action_chart_at(base, a, 0.01), a, rect, opt).points)
        ref[{p.k.x(), p.k.y()}] = p.mu;
    for (double lambda : {1e-6, 1e-5}) {
        const ModelPtr m = perturbed_model(base, lambda);
        double worst = 0.0;
        int matched = 0;
        for (const auto& p : synthesize_rectangle(action_chart_at(m, a, 0.01), a, rect, opt).points) {
            auto it = ref.find({p.k.x(), p.k.y()});
            if (it == ref.end()) continue;
            worst = std::max(worst, std::abs(p.mu - it->second));
            ++matched;
        }
        CHECK(matched > 5);
        // <p1> = I_r^2 is below 0.1 here
        CHECK(worst <= 0.1 * lambda);
        CHECK(worst > 0.0);
    }
}
