// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Thresholds are fixed below.

#include "specmono/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <string>

using namespace specmono;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Mat2i m2(int a, int b, int c, int d) {
    Mat2i m;
    m << a, b, c, d;
    return m;
}

// k_true = N k_fit + t with N in GL(2,Z), checked on every point.
bool matches_up_to_affine(const std::vector<Vec2i>& fit, const std::vector<Vec2i>& truth) {
    const size_t n = fit.size();
    for (size_t i = 1; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            Mat2 F, T;
            F.col(0) = (fit[i] - fit[0]).cast<double>();
            F.col(1) = (fit[j] - fit[0]).cast<double>();
            if (std::abs(F.determinant()) < 0.5) continue;
            T.col(0) = (truth[i] - truth[0]).cast<double>();
            T.col(1) = (truth[j] - truth[0]).cast<double>();
            const Mat2 N = T * F.inverse();
            const Mat2i Ni = round_matrix(N);
            if (max_abs(N - Ni.cast<double>()) > 1e-9 || std::abs(Ni.determinant()) != 1) return false;
            const Vec2i t = truth[0] - Ni * fit[0];
            for (size_t p = 0; p < n; ++p)
                if (Ni * fit[p] + t != truth[p]) return false;
            return true;
        }
    return false;
}

struct FitTally {
    int fits = 0;
    int exact = 0;
    int thrown = 0;
    int wrong = 0;
    double worst_relative = 0.0;
};

FitTally fit_rectangles(const SpectrumCloud& cloud, const std::vector<Vec2>& anchors, double C) {
    FitTally t;
    for (const Vec2& a : anchors) {
        ++t.fits;
        const GoodRectangle rect = good_rectangle(a, cloud.eps, cloud.h, cloud.delta, C);
        try {
            const MicroChart mc = fit_micro_chart(cloud, rect);
            std::vector<Vec2i> truth;
            for (size_t i : mc.indices) truth.push_back(cloud.points[i].k);
            if (matches_up_to_affine(mc.labels, truth)) ++t.exact;
            else ++t.wrong;
            t.worst_relative = std::max(t.worst_relative, mc.relative_residual);
        } catch (const Error&) {
            ++t.thrown;
        }
    }
    return t;
}

int failures = 0;

void report(const char* id, bool ok, const std::string& what) {
    std::printf("%s %s %s\n", id, ok ? "PASS" : "FAIL", what.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

void guarded(const char* id, const std::function<void()>& body) {
    try {
        body();
    } catch (const std::exception& e) {
        report(id, false, std::string("threw ") + e.what());
    }
}

// ---- criterion 1 / 8 -------------------------------------------------------

const double kFlatH = 1e-4, kFlatEps = 1e-2;

std::vector<Vec2> flat_anchors() {
    std::vector<Vec2> a;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a.push_back(Vec2(0.2 + 0.01 * i, 0.1 + 0.01 * j));
    return a;
}

FitTally flat_run(std::optional<int> jitter, double* elapsed = nullptr) {
    Mat2 S;
    S << 1.0, 0.3, 0.0, 1.0;
    const auto t0 = Clock::now();
    SynthesisOptions opt;
    opt.jitter_exponent = jitter;
    const SpectrumCloud cloud =
        synthesize_anchors(flat_model(S), flat_anchors(), BandParams{kFlatEps, kFlatH, 0.5, 10.0}, opt);
    const FitTally t = fit_rectangles(cloud, flat_anchors(), 10.0);
    if (elapsed) *elapsed = seconds_since(t0);
    return t;
}

// ---- criterion 2 -----------------------------------------------------------

double leading_term_deviation(double h, double eps) {
    const ModelPtr m = champagne_bottle();
    const DiophantineParams p;
    const double spacing = 4e-4;
    std::vector<Vec2> anchors;
    for (int i = 0; anchors.size() < 7 && i < 400; ++i) {
        const Vec2 c(0.3 + spacing * i, 0.2);
        if (is_good_value(m, c, p, spacing)) anchors.push_back(c);
    }
    if (anchors.size() < 7) fail(ErrorKind::EmptySegment, "fewer than seven good anchors");
    SynthesisOptions opt;
    opt.eps2_coeff = cplx(0.0, -1.0);
    opt.h_coeff = cplx(0.0, -1.0);
    const SpectrumCloud cloud = synthesize_anchors(m, anchors, BandParams{eps, h, 0.5, 10.0}, opt);
    PseudoChartOptions po;
    po.link_radius = 2 * spacing;
    const PseudoChart pc = assemble_pseudo_chart(cloud, anchors, po);
    const Vec2 ref = anchors[static_cast<size_t>(pc.reference)];
    const Mat2 dphi_ref = action_chart_at(m, ref, 0.01).differential(ref).inverse();
    const Mat2 M = round_matrix(pc.differential(ref) * dphi_ref).cast<double>();
    double dev = 0.0;
    for (const Vec2& a : anchors)
        dev = std::max(dev, max_abs(pc.differential(a) - M * action_chart_at(m, a, 0.01).differential(a)));
    return dev;
}

bool cocycle_exact(const TransitionCocycle& c, double* worst) {
    bool ok = true;
    *worst = 0.0;
    for (const auto& [i, j] : c.covering.edges) {
        ok = ok && c.at(j, i) * c.at(i, j) == Mat2i::Identity();
        ok = ok && std::abs(c.at(i, j).determinant()) == 1;
        *worst = std::max({*worst, c.deviation.at({i, j}), c.deviation.at({j, i})});
    }
    for (const auto& [i, j, k] : c.covering.triples) ok = ok && c.at(i, k) == c.at(i, j) * c.at(j, k);
    return ok && !c.covering.triples.empty() && *worst < 0.2;
}

}  // namespace

int main() {
    configure_threads_from_env("SPECMONO_THREADS");
    std::printf("acceptance run, %d thread(s)\n", max_threads());

    guarded("C1", [] {
        double elapsed = 0.0;
        const FitTally t = flat_run(std::nullopt, &elapsed);
        const bool ok = t.exact == t.fits && t.worst_relative <= 1e-10 && elapsed < 5.0;
        report("C1", ok,
               fmt("micro-chart round trip (flat shear, h=1e-4, eps=1e-2, no jitter): %d/%d rectangles exact, "
                   "worst relative residual %.2e (<= 1e-10), %.2f s (< 5 s)",
                   t.exact, t.fits, t.worst_relative, elapsed));
    });

    guarded("C2", [] {
        const double d1 = leading_term_deviation(1e-4, 1e-2);
        const double d2 = leading_term_deviation(2.5e-5, 5e-3);
        const bool ok = d1 <= 0.2 && d2 <= 0.5 * d1;
        report("C2", ok,
               fmt("leading-term accuracy (champagne, 7 anchors): max |df - dphi^-1| %.4f (<= 0.2) at "
                   "(h, eps) = (1e-4, 1e-2); %.4f at (2.5e-5, 5e-3), ratio %.4f (<= 0.5)",
                   d1, d2, d2 / d1));
    });

    const PipelineConfig annulus = champagne_annulus_config();
    const ModelPtr bottle = make_model(annulus.model);
    std::optional<PipelineResult> run;
    double run_seconds = 0.0;
    guarded("C3", [&] {
        const auto t0 = Clock::now();
        run = run_pipeline(bottle, annulus);
        run_seconds = seconds_since(t0);
        double worst = 0.0;
        const bool ok = cocycle_exact(run->cocycle, &worst);
        report("C3", ok,
               fmt("cocycle exactness (4-open annulus): %zu edges, %zu triples, antisymmetry and triple identity "
                   "exact, worst pre-round deviation %.4f (< 0.2)",
                   run->cocycle.covering.edges.size(), run->cocycle.covering.triples.size(), worst));
    });

    guarded("C4", [&] {
        if (!run) fail(ErrorKind::InvalidParameter, "annulus pipeline did not run");
        const auto t0 = Clock::now();
        const HolonomyClass classical = classical_reference(bottle, annulus);
        const double total = run_seconds + seconds_since(t0);
        const Mat2i& h = run->holonomy.representative;
        const bool cls = conjugacy_equivalent(h, m2(1, 1, 0, 1)).equivalent;
        const bool adj = adjoint_compare(run->holonomy, classical).equivalent;
        report("C4", cls && adj && total < 300.0,
               fmt("monodromy (champagne annulus, h=1e-3, eps=1e-2): spectral [[%d,%d],[%d,%d]] ~ [[1,1],[0,1]] %s, "
                   "adjoint_compare %s, %.1f s (< 300 s)",
                   h(0, 0), h(0, 1), h(1, 0), h(1, 1), cls ? "yes" : "no", adj ? "true" : "false", total));
    });

    guarded("C5", [&] {
        PipelineConfig cfg = annulus;
        cfg.diophantine.alpha = 0.05;
        const LambdaInvarianceReport r = lambda_invariance_check(champagne_bottle(), {0.0, 1e-5, 1e-4}, cfg);
        report("C5", r.ok,
               fmt("lambda independence (0, 1e-5, 1e-4; alpha=0.05): %zu common anchors, %zu edge matrices "
                   "per lambda, %s",
                   r.anchors.size(), r.edges.empty() ? size_t(0) : r.edges[0].size(),
                   r.ok ? "all identical" : r.mismatch.c_str()));
    });

    guarded("C6", [] {
        const FrequencyBox box{Vec2(1.0, 1.0), Vec2(2.0, 2.0)};
        DiophantineParams p;
        p.d = 1.0;
        std::vector<double> f;
        for (double alpha : {0.1, 0.05, 0.025}) {
            p.alpha = alpha;
            f.push_back(bad_fraction(box, p, 100000, 2024).fraction);
        }
        const double r1 = f[1] / f[0], r2 = f[2] / f[1];
        const bool ok = f[0] <= 0.5 && f[1] <= 0.25 && f[2] <= 0.125 && r1 >= 0.3 && r1 <= 0.8 && r2 >= 0.3 &&
                        r2 <= 0.8;
        report("C6", ok,
               fmt("Diophantine measure on [1,2]^2 (d=1, 1e5 samples): bad fractions %.4f, %.4f, %.4f "
                   "(<= 5 alpha), halving ratios %.3f, %.3f (in [0.3, 0.8])",
                   f[0], f[1], f[2], r1, r2));
    });

    guarded("C7", [&] {
        PipelineConfig disk = annulus;
        disk.anchors.center = Vec2(0.4, 0.2);
        disk.anchors.radius = 0.1;
        disk.opens = annulus_covering(disk.anchors.center);
        const PipelineResult r = run_pipeline(bottle, disk);
        const bool spectral = r.holonomy.is_identity();
        bool classical = true;
        for (const Vec2& c : {Vec2(0.4, 0.2), Vec2(-0.15, 0.05), Vec2(0.2, -0.5)})
            classical = classical && classical_holonomy(bottle, circle_loop(c, 0.05, 48), 0.02).is_identity();
        report("C7", spectral && classical,
               fmt("trivial topology: disk-covering holonomy %s, contractible classical loops %s",
                   spectral ? "identity" : "non-trivial", classical ? "identity" : "non-trivial"));
    });

    guarded("C8", [&] {
        // criteria 2-5 above already run with the default jitter exponent 8
        const FitTally n8 = flat_run(8);
        const FitTally n2 = flat_run(2);
        const FitTally n1 = flat_run(1);
        SynthesisOptions coarse;
        coarse.jitter_exponent = 2;
        std::vector<Vec2> anchors(run ? run->cloud.anchors : std::vector<Vec2>{});
        if (anchors.size() > 40) anchors.resize(40);
        const SpectrumCloud cc = synthesize_anchors(bottle, anchors, annulus.band, coarse);
        const FitTally c2 = fit_rectangles(cc, anchors, annulus.band.C);
        const bool ok = n8.exact == n8.fits && n8.worst_relative <= 1e-10 && n2.wrong == 0 && c2.wrong == 0 &&
                        n1.wrong == 0 && n1.thrown == n1.fits && failures == 0;
        report("C8", ok,
               fmt("robustness: N=8 flat %d/%d exact (rel. residual %.1e); N=2 flat %d exact/%d thrown/%d wrong, "
                   "champagne %d exact/%d thrown/%d wrong; N=1 flat %d/%d thrown; criteria 1-7 %s",
                   n8.exact, n8.fits, n8.worst_relative, n2.exact, n2.thrown, n2.wrong, c2.exact, c2.thrown,
                   c2.wrong, n1.thrown, n1.fits, failures == 0 ? "pass" : "have failures"));
    });

    std::printf("%s\n", failures == 0 ? "all criteria pass" : "some criteria fail");
    return failures == 0 ? 0 : 1;
}
