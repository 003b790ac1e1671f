// specmono: batch front end for spectrum synthesis, chart fitting and
// monodromy comparison. Thread count comes from SPECMONO_THREADS.

#include "specmono/config.hpp"
#include "specmono/io.hpp"
#include "specmono/pipeline.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>
#include <optional>

using namespace specmono;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kFailure = 1, kRegime = 2, kFit = 3, kMonodromy = 4, kMismatch = 5 };

struct Common {
    std::string config;
    std::vector<std::string> set;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<double> h, eps, delta, lambda;
};

void add_common(CLI::App* cmd, Common& c, bool config_required = true) {
    auto* opt = cmd->add_option("-c,--config", c.config, "JSON run configuration");
    if (config_required) opt->required();
    cmd->add_option("--set", c.set, "override a configuration key, key.sub=value");
    cmd->add_option("--out", c.out, "output directory (output_dir)");
    cmd->add_option("--seed", c.seed, "random seed (seed)");
    cmd->add_option("--hbar", c.h, "semiclassical parameter (h)");
    cmd->add_option("--eps", c.eps, "perturbation size (eps)");
    cmd->add_option("--delta", c.delta, "regime exponent (delta)");
    cmd->add_option("--lambda", c.lambda, "quasi-integrable coupling (lambda)");
}

RunConfig load(const Common& c) {
    std::vector<Override> ov;
    for (const std::string& s : c.set) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail(ErrorKind::ConfigError, "--set expects key=value, got " + s);
        ov.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    if (c.out) ov.emplace_back("output_dir", json(*c.out).dump());
    if (c.seed) ov.emplace_back("seed", std::to_string(*c.seed));
    if (c.h) ov.emplace_back("h", format_double(*c.h));
    if (c.eps) ov.emplace_back("eps", format_double(*c.eps));
    if (c.delta) ov.emplace_back("delta", format_double(*c.delta));
    if (c.lambda) ov.emplace_back("lambda", format_double(*c.lambda));
    if (c.config.empty()) return parse_config(json::object(), ov);
    return load_config(c.config, ov);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int cmd_generate(const Common& c) {
    const RunConfig rc = load(c);
    const ModelPtr model = make_model(rc.pipeline.model);
    const SpectrumCloud cloud = generate_cloud(model, rc.pipeline);
    const fs::path dir = rc.output_dir;
    write_atomic(dir / "spectrum.csv", spectrum_csv(cloud));
    json prov;
    prov["seed"] = rc.seed;
    prov["config"] = rc.effective;
    prov["model"] = model->name;
    prov["points"] = cloud.size();
    json anchors = json::array();
    for (const Vec2& a : cloud.anchors) anchors.push_back(to_json(a));
    prov["anchors"] = anchors;
    prov["empty_warning"] = cloud.empty_warning;
    prov["diagnostic"] = cloud.diagnostic;
    write_atomic(dir / "spectrum.json", dump(prov));
    if (!cloud.diagnostic.empty()) std::cerr << "specmono: warning: " << cloud.diagnostic << "\n";
    std::cout << "wrote " << cloud.size() << " eigenvalues from " << cloud.anchors.size() << " anchors to "
              << (dir / "spectrum.csv").string() << "\n";
    return kOk;
}

int cmd_fit(const Common& c, const std::string& spectrum_path) {
    const RunConfig rc = load(c);
    const fs::path dir = rc.output_dir;
    const fs::path csv = spectrum_path.empty() ? dir / "spectrum.csv" : fs::path(spectrum_path);
    SpectrumCloud cloud = read_spectrum_csv(csv);
    cloud.h = rc.pipeline.band.h;
    cloud.eps = rc.pipeline.band.eps;
    cloud.delta = rc.pipeline.band.delta;
    fs::path prov = csv;
    prov.replace_extension(".json");
    if (fs::exists(prov)) {
        const json p = json::parse(read_file(prov));
        if (p.contains("anchors")) {
            cloud.anchors.clear();
            for (const json& a : p["anchors"]) cloud.anchors.push_back(vec2_from_json(a));
        }
    }
    PseudoChartOptions opt = rc.pipeline.chart;
    opt.exec = rc.pipeline.exec;
    const std::vector<PseudoChart> charts = build_pseudo_charts(cloud, rc.pipeline.opens, opt);
    for (const PseudoChart& pc : charts) {
        json j = to_json(pc);
        j["seed"] = rc.seed;
        write_atomic(dir / ("chart_" + pc.id + ".json"), dump(j));
    }
    write_atomic(dir / "residuals.csv", "# seed=" + std::to_string(rc.seed) + "\n" + residual_table(charts));
    write_atomic(dir / "overlay.svg", overlay_svg(cloud, charts));
    double worst = 0.0;
    for (const PseudoChart& pc : charts)
        for (const MicroChart& mc : pc.micro_charts) worst = std::max(worst, mc.relative_residual);
    std::cout << "fitted " << charts.size() << " pseudo-charts; worst relative residual " << worst << "\n";
    return kOk;
}

int cmd_holonomy(const Common& c, const std::vector<std::string>& chart_files) {
    const RunConfig rc = load(c);
    const fs::path dir = rc.output_dir;
    std::vector<fs::path> files(chart_files.begin(), chart_files.end());
    if (files.empty())
        for (const OpenSpec& o : rc.pipeline.opens) files.push_back(dir / ("chart_" + o.id + ".json"));
    std::vector<PseudoChart> charts;
    for (const fs::path& f : files) {
        try {
            charts.push_back(pseudo_chart_from_json(json::parse(read_file(f))));
        } catch (const json::exception& e) {
            fail(ErrorKind::IoError, "cannot parse " + f.string() + ": " + e.what());
        }
    }
    const TransitionCocycle cocycle =
        build_cocycle(charts, make_covering(charts), rc.pipeline.transition_samples, rc.pipeline.exec);
    std::vector<HolonomyClass> loops;
    if (!rc.pipeline.loop.empty()) loops.push_back(holonomy(cocycle, rc.pipeline.loop));
    json report = monodromy_report(cocycle, loops);
    report["seed"] = rc.seed;
    write_atomic(dir / "monodromy.json", dump(report));
    if (!loops.empty()) {
        const Mat2i& m = loops.front().representative;
        std::cout << "holonomy [[" << m(0, 0) << "," << m(0, 1) << "],[" << m(1, 0) << "," << m(1, 1)
                  << "]] trace " << loops.front().trace << "\n";
    }
    return kOk;
}

int cmd_classical(const Common& c) {
    const RunConfig rc = load(c);
    const ModelPtr model = make_model(rc.pipeline.model);
    const HolonomyClass h = classical_reference(model, rc.pipeline);
    json j = to_json(h);
    j["seed"] = rc.seed;
    j["model"] = model->name;
    j["center"] = to_json(rc.pipeline.anchors.center);
    j["radius"] = rc.pipeline.anchors.radius;
    j["points"] = rc.pipeline.classical_points;
    write_atomic(fs::path(rc.output_dir) / "classical.json", dump(j));
    const Mat2i& m = h.representative;
    std::cout << "classical holonomy [[" << m(0, 0) << "," << m(0, 1) << "],[" << m(1, 0) << "," << m(1, 1)
              << "]]\n";
    return kOk;
}

int cmd_compare(const Common& c, std::string spectral, std::string classical) {
    const RunConfig rc = load(c);
    const fs::path dir = rc.output_dir;
    if (spectral.empty()) spectral = (dir / "monodromy.json").string();
    if (classical.empty()) classical = (dir / "classical.json").string();
    json sj, cj;
    try {
        sj = json::parse(read_file(spectral));
        cj = json::parse(read_file(classical));
    } catch (const json::exception& e) {
        fail(ErrorKind::IoError, std::string("cannot parse input: ") + e.what());
    }
    const json& loop = sj.contains("loops") ? sj.at("loops").at(0) : sj;
    const HolonomyClass sh = holonomy_from_json(loop);
    const HolonomyClass ch = holonomy_from_json(cj);
    const ConjugacyResult r = adjoint_compare(sh, ch);
    json v;
    v["seed"] = rc.seed;
    v["spectral"] = to_json(sh);
    v["classical"] = to_json(ch);
    v["adjoint"] = to_json(Mat2i(inverse_unimodular(ch.representative).transpose()));
    v["equivalent"] = r.equivalent;
    v["undecided_within_bound"] = r.undecided;
    if (r.equivalent) v["conjugator"] = to_json(r.conjugator);
    write_atomic(dir / "verdict.json", dump(v));
    std::cout << (r.equivalent ? "adjoint relation holds" : r.undecided ? "undecided within bound" : "mismatch")
              << "\n";
    return r.equivalent ? kOk : kMismatch;
}

int cmd_measure(const Common& c) {
    const RunConfig rc = load(c);
    json out;
    out["seed"] = rc.seed;
    out["box"] = {{"lo", to_json(rc.measure.box.lo)}, {"hi", to_json(rc.measure.box.hi)}};
    out["samples"] = rc.measure.samples;
    out["d"] = rc.pipeline.diophantine.d;
    out["k_max"] = rc.pipeline.diophantine.k_max;
    json rows = json::array();
    double previous = -1.0;
    for (double alpha : rc.measure.alphas) {
        DiophantineParams p = rc.pipeline.diophantine;
        p.alpha = alpha;
        const BadFraction bf = bad_fraction(rc.measure.box, p, rc.measure.samples, rc.seed, rc.pipeline.exec);
        json row;
        row["alpha"] = alpha;
        row["bad_fraction"] = bf.fraction;
        row["standard_error"] = bf.standard_error;
        if (previous > 0.0) row["ratio_to_previous"] = bf.fraction / previous;
        previous = bf.fraction;
        rows.push_back(row);
        std::printf("alpha %-8g bad fraction %.5f +- %.5f\n", alpha, bf.fraction, bf.standard_error);
    }
    out["results"] = rows;
    write_atomic(fs::path(rc.output_dir) / "measure.json", dump(out));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    configure_threads_from_env("SPECMONO_THREADS");
    CLI::App app{"Spectral monodromy from synthetic non-selfadjoint spectra"};
    app.require_subcommand(1);

    Common c;
    std::string spectrum, spectral, classical;
    std::vector<std::string> chart_files;
    auto* gen = app.add_subcommand("generate", "synthesize a spectrum CSV");
    add_common(gen, c);
    auto* fit = app.add_subcommand("fit", "fit micro-charts and pseudo-charts");
    add_common(fit, c);
    fit->add_option("--spectrum", spectrum, "spectrum CSV (default <output_dir>/spectrum.csv)");
    auto* hol = app.add_subcommand("holonomy", "transition cocycle and loop holonomy");
    add_common(hol, c);
    hol->add_option("--charts", chart_files, "pseudo-chart JSON files (default: one per open set)");
    auto* cla = app.add_subcommand("classical", "classical holonomy along the anchor circle");
    add_common(cla, c);
    auto* cmp = app.add_subcommand("compare", "check the adjoint relation");
    add_common(cmp, c, false);
    cmp->add_option("--spectral", spectral, "monodromy report JSON");
    cmp->add_option("--classical", classical, "classical holonomy JSON");
    auto* mes = app.add_subcommand("diophantine-measure", "Monte Carlo bad-frequency fraction");
    add_common(mes, c);

    CLI11_PARSE(app, argc, argv);

    int failure_code = kFailure;
    if (fit->parsed()) failure_code = kFit;
    if (hol->parsed()) failure_code = kMonodromy;
    try {
        if (gen->parsed()) return cmd_generate(c);
        if (fit->parsed()) return cmd_fit(c, spectrum);
        if (hol->parsed()) return cmd_holonomy(c, chart_files);
        if (cla->parsed()) return cmd_classical(c);
        if (cmp->parsed()) return cmd_compare(c, spectral, classical);
        if (mes->parsed()) return cmd_measure(c);
    } catch (const Error& e) {
        std::cerr << "specmono: " << e.what() << "\n";
        if (e.kind() == ErrorKind::RegimeViolation) return kRegime;
        if (e.kind() == ErrorKind::ConfigError) return kFailure;
        return failure_code;
    } catch (const std::exception& e) {
        std::cerr << "specmono: " << e.what() << "\n";
        return failure_code;
    }
    return kFailure;
}
