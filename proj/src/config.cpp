#include "specmono/config.hpp"

#include <set>

namespace specmono {

namespace {

const std::set<std::string> kTopLevel = {"model",  "h",          "eps",     "delta",    "lambda",
                                         "C",      "diophantine", "synthesis", "anchors", "covering",
                                         "loop",   "chart",      "transition_samples", "classical",
                                         "measure", "output_dir", "seed"};

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) fail(ErrorKind::ConfigError, where + " must be an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) fail(ErrorKind::ConfigError, "unknown key " + where + "." + k);
}

template <class T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void read_vec(const json& j, const char* key, Vec2& out) {
    if (j.contains(key)) out = vec2_from_json(j.at(key));
}

cplx read_complex(const json& j) { return cplx(j.at(0).get<double>(), j.at(1).get<double>()); }

OpenSpec parse_open(const json& o) {
    check_keys(o, "covering.opens[]", {"id", "shape", "center", "r_in", "r_out", "from_deg", "to_deg", "lo", "hi"});
    OpenSpec s;
    s.id = o.at("id").get<std::string>();
    const std::string shape = o.value("shape", "arc");
    if (shape == "arc") {
        s.shape = OpenSpec::Shape::Arc;
        read_vec(o, "center", s.center);
        read(o, "r_in", s.r_in);
        read(o, "r_out", s.r_out);
        read(o, "from_deg", s.from_deg);
        read(o, "to_deg", s.to_deg);
    } else if (shape == "box") {
        s.shape = OpenSpec::Shape::Box;
        s.lo = vec2_from_json(o.at("lo"));
        s.hi = vec2_from_json(o.at("hi"));
    } else {
        fail(ErrorKind::ConfigError, "unknown open shape " + shape);
    }
    return s;
}

}  // namespace

void apply_override(json& doc, const Override& ov) {
    const auto& [key, text] = ov;
    if (key.empty()) fail(ErrorKind::ConfigError, "empty override key");
    json value;
    try {
        value = json::parse(text);
    } catch (const json::exception&) {
        value = text;
    }
    std::vector<std::string> path;
    size_t start = 0;
    for (size_t pos; (pos = key.find('.', start)) != std::string::npos; start = pos + 1)
        path.push_back(key.substr(start, pos - start));
    path.push_back(key.substr(start));
    if (!kTopLevel.count(path.front())) fail(ErrorKind::ConfigError, "unknown key " + path.front());
    json* node = &doc;
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        if (!node->contains(path[i])) (*node)[path[i]] = json::object();
        node = &(*node)[path[i]];
    }
    (*node)[path.back()] = value;
}

RunConfig parse_config(json doc, const std::vector<Override>& overrides) {
    if (doc.is_null()) doc = json::object();
    for (const Override& ov : overrides) apply_override(doc, ov);
    check_keys(doc, "config", kTopLevel);
    RunConfig rc;
    PipelineConfig& p = rc.pipeline;
    try {
        p = champagne_annulus_config();
        if (doc.contains("model")) {
            const json& m = doc["model"];
            if (m.is_string()) {
                p.model.name = m.get<std::string>();
            } else {
                check_keys(m, "model", {"name", "shear", "offset", "exclusion_radius", "quadrature_nodes"});
                read(m, "name", p.model.name);
                if (m.contains("shear")) p.model.shear = mat2_from_json(m["shear"]);
                read_vec(m, "offset", p.model.offset);
                read(m, "exclusion_radius", p.model.exclusion_radius);
                read(m, "quadrature_nodes", p.model.quadrature_nodes);
            }
        }
        read(doc, "h", p.band.h);
        read(doc, "eps", p.band.eps);
        read(doc, "delta", p.band.delta);
        read(doc, "lambda", p.model.lambda);
        read(doc, "C", p.band.C);
        p.chart.C = p.band.C;
        if (doc.contains("diophantine")) {
            const json& d = doc["diophantine"];
            check_keys(d, "diophantine", {"alpha", "d", "k_max"});
            read(d, "alpha", p.diophantine.alpha);
            read(d, "d", p.diophantine.d);
            read(d, "k_max", p.diophantine.k_max);
        }
        p.diophantine.validate();
        if (doc.contains("synthesis")) {
            const json& s = doc["synthesis"];
            check_keys(s, "synthesis", {"jitter_exponent", "eps2_coeff", "h_coeff"});
            if (s.contains("jitter_exponent")) {
                if (s["jitter_exponent"].is_null()) p.synthesis.jitter_exponent.reset();
                else p.synthesis.jitter_exponent = s["jitter_exponent"].get<int>();
            }
            if (s.contains("eps2_coeff")) p.synthesis.eps2_coeff = read_complex(s["eps2_coeff"]);
            if (s.contains("h_coeff")) p.synthesis.h_coeff = read_complex(s["h_coeff"]);
        }
        if (doc.contains("anchors")) {
            const json& a = doc["anchors"];
            check_keys(a, "anchors",
                       {"mode", "center", "radius", "count", "phase_deg", "filter", "region", "grid", "points"});
            const std::string mode = a.value("mode", "circle");
            if (mode == "circle") p.anchors.mode = AnchorSpec::Mode::Circle;
            else if (mode == "band") p.anchors.mode = AnchorSpec::Mode::Band;
            else if (mode == "list") p.anchors.mode = AnchorSpec::Mode::List;
            else fail(ErrorKind::ConfigError, "unknown anchor mode " + mode);
            read_vec(a, "center", p.anchors.center);
            read(a, "radius", p.anchors.radius);
            read(a, "count", p.anchors.count);
            read(a, "phase_deg", p.anchors.phase_deg);
            const std::string filter = a.value("filter", "good");
            if (filter == "good") p.anchors.filter = AnchorFilter::GoodValues;
            else if (filter == "grid") p.anchors.filter = AnchorFilter::Grid;
            else fail(ErrorKind::ConfigError, "unknown anchor filter " + filter);
            if (a.contains("region")) {
                p.anchors.region.lo = vec2_from_json(a["region"].at("lo"));
                p.anchors.region.hi = vec2_from_json(a["region"].at("hi"));
            }
            read(a, "grid", p.anchors.grid);
            if (a.contains("points")) {
                p.anchors.points.clear();
                for (const json& q : a["points"]) p.anchors.points.push_back(vec2_from_json(q));
            }
        }
        if (doc.contains("covering")) {
            const json& c = doc["covering"];
            check_keys(c, "covering", {"preset", "center", "opens"});
            if (c.contains("opens")) {
                p.opens.clear();
                for (const json& o : c["opens"]) p.opens.push_back(parse_open(o));
                p.loop.clear();
            } else {
                const std::string preset = c.value("preset", "annulus");
                if (preset != "annulus") fail(ErrorKind::ConfigError, "unknown covering preset " + preset);
                Vec2 center = Vec2::Zero();
                read_vec(c, "center", center);
                p.opens = annulus_covering(center);
                p.loop = annulus_loop();
            }
        }
        if (doc.contains("loop")) p.loop = doc["loop"].get<std::vector<std::string>>();
        if (doc.contains("chart")) {
            const json& c = doc["chart"];
            check_keys(c, "chart",
                       {"link_radius", "degree", "ridge", "align_threshold", "reference", "neighbors",
                        "cluster_radius", "min_sin", "max_iterations", "quadratic", "label_tolerance"});
            read(c, "link_radius", p.chart.link_radius);
            read(c, "degree", p.chart.degree);
            read(c, "ridge", p.chart.ridge);
            read(c, "align_threshold", p.chart.align_threshold);
            read(c, "reference", p.chart.reference);
            read(c, "neighbors", p.chart.fit.neighbors);
            read(c, "cluster_radius", p.chart.fit.cluster_radius);
            read(c, "min_sin", p.chart.fit.min_sin);
            read(c, "max_iterations", p.chart.fit.max_iterations);
            read(c, "quadratic", p.chart.fit.quadratic);
            read(c, "label_tolerance", p.chart.fit.label_tolerance);
        }
        read(doc, "transition_samples", p.transition_samples);
        if (doc.contains("classical")) {
            const json& c = doc["classical"];
            check_keys(c, "classical", {"points", "radius"});
            read(c, "points", p.classical_points);
            read(c, "radius", p.classical_radius);
        }
        if (doc.contains("measure")) {
            const json& m = doc["measure"];
            check_keys(m, "measure", {"lo", "hi", "samples", "alphas"});
            read_vec(m, "lo", rc.measure.box.lo);
            read_vec(m, "hi", rc.measure.box.hi);
            read(m, "samples", rc.measure.samples);
            read(m, "alphas", rc.measure.alphas);
        }
        read(doc, "output_dir", rc.output_dir);
        read(doc, "seed", rc.seed);
    } catch (const json::exception& e) {
        fail(ErrorKind::ConfigError, std::string("mistyped configuration value: ") + e.what());
    }
    p.synthesis.seed = rc.seed;
    check_regime(p.band.h, p.band.eps, p.band.delta);
    rc.effective = doc;
    rc.effective["seed"] = rc.seed;
    return rc;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<Override>& overrides) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        fail(ErrorKind::ConfigError, "cannot parse " + path.string() + ": " + e.what());
    }
    return parse_config(std::move(doc), overrides);
}

}  // namespace specmono
