#include "specmono/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unistd.h>

namespace specmono {

namespace fs = std::filesystem;

void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::IoError, "cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) fail(ErrorKind::IoError, "write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        fail(ErrorKind::IoError, "cannot rename into " + path.string() + ": " + ec.message());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

const char* kHeader = "re,im,k1,k2,anchor_E,anchor_G";
const char* kShortHeader = "re,im,anchor_E,anchor_G";

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& s, size_t line) {
    if (s.empty()) fail(ErrorKind::IoError, "empty number on line " + std::to_string(line));
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v))
        fail(ErrorKind::IoError, "malformed number '" + s + "' on line " + std::to_string(line));
    return v;
}

int parse_int(const std::string& s, size_t line) {
    const double v = parse_number(s, line);
    if (v != std::round(v) || std::abs(v) > 1e9)
        fail(ErrorKind::IoError, "non-integer label '" + s + "' on line " + std::to_string(line));
    return static_cast<int>(v);
}

}  // namespace

std::string spectrum_csv(const SpectrumCloud& cloud) {
    std::ostringstream os;
    os << "# seed=" << cloud.seed << " model=" << (cloud.model_name.empty() ? "unknown" : cloud.model_name)
       << " h=" << format_double(cloud.h) << " eps=" << format_double(cloud.eps)
       << " delta=" << format_double(cloud.delta) << " lambda=" << format_double(cloud.lambda) << " jitter="
       << (cloud.jitter_exponent ? std::to_string(*cloud.jitter_exponent) : std::string("off")) << "\n";
    os << kHeader << "\n";
    for (const SpectrumPoint& p : cloud.points) {
        os << format_double(p.mu.real()) << ',' << format_double(p.mu.imag()) << ',';
        if (p.labeled) os << p.k.x() << ',' << p.k.y();
        else os << ',';
        os << ',' << format_double(p.anchor.x()) << ',' << format_double(p.anchor.y()) << "\n";
    }
    return os.str();
}

SpectrumCloud parse_spectrum_csv(const std::string& text) {
    SpectrumCloud cloud;
    cloud.jitter_exponent.reset();
    std::istringstream in(text);
    std::string line;
    size_t n = 0;
    int columns = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream kv(line.substr(1));
            std::string tok;
            while (kv >> tok) {
                const auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                const std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
                if (k == "seed") cloud.seed = std::stoull(v);
                else if (k == "model") cloud.model_name = v;
                else if (k == "h") cloud.h = parse_number(v, n);
                else if (k == "eps") cloud.eps = parse_number(v, n);
                else if (k == "delta") cloud.delta = parse_number(v, n);
                else if (k == "lambda") cloud.lambda = parse_number(v, n);
                else if (k == "jitter" && v != "off") cloud.jitter_exponent = parse_int(v, n);
            }
            continue;
        }
        if (columns == 0) {
            if (line == kHeader) columns = 6;
            else if (line == kShortHeader) columns = 4;
            else fail(ErrorKind::IoError, "unexpected CSV header '" + line + "'");
            continue;
        }
        const std::vector<std::string> f = split(line, ',');
        if (static_cast<int>(f.size()) != columns)
            fail(ErrorKind::IoError, "line " + std::to_string(n) + " has " + std::to_string(f.size()) +
                                         " fields, expected " + std::to_string(columns));
        SpectrumPoint p;
        p.mu = cplx(parse_number(f[0], n), parse_number(f[1], n));
        const size_t ai = columns == 6 ? 4 : 2;
        if (columns == 6 && !(f[2].empty() && f[3].empty())) {
            p.labeled = true;
            p.k = Vec2i(parse_int(f[2], n), parse_int(f[3], n));
        }
        p.anchor = Vec2(parse_number(f[ai], n), parse_number(f[ai + 1], n));
        if (std::none_of(cloud.anchors.begin(), cloud.anchors.end(), [&](const Vec2& a) { return a == p.anchor; }))
            cloud.anchors.push_back(p.anchor);
        cloud.points.push_back(p);
    }
    if (columns == 0) fail(ErrorKind::IoError, "missing CSV header");
    return cloud;
}

SpectrumCloud read_spectrum_csv(const fs::path& path) { return parse_spectrum_csv(read_file(path)); }

json to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }
json to_json(const Mat2& m) { return json::array({json::array({m(0, 0), m(0, 1)}), json::array({m(1, 0), m(1, 1)})}); }
json to_json(const Mat2i& m) { return json::array({json::array({m(0, 0), m(0, 1)}), json::array({m(1, 0), m(1, 1)})}); }

Vec2 vec2_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) fail(ErrorKind::IoError, "expected a pair, got " + j.dump());
    return Vec2(j[0].get<double>(), j[1].get<double>());
}

Mat2 mat2_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) fail(ErrorKind::IoError, "expected a 2x2 matrix, got " + j.dump());
    Mat2 m;
    m.row(0) = vec2_from_json(j[0]).transpose();
    m.row(1) = vec2_from_json(j[1]).transpose();
    return m;
}

Mat2i mat2i_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2 || j[0].size() != 2 || j[1].size() != 2)
        fail(ErrorKind::IoError, "expected a 2x2 integer matrix, got " + j.dump());
    Mat2i m;
    m << j[0][0].get<int>(), j[0][1].get<int>(), j[1][0].get<int>(), j[1][1].get<int>();
    return m;
}

json to_json(const PseudoChart& pc) {
    json j;
    j["id"] = pc.id;
    j["h"] = pc.h;
    j["eps"] = pc.eps;
    j["delta"] = pc.delta;
    j["reference"] = pc.reference;
    j["alignment_frame"] = to_json(pc.alignment_frame);
    j["origin"] = to_json(pc.origin);
    j["scale"] = pc.scale;
    j["degree"] = pc.degree;
    j["domain_radius"] = pc.domain_radius;
    json coeffs = json::array();
    for (long r = 0; r < pc.coefficients.rows(); ++r) {
        json row = json::array();
        for (long c = 0; c < pc.coefficients.cols(); ++c) row.push_back(pc.coefficients(r, c));
        coeffs.push_back(row);
    }
    j["coefficients"] = coeffs;
    json rects = json::array();
    for (size_t i = 0; i < pc.anchors.size(); ++i) {
        json r;
        r["anchor"] = to_json(pc.anchors[i]);
        r["frame"] = to_json(i < pc.frames.size() ? pc.frames[i] : Mat2i(Mat2i::Identity()));
        r["align_deviation"] = i < pc.align_deviation.size() ? pc.align_deviation[i] : 0.0;
        r["offset"] = to_json(i < pc.offsets.size() ? pc.offsets[i] : Vec2(Vec2::Zero()));
        if (i < pc.micro_charts.size()) {
            const MicroChart& mc = pc.micro_charts[i];
            r["center"] = json::array({mc.rectangle.center.real(), mc.rectangle.center.imag()});
            r["half_width"] = mc.rectangle.half_width;
            r["half_height"] = mc.rectangle.half_height;
            r["C"] = mc.rectangle.C;
            r["A"] = to_json(mc.A);
            r["b"] = to_json(mc.b);
            r["points"] = mc.labels.size();
            r["residual"] = mc.residual;
            r["relative_residual"] = mc.relative_residual;
            r["label_residual"] = mc.label_residual;
            r["iterations"] = mc.iterations;
        }
        rects.push_back(r);
    }
    j["rectangles"] = rects;
    return j;
}

PseudoChart pseudo_chart_from_json(const json& j) {
    try {
        PseudoChart pc;
        pc.id = j.at("id").get<std::string>();
        pc.h = j.at("h").get<double>();
        pc.eps = j.at("eps").get<double>();
        pc.delta = j.at("delta").get<double>();
        pc.reference = j.at("reference").get<int>();
        pc.alignment_frame = mat2_from_json(j.at("alignment_frame"));
        pc.origin = vec2_from_json(j.at("origin"));
        pc.scale = j.at("scale").get<double>();
        pc.degree = j.at("degree").get<int>();
        pc.domain_radius = j.at("domain_radius").get<double>();
        const json& co = j.at("coefficients");
        const long nm = static_cast<long>(monomials(pc.degree).size());
        if (co.size() != 2 || static_cast<long>(co[0].size()) != nm || static_cast<long>(co[1].size()) != nm)
            fail(ErrorKind::IoError, "coefficient table does not match degree " + std::to_string(pc.degree));
        pc.coefficients.resize(2, nm);
        for (long r = 0; r < 2; ++r)
            for (long c = 0; c < nm; ++c) pc.coefficients(r, c) = co[r][c].get<double>();
        for (const json& r : j.at("rectangles")) {
            pc.anchors.push_back(vec2_from_json(r.at("anchor")));
            pc.frames.push_back(mat2i_from_json(r.at("frame")));
            pc.align_deviation.push_back(r.at("align_deviation").get<double>());
            pc.offsets.push_back(vec2_from_json(r.at("offset")));
            MicroChart mc;
            if (r.contains("A")) {
                const Vec2 ctr = vec2_from_json(r.at("center"));
                mc.rectangle.center = cplx(ctr.x(), ctr.y());
                mc.rectangle.half_width = r.at("half_width").get<double>();
                mc.rectangle.half_height = r.at("half_height").get<double>();
                mc.rectangle.C = r.at("C").get<double>();
                mc.rectangle.anchor = pc.anchors.back();
                mc.rectangle.h = pc.h;
                mc.rectangle.eps = pc.eps;
                mc.rectangle.delta = pc.delta;
                mc.A = mat2_from_json(r.at("A"));
                mc.b = vec2_from_json(r.at("b"));
                mc.residual = r.at("residual").get<double>();
                mc.relative_residual = r.at("relative_residual").get<double>();
                mc.label_residual = r.at("label_residual").get<double>();
                mc.iterations = r.at("iterations").get<int>();
            }
            pc.micro_charts.push_back(mc);
        }
        return pc;
    } catch (const json::exception& e) {
        fail(ErrorKind::IoError, std::string("malformed pseudo-chart JSON: ") + e.what());
    }
}

json to_json(const HolonomyClass& h) {
    json j;
    j["representative"] = to_json(h.representative);
    j["determinant"] = h.determinant;
    j["trace"] = h.trace;
    j["loop"] = h.loop;
    return j;
}

HolonomyClass holonomy_from_json(const json& j) {
    try {
        return HolonomyClass::of(mat2i_from_json(j.at("representative")),
                                 j.value("loop", std::vector<std::string>{}));
    } catch (const json::exception& e) {
        fail(ErrorKind::IoError, std::string("malformed holonomy JSON: ") + e.what());
    }
}

json monodromy_report(const TransitionCocycle& c, const std::vector<HolonomyClass>& loops) {
    json j;
    j["opens"] = c.covering.ids;
    json edges = json::array();
    for (const auto& [e, m] : c.matrices) {
        json row;
        row["from"] = c.covering.ids[static_cast<size_t>(e.first)];
        row["to"] = c.covering.ids[static_cast<size_t>(e.second)];
        row["matrix"] = to_json(m);
        row["pre_round_deviation"] = c.deviation.at(e);
        edges.push_back(row);
    }
    j["edges"] = edges;
    json triples = json::array();
    for (const TripleCheck& t : c.triple_checks) {
        json row;
        row["opens"] = json::array({c.covering.ids[static_cast<size_t>(t.triple[0])],
                                    c.covering.ids[static_cast<size_t>(t.triple[1])],
                                    c.covering.ids[static_cast<size_t>(t.triple[2])]});
        row["holds"] = t.holds;
        triples.push_back(row);
    }
    j["triple_overlaps"] = triples;
    json hol = json::array();
    for (const HolonomyClass& h : loops) hol.push_back(to_json(h));
    j["loops"] = hol;
    return j;
}

std::string residual_table(const std::vector<PseudoChart>& charts) {
    std::ostringstream os;
    os << "open,anchor_E,anchor_G,points,residual,relative_residual,label_residual,iterations\n";
    for (const PseudoChart& pc : charts)
        for (size_t i = 0; i < pc.micro_charts.size() && i < pc.anchors.size(); ++i) {
            const MicroChart& mc = pc.micro_charts[i];
            os << pc.id << ',' << format_double(pc.anchors[i].x()) << ',' << format_double(pc.anchors[i].y()) << ','
               << mc.labels.size() << ',' << format_double(mc.residual) << ',' << format_double(mc.relative_residual)
               << ',' << format_double(mc.label_residual) << ',' << mc.iterations << "\n";
        }
    return os.str();
}

std::string overlay_svg(const SpectrumCloud& cloud, const std::vector<PseudoChart>& charts) {
    const double W = 900.0, H = 900.0, M = 40.0;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    auto extend = [&](double x, double y) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    };
    for (const SpectrumPoint& p : cloud.points) extend(p.mu.real(), p.mu.imag());
    for (const PseudoChart& pc : charts)
        for (const MicroChart& mc : pc.micro_charts) {
            const GoodRectangle& r = mc.rectangle;
            if (r.half_width <= 0.0) continue;
            extend(r.center.real() - r.half_width, r.center.imag() - r.half_height);
            extend(r.center.real() + r.half_width, r.center.imag() + r.half_height);
        }
    if (!(x1 > x0)) x0 -= 1.0, x1 += 1.0;
    if (!(y1 > y0)) y0 -= 1.0, y1 += 1.0;
    auto X = [&](double x) { return M + (x - x0) / (x1 - x0) * (W - 2 * M); };
    auto Y = [&](double y) { return H - M - (y - y0) / (y1 - y0) * (H - 2 * M); };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
       << W << ' ' << H << "\">\n";
    os << "<!-- seed=" << cloud.seed << " h=" << format_double(cloud.h) << " eps=" << format_double(cloud.eps)
       << " -->\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<g fill=\"none\" stroke=\"#c03030\" stroke-width=\"0.8\">\n";
    for (const PseudoChart& pc : charts)
        for (const MicroChart& mc : pc.micro_charts) {
            const GoodRectangle& r = mc.rectangle;
            if (r.half_width <= 0.0) continue;
            const double left = X(r.center.real() - r.half_width), right = X(r.center.real() + r.half_width);
            const double top = Y(r.center.imag() + r.half_height), bottom = Y(r.center.imag() - r.half_height);
            os << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(right - left)
               << "\" height=\"" << num(bottom - top) << "\"/>\n";
        }
    os << "</g>\n<g fill=\"none\" stroke=\"#3060c0\" stroke-width=\"0.4\">\n";
    const double eps = cloud.eps > 0.0 ? cloud.eps : 1.0;
    for (const PseudoChart& pc : charts)
        for (const MicroChart& mc : pc.micro_charts) {
            if (mc.labels.empty()) continue;
            Vec2i lo = mc.labels.front(), hi = mc.labels.front();
            for (const Vec2i& k : mc.labels) {
                lo = lo.cwiseMin(k);
                hi = hi.cwiseMax(k);
            }
            auto line = [&](const Vec2i& a, const Vec2i& b) {
                const Vec2 pa = mc.predict(a), pb = mc.predict(b);
                os << "<line x1=\"" << num(X(pa.x())) << "\" y1=\"" << num(Y(eps * pa.y())) << "\" x2=\""
                   << num(X(pb.x())) << "\" y2=\"" << num(Y(eps * pb.y())) << "\"/>\n";
            };
            for (int k2 = lo.y(); k2 <= hi.y(); ++k2) line(Vec2i(lo.x(), k2), Vec2i(hi.x(), k2));
            for (int k1 = lo.x(); k1 <= hi.x(); ++k1) line(Vec2i(k1, lo.y()), Vec2i(k1, hi.y()));
        }
    os << "</g>\n<g fill=\"black\">\n";
    for (const SpectrumPoint& p : cloud.points)
        os << "<circle cx=\"" << num(X(p.mu.real())) << "\" cy=\"" << num(Y(p.mu.imag())) << "\" r=\"1.2\"/>\n";
    os << "</g>\n</svg>\n";
    return os.str();
}

}  // namespace specmono
