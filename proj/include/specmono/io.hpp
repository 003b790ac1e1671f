#pragma once

#include "specmono/charts.hpp"
#include "specmono/monodromy.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace specmono {

using json = nlohmann::json;

/// Writes through a temporary sibling file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Round-trip formatting for doubles.
std::string format_double(double x);

/// Spectrum CSV: one `# key=value ...` provenance line, then the header
/// `re,im,k1,k2,anchor_E,anchor_G`.
std::string spectrum_csv(const SpectrumCloud& cloud);
/// Accepts the full header or `re,im,anchor_E,anchor_G`; provenance keys
/// present in comment lines fill h, eps, delta, lambda and seed.
SpectrumCloud parse_spectrum_csv(const std::string& text);
SpectrumCloud read_spectrum_csv(const std::filesystem::path& path);

json to_json(const Vec2& v);
json to_json(const Mat2& m);
json to_json(const Mat2i& m);
Vec2 vec2_from_json(const json& j);
Mat2i mat2i_from_json(const json& j);
Mat2 mat2_from_json(const json& j);

json to_json(const PseudoChart& pc);
/// Restores everything the leading term needs; micro-charts come back as
/// summaries without their point lists.
PseudoChart pseudo_chart_from_json(const json& j);

json to_json(const HolonomyClass& h);
HolonomyClass holonomy_from_json(const json& j);

json monodromy_report(const TransitionCocycle& cocycle, const std::vector<HolonomyClass>& loops);

/// Per-rectangle residual table, one row per micro-chart of every chart.
std::string residual_table(const std::vector<PseudoChart>& charts);

/// Scatter of the points (Re, Im) with fitted lattice lines and rectangle
/// outlines of every micro-chart.
std::string overlay_svg(const SpectrumCloud& cloud, const std::vector<PseudoChart>& charts);

}  // namespace specmono
