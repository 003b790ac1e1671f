#pragma once

#include "specmono/diophantine.hpp"
#include "specmono/io.hpp"
#include "specmono/pipeline.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace specmono {

struct MeasureConfig {
    FrequencyBox box{Vec2(1.0, 1.0), Vec2(2.0, 2.0)};
    long samples = 100000;
    std::vector<double> alphas{0.1, 0.05, 0.025};
};

struct RunConfig {
    PipelineConfig pipeline;
    MeasureConfig measure;
    std::string output_dir = "out";
    std::uint64_t seed = 1;
    json effective;  // the merged document, recorded next to every output
};

/// `key.sub=value`; the value is read as JSON when it parses and as a string
/// otherwise. Unknown top-level keys are rejected.
using Override = std::pair<std::string, std::string>;
void apply_override(json& doc, const Override& override);

/// Defaults are the champagne-bottle annulus run. Throws ConfigError on
/// unknown or mistyped keys and RegimeViolation unless h < eps <= 1.1 h^delta.
RunConfig parse_config(json doc, const std::vector<Override>& overrides = {});
RunConfig load_config(const std::filesystem::path& path, const std::vector<Override>& overrides = {});

}  // namespace specmono
