#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cgrep/curve.hpp"

namespace cgrep::svg {

struct NamedCurve {
  std::string label;
  StepSurvivalCurve curve;
};

/// Standalone SVG: one step path per curve (class "curve"), one '+' glyph per
/// censor mark (class "censor-mark"), and a legend when there are two or more curves.
std::string curve_svg(const std::vector<NamedCurve>& curves, const std::string& title = "");

void emit_curve_svg(const std::vector<NamedCurve>& curves, const std::filesystem::path& path,
                    const std::string& title = "");

}  // namespace cgrep::svg
