#pragma once

#include <iosfwd>

#include "kdl/analysis.hpp"

namespace kdl {

/// Static figure of a domain: the mask, plus whatever the context has
/// computed among Whitney cubes, the maximizing separating ball with its end,
/// and the extremal field as arrows. 3D domains show the middle z slice.
void write_svg(std::ostream& os, AnalysisContext& ctx, const AnalysisOptions& o);

}  // namespace kdl
