#pragma once

#include <string>
#include <vector>

#include "drwr/fitter.hpp"

namespace drwr {

/// Minimal polyline plot of the total-loss column of a trace.
void save_loss_curve_svg(const FitTrace& trace, const std::string& path);

}  // namespace drwr
