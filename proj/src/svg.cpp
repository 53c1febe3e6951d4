#include "drwr/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "drwr/errors.hpp"

namespace drwr {

void save_loss_curve_svg(const FitTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);

  const int w = 640, h = 400, margin = 50;
  double lo = 1e300, hi = -1e300;
  int max_step = 1;
  for (const auto& r : trace.records) {
    if (std::isfinite(r.total)) {
      lo = std::min(lo, r.total);
      hi = std::max(hi, r.total);
    }
    max_step = std::max(max_step, r.step);
  }
  if (lo > hi) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12) hi = lo + 1e-12;

  const auto sx = [&](double step) {
    return margin + step / max_step * (w - 2 * margin);
  };
  const auto sy = [&](double v) {
    return h - margin - (v - lo) / (hi - lo) * (h - 2 * margin);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\">\n";
  out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << h - margin << "\" x2=\""
      << w - margin << "\" y2=\"" << h - margin << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin
      << "\" y2=\"" << h - margin << "\" stroke=\"black\"/>\n";

  out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (const auto& r : trace.records)
    if (std::isfinite(r.total)) out << sx(r.step) << "," << sy(r.total) << " ";
  out << "\"/>\n";

  out << "<text x=\"" << margin << "\" y=\"" << margin - 10
      << "\" font-size=\"12\">total loss, max " << hi << "</text>\n";
  out << "<text x=\"" << margin << "\" y=\"" << h - margin + 30
      << "\" font-size=\"12\">step 0 .. " << max_step << ", min loss " << lo
      << "</text>\n";
  out << "</svg>\n";
}

}  // namespace drwr
