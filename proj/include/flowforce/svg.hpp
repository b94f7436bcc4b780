#pragma once
// Self-contained SVG of the (r, S) parameter plane: both boundary curves, the
// barrier r^2/2, the cusp and the crossing of barrier and lower boundary.

#include <flowforce/format.hpp>
#include <flowforce/region.hpp>

#include <algorithm>
#include <string>
#include <vector>

namespace flowforce {

inline std::string region_svg(const std::vector<RegionSample>& rows) {
  if (rows.size() < 2) throw DomainError("region plot needs at least two samples");
  constexpr double W = 640, H = 480, M = 56;
  const double r0 = rows.front().r, r1 = rows.back().r;
  double f0 = rows.front().F_minus, f1 = rows.front().F_plus;
  for (const RegionSample& s : rows) {
    f0 = std::min({f0, s.F_minus, s.barrier});
    f1 = std::max({f1, s.F_plus, s.barrier});
  }
  const double pad = 0.05 * (f1 - f0);
  f0 -= pad;
  f1 += pad;
  auto X = [&](double r) { return M + (W - 2 * M) * (r - r0) / (r1 - r0); };
  auto Y = [&](double f) { return H - M - (H - 2 * M) * (f - f0) / (f1 - f0); };
  auto num = [](double v) { return format_number(v, 6); };
  auto polyline = [&](auto value, const char* colour, const char* dash) {
    std::string s = "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"2\"";
    if (*dash) s += " stroke-dasharray=\"" + std::string(dash) + "\"";
    s += " points=\"";
    for (const RegionSample& row : rows) s += num(X(row.r)) + "," + num(Y(value(row))) + " ";
    s.back() = '"';
    return s + "/>\n";
  };
  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<!-- generated by flowforce region -->\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\" "
       "style=\"font-family:sans-serif;font-size:12px\">\n";
  s += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  s += "<line x1=\"" + num(M) + "\" y1=\"" + num(H - M) + "\" x2=\"" + num(W - M) + "\" y2=\"" + num(H - M) +
       "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + num(M) + "\" y1=\"" + num(M) + "\" x2=\"" + num(M) + "\" y2=\"" + num(H - M) +
       "\" stroke=\"black\"/>\n";
  s += "<text x=\"" + num(W / 2) + "\" y=\"" + num(H - 16) + "\" text-anchor=\"middle\">r</text>\n";
  s += "<text x=\"16\" y=\"" + num(H / 2) + "\" text-anchor=\"middle\">S</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double r = r0 + (r1 - r0) * t / 4.0;
    const double f = f0 + (f1 - f0) * t / 4.0;
    s += "<text x=\"" + num(X(r)) + "\" y=\"" + num(H - M + 16) + "\" text-anchor=\"middle\">" + num(r) + "</text>\n";
    s += "<text x=\"" + num(M - 6) + "\" y=\"" + num(Y(f) + 4) + "\" text-anchor=\"end\">" + num(f) + "</text>\n";
  }
  s += polyline([](const RegionSample& x) { return x.F_minus; }, "#1f5fa8", "");
  s += polyline([](const RegionSample& x) { return x.F_plus; }, "#b03a2e", "");
  s += polyline([](const RegionSample& x) { return x.barrier; }, "#2e7d32", "6 4");
  auto marker = [&](double r, double f, const char* label) {
    if (r < r0 || r > r1) return std::string();
    return "<circle cx=\"" + num(X(r)) + "\" cy=\"" + num(Y(f)) + "\" r=\"4\" fill=\"black\"/>\n<text x=\"" +
           num(X(r) + 8) + "\" y=\"" + num(Y(f) - 8) + "\">" + label + "</text>\n";
  };
  s += marker(cusp_head, cusp_head, "cusp (1.5, 1.5)");
  const RegionCrossing c = barrier_lower_intersection();
  s += marker(c.r_star, c.F_star, "Froude 2");
  s += "<text x=\"" + num(W - M) + "\" y=\"" + num(M - 24) + "\" text-anchor=\"end\" fill=\"#1f5fa8\">F_minus</text>\n";
  s += "<text x=\"" + num(W - M) + "\" y=\"" + num(M - 10) + "\" text-anchor=\"end\" fill=\"#b03a2e\">F_plus</text>\n";
  s += "<text x=\"" + num(M + 8) + "\" y=\"" + num(M - 10) + "\" fill=\"#2e7d32\">r^2/2</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace flowforce
