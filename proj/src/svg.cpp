#include "cgrep/svg.hpp"

#include <algorithm>
#include <cstdio>

#include "cgrep/common.hpp"
#include "cgrep/data_io.hpp"

namespace cgrep::svg {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 60, kRight = 20, kTop = 30, kBottom = 50;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string curve_svg(const std::vector<NamedCurve>& curves, const std::string& title) {
  if (curves.empty()) throw ParameterError("no curves to plot");
  double t_max = 0;
  for (const auto& c : curves) t_max = std::max(t_max, c.curve.max_time());
  if (!(t_max > 0)) t_max = 1.0;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double t) { return kLeft + pw * t / t_max; };
  auto sy = [&](double s) { return kTop + ph * (1.0 - s); };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
       num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    o += "<text x=\"" + num(kWidth / 2) + "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" +
         escape(title) + "</text>\n";
  }
  o += "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
  o += "<path d=\"M " + num(sx(0)) + " " + num(sy(1)) + " V " + num(sy(0)) + " H " +
       num(sx(t_max)) + "\"/>\n</g>\n";
  o += "<g class=\"ticks\" font-size=\"11\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double s = k / 4.0, t = t_max * k / 4.0;
    o += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(sy(s) + 4) +
         "\" text-anchor=\"end\">" + num(s) + "</text>\n";
    o += "<text x=\"" + num(sx(t)) + "\" y=\"" + num(kHeight - kBottom + 16) +
         "\" text-anchor=\"middle\">" + num(t) + "</text>\n";
  }
  o += "</g>\n";
  o += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 10) +
       "\" text-anchor=\"middle\" font-size=\"12\">time</text>\n";
  o += "<text x=\"14\" y=\"" + num(kTop + ph / 2) +
       "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 " +
       num(kTop + ph / 2) + ")\">survival probability</text>\n";

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& pts = curves[c].curve.points;
    const std::string color = kColors[c % std::size(kColors)];
    std::string d = "M " + num(sx(0)) + " " + num(sy(1));
    double s = 1.0;
    for (const auto& p : pts) {
      if (p.survival != s) {
        d += " H " + num(sx(p.time)) + " V " + num(sy(p.survival));
        s = p.survival;
      }
    }
    d += " H " + num(sx(curves[c].curve.max_time()));
    o += "<path class=\"curve\" stroke=\"" + color + "\" fill=\"none\" stroke-width=\"1.5\" d=\"" +
         d + "\"/>\n";
    for (const auto& p : pts) {
      if (!p.censor_mark) continue;
      const double x = sx(p.time), y = sy(p.survival);
      o += "<path class=\"censor-mark\" stroke=\"" + color + "\" d=\"M " + num(x - 4) + " " +
           num(y) + " H " + num(x + 4) + " M " + num(x) + " " + num(y - 4) + " V " + num(y + 4) +
           "\"/>\n";
    }
  }
  if (curves.size() >= 2) {
    o += "<g class=\"legend\" font-size=\"12\">\n";
    for (std::size_t c = 0; c < curves.size(); ++c) {
      const double y = kTop + 12 + 16 * static_cast<double>(c);
      const double x = kWidth - kRight - 140;
      o += "<path stroke=\"" + std::string(kColors[c % std::size(kColors)]) + "\" d=\"M " +
           num(x) + " " + num(y - 4) + " H " + num(x + 20) + "\"/>\n";
      o += "<text x=\"" + num(x + 26) + "\" y=\"" + num(y) + "\">" + escape(curves[c].label) +
           "</text>\n";
    }
    o += "</g>\n";
  }
  o += "</svg>\n";
  return o;
}

void emit_curve_svg(const std::vector<NamedCurve>& curves, const std::filesystem::path& path,
                    const std::string& title) {
  io::write_text(path, curve_svg(curves, title));
}

}  // namespace cgrep::svg
