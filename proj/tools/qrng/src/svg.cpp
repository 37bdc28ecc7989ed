// Copyright 2026 The cqrng Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "cqrng/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cqrng/error.hpp"

namespace cqrng::cli {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Roughly five ticks at 1, 2 or 5 times a power of ten.
std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> out;
  for (double t = std::ceil(lo / step - 1e-9) * step; t <= hi + step * 1e-9; t += step)
    out.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  return out;
}

}  // namespace

std::string render_svg(const std::vector<std::pair<double, double>>& points, const PlotOptions& opt) {
  if (points.empty()) throw InvalidArgument("render_svg: no points");
  double x0 = points[0].first, x1 = x0, y0 = points[0].second, y1 = y0;
  for (const auto& [x, y] : points) {
    if (!std::isfinite(x) || !std::isfinite(y)) throw InvalidArgument("render_svg: non-finite point");
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  y0 = std::min(y0, 0.0);
  if (x1 - x0 < 1e-12) { x0 -= 0.5; x1 += 0.5; }
  if (y1 - y0 < 1e-12) y1 = y0 + 1.0;
  const double padx = 0.04 * (x1 - x0), pady = 0.06 * (y1 - y0);
  x0 -= padx; x1 += padx; y1 += pady;

  const double left = 72, right = 20, top = 40, bottom = 56;
  const double pw = opt.width - left - right, ph = opt.height - top - bottom;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(opt.width) + "\" height=\"" +
       px(opt.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!opt.title.empty())
    s += "<text x=\"" + px(opt.width / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
         escape(opt.title) + "</text>\n";
  // axes
  s += "<line x1=\"" + px(left) + "\" y1=\"" + px(top + ph) + "\" x2=\"" + px(left + pw) + "\" y2=\"" +
       px(top + ph) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + px(left) + "\" y1=\"" + px(top) + "\" x2=\"" + px(left) + "\" y2=\"" +
       px(top + ph) + "\" stroke=\"black\"/>\n";
  for (double t : ticks(x0, x1)) {
    const double x = sx(t);
    s += "<line x1=\"" + px(x) + "\" y1=\"" + px(top + ph) + "\" x2=\"" + px(x) + "\" y2=\"" +
         px(top + ph + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + px(x) + "\" y=\"" + px(top + ph + 18) + "\" text-anchor=\"middle\">" + num(t) +
         "</text>\n";
  }
  for (double t : ticks(y0, y1)) {
    const double y = sy(t);
    s += "<line x1=\"" + px(left - 5) + "\" y1=\"" + px(y) + "\" x2=\"" + px(left) + "\" y2=\"" + px(y) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + px(left - 8) + "\" y=\"" + px(y + 4) + "\" text-anchor=\"end\">" + num(t) +
         "</text>\n";
  }
  if (!opt.x_label.empty())
    s += "<text x=\"" + px(left + pw / 2) + "\" y=\"" + px(opt.height - 12) +
         "\" text-anchor=\"middle\">" + escape(opt.x_label) + "</text>\n";
  if (!opt.y_label.empty())
    s += "<text transform=\"translate(18," + px(top + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(opt.y_label) + "</text>\n";
  s += "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i) s += ' ';
    s += px(sx(points[i].first)) + "," + px(sy(points[i].second));
  }
  s += "\"/>\n";
  for (const auto& [x, y] : points)
    s += "<circle cx=\"" + px(sx(x)) + "\" cy=\"" + px(sy(y)) + "\" r=\"3\" fill=\"#1f4e9c\" data-x=\"" +
         num(x) + "\" data-y=\"" + num(y) + "\"/>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace cqrng::cli
