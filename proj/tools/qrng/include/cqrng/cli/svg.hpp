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


#pragma once

// Minimal SVG line plot: axes, ticks, one polyline with point markers.

#include <string>
#include <utility>
#include <vector>

namespace cqrng::cli {

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  double width = 640.0;
  double height = 420.0;
};

/// Points are drawn in the given order. Throws InvalidArgument when empty
/// or when a coordinate is not finite.
std::string render_svg(const std::vector<std::pair<double, double>>& points,
                       const PlotOptions& opt);

}  // namespace cqrng::cli
