// Copyright 2026 casa-sid authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CASA_EXPORT_HPP
#define CASA_EXPORT_HPP

#include <string>
#include <vector>

#include "casa/common.hpp"

namespace casa {

// Plain numeric CSV, one matrix row per line.
void write_matrix_csv(const std::string& path, const Matrix& m,
                      const std::string& header = "");

// 8-bit grayscale PNG of a matrix, min-max normalized, row 0 at the top.
void write_png_gray(const std::string& path, const Matrix& m);

// Simple SVG heatmap (one rect per cell); fine for mask-sized matrices.
void write_heatmap_svg(const std::string& path, const Matrix& m,
                       const std::string& title = "");

struct BarSeries {
  std::string name;
  std::vector<double> values;  // one per category
};

// Grouped bar chart (categories on x, one bar per series), y in [0, y_max].
void write_bar_chart_svg(const std::string& path, const std::string& title,
                         const std::vector<std::string>& categories,
                         const std::vector<BarSeries>& series, double y_max = 100.0);

}  // namespace casa

#endif  // CASA_EXPORT_HPP
