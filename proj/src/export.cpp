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

#include "casa/export.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace casa {

namespace {

void png_chunk(std::ostream& os, const char* type,
               const std::vector<unsigned char>& payload) {
  const std::uint32_t len = static_cast<std::uint32_t>(payload.size());
  unsigned char hdr[8];
  hdr[0] = static_cast<unsigned char>((len >> 24) & 0xff);
  hdr[1] = static_cast<unsigned char>((len >> 16) & 0xff);
  hdr[2] = static_cast<unsigned char>((len >> 8) & 0xff);
  hdr[3] = static_cast<unsigned char>(len & 0xff);
  for (int i = 0; i < 4; ++i) hdr[4 + i] = static_cast<unsigned char>(type[i]);
  os.write(reinterpret_cast<const char*>(hdr), 8);
  if (!payload.empty())
    os.write(reinterpret_cast<const char*>(payload.data()),
             static_cast<std::streamsize>(payload.size()));
  std::uint32_t crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(type), 4);
  if (!payload.empty()) crc = crc32(crc, payload.data(), len);
  unsigned char tail[4];
  tail[0] = static_cast<unsigned char>((crc >> 24) & 0xff);
  tail[1] = static_cast<unsigned char>((crc >> 16) & 0xff);
  tail[2] = static_cast<unsigned char>((crc >> 8) & 0xff);
  tail[3] = static_cast<unsigned char>(crc & 0xff);
  os.write(reinterpret_cast<const char*>(tail), 4);
}

}  // namespace

void write_matrix_csv(const std::string& path, const Matrix& m,
                      const std::string& header) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw FormatError("csv: cannot open " + path);
  if (!header.empty()) f << header << '\n';
  f.precision(12);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) f << ',';
      f << m(r, c);
    }
    f << '\n';
  }
}

void write_png_gray(const std::string& path, const Matrix& m) {
  if (m.empty()) throw DegenerateInputError("png: empty matrix");
  const std::size_t h = m.rows(), w = m.cols();
  double lo = m.data()[0], hi = m.data()[0];
  for (double v : m.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi - lo > 1e-300 ? hi - lo : 1.0;

  // Filter byte 0 (none) before each scanline.
  std::vector<unsigned char> raw((w + 1) * h, 0);
  for (std::size_t r = 0; r < h; ++r) {
    raw[r * (w + 1)] = 0;
    for (std::size_t c = 0; c < w; ++c)
      raw[r * (w + 1) + 1 + c] =
          static_cast<unsigned char>(std::lround(255.0 * (m(r, c) - lo) / span));
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> deflated(bound);
  if (compress2(deflated.data(), &bound, raw.data(), static_cast<uLong>(raw.size()),
                6) != Z_OK)
    throw FormatError("png: zlib compression failed");
  deflated.resize(bound);

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("png: cannot open " + path);
  static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  os.write(reinterpret_cast<const char*>(sig), 8);

  std::vector<unsigned char> ihdr(13, 0);
  const std::uint32_t uw = static_cast<std::uint32_t>(w);
  const std::uint32_t uh = static_cast<std::uint32_t>(h);
  ihdr[0] = (uw >> 24) & 0xff;
  ihdr[1] = (uw >> 16) & 0xff;
  ihdr[2] = (uw >> 8) & 0xff;
  ihdr[3] = uw & 0xff;
  ihdr[4] = (uh >> 24) & 0xff;
  ihdr[5] = (uh >> 16) & 0xff;
  ihdr[6] = (uh >> 8) & 0xff;
  ihdr[7] = uh & 0xff;
  ihdr[8] = 8;  // bit depth
  ihdr[9] = 0;  // grayscale
  png_chunk(os, "IHDR", ihdr);
  png_chunk(os, "IDAT", deflated);
  png_chunk(os, "IEND", {});
}

void write_heatmap_svg(const std::string& path, const Matrix& m,
                       const std::string& title) {
  if (m.empty()) throw DegenerateInputError("svg: empty matrix");
  double lo = m.data()[0], hi = m.data()[0];
  for (double v : m.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi - lo > 1e-300 ? hi - lo : 1.0;
  const int cell = 6;
  const int top = title.empty() ? 2 : 18;
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw FormatError("svg: cannot open " + path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
    << m.cols() * cell + 4 << "\" height=\"" << m.rows() * cell + top + 2 << "\">\n";
  if (!title.empty())
    f << "<text x=\"2\" y=\"13\" font-size=\"11\" font-family=\"sans-serif\">"
      << title << "</text>\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const int g = static_cast<int>(std::lround(255.0 * (m(r, c) - lo) / span));
      f << "<rect x=\"" << 2 + c * cell << "\" y=\"" << top + r * cell
        << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"rgb(" << g
        << ',' << g << ',' << 255 - g << ")\"/>\n";
    }
  }
  f << "</svg>\n";
}

void write_bar_chart_svg(const std::string& path, const std::string& title,
                         const std::vector<std::string>& categories,
                         const std::vector<BarSeries>& series, double y_max) {
  static const char* kColors[] = {"#4878cf", "#ee854a", "#6acc64", "#d65f5f",
                                  "#956cb4", "#8c613c"};
  const int chart_w = 640, chart_h = 300, margin = 48, legend_h = 20;
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw FormatError("svg: cannot open " + path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << chart_w
    << "\" height=\"" << chart_h + legend_h << "\">\n";
  f << "<text x=\"" << margin << "\" y=\"16\" font-size=\"13\" "
    << "font-family=\"sans-serif\">" << title << "</text>\n";

  const double plot_w = chart_w - 2.0 * margin;
  const double plot_h = chart_h - 2.0 * margin;
  // Axes.
  f << "<line x1=\"" << margin << "\" y1=\"" << chart_h - margin << "\" x2=\""
    << chart_w - margin << "\" y2=\"" << chart_h - margin
    << "\" stroke=\"black\"/>\n";
  f << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin
    << "\" y2=\"" << chart_h - margin << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 5; ++tick) {
    const double v = y_max * tick / 5.0;
    const double y = chart_h - margin - plot_h * tick / 5.0;
    f << "<text x=\"" << margin - 6 << "\" y=\"" << y + 4
      << "\" font-size=\"9\" text-anchor=\"end\" font-family=\"sans-serif\">" << v
      << "</text>\n";
  }

  const std::size_t n_cat = categories.size();
  const std::size_t n_ser = series.size();
  const double group_w = plot_w / static_cast<double>(n_cat);
  const double bar_w = group_w * 0.8 / static_cast<double>(n_ser == 0 ? 1 : n_ser);
  for (std::size_t ci = 0; ci < n_cat; ++ci) {
    const double gx = margin + group_w * static_cast<double>(ci) + group_w * 0.1;
    for (std::size_t si = 0; si < n_ser; ++si) {
      const double v = std::clamp(series[si].values[ci], 0.0, y_max);
      const double bh = plot_h * v / y_max;
      f << "<rect x=\"" << gx + bar_w * static_cast<double>(si) << "\" y=\""
        << chart_h - margin - bh << "\" width=\"" << bar_w * 0.92 << "\" height=\""
        << bh << "\" fill=\"" << kColors[si % 6] << "\"/>\n";
    }
    f << "<text x=\"" << gx + group_w * 0.4 << "\" y=\"" << chart_h - margin + 14
      << "\" font-size=\"10\" text-anchor=\"middle\" font-family=\"sans-serif\">"
      << categories[ci] << "</text>\n";
  }
  for (std::size_t si = 0; si < n_ser; ++si) {
    const double lx = margin + 130.0 * static_cast<double>(si);
    f << "<rect x=\"" << lx << "\" y=\"" << chart_h + 4 << "\" width=\"12\" "
      << "height=\"12\" fill=\"" << kColors[si % 6] << "\"/>\n";
    f << "<text x=\"" << lx + 16 << "\" y=\"" << chart_h + 14
      << "\" font-size=\"10\" font-family=\"sans-serif\">" << series[si].name
      << "</text>\n";
  }
  f << "</svg>\n";
}

}  // namespace casa
