// Standalone SVG 1.1 line plots: one polyline per series, axes labeled.
#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace retrylab::svg {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

inline void write_plot(std::ostream& os, const std::vector<Series>& series,
                       const std::string& x_label, const std::string& y_label,
                       int width = 720, int height = 480) {
  const int mleft = 70, mright = 20, mtop = 20, mbottom = 50;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool any = false;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!any) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        any = true;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  ymin = std::min(0.0, ymin);

  const auto sx = [&](double x) {
    return mleft + (x - xmin) / (xmax - xmin) * (width - mleft - mright);
  };
  const auto sy = [&](double y) {
    return height - mbottom - (y - ymin) / (ymax - ymin) * (height - mtop - mbottom);
  };

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
     << "\" height=\"" << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << mleft << "\" y1=\"" << height - mbottom << "\" x2=\""
     << width - mright << "\" y2=\"" << height - mbottom
     << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  os << "<line x1=\"" << mleft << "\" y1=\"" << mtop << "\" x2=\"" << mleft << "\" y2=\""
     << height - mbottom << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double xv = xmin + (xmax - xmin) * tick / 4.0;
    const double yv = ymin + (ymax - ymin) * tick / 4.0;
    os << "<text x=\"" << sx(xv) << "\" y=\"" << height - mbottom + 18
       << "\" font-size=\"11\" text-anchor=\"middle\">" << xv << "</text>\n";
    os << "<text x=\"" << mleft - 6 << "\" y=\"" << sy(yv) + 4
       << "\" font-size=\"11\" text-anchor=\"end\">" << yv << "</text>\n";
  }
  os << "<text x=\"" << (mleft + width - mright) / 2 << "\" y=\"" << height - 12
     << "\" font-size=\"13\" text-anchor=\"middle\">" << x_label << "</text>\n";
  os << "<text x=\"16\" y=\"" << (mtop + height - mbottom) / 2
     << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (mtop + height - mbottom) / 2 << ")\">" << y_label << "</text>\n";

  int legend_y = mtop + 8;
  for (const auto& s : series) {
    std::ostringstream pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i) pts << ' ';
      pts << sx(s.x[i]) << ',' << sy(s.y[i]);
    }
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\""
       << pts.str() << "\"/>\n";
    os << "<text x=\"" << width - mright - 8 << "\" y=\"" << legend_y << "\" font-size=\"12\""
       << " text-anchor=\"end\" fill=\"" << s.color << "\">" << s.label << "</text>\n";
    legend_y += 16;
  }
  os << "</svg>\n";
}

}  // namespace retrylab::svg
