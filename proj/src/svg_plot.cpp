#include "morse/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "morse/geometry.hpp"

namespace morse {

SvgPlot::SvgPlot(int width, int height, std::string title)
    : w_(width), h_(height), title_(std::move(title)) {}

void SvgPlot::add_series(const std::vector<double>& xs, const std::vector<double>& ys,
                         const std::string& color) {
    series_.push_back({xs, ys, color});
}

std::string SvgPlot::render() const {
    double x0 = 1e308, x1 = -1e308, y0 = 1e308, y1 = -1e308;
    for (const auto& s : series_) {
        for (double x : s.xs) { x0 = std::min(x0, x); x1 = std::max(x1, x); }
        for (double y : s.ys) { y0 = std::min(y0, y); y1 = std::max(y1, y); }
    }
    if (x1 <= x0) { x0 -= 1; x1 += 1; }
    if (y1 <= y0) { y0 -= 1; y1 += 1; }
    double mx = 0.05 * (x1 - x0), my = 0.08 * (y1 - y0);
    x0 -= mx; x1 += mx; y0 -= my; y1 += my;

    const int pad = 28;
    auto px = [&](double x) { return pad + (x - x0) / (x1 - x0) * (w_ - 2 * pad); };
    auto py = [&](double y) { return h_ - pad - (y - y0) / (y1 - y0) * (h_ - 2 * pad); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_
       << "\" viewBox=\"0 0 " << w_ << ' ' << h_ << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << w_ / 2 << "\" y=\"16\" text-anchor=\"middle\" font-size=\"12\" "
          "font-family=\"monospace\">"
       << title_ << "</text>\n";
    os << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << w_ - 2 * pad
       << "\" height=\"" << h_ - 2 * pad << "\" fill=\"none\" stroke=\"#888\"/>\n";
    for (const auto& s : series_) {
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < s.xs.size(); ++i)
            os << px(s.xs[i]) << ',' << py(s.ys[i]) << ' ';
        os << "\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void SvgPlot::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path);
    f << render();
}

}  // namespace morse
