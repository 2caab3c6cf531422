#pragma once

#include <string>
#include <vector>

namespace morse {

/// Minimal static SVG line plots for the report artifacts.
class SvgPlot {
public:
    SvgPlot(int width, int height, std::string title);

    void add_series(const std::vector<double>& xs, const std::vector<double>& ys,
                    const std::string& color);
    std::string render() const;
    void save(const std::string& path) const;

private:
    int w_, h_;
    std::string title_;
    struct Series {
        std::vector<double> xs, ys;
        std::string color;
    };
    std::vector<Series> series_;
};

}  // namespace morse
