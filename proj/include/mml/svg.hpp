#ifndef MML_SVG_HPP
#define MML_SVG_HPP

// Minimal static SVG charts. Output depends only on the data, so identical
// inputs give byte-identical files.

#include <string>
#include <vector>

namespace mml::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    bool step = false;   // draw as a step function (bit outputs, counters)
};

std::string render(const LineChart &chart);

struct Heatmap {
    std::string title;
    std::string row_label;
    std::string column_label;
    std::vector<std::string> rows;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> values;   // [row][column]
};

std::string render(const Heatmap &map);

} // namespace mml::svg

#endif
