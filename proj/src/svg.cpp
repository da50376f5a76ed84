#include "mml/svg.hpp"

#include "mml/errors.hpp"
#include "mml/text_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace mml::svg {

namespace {

constexpr double width = 640.0;
constexpr double height = 420.0;
constexpr double left = 70.0;
constexpr double right = 150.0;
constexpr double top = 40.0;
constexpr double bottom = 55.0;

constexpr std::array<const char *, 8> palette = {
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string esc(const std::string &s)
{
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

std::string num(double v) { return format_fixed(v, 2); }

std::string tick_label(double v)
{
    if (v != 0.0 && (std::abs(v) >= 1e5 || std::abs(v) < 1e-3)) {
        std::ostringstream s;
        s.imbue(std::locale::classic());
        s.precision(2);
        s << std::scientific << v;
        return s.str();
    }
    std::string t = format_fixed(v, 3);
    while (!t.empty() && t.back() == '0')
        t.pop_back();
    if (!t.empty() && t.back() == '.')
        t.pop_back();
    return t == "-0" ? "0" : t;
}

std::string header(const std::string &title)
{
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << num(width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << esc(title) << "</text>\n";
    return out.str();
}

} // namespace

std::string render(const LineChart &chart)
{
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto &s : chart.series) {
        if (s.x.size() != s.y.size())
            throw Error(ErrorKind::input, "series '" + s.label + "' has mismatched x/y");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
                continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    if (!std::isfinite(xmin)) {
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax == xmin)
        xmax = xmin + 1;
    if (ymax == ymin) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    const double pw = width - left - right, ph = height - top - bottom;
    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return top + ph - (y - ymin) / (ymax - ymin) * ph; };

    std::ostringstream out;
    out << header(chart.title);
    out << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
        << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int k = 0; k <= 5; ++k) {
        const double xv = xmin + (xmax - xmin) * k / 5.0;
        const double yv = ymin + (ymax - ymin) * k / 5.0;
        out << "<line x1=\"" << num(px(xv)) << "\" y1=\"" << num(top + ph) << "\" x2=\""
            << num(px(xv)) << "\" y2=\"" << num(top + ph + 5) << "\" stroke=\"#444\"/>\n"
            << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(top + ph + 18)
            << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n"
            << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(py(yv)) << "\" x2=\""
            << num(left + pw) << "\" y2=\"" << num(py(yv)) << "\" stroke=\"#ddd\"/>\n"
            << "<text x=\"" << num(left - 8) << "\" y=\"" << num(py(yv) + 4)
            << "\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
    }
    out << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 12)
        << "\" text-anchor=\"middle\">" << esc(chart.x_label) << "</text>\n"
        << "<text transform=\"translate(16 " << num(top + ph / 2)
        << ") rotate(-90)\" text-anchor=\"middle\">" << esc(chart.y_label) << "</text>\n";

    for (std::size_t k = 0; k < chart.series.size(); ++k) {
        const auto &s = chart.series[k];
        const char *colour = palette[k % palette.size()];
        out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.8\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
                continue;
            if (chart.step && i > 0)
                out << num(px(s.x[i])) << ',' << num(py(s.y[i - 1])) << ' ';
            out << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
        }
        out << "\"/>\n";
        const double ly = top + 14 + 18.0 * static_cast<double>(k);
        out << "<line x1=\"" << num(width - right + 12) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
            << num(width - right + 32) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << colour
            << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << num(width - right + 38) << "\" y=\"" << num(ly) << "\">"
            << esc(s.label) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string render(const Heatmap &map)
{
    if (map.values.size() != map.rows.size())
        throw Error(ErrorKind::input, "heatmap row count mismatch");
    double vmax = 0.0;
    for (const auto &row : map.values) {
        if (row.size() != map.columns.size())
            throw Error(ErrorKind::input, "heatmap column count mismatch");
        for (double v : row)
            vmax = std::max(vmax, v);
    }
    const double pw = width - left - right, ph = height - top - bottom;
    const double cw = map.columns.empty() ? pw : pw / static_cast<double>(map.columns.size());
    const double ch = map.rows.empty() ? ph : ph / static_cast<double>(map.rows.size());

    std::ostringstream out;
    out << header(map.title);
    for (std::size_t r = 0; r < map.rows.size(); ++r) {
        for (std::size_t c = 0; c < map.columns.size(); ++c) {
            const double v = map.values[r][c];
            // log scale keeps small counts visible next to large ones
            const double t = vmax > 0.0 ? std::log1p(v) / std::log1p(vmax) : 0.0;
            const int shade = static_cast<int>(std::lround(255.0 * (1.0 - t)));
            const double x = left + cw * static_cast<double>(c);
            const double y = top + ch * static_cast<double>(r);
            out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(cw)
                << "\" height=\"" << num(ch) << "\" fill=\"rgb(" << shade << ',' << shade
                << ",255)\" stroke=\"white\"/>\n"
                << "<text x=\"" << num(x + cw / 2) << "\" y=\"" << num(y + ch / 2 + 4)
                << "\" text-anchor=\"middle\" fill=\"" << (t > 0.6 ? "white" : "black") << "\">"
                << tick_label(v) << "</text>\n";
        }
        out << "<text x=\"" << num(left - 8) << "\" y=\""
            << num(top + ch * (static_cast<double>(r) + 0.5) + 4) << "\" text-anchor=\"end\">"
            << esc(map.rows[r]) << "</text>\n";
    }
    for (std::size_t c = 0; c < map.columns.size(); ++c)
        out << "<text x=\"" << num(left + cw * (static_cast<double>(c) + 0.5)) << "\" y=\""
            << num(top + ph + 18) << "\" text-anchor=\"middle\">" << esc(map.columns[c])
            << "</text>\n";
    out << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 12)
        << "\" text-anchor=\"middle\">" << esc(map.column_label) << "</text>\n"
        << "<text transform=\"translate(16 " << num(top + ph / 2)
        << ") rotate(-90)\" text-anchor=\"middle\">" << esc(map.row_label) << "</text>\n"
        << "</svg>\n";
    return out.str();
}

} // namespace mml::svg
