#include "bdm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bdm/dsv.hpp"
#include "bdm/errors.hpp"

namespace bdm::svg {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 520.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 180.0; // room for the legend
constexpr double kTop = 46.0;
constexpr double kBottom = 56.0;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
                          "#aec7e8", "#ffbb78"};

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

Range pad(Range r) {
    if (r.hi <= r.lo) {
        r.lo -= 0.5;
        r.hi += 0.5;
        return r;
    }
    const double m = 0.04 * (r.hi - r.lo);
    return {r.lo - m, r.hi + m};
}

// 1-2-5 tick spacing.
std::vector<double> ticks(Range r, int target = 6) {
    const double span = r.hi - r.lo;
    double step = std::pow(10.0, std::floor(std::log10(span / target)));
    for (double mult : {1.0, 2.0, 5.0, 10.0}) {
        if (span / (step * mult) <= target) {
            step *= mult;
            break;
        }
    }
    std::vector<double> out;
    for (double v = std::ceil(r.lo / step) * step; v <= r.hi + 1e-12 * span; v += step)
        out.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
    return out;
}

std::string fmt_tick(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

class Canvas {
public:
    Canvas(Range xr, Range yr) : xr_(xr), yr_(yr) {}
    double sx(double x) const {
        return kLeft + (x - xr_.lo) / (xr_.hi - xr_.lo) * (kWidth - kLeft - kRight);
    }
    double sy(double y) const {
        return kHeight - kBottom -
               (y - yr_.lo) / (yr_.hi - yr_.lo) * (kHeight - kTop - kBottom);
    }

    void frame(std::ostream& out, const std::string& title, const std::string& xl,
               const std::string& yl) const {
        out << "<rect x='" << kLeft << "' y='" << kTop << "' width='"
            << kWidth - kLeft - kRight << "' height='" << kHeight - kTop - kBottom
            << "' fill='none' stroke='#333'/>\n";
        out << "<text x='" << (kLeft + kWidth - kRight) / 2.0
            << "' y='24' text-anchor='middle' font-size='16'>" << title << "</text>\n";
        out << "<text x='" << (kLeft + kWidth - kRight) / 2.0 << "' y='" << kHeight - 14
            << "' text-anchor='middle' font-size='13'>" << xl << "</text>\n";
        out << "<text x='20' y='" << (kTop + kHeight - kBottom) / 2.0
            << "' text-anchor='middle' font-size='13' transform='rotate(-90 20 "
            << (kTop + kHeight - kBottom) / 2.0 << ")'>" << yl << "</text>\n";
        for (double t : ticks(xr_)) {
            const double x = sx(t);
            out << "<line x1='" << x << "' y1='" << kHeight - kBottom << "' x2='" << x
                << "' y2='" << kHeight - kBottom + 5 << "' stroke='#333'/>\n";
            out << "<text x='" << x << "' y='" << kHeight - kBottom + 20
                << "' text-anchor='middle' font-size='11'>" << fmt_tick(t) << "</text>\n";
        }
        for (double t : ticks(yr_)) {
            const double y = sy(t);
            out << "<line x1='" << kLeft - 5 << "' y1='" << y << "' x2='" << kLeft
                << "' y2='" << y << "' stroke='#333'/>\n";
            out << "<text x='" << kLeft - 9 << "' y='" << y + 4
                << "' text-anchor='end' font-size='11'>" << fmt_tick(t) << "</text>\n";
        }
    }

private:
    Range xr_, yr_;
};

std::ofstream open(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='"
        << kHeight << "' viewBox='0 0 " << kWidth << " " << kHeight << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    return out;
}

} // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series) {
    if (series.empty()) throw EmptyInputError("write_line_chart: no series");
    Range xr{series[0].x.front(), series[0].x.front()};
    Range yr{series[0].y.front(), series[0].y.front()};
    for (const auto& s : series) {
        if (s.x.size() != s.y.size() || s.x.empty())
            throw ShapeError("write_line_chart: malformed series '" + s.label + "'");
        for (double v : s.x) {
            xr.lo = std::min(xr.lo, v);
            xr.hi = std::max(xr.hi, v);
        }
        for (double v : s.y) {
            yr.lo = std::min(yr.lo, v);
            yr.hi = std::max(yr.hi, v);
        }
    }
    Canvas canvas(pad(xr), pad(yr));
    auto out = open(path);
    canvas.frame(out, title, x_label, y_label);
    const std::size_t palette_n = sizeof(kPalette) / sizeof(kPalette[0]);
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        out << "<polyline fill='none' stroke='" << kPalette[si % palette_n]
            << "' stroke-width='1.5' points='";
        for (std::size_t k = 0; k < s.x.size(); ++k)
            out << canvas.sx(s.x[k]) << ',' << canvas.sy(s.y[k]) << ' ';
        out << "'/>\n";
        const double ly = kTop + 16.0 * static_cast<double>(si);
        out << "<line x1='" << kWidth - kRight + 12 << "' y1='" << ly + 8 << "' x2='"
            << kWidth - kRight + 34 << "' y2='" << ly + 8 << "' stroke='"
            << kPalette[si % palette_n] << "' stroke-width='2'/>\n";
        out << "<text x='" << kWidth - kRight + 40 << "' y='" << ly + 12
            << "' font-size='11'>" << s.label << "</text>\n";
    }
    out << "</svg>\n";
}

void write_bar_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     std::span<const double> bin_edges,
                     std::span<const std::size_t> counts) {
    if (counts.empty() || bin_edges.size() != counts.size() + 1)
        throw ShapeError("write_bar_chart: edges must bracket counts");
    Range xr{bin_edges.front(), bin_edges.back()};
    Range yr{0.0, 1.0};
    for (std::size_t c : counts) yr.hi = std::max(yr.hi, static_cast<double>(c));
    Canvas canvas(pad(xr), pad(yr));
    auto out = open(path);
    canvas.frame(out, title, x_label, y_label);
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double x0 = canvas.sx(bin_edges[k]);
        const double x1 = canvas.sx(bin_edges[k + 1]);
        const double y0 = canvas.sy(static_cast<double>(counts[k]));
        const double y1 = canvas.sy(0.0);
        out << "<rect x='" << x0 + 0.5 << "' y='" << y0 << "' width='"
            << std::max(0.5, x1 - x0 - 1.0) << "' height='" << std::max(0.0, y1 - y0)
            << "' fill='#1f77b4' stroke='#145a8a'/>\n";
    }
    out << "</svg>\n";
}

} // namespace bdm::svg
