#pragma once

#include <span>
#include <string>
#include <vector>

namespace bdm::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Static line chart; one polyline per series with a legend.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series);

// Bar chart over contiguous bins.
void write_bar_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     std::span<const double> bin_edges,
                     std::span<const std::size_t> counts);

} // namespace bdm::svg
