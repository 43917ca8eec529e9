#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hetheat {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

enum class PlotKind { LogLog, Line };

struct PlotLabels {
    std::string title;
    std::string x;
    std::string y;
};

/// Renders the series as a standalone SVG 1.1 document. Log-log plots carry the least-squares
/// slope of every series with two or more points in the legend. Throws ValidationError when no
/// series has a point (or a log-log series has a nonpositive coordinate) and IoError when the file
/// cannot be written.
std::string render_svg(const std::vector<Series>& series, PlotKind kind, const PlotLabels& labels);
void emit_plot(const std::vector<Series>& series, PlotKind kind, const std::filesystem::path& path,
               const PlotLabels& labels = {});

}  // namespace hetheat
