#include "hetheat/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "hetheat/errors.hpp"
#include "hetheat/numerics.hpp"

namespace hetheat {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
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

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct Axis {
    double lo, hi;
    bool log;

    double map(double v) const { return log ? std::log10(v) : v; }
    double frac(double v) const { return hi == lo ? 0.5 : (map(v) - lo) / (hi - lo); }
};

Axis make_axis(const std::vector<double>& values, bool log) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : values) {
        const double m = log ? std::log10(v) : v;
        lo = std::min(lo, m);
        hi = std::max(hi, m);
    }
    if (hi == lo) {
        lo -= 0.5;
        hi += 0.5;
    } else {
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    return {lo, hi, log};
}

}  // namespace

std::string render_svg(const std::vector<Series>& series, PlotKind kind, const PlotLabels& labels) {
    const bool log = kind == PlotKind::LogLog;
    std::vector<double> xs, ys;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) throw ValidationError("series", "x and y lengths differ in " + s.name);
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                throw ValidationError("series", "non-finite point in " + s.name);
            }
            if (log && (s.x[i] <= 0.0 || s.y[i] <= 0.0)) {
                throw ValidationError("series", "log-log plot needs positive coordinates in " + s.name);
            }
            xs.push_back(s.x[i]);
            ys.push_back(s.y[i]);
        }
    }
    if (xs.empty()) throw ValidationError("series", "nothing to plot");

    const Axis ax = make_axis(xs, log), ay = make_axis(ys, log);
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto px = [&](double v) { return kLeft + ax.frac(v) * pw; };
    auto py = [&](double v) { return kTop + (1.0 - ay.frac(v)) * ph; };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";

    // Five ticks per axis, labelled in data units.
    for (int i = 0; i <= 4; ++i) {
        const double fx = ax.lo + (ax.hi - ax.lo) * i / 4.0;
        const double fy = ay.lo + (ay.hi - ay.lo) * i / 4.0;
        const double vx = log ? std::pow(10.0, fx) : fx;
        const double vy = log ? std::pow(10.0, fy) : fy;
        const double gx = kLeft + pw * i / 4.0, gy = kTop + ph * (1.0 - i / 4.0);
        svg << "<line x1=\"" << gx << "\" y1=\"" << kTop + ph << "\" x2=\"" << gx << "\" y2=\"" << kTop + ph + 5
            << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << gx << "\" y=\"" << kTop + ph + 18 << "\" font-size=\"11\" text-anchor=\"middle\">"
            << num(vx) << "</text>\n"
            << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << gy << "\" x2=\"" << kLeft << "\" y2=\"" << gy
            << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << kLeft - 8 << "\" y=\"" << gy + 4 << "\" font-size=\"11\" text-anchor=\"end\">"
            << num(vy) << "</text>\n";
    }
    svg << "<text x=\"" << kWidth / 2 << "\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">"
        << escape(labels.title) << "</text>\n"
        << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12 << "\" font-size=\"12\" text-anchor=\"middle\">"
        << escape(labels.x) << (log ? " (log)" : "") << "</text>\n"
        << "<text transform=\"translate(16," << kTop + ph / 2 << ") rotate(-90)\" font-size=\"12\" "
        << "text-anchor=\"middle\">" << escape(labels.y) << (log ? " (log)" : "") << "</text>\n";

    int legend_row = 0;
    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& ser = series[s];
        if (ser.x.empty()) continue;
        const char* color = kColors[s % std::size(kColors)];
        if (ser.x.size() > 1) {
            svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < ser.x.size(); ++i) svg << px(ser.x[i]) << ',' << py(ser.y[i]) << ' ';
            svg << "\"/>\n";
        }
        for (std::size_t i = 0; i < ser.x.size(); ++i) {
            svg << "<circle cx=\"" << px(ser.x[i]) << "\" cy=\"" << py(ser.y[i]) << "\" r=\"3\" fill=\"" << color
                << "\"/>\n";
        }
        std::string legend = ser.name;
        if (log && ser.x.size() > 1) {
            std::vector<double> lx, ly;
            for (std::size_t i = 0; i < ser.x.size(); ++i) {
                lx.push_back(std::log(ser.x[i]));
                ly.push_back(std::log(ser.y[i]));
            }
            char buf[48];
            std::snprintf(buf, sizeof buf, " (slope %.3f)", ls_slope(lx, ly));
            legend += buf;
        }
        const double ly = kTop + 14 + 15 * legend_row++;
        svg << "<text x=\"" << kLeft + pw - 8 << "\" y=\"" << ly << "\" font-size=\"11\" text-anchor=\"end\" fill=\""
            << color << "\">" << escape(legend) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void emit_plot(const std::vector<Series>& series, PlotKind kind, const std::filesystem::path& path,
               const PlotLabels& labels) {
    const std::string doc = render_svg(series, kind, labels);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write plot to " + path.string());
    out << doc;
    if (!out) throw IoError("short write to " + path.string());
}

}  // namespace hetheat
