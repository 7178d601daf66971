#ifndef RDMD_SVG_HPP
#define RDMD_SVG_HPP

// Minimal SVG charts: scatter series, polylines, axes with ticks, optional
// unit circle and logarithmic y axis.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "rdmd/error.hpp"

namespace rdmd::svg {

struct Series {
    std::string label;
    std::string color = "#1f77b4";
    std::vector<double> x;
    std::vector<double> y;
    bool line = false;   // polyline when true, markers otherwise
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    bool log_y = false;
    bool unit_circle = false;
    bool equal_aspect = false;
    int width = 640;
    int height = 480;

    Series& add(Series s) {
        series.push_back(std::move(s));
        return series.back();
    }
};

namespace detail {

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!(lo <= hi)) lo = 0.0, hi = 1.0;
        if (lo == hi) lo -= 0.5, hi += 0.5;
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
};

inline std::vector<double> ticks(double lo, double hi, int target = 6) {
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (raw <= m * mag) {
            step = m * mag;
            break;
        }
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) out.push_back(t);
    return out;
}

} // namespace detail

inline std::string render(const Chart& c) {
    const double left = 70, right = 20, top = 40, bottom = 55;
    const double pw = c.width - left - right, ph = c.height - top - bottom;
    auto ty = [&](double v) { return c.log_y ? (v > 0 ? std::log10(v) : std::numeric_limits<double>::quiet_NaN()) : v; };

    detail::Range xr, yr;
    for (const auto& s : c.series) {
        for (double v : s.x) xr.add(v);
        for (double v : s.y) yr.add(ty(v));
    }
    if (c.unit_circle) {
        xr.add(-1.0), xr.add(1.0);
        yr.add(-1.0), yr.add(1.0);
    }
    xr.finish();
    yr.finish();
    if (c.equal_aspect) {
        const double sx = (xr.hi - xr.lo) / pw, sy = (yr.hi - yr.lo) / ph;
        const double s = std::max(sx, sy);
        const double cx = 0.5 * (xr.lo + xr.hi), cy = 0.5 * (yr.lo + yr.hi);
        xr.lo = cx - 0.5 * s * pw, xr.hi = cx + 0.5 * s * pw;
        yr.lo = cy - 0.5 * s * ph, yr.hi = cy + 0.5 * s * ph;
    }
    auto px = [&](double v) { return left + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double v) { return top + ph - (v - yr.lo) / (yr.hi - yr.lo) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << c.width << "\" height=\"" << c.height
       << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << c.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
       << detail::escape(c.title) << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (double t : detail::ticks(xr.lo, xr.hi)) {
        os << "<line x1=\"" << px(t) << "\" y1=\"" << top + ph << "\" x2=\"" << px(t) << "\" y2=\"" << top + ph + 5
           << "\" stroke=\"black\"/>";
        os << "<text x=\"" << px(t) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << detail::fmt(t)
           << "</text>\n";
    }
    for (double t : detail::ticks(yr.lo, yr.hi)) {
        const std::string label = c.log_y ? "1e" + detail::fmt(t) : detail::fmt(t);
        os << "<line x1=\"" << left - 5 << "\" y1=\"" << py(t) << "\" x2=\"" << left << "\" y2=\"" << py(t)
           << "\" stroke=\"black\"/>";
        os << "<text x=\"" << left - 8 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">" << label
           << "</text>\n";
    }
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << c.height - 12 << "\" text-anchor=\"middle\">"
       << detail::escape(c.x_label) << "</text>\n";
    os << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
       << detail::escape(c.y_label) << "</text>\n";

    if (c.unit_circle) {
        os << "<polyline fill=\"none\" stroke=\"#999\" stroke-dasharray=\"4,3\" points=\"";
        for (int k = 0; k <= 180; ++k) {
            const double a = 2.0 * 3.14159265358979323846 * k / 180.0;
            os << px(std::cos(a)) << ',' << py(std::sin(a)) << ' ';
        }
        os << "\"/>\n";
    }

    double legend_y = top + 14;
    for (const auto& s : c.series) {
        const std::size_t n = std::min(s.x.size(), s.y.size());
        if (s.line) {
            os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t k = 0; k < n; ++k) {
                const double yv = ty(s.y[k]);
                if (std::isfinite(s.x[k]) && std::isfinite(yv)) os << px(s.x[k]) << ',' << py(yv) << ' ';
            }
            os << "\"/>\n";
        } else {
            for (std::size_t k = 0; k < n; ++k) {
                const double yv = ty(s.y[k]);
                if (!std::isfinite(s.x[k]) || !std::isfinite(yv)) continue;
                os << "<circle cx=\"" << px(s.x[k]) << "\" cy=\"" << py(yv) << "\" r=\"3\" fill=\"" << s.color
                   << "\" fill-opacity=\"0.7\"/>\n";
            }
        }
        if (!s.label.empty()) {
            os << "<rect x=\"" << left + pw - 150 << "\" y=\"" << legend_y - 8 << "\" width=\"10\" height=\"10\" fill=\""
               << s.color << "\"/><text x=\"" << left + pw - 135 << "\" y=\"" << legend_y + 1 << "\">"
               << detail::escape(s.label) << "</text>\n";
            legend_y += 16;
        }
    }
    os << "</svg>\n";
    return os.str();
}

inline void write(const Chart& c, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) rdmd::detail::fail(ErrorCode::PathError, "cannot write " + path.string());
    os << render(c);
}

} // namespace rdmd::svg

#endif
