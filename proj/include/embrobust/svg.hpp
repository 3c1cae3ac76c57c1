#ifndef EMBROBUST_SVG_HPP
#define EMBROBUST_SVG_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

/**
 * @file svg.hpp
 *
 * @brief Static SVG charts: bars, lines and scatter plots.
 *
 * Output is a pure function of the inputs (fixed-precision coordinates, no timestamps), so charts can be diffed.
 * Elements carry `class` attributes (`bar`, `series`, `point`, `rule`, `legend`) for structural checks.
 */

namespace embrobust::svg {

/** Qualitative palette for biological classes. */
inline const std::vector<std::string>& bio_palette() {
    static const std::vector<std::string> colors = { "#1f77b4", "#2ca02c", "#9467bd", "#17becf", "#bcbd22", "#8c564b", "#e377c2", "#7f7f7f", "#aec7e8", "#98df8a" };
    return colors;
}

/** Qualitative palette for confounder classes, disjoint from `bio_palette()`. */
inline const std::vector<std::string>& conf_palette() {
    static const std::vector<std::string> colors = { "#d62728", "#ff7f0e", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666", "#7570b3", "#fb9a99", "#fdbf6f" };
    return colors;
}

inline const std::string& palette_color(const std::vector<std::string>& palette, std::size_t index) {
    return palette[index % palette.size()];
}

inline std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
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

inline std::string num(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.2f", v);
    return buffer;
}

inline std::string tick_label(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.3g", v);
    return buffer;
}

/**
 * @brief Plot area with linear or log-x axes, accumulating SVG elements.
 */
class Chart {
public:
    Chart(std::string title, std::string xlabel, std::string ylabel, double width = 640, double height = 420) :
        title(std::move(title)), xlabel(std::move(xlabel)), ylabel(std::move(ylabel)), width(width), height(height) {}

    void set_x_range(double lo, double hi, bool log_scale = false) {
        xlo = lo;
        xhi = hi;
        xlog = log_scale;
    }

    void set_y_range(double lo, double hi) {
        ylo = lo;
        yhi = hi;
    }

    /** Free-form comment placed in the SVG header, e.g. a reference to the run manifest. */
    void set_note(std::string text) { note = std::move(text); }

    double px(double x) const {
        double t = xlog ? (std::log10(x) - std::log10(xlo)) / (std::log10(xhi) - std::log10(xlo)) : (x - xlo) / (xhi - xlo);
        if (!std::isfinite(t)) {
            t = 0.5;
        }
        return left + t * (width - left - right);
    }

    double py(double y) const {
        double t = (y - ylo) / (yhi - ylo);
        if (!std::isfinite(t)) {
            t = 0.5;
        }
        return height - bottom - t * (height - top - bottom);
    }

    void add_polyline(const std::vector<double>& xs, const std::vector<double>& ys, const std::string& color, const std::string& name) {
        std::string pts;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!std::isfinite(ys[i])) {
                continue;
            }
            if (!pts.empty()) {
                pts += ' ';
            }
            pts += num(px(xs[i])) + "," + num(py(ys[i]));
        }
        body += "<polyline class=\"series\" data-name=\"" + escape(name) + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        legend.emplace_back(name, color);
    }

    void add_point(double x, double y, const std::string& color, double radius = 3, const std::string& label = "") {
        body += "<circle class=\"point\" cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) + "\" r=\"" + num(radius) + "\" fill=\"" + color + "\"";
        if (!label.empty()) {
            body += " data-label=\"" + escape(label) + "\"";
        }
        body += "/>\n";
        if (!label.empty()) {
            body += "<text x=\"" + num(px(x) + radius + 2) + "\" y=\"" + num(py(y) - radius - 2) + "\" font-size=\"10\">" + escape(label) + "</text>\n";
        }
    }

    void add_bar(double center, double half_width, double value, const std::string& color, const std::string& label, const std::string& value_text) {
        double x0 = px(center - half_width), x1 = px(center + half_width);
        double y0 = py(std::max(ylo, 0.0)), y1 = py(value);
        body += "<rect class=\"bar\" data-label=\"" + escape(label) + "\" x=\"" + num(x0) + "\" y=\"" + num(std::min(y0, y1)) + "\" width=\"" + num(x1 - x0) +
            "\" height=\"" + num(std::abs(y0 - y1)) + "\" fill=\"" + color + "\"/>\n";
        body += "<text x=\"" + num(0.5 * (x0 + x1)) + "\" y=\"" + num(std::min(y0, y1) - 4) + "\" font-size=\"11\" text-anchor=\"middle\">" + escape(value_text) + "</text>\n";
        body += "<text x=\"" + num(0.5 * (x0 + x1)) + "\" y=\"" + num(height - bottom + 16) + "\" font-size=\"11\" text-anchor=\"middle\">" + escape(label) + "</text>\n";
    }

    void add_hrule(double y, const std::string& color, const std::string& name) {
        body += "<line class=\"rule\" data-name=\"" + escape(name) + "\" x1=\"" + num(left) + "\" x2=\"" + num(width - right) + "\" y1=\"" + num(py(y)) + "\" y2=\"" + num(py(y)) +
            "\" stroke=\"" + color + "\" stroke-dasharray=\"5,4\"/>\n";
        legend.emplace_back(name, color);
    }

    void add_legend_entry(const std::string& name, const std::string& color) { legend.emplace_back(name, color); }

    /** Suppress numeric x tick labels (used for categorical bar charts). */
    void hide_x_ticks() { x_ticks = false; }

    std::string render() const {
        std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
        if (!note.empty()) {
            std::string text = escape(note);
            for (auto pos = text.find("--"); pos != std::string::npos; pos = text.find("--", pos)) {
                text.replace(pos, 2, "- -");
            }
            out += "<!-- " + text + " -->\n";
        }
        out += "<rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) + "\" fill=\"white\"/>\n";
        out += "<text x=\"" + num(width / 2) + "\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">" + escape(title) + "</text>\n";
        out += axes();
        out += body;
        for (std::size_t i = 0; i < legend.size(); ++i) {
            double y = top + 12 + 16 * static_cast<double>(i);
            double x = width - right - 150;
            out += "<g class=\"legend\"><rect x=\"" + num(x) + "\" y=\"" + num(y - 9) + "\" width=\"10\" height=\"10\" fill=\"" + legend[i].second + "\"/>";
            out += "<text x=\"" + num(x + 14) + "\" y=\"" + num(y) + "\" font-size=\"11\">" + escape(legend[i].first) + "</text></g>\n";
        }
        out += "</svg>\n";
        return out;
    }

private:
    std::string axes() const {
        std::string out;
        double x0 = left, x1 = width - right, y0 = height - bottom, y1 = top;
        out += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) + "\" y2=\"" + num(y0) + "\" stroke=\"black\"/>\n";
        out += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x0) + "\" y2=\"" + num(y1) + "\" stroke=\"black\"/>\n";
        for (int t = 0; t <= 4; ++t) {
            double v = ylo + (yhi - ylo) * t / 4.0;
            out += "<text x=\"" + num(x0 - 6) + "\" y=\"" + num(py(v) + 4) + "\" font-size=\"10\" text-anchor=\"end\">" + tick_label(v) + "</text>\n";
        }
        if (x_ticks) {
            for (int t = 0; t <= 4; ++t) {
                double v = xlog ? std::pow(10.0, std::log10(xlo) + (std::log10(xhi) - std::log10(xlo)) * t / 4.0) : xlo + (xhi - xlo) * t / 4.0;
                out += "<text x=\"" + num(px(v)) + "\" y=\"" + num(y0 + 16) + "\" font-size=\"10\" text-anchor=\"middle\">" + tick_label(v) + "</text>\n";
            }
        }
        out += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(height - 8) + "\" font-size=\"12\" text-anchor=\"middle\">" + escape(xlabel) + "</text>\n";
        out += "<text x=\"14\" y=\"" + num((y0 + y1) / 2) + "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 " + num((y0 + y1) / 2) + ")\">" + escape(ylabel) + "</text>\n";
        return out;
    }

    std::string title, xlabel, ylabel;
    double width, height;
    double left = 60, right = 20, top = 36, bottom = 48;
    double xlo = 0, xhi = 1, ylo = 0, yhi = 1;
    bool xlog = false;
    bool x_ticks = true;
    std::string note;
    std::string body;
    std::vector<std::pair<std::string, std::string>> legend;
};

/**
 * @brief One labeled value for a bar chart.
 */
struct Bar {
    std::string label;
    double value;
    std::string value_text;
};

/**
 * Bars in the given order, with an optional dashed reference line (e.g. index 1).
 */
inline std::string bar_chart(const std::string& title, const std::string& ylabel, const std::vector<Bar>& bars, std::optional<double> reference = std::nullopt,
                             const std::string& note = "") {
    double top = reference.value_or(0);
    for (const auto& b : bars) {
        top = std::max(top, b.value);
    }
    Chart chart(title, "", ylabel, std::max(320.0, 90.0 * static_cast<double>(bars.size()) + 120), 420);
    chart.set_note(note);
    chart.set_x_range(0, static_cast<double>(bars.size()));
    chart.set_y_range(0, top > 0 ? top * 1.15 : 1);
    chart.hide_x_ticks();
    for (std::size_t i = 0; i < bars.size(); ++i) {
        chart.add_bar(static_cast<double>(i) + 0.5, 0.35, bars[i].value, palette_color(bio_palette(), 0), bars[i].label, bars[i].value_text);
    }
    if (reference) {
        chart.add_hrule(*reference, "#555555", "reference " + tick_label(*reference));
    }
    return chart.render();
}

struct Series {
    std::string name;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
};

struct Rule {
    std::string name;
    std::string color;
    double y;
};

inline std::string line_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel, const std::vector<Series>& series,
                              bool log_x = false, const std::vector<Rule>& rules = {}, std::optional<std::pair<double, double>> y_range = std::nullopt,
                              const std::string& note = "") {
    double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i])) {
                continue;
            }
            xlo = std::min(xlo, s.x[i]);
            xhi = std::max(xhi, s.x[i]);
            ylo = std::min(ylo, s.y[i]);
            yhi = std::max(yhi, s.y[i]);
        }
    }
    if (!std::isfinite(xlo)) {
        xlo = log_x ? 1 : 0;
        xhi = xlo + 1;
    }
    if (xhi == xlo) {
        xhi = xlo + 1;
    }
    if (y_range) {
        ylo = y_range->first;
        yhi = y_range->second;
    } else {
        for (const auto& r : rules) {
            ylo = std::min(ylo, r.y);
            yhi = std::max(yhi, r.y);
        }
        if (!std::isfinite(ylo)) {
            ylo = 0;
            yhi = 1;
        }
        if (yhi == ylo) {
            yhi = ylo + 1;
        }
    }
    Chart chart(title, xlabel, ylabel);
    chart.set_note(note);
    chart.set_x_range(xlo, xhi, log_x);
    chart.set_y_range(ylo, yhi);
    for (const auto& s : series) {
        chart.add_polyline(s.x, s.y, s.color, s.name);
    }
    for (const auto& r : rules) {
        chart.add_hrule(r.y, r.color, r.name);
    }
    return chart.render();
}

struct Point {
    double x;
    double y;
    std::string color;
    std::string label;
};

/**
 * Scatter plot; `legend` pairs (name, color) are listed in the corner.
 */
inline std::string scatter_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel, const std::vector<Point>& points,
                                 const std::vector<std::pair<std::string, std::string>>& legend = {}, double radius = 3,
                                 std::optional<std::pair<double, double>> fixed_range = std::nullopt, const std::string& note = "") {
    double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
    for (const auto& p : points) {
        xlo = std::min(xlo, p.x);
        xhi = std::max(xhi, p.x);
        ylo = std::min(ylo, p.y);
        yhi = std::max(yhi, p.y);
    }
    if (fixed_range) {
        xlo = ylo = fixed_range->first;
        xhi = yhi = fixed_range->second;
    } else if (!std::isfinite(xlo)) {
        xlo = ylo = 0;
        xhi = yhi = 1;
    }
    double padx = (xhi - xlo) * 0.05 + (xhi == xlo ? 0.5 : 0), pady = (yhi - ylo) * 0.05 + (yhi == ylo ? 0.5 : 0);
    Chart chart(title, xlabel, ylabel, 560, 520);
    chart.set_note(note);
    chart.set_x_range(xlo - padx, xhi + padx);
    chart.set_y_range(ylo - pady, yhi + pady);
    for (const auto& p : points) {
        chart.add_point(p.x, p.y, p.color, radius, p.label);
    }
    for (const auto& [name, color] : legend) {
        chart.add_legend_entry(name, color);
    }
    return chart.render();
}

}

#endif
