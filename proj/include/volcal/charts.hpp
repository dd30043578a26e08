#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "volcal/errors.hpp"
#include "volcal/evaluation.hpp"
#include "volcal/json_io.hpp"

namespace volcal {

namespace chart_detail {

inline std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
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

inline std::string xml_unescape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        if (s[i] == '&') {
            if (s.compare(i, 5, "&amp;") == 0) {
                out += '&';
                i += 5;
                continue;
            }
            if (s.compare(i, 4, "&lt;") == 0) {
                out += '<';
                i += 4;
                continue;
            }
            if (s.compare(i, 4, "&gt;") == 0) {
                out += '>';
                i += 4;
                continue;
            }
            if (s.compare(i, 6, "&quot;") == 0) {
                out += '"';
                i += 6;
                continue;
            }
        }
        out += s[i];
        ++i;
    }
    return out;
}

inline std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string num6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

struct Frame {
    double width = 720.0;
    double height = 540.0;
    double left = 70.0;
    double right = 20.0;
    double top = 40.0;
    double bottom = 50.0;

    double plot_w() const { return width - left - right; }
    double plot_h() const { return height - top - bottom; }
};

} // namespace chart_detail

/// Inner text of the <metadata id="chart-data"> element, XML-unescaped;
/// every chart embeds the exact data table it was drawn from there.
inline std::string extract_svg_metadata(const std::string& svg) {
    const std::string open = "<metadata id=\"chart-data\">";
    const std::string close = "</metadata>";
    const auto start = svg.find(open);
    if (start == std::string::npos) throw ParseError("svg: no chart-data metadata element");
    const auto body = start + open.size();
    const auto end = svg.find(close, body);
    if (end == std::string::npos) throw ParseError("svg: unterminated metadata element");
    return chart_detail::xml_unescape(svg.substr(body, end - body));
}

/// Model-vs-market price scatter: market price on x, model price on y, the
/// y=x diagonal for reference, Black-Scholes and the stochastic model as
/// separate series. Output bytes depend only on the rows and title.
inline std::string scatter_svg(const std::vector<ComparisonRow>& rows,
                               const std::string& title) {
    using namespace chart_detail;
    if (rows.empty()) throw InvalidInput("scatter_svg: no rows");
    const Frame fr;
    double lo = rows[0].real_price, hi = rows[0].real_price;
    for (const ComparisonRow& r : rows) {
        lo = std::min({lo, r.real_price, r.bs_price, r.sv_price});
        hi = std::max({hi, r.real_price, r.bs_price, r.sv_price});
    }
    const double pad = (hi > lo ? hi - lo : std::max(1.0, std::fabs(hi))) * 0.05;
    lo -= pad;
    hi += pad;
    auto x_of = [&](double v) { return fr.left + (v - lo) / (hi - lo) * fr.plot_w(); };
    auto y_of = [&](double v) { return fr.top + fr.plot_h() - (v - lo) / (hi - lo) * fr.plot_h(); };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(fr.width) + "\" height=\"" +
         num(fr.height) + "\" viewBox=\"0 0 " + num(fr.width) + " " + num(fr.height) + "\">\n";
    s += "<metadata id=\"chart-data\">" +
         xml_escape(dump_json(comparison_rows_to_json(rows))) + "</metadata>\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(fr.width / 2) + "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">" + xml_escape(title) + "</text>\n";
    const double x0 = fr.left, x1 = fr.left + fr.plot_w();
    const double y0 = fr.top + fr.plot_h(), y1 = fr.top;
    s += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) + "\" y2=\"" +
         num(y0) + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x0) + "\" y2=\"" +
         num(y1) + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + num(x_of(lo)) + "\" y1=\"" + num(y_of(lo)) + "\" x2=\"" +
         num(x_of(hi)) + "\" y2=\"" + num(y_of(hi)) +
         "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
    s += "<text x=\"" + num(x0) + "\" y=\"" + num(y0 + 18) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + num(lo) + "</text>\n";
    s += "<text x=\"" + num(x1) + "\" y=\"" + num(y0 + 18) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + num(hi) +
         "</text>\n";
    s += "<text x=\"" + num(x0 - 6) + "\" y=\"" + num(y1 + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + num(hi) +
         "</text>\n";
    s += "<text x=\"" + num(fr.width / 2) + "\" y=\"" + num(fr.height - 10) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">market price"
         "</text>\n";
    for (const ComparisonRow& r : rows) {
        s += "<circle cx=\"" + num(x_of(r.real_price)) + "\" cy=\"" + num(y_of(r.bs_price)) +
             "\" r=\"3\" fill=\"#1f77b4\" fill-opacity=\"0.7\"/>\n";
    }
    for (const ComparisonRow& r : rows) {
        const double cx = x_of(r.real_price), cy = y_of(r.sv_price);
        s += "<rect x=\"" + num(cx - 2.5) + "\" y=\"" + num(cy - 2.5) +
             "\" width=\"5\" height=\"5\" fill=\"#d62728\" fill-opacity=\"0.7\"/>\n";
    }
    s += "<circle cx=\"" + num(x1 - 150) + "\" cy=\"" + num(y1 + 12) +
         "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    s += "<text x=\"" + num(x1 - 142) + "\" y=\"" + num(y1 + 16) +
         "\" font-family=\"sans-serif\" font-size=\"12\">bs</text>\n";
    s += "<rect x=\"" + num(x1 - 92.5) + "\" y=\"" + num(y1 + 9.5) +
         "\" width=\"5\" height=\"5\" fill=\"#d62728\"/>\n";
    s += "<text x=\"" + num(x1 - 82) + "\" y=\"" + num(y1 + 16) +
         "\" font-family=\"sans-serif\" font-size=\"12\">stochastic</text>\n";
    s += "</svg>\n";
    return s;
}

/// Grouped bar chart of in/out-of-sample MRAE per model, with the report
/// embedded as metadata.
inline std::string error_bars_svg(const ErrorReport& rep) {
    using namespace chart_detail;
    const Frame fr;
    struct Bar {
        const char* label;
        double value;
        const char* fill;
    };
    const std::vector<Bar> bars = {
        {"bs in", rep.bs.mrae_in, "#1f77b4"},      {"bs out", rep.bs.mrae_out, "#aec7e8"},
        {"heston in", rep.heston.mrae_in, "#d62728"}, {"heston out", rep.heston.mrae_out, "#ff9896"},
        {"msv in", rep.msv.mrae_in, "#2ca02c"},    {"msv out", rep.msv.mrae_out, "#98df8a"},
    };
    double top = 0.0;
    for (const Bar& b : bars) top = std::max(top, b.value);
    if (top <= 0.0) top = 1.0;
    top *= 1.15;

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(fr.width) + "\" height=\"" +
         num(fr.height) + "\" viewBox=\"0 0 " + num(fr.width) + " " + num(fr.height) + "\">\n";
    s += "<metadata id=\"chart-data\">" + xml_escape(dump_json(report_to_json(rep))) +
         "</metadata>\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(fr.width / 2) + "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">MRAE by model, " +
         xml_escape(rep.dataset_label) + "</text>\n";
    const double y_base = fr.top + fr.plot_h();
    s += "<line x1=\"" + num(fr.left) + "\" y1=\"" + num(y_base) + "\" x2=\"" +
         num(fr.left + fr.plot_w()) + "\" y2=\"" + num(y_base) + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + num(fr.left) + "\" y1=\"" + num(y_base) + "\" x2=\"" + num(fr.left) +
         "\" y2=\"" + num(fr.top) + "\" stroke=\"black\"/>\n";
    const double slot = fr.plot_w() / static_cast<double>(bars.size());
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double h = bars[i].value / top * fr.plot_h();
        const double bx = fr.left + slot * (static_cast<double>(i) + 0.2);
        const double bw = slot * 0.6;
        s += "<rect x=\"" + num(bx) + "\" y=\"" + num(y_base - h) + "\" width=\"" + num(bw) +
             "\" height=\"" + num(h) + "\" fill=\"" + bars[i].fill + "\"/>\n";
        s += "<text x=\"" + num(bx + bw / 2) + "\" y=\"" + num(y_base - h - 4) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
             num6(bars[i].value) + "</text>\n";
        s += "<text x=\"" + num(bx + bw / 2) + "\" y=\"" + num(y_base + 16) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
             bars[i].label + "</text>\n";
    }
    s += "<text x=\"" + num(fr.left - 6) + "\" y=\"" + num(fr.top + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + num6(top) +
         "</text>\n";
    s += "</svg>\n";
    return s;
}

} // namespace volcal
