#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <cobbkit/geometry.hpp>
#include <cobbkit/postprocess.hpp>

namespace cobbkit {

/// Everything a stage overlay can show. Leave vectors empty to skip layers.
struct RenderInput {
    std::string title;
    ImageDims dims;
    std::vector<BoundingBox> gt_boxes;
    std::vector<Detection> kept;
    std::vector<Detection> rejected;
    std::vector<Point2> landmarks;
    std::vector<PolyFit> curves;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::string fmt_coord(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.2f", v);
    return buffer;
}

inline void append_box(std::ostringstream& out, const BoundingBox& box, const char* css_class) {
    out << "  <rect class=\"" << css_class << "\" x=\"" << fmt_coord(box.x_min) << "\" y=\""
        << fmt_coord(box.y_min) << "\" width=\"" << fmt_coord(box.width()) << "\" height=\""
        << fmt_coord(box.height()) << "\"/>\n";
}

}  // namespace detail

/// Deterministic SVG overlay of pipeline stages: boxes, kept and rejected
/// detections in distinct styles, landmark dots and fitted curves.
inline std::string render_svg(const RenderInput& input) {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << input.dims.width << ' '
        << input.dims.height << "\">\n";
    out << "  <style>\n"
           "    .gt-box { fill: none; stroke: #2563eb; stroke-width: 3; }\n"
           "    .det-kept { fill: none; stroke: #16a34a; stroke-width: 3; }\n"
           "    .det-rejected { fill: none; stroke: #dc2626; stroke-width: 3;"
           " stroke-dasharray: 10 8; }\n"
           "    .landmark { fill: #f59e0b; stroke: none; }\n"
           "    .curve { fill: none; stroke: #9333ea; stroke-width: 2; }\n"
           "    .warning { fill: #dc2626; font: bold 28px sans-serif; }\n"
           "    .title { fill: #111827; font: 24px sans-serif; }\n"
           "  </style>\n";
    if (!input.title.empty()) {
        out << "  <text class=\"title\" x=\"10\" y=\"30\">" << input.title << "</text>\n";
    }
    for (const auto& box : input.gt_boxes) detail::append_box(out, box, "gt-box");
    for (const auto& det : input.kept) detail::append_box(out, det.box, "det-kept");
    for (const auto& det : input.rejected) detail::append_box(out, det.box, "det-rejected");
    for (const auto& fit : input.curves) {
        out << "  <polyline class=\"curve\" points=\"";
        const int samples = 64;
        for (int s = 0; s <= samples; ++s) {
            const double y = input.dims.height * static_cast<double>(s) / samples;
            if (s) out << ' ';
            out << detail::fmt_coord(fit(y)) << ',' << detail::fmt_coord(y);
        }
        out << "\"/>\n";
    }
    for (const auto& p : input.landmarks) {
        out << "  <circle class=\"landmark\" cx=\"" << detail::fmt_coord(p.x) << "\" cy=\""
            << detail::fmt_coord(p.y) << "\" r=\"4\"/>\n";
    }
    int warning_y = 70;
    for (const auto& warning : input.warnings) {
        out << "  <text class=\"warning\" x=\"10\" y=\"" << warning_y << "\">" << warning
            << "</text>\n";
        warning_y += 34;
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace cobbkit
