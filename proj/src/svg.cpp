// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0

#include "segtcn/svg.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "segtcn/error.hpp"
#include "segtcn/pose.hpp"

namespace segtcn {

namespace {

// HSL with fixed saturation/lightness so neighboring ids stay separable.
void hsl_to_rgb(double h, double s, double l, int rgb[3]) {
    const double c = (1.0 - std::fabs(2.0 * l - 1.0)) * s;
    const double hp = h / 60.0;
    const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1) { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else { r = c; b = x; }
    const double m = l - c / 2.0;
    rgb[0] = static_cast<int>(std::lround((r + m) * 255.0));
    rgb[1] = static_cast<int>(std::lround((g + m) * 255.0));
    rgb[2] = static_cast<int>(std::lround((b + m) * 255.0));
}

} // namespace

std::string class_color(int cls, int num_classes) {
    if (num_classes < 1) throw ValidationError("need at least one class for colors");
    const double hue = 360.0 * (cls % num_classes) / num_classes;
    int rgb[3];
    hsl_to_rgb(hue, 0.62, 0.55, rgb);
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

std::string timeline_svg(const std::vector<TimelineRow>& rows, int num_classes) {
    if (rows.empty()) throw ValidationError("timeline needs at least one row");
    const int track_x = 150, track_w = 700;
    const int row_h = 22, gap = 8, margin = 12;
    const int width = track_x + track_w + margin;
    const int height = margin * 2 + static_cast<int>(rows.size()) * (row_h + gap) - gap;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\">\n";
    int y = margin;
    for (const TimelineRow& row : rows) {
        if (row.classes.empty()) throw ValidationError("timeline row is empty: " + row.label);
        const double m = static_cast<double>(row.classes.size());
        out << "  <text x=\"" << margin << "\" y=\"" << y + row_h - 6
            << "\" font-family=\"monospace\" font-size=\"12\">" << row.label << "</text>\n";
        for (const Segment& seg : segments_of(row.classes)) {
            const double x0 = track_x + seg.start / m * track_w;
            const double x1 = track_x + (seg.end + 1) / m * track_w;
            out << "  <rect x=\"" << x0 << "\" y=\"" << y << "\" width=\"" << x1 - x0
                << "\" height=\"" << row_h << "\" fill=\""
                << class_color(seg.cls, num_classes) << "\"/>\n";
        }
        y += row_h + gap;
    }
    out << "</svg>\n";
    return out.str();
}

void write_timeline_svg(const std::string& path, const std::vector<TimelineRow>& rows,
                        int num_classes) {
    std::ofstream out(path);
    if (!out) throw RuntimeError("cannot write svg: " + path);
    out << timeline_svg(rows, num_classes);
    if (!out) throw RuntimeError("failed writing svg: " + path);
}

} // namespace segtcn
