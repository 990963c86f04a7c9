#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "minvset/classify.hpp"
#include "minvset/geometry.hpp"
#include "minvset/grid.hpp"

namespace minvset {

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace detail

/// temp + rename so readers never observe a half-written file
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

/// one x,y row per vertex; blank line between polylines
inline std::string csv_polylines(const CurveSet& cs) {
    std::ostringstream out;
    out << "x,y\n";
    for (size_t k = 0; k < cs.curves.size(); ++k) {
        if (k) out << "\n";
        for (const Complex& v : cs.curves[k].vertices)
            out << detail::fmt_num(v.real()) << "," << detail::fmt_num(v.imag()) << "\n";
    }
    return out.str();
}

/// raster of cell states, row 0 = lowest y; 0 OUT, 1 IN, 2 PINNED
inline std::string csv_grid(const Grid& g) {
    std::ostringstream out;
    out << "# origin=" << detail::fmt_num(g.origin.real()) << "," << detail::fmt_num(g.origin.imag())
        << " h=" << detail::fmt_num(g.h) << " nx=" << g.nx << " ny=" << g.ny << "\n";
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (i) out << ",";
            switch (g.at(i, j)) {
                case CellState::OUT: out << 0; break;
                case CellState::IN: out << 1; break;
                case CellState::PINNED: out << 2; break;
            }
        }
        out << "\n";
    }
    return out.str();
}

struct SvgLayer {
    const CurveSet* curves = nullptr;
    std::string color = "black";
    std::string label;
    double width = 1.0;
};

/// fixed palette: local arcs red, global arcs blue, inflection curve black,
/// set fill gray; every render carries a legend
inline std::string svg_render(const Window& win, const std::vector<SvgLayer>& layers,
                              const Grid* fill = nullptr, int pixels = 800) {
    double sx = pixels / win.width();
    double sy = sx;
    int H = static_cast<int>(win.height() * sy) + 1;
    auto X = [&](double x) { return (x - win.x0) * sx; };
    auto Y = [&](double y) { return H - (y - win.y0) * sy; };
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << pixels << "\" height=\""
        << H + 20 * (int)layers.size() + 24 << "\">\n";
    if (fill) {
        out << "<g fill=\"#c8c8c8\" stroke=\"none\">\n";
        for (int j = 0; j < fill->ny; ++j)
            for (int i = 0; i < fill->nx; ++i) {
                if (fill->at(i, j) == CellState::OUT) continue;
                Complex lo = fill->cell_min(i, j);
                out << "<rect x=\"" << detail::fmt_num(X(lo.real())) << "\" y=\""
                    << detail::fmt_num(Y(lo.imag() + fill->h)) << "\" width=\""
                    << detail::fmt_num(fill->h * sx) << "\" height=\""
                    << detail::fmt_num(fill->h * sy) << "\"/>\n";
            }
        out << "</g>\n";
    }
    for (const SvgLayer& layer : layers) {
        if (!layer.curves) continue;
        out << "<g fill=\"none\" stroke=\"" << layer.color << "\" stroke-width=\"" << layer.width
            << "\">\n";
        for (const Polyline& pl : layer.curves->curves) {
            out << "<polyline points=\"";
            for (const Complex& v : pl.vertices)
                out << detail::fmt_num(X(v.real())) << "," << detail::fmt_num(Y(v.imag())) << " ";
            out << "\"/>\n";
        }
        out << "</g>\n";
    }
    int ly = H + 16;
    if (fill) {
        out << "<rect x=\"8\" y=\"" << ly - 10 << "\" width=\"12\" height=\"12\" fill=\"#c8c8c8\"/>"
            << "<text x=\"26\" y=\"" << ly << "\" font-size=\"12\">computed set</text>\n";
        ly += 20;
    }
    for (const SvgLayer& layer : layers) {
        out << "<line x1=\"8\" y1=\"" << ly - 4 << "\" x2=\"20\" y2=\"" << ly - 4 << "\" stroke=\""
            << layer.color << "\" stroke-width=\"2\"/><text x=\"26\" y=\"" << ly
            << "\" font-size=\"12\">" << layer.label << "</text>\n";
        ly += 20;
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace minvset
