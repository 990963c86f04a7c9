#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "minvset/geometry.hpp"

namespace minvset {

namespace detail {

/// Root of f on segment [a,b] assuming a sign change; bisection after the
/// linear-interpolation seed.
inline Complex edge_root(const std::function<double(double, double)>& f, Complex a, Complex b,
                         double fa, double fb) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    for (int it = 0; it < 48; ++it) {
        Complex m = 0.5 * (a + b);
        double fm = f(m.real(), m.imag());
        if (fm == 0.0) return m;
        if ((fm > 0) == (fa > 0)) { a = m; fa = fm; }
        else { b = m; fb = fm; }
        if (std::abs(b - a) < 1e-13 * (1.0 + std::abs(a))) break;
    }
    return 0.5 * (a + b);
}

struct EdgeKey {
    int64_t x, y, horiz;
    bool operator<(const EdgeKey& o) const {
        if (x != o.x) return x < o.x;
        if (y != o.y) return y < o.y;
        return horiz < o.horiz;
    }
};

}  // namespace detail

/// Marching squares of {f = 0} over the window at step h. Saddle cells are
/// disambiguated by the sign of f at the cell center. Segments sharing a grid
/// edge are stitched into polylines.
inline CurveSet marching_squares(const std::function<double(double, double)>& f,
                                 const Window& win, double h, CurveTag tag) {
    int nx = std::max(2, static_cast<int>(std::ceil(win.width() / h)) + 1);
    int ny = std::max(2, static_cast<int>(std::ceil(win.height() / h)) + 1);
    double hx = win.width() / (nx - 1);
    double hy = win.height() / (ny - 1);

    std::vector<double> val(static_cast<size_t>(nx) * ny);
    auto V = [&](int i, int j) -> double& { return val[static_cast<size_t>(j) * nx + i]; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) V(i, j) = f(win.x0 + i * hx, win.y0 + j * hy);

    // One segment endpoint per crossed edge; key edges by lattice coordinates.
    std::map<detail::EdgeKey, Complex> edge_pts;
    auto edge_point = [&](int i, int j, bool horiz) -> Complex {
        detail::EdgeKey key{i, j, horiz ? 1 : 0};
        auto it = edge_pts.find(key);
        if (it != edge_pts.end()) return it->second;
        Complex a(win.x0 + i * hx, win.y0 + j * hy);
        Complex b = horiz ? Complex(win.x0 + (i + 1) * hx, win.y0 + j * hy)
                          : Complex(win.x0 + i * hx, win.y0 + (j + 1) * hy);
        double fa = V(i, j);
        double fb = horiz ? V(i + 1, j) : V(i, j + 1);
        Complex p = detail::edge_root(f, a, b, fa, fb);
        edge_pts[key] = p;
        return p;
    };

    struct Seg { detail::EdgeKey e0, e1; };
    std::vector<Seg> segs;

    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            double v00 = V(i, j), v10 = V(i + 1, j), v01 = V(i, j + 1), v11 = V(i + 1, j + 1);
            int code = (v00 > 0 ? 1 : 0) | (v10 > 0 ? 2 : 0) | (v11 > 0 ? 4 : 0) | (v01 > 0 ? 8 : 0);
            if (code == 0 || code == 15) continue;
            detail::EdgeKey bottom{i, j, 1}, top{i, j + 1, 1}, left{i, j, 0}, right{i + 1, j, 0};
            auto touch = [&](detail::EdgeKey k) {
                if (k.horiz) edge_point(int(k.x), int(k.y), true);
                else edge_point(int(k.x), int(k.y), false);
            };
            auto emit = [&](detail::EdgeKey a, detail::EdgeKey b) {
                touch(a);
                touch(b);
                segs.push_back({a, b});
            };
            switch (code) {
                case 1: case 14: emit(bottom, left); break;
                case 2: case 13: emit(bottom, right); break;
                case 3: case 12: emit(left, right); break;
                case 4: case 11: emit(top, right); break;
                case 6: case 9: emit(bottom, top); break;
                case 7: case 8: emit(top, left); break;
                case 5: case 10: {
                    double c = f(win.x0 + (i + 0.5) * hx, win.y0 + (j + 0.5) * hy);
                    bool center_pos = c > 0;
                    bool corner_pos = (code == 5);  // v00, v11 positive
                    if (center_pos == corner_pos) {
                        emit(left, top);
                        emit(bottom, right);
                    } else {
                        emit(left, bottom);
                        emit(top, right);
                    }
                    break;
                }
                default: break;
            }
        }
    }

    // Stitch segments at shared edges.
    std::multimap<detail::EdgeKey, size_t> by_edge;
    for (size_t k = 0; k < segs.size(); ++k) {
        by_edge.insert({segs[k].e0, k});
        by_edge.insert({segs[k].e1, k});
    }
    std::vector<bool> used(segs.size(), false);
    CurveSet cs;
    for (size_t k = 0; k < segs.size(); ++k) {
        if (used[k]) continue;
        std::vector<detail::EdgeKey> chain{segs[k].e0, segs[k].e1};
        used[k] = true;
        for (int end = 0; end < 2; ++end) {
            for (;;) {
                detail::EdgeKey tip = (end == 0) ? chain.back() : chain.front();
                auto [lo, hi] = by_edge.equal_range(tip);
                size_t next = SIZE_MAX;
                for (auto it = lo; it != hi; ++it)
                    if (!used[it->second]) { next = it->second; break; }
                if (next == SIZE_MAX) break;
                used[next] = true;
                detail::EdgeKey other =
                    (segs[next].e0 < tip || tip < segs[next].e0) ? segs[next].e0 : segs[next].e1;
                if (end == 0) chain.push_back(other);
                else chain.insert(chain.begin(), other);
            }
        }
        Polyline pl;
        pl.tag = tag;
        for (const detail::EdgeKey& e : chain)
            pl.vertices.push_back(edge_pts[e]);
        if (pl.vertices.size() >= 2) cs.curves.push_back(std::move(pl));
    }
    cs.canonicalize();
    return cs;
}

}  // namespace minvset
