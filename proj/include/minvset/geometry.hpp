#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "minvset/polynomial.hpp"

namespace minvset {

struct Window {
    double x0 = -2, y0 = -2, x1 = 2, y1 = 2;

    bool contains(Complex z) const {
        return z.real() >= x0 && z.real() <= x1 && z.imag() >= y0 && z.imag() <= y1;
    }
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    Complex center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
    double radius() const { return 0.5 * std::hypot(width(), height()); }
    Window inflated(double f) const {
        Complex c = center();
        double hw = 0.5 * width() * f, hh = 0.5 * height() * f;
        return {c.real() - hw, c.imag() - hh, c.real() + hw, c.imag() + hh};
    }
    void include(Complex z, double margin = 0.0) {
        x0 = std::min(x0, z.real() - margin);
        x1 = std::max(x1, z.real() + margin);
        y0 = std::min(y0, z.imag() - margin);
        y1 = std::max(y1, z.imag() + margin);
    }
};

enum class CurveTag { INTEGRAL, TRAIL, INFLECTION, HORIZONTAL, BOUNDARY };

inline const char* to_string(CurveTag t) {
    switch (t) {
        case CurveTag::INTEGRAL: return "INTEGRAL";
        case CurveTag::TRAIL: return "TRAIL";
        case CurveTag::INFLECTION: return "INFLECTION";
        case CurveTag::HORIZONTAL: return "HORIZONTAL";
        case CurveTag::BOUNDARY: return "BOUNDARY";
    }
    return "?";
}

struct Polyline {
    std::vector<Complex> vertices;
    CurveTag tag = CurveTag::INTEGRAL;
    std::map<std::string, double> meta;

    bool closed() const {
        return vertices.size() > 2 && std::abs(vertices.front() - vertices.back()) < 1e-12;
    }
    double length() const {
        double s = 0;
        for (size_t i = 1; i < vertices.size(); ++i) s += std::abs(vertices[i] - vertices[i - 1]);
        return s;
    }
};

struct CurveSet {
    std::vector<Polyline> curves;

    /// Deterministic order: lexicographic by first vertex.
    void canonicalize() {
        for (Polyline& pl : curves) {
            if (pl.vertices.size() < 2 || pl.closed()) continue;
            Complex a = pl.vertices.front(), b = pl.vertices.back();
            if (b.real() < a.real() || (b.real() == a.real() && b.imag() < a.imag()))
                std::reverse(pl.vertices.begin(), pl.vertices.end());
        }
        std::sort(curves.begin(), curves.end(), [](const Polyline& u, const Polyline& v) {
            if (u.vertices.empty() || v.vertices.empty()) return u.vertices.size() < v.vertices.size();
            Complex a = u.vertices.front(), b = v.vertices.front();
            if (a.real() != b.real()) return a.real() < b.real();
            return a.imag() < b.imag();
        });
    }
};

inline double dist_point_segment(Complex p, Complex a, Complex b) {
    Complex ab = b - a;
    double den = std::norm(ab);
    if (den < 1e-300) return std::abs(p - a);
    double t = std::clamp(((p - a) * std::conj(ab)).real() / den, 0.0, 1.0);
    return std::abs(p - (a + t * ab));
}

inline double dist_point_polyline(Complex p, const Polyline& pl) {
    double best = 1e300;
    if (pl.vertices.size() == 1) return std::abs(p - pl.vertices[0]);
    for (size_t i = 1; i < pl.vertices.size(); ++i)
        best = std::min(best, dist_point_segment(p, pl.vertices[i - 1], pl.vertices[i]));
    return best;
}

/// Symmetric discrete Hausdorff distance, vertices against segments.
inline double hausdorff(const Polyline& A, const Polyline& B) {
    double h = 0;
    for (const Complex& a : A.vertices) h = std::max(h, dist_point_polyline(a, B));
    for (const Complex& b : B.vertices) h = std::max(h, dist_point_polyline(b, A));
    return h;
}

/// Monotone-chain convex hull; returns vertices counterclockwise.
inline std::vector<Complex> convex_hull(std::vector<Complex> pts) {
    std::sort(pts.begin(), pts.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](Complex a, Complex b) { return std::abs(a - b) < 1e-12; }),
              pts.end());
    if (pts.size() <= 2) return pts;
    auto cross = [](Complex o, Complex a, Complex b) {
        return (a.real() - o.real()) * (b.imag() - o.imag()) -
               (a.imag() - o.imag()) * (b.real() - o.real());
    };
    std::vector<Complex> hull(2 * pts.size());
    size_t k = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);  // counterclockwise
    return hull;
}

inline bool point_in_convex_hull(Complex p, const std::vector<Complex>& hull, double tol = 0.0) {
    if (hull.empty()) return false;
    if (hull.size() == 1) return std::abs(p - hull[0]) <= tol;
    if (hull.size() == 2) return dist_point_segment(p, hull[0], hull[1]) <= tol;
    for (size_t i = 0; i < hull.size(); ++i) {
        Complex a = hull[i], b = hull[(i + 1) % hull.size()];
        double cr = (b.real() - a.real()) * (p.imag() - a.imag()) -
                    (b.imag() - a.imag()) * (p.real() - a.real());
        if (cr < -tol * std::abs(b - a)) return false;
    }
    return true;
}

}  // namespace minvset
