#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "minvset/bivariate.hpp"
#include "minvset/field.hpp"
#include "minvset/integrate.hpp"
#include "minvset/marching.hpp"

namespace minvset {

struct WrongRegime : std::runtime_error {
    explicit WrongRegime(const char* msg) : std::runtime_error(msg) {}
};

enum class LocusKind { SINGULAR, TANGENCY_ISOLATED, TANGENCY_LINE, TRANSVERSE };

inline const char* to_string(LocusKind k) {
    switch (k) {
        case LocusKind::SINGULAR: return "SINGULAR";
        case LocusKind::TANGENCY_ISOLATED: return "TANGENCY_ISOLATED";
        case LocusKind::TANGENCY_LINE: return "TANGENCY_LINE";
        case LocusKind::TRANSVERSE: return "TRANSVERSE";
    }
    return "?";
}

struct LocusPoint {
    Complex z;
    LocusKind kind;
    int branch_count = 0;
};

/// Numerator polynomial of Im(R') as a real bivariate; its zero set is the
/// curve of inflections.
inline BivariatePoly inflection_numerator(const OperatorSpec& s) {
    return im_conj_product(s.num1, s.Pd * s.Pd);
}

inline CurveSet inflection_curve(const OperatorSpec& s, const Window& win, double h) {
    if (h <= 0) throw std::invalid_argument("inflection_curve: h must be positive");
    BivariatePoly g = inflection_numerator(s);
    if (g.is_zero()) return {};
    CurveSet cs = marching_squares([&](double x, double y) { return g.eval(x, y); }, win, h,
                                   CurveTag::INFLECTION);
    return cs;
}

/// Tangency indicator along the flow: d/dt Im R'(gamma(t)) = Im(R'' R).
inline double tangency_indicator(const OperatorSpec& s, Complex z) {
    return std::imag(s.R2(z) * s.R(z));
}

/// Decompose the traced curve of inflections into singular points, tangency
/// points/lines and transverse vertices. Straight components are flagged as
/// tangency lines; per-vertex transverse tags go into each polyline's meta.
inline std::vector<LocusPoint> locus_decomposition(const OperatorSpec& s, CurveSet& curves,
                                                   double h) {
    std::vector<LocusPoint> out;
    BivariatePoly g = inflection_numerator(s);
    double gscale = 0.0;
    for (const auto& t : g.terms()) gscale = std::max(gscale, std::abs(t.c));

    auto on_curve = [&](Complex z) {
        double near = 1e300;
        for (const Polyline& pl : curves.curves) near = std::min(near, dist_point_polyline(z, pl));
        return near <= 2.0 * h;
    };

    // Singular points: zeros of the numerator of R'' and poles of R on I_R.
    if (s.num2.degree() >= 1) {
        RootSet rs = roots(s.num2);
        for (const Root& r : rs.roots) {
            if (!on_curve(r.z)) continue;
            out.push_back({r.z, LocusKind::SINGULAR, r.multiplicity + 1});
        }
    }
    if (s.Pd.degree() >= 1) {
        RootSet rp = roots(s.Pd);
        for (const Root& r : rp.roots) {
            if (!on_curve(r.z)) continue;
            out.push_back({r.z, LocusKind::SINGULAR, r.multiplicity + 1});
        }
    }

    // Marching squares can stitch distinct branches through a singular point
    // into one elbow-shaped polyline; split there so each branch is analysed
    // on its own.
    {
        std::vector<Polyline> split;
        for (Polyline& pl : curves.curves) {
            std::vector<size_t> cuts;
            for (size_t i = 1; i + 1 < pl.vertices.size(); ++i)
                for (const LocusPoint& lp : out)
                    if (lp.kind == LocusKind::SINGULAR &&
                        std::abs(pl.vertices[i] - lp.z) <= 1.5 * h) {
                        if (cuts.empty() || i > cuts.back() + 2) cuts.push_back(i);
                        break;
                    }
            if (cuts.empty()) {
                split.push_back(std::move(pl));
                continue;
            }
            size_t start = 0;
            cuts.push_back(pl.vertices.size() - 1);
            for (size_t c : cuts) {
                if (c > start) {
                    Polyline piece;
                    piece.tag = pl.tag;
                    piece.vertices.assign(pl.vertices.begin() + start, pl.vertices.begin() + c + 1);
                    if (piece.vertices.size() >= 2) split.push_back(std::move(piece));
                }
                start = c;
            }
        }
        curves.curves = std::move(split);
    }

    for (Polyline& pl : curves.curves) {
        if (pl.vertices.size() < 2) continue;
        // Straight component => R-invariant line candidate, tangency line.
        Complex a = pl.vertices.front(), b = pl.vertices.back();
        double dev = 0;
        if (std::abs(b - a) > 1e-12 && !pl.closed()) {
            for (const Complex& v : pl.vertices) dev = std::max(dev, dist_point_segment(v, a, b));
            if (dev < h / 10.0) {
                pl.meta["tangency_line"] = 1.0;
                out.push_back({0.5 * (a + b), LocusKind::TANGENCY_LINE,
                               static_cast<int>(pl.vertices.size())});
                continue;
            }
        }
        // Sign changes of Im(R'' R) along the polyline.
        double prev = 0;
        bool have_prev = false;
        for (size_t i = 0; i < pl.vertices.size(); ++i) {
            double t;
            try {
                t = tangency_indicator(s, pl.vertices[i]);
            } catch (const PoleAt&) {
                have_prev = false;
                continue;
            }
            if (have_prev && prev * t < 0) {
                Complex lo = pl.vertices[i - 1], hi = pl.vertices[i];
                double flo = prev;
                for (int it = 0; it < 50; ++it) {
                    Complex mid = 0.5 * (lo + hi);
                    double fm = tangency_indicator(s, mid);
                    if ((fm > 0) == (flo > 0)) { lo = mid; flo = fm; }
                    else hi = mid;
                }
                out.push_back({0.5 * (lo + hi), LocusKind::TANGENCY_ISOLATED, 1});
            }
            prev = t;
            have_prev = true;
        }
        pl.meta["transverse"] = 1.0;
    }

    std::sort(out.begin(), out.end(), [](const LocusPoint& u, const LocusPoint& v) {
        if (u.z.real() != v.z.real()) return u.z.real() < v.z.real();
        return u.z.imag() < v.z.imag();
    });
    return out;
}

/// Limit directions of the infinite branches of the curve of inflections.
inline std::vector<double> inflection_infinity(const OperatorSpec& s) {
    const double pi = std::numbers::pi;
    auto wrap = [&](double a) {
        while (a < 0) a += 2 * pi;
        while (a >= 2 * pi) a -= 2 * pi;
        return a;
    };
    std::vector<double> dirs;
    if (s.gap == -1) {
        for (int k = 0; k < 4; ++k) dirs.push_back(wrap(s.phi_inf / 2.0 + k * pi / 2.0));
    } else if (s.gap == 1 && std::abs(s.lambda.imag()) > 1e-12 * std::abs(s.lambda)) {
        // compact curve of inflections: no infinite branches
    } else if (s.kappa > 0) {
        // R' ~ c z^{-(kappa+1)} (+ real constant when gap 1); 2(kappa+1) rays.
        int k = s.kappa + 1;
        if (k > std::max(s.p, s.q) + 1) k = std::max(s.p, s.q) + 1;
        double base = std::arg(-s.mu * double(s.kappa)) / double(k);
        for (int j = 0; j < 2 * k; ++j) dirs.push_back(wrap(base + j * pi / double(k)));
    }
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

/// Gap -1 only: locus of points whose ray direction is orthogonal to the
/// asymptotic axis, sigma(z) = (phi_inf +- pi)/2.
inline CurveSet horizontal_locus(const OperatorSpec& s, const Window& win, double h) {
    if (s.gap > -1) throw WrongRegime("horizontal_locus requires deg Q < deg P");
    double theta = (s.phi_inf + std::numbers::pi) / 2.0;
    Polynomial rotQ = s.Qd * std::exp(Complex(0, -theta));
    BivariatePoly g = im_conj_product(rotQ, s.Pd);
    if (g.is_zero()) return {};
    CurveSet cs = marching_squares([&](double x, double y) { return g.eval(x, y); }, win, h,
                                   CurveTag::HORIZONTAL);
    return cs;
}

}  // namespace minvset
