#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "minvset/field.hpp"
#include "minvset/geometry.hpp"
#include "minvset/integrate.hpp"
#include "minvset/trace.hpp"
#include "minvset/trail.hpp"

namespace minvset {

struct WrongCase : std::runtime_error {
    explicit WrongCase(const std::string& what) : std::runtime_error(what) {}
};

struct NonClosure : std::runtime_error {
    NonClosure() : std::runtime_error("leaf failed to close; Re(lambda) != 0 contamination?") {}
};

/// Constant R = lambda: the set is the union of parallel half-lines from the
/// roots of PQ.
inline CurveSet halflines_set(const OperatorSpec& s, const Window& win) {
    if (s.Qd.degree() != 0 || s.Pd.degree() != 0)
        throw WrongCase("halflines_set needs constant R");
    if (s.p == 0 && s.q == 0) throw WrongCase("P and Q both constant: no minimal set");
    Complex lam = s.Qd.lead() / s.Pd.lead();
    Complex dir = lam / std::abs(lam);
    double reach = 4.0 * win.radius();
    CurveSet cs;
    for (const ZpqEntry& e : s.zpq) {
        Polyline pl;
        pl.tag = CurveTag::BOUNDARY;
        pl.meta["halfline"] = 1;
        int n = 256;
        for (int k = 0; k <= n; ++k) pl.vertices.push_back(e.z + (reach * k / n) * dir);
        cs.curves.push_back(std::move(pl));
    }
    cs.canonicalize();
    return cs;
}

struct StripHull {
    Complex direction{1, 0};  // unit strip axis
    double y_minus = 0, y_plus = 0;
    Complex a{1, 0}, b{0, 0};  // normalization z = a*w + b
    double envelope_B = 0;

    double normalized_height(Complex z) const { return std::imag((z - b) / a); }
    bool contains(Complex z, double tol = 0.0) const {
        double y = normalized_height(z);
        return y >= y_minus - tol && y <= y_plus + tol;
    }
};

/// Strip hull for gap -1: affine normalization to R~(w) = -1/w + O(w^-3),
/// extremal heights over the horizontal locus and the roots, and the smallest
/// hyperbola-envelope constant certifying ray confinement.
inline StripHull strip_hull(const OperatorSpec& s, const Window& win, double h) {
    if (s.gap != -1) throw WrongRegime("strip_hull needs gap -1");
    StripHull sh;
    sh.a = std::sqrt(-s.lambda);
    sh.b = s.mu / s.lambda;
    sh.direction = sh.a / std::abs(sh.a);

    double lo = 0, hi = 0;  // the special line (offset 0) lies in the strip
    auto take = [&](Complex z) {
        double y = std::imag((z - sh.b) / sh.a);
        lo = std::min(lo, y);
        hi = std::max(hi, y);
    };
    for (const ZpqEntry& e : s.zpq) take(e.z);
    CurveSet hr = horizontal_locus(s, win.inflated(1.5), std::max(h, win.width() / 400.0));
    for (const Polyline& pl : hr.curves)
        for (const Complex& v : pl.vertices) take(v);
    sh.y_minus = lo;
    sh.y_plus = hi;

    // smallest B such that at 500 samples of the four bounding hyperbolas
    // y = (y^{+-}/2)(1 +- B/x) the field points inward
    double span = std::max({std::abs(lo), std::abs(hi), 1.0});
    double xmax = 2.0 * win.radius() / std::abs(sh.a) + 10.0 * span;
    auto confined = [&](double B) {
        // the bounding hyperbolas must swallow every root of PQ
        for (const ZpqEntry& e : s.zpq) {
            Complex w = (e.z - sh.b) / sh.a;
            double ax = std::abs(w.real());
            if (ax < 1e-12) continue;  // on the asymptote: bound is unbounded there
            double wy = w.imag();
            if (wy > 1e-12 && wy > 0.5 * sh.y_plus * (1.0 + B / ax) + 1e-12) return false;
            if (wy < -1e-12 && wy < 0.5 * sh.y_minus * (1.0 + B / ax) - 1e-12) return false;
        }
        int bad = 0;
        for (int k = 0; k < 500; ++k) {
            double x = (0.02 + 0.999 * k / 499.0) * xmax * (k % 2 ? 1.0 : -1.0);
            for (double ylev : {sh.y_plus, sh.y_minus}) {
                if (std::abs(ylev) < 1e-12) continue;
                double y = 0.5 * ylev * (1.0 + B / std::abs(x));
                Complex z = sh.a * Complex(x, y) + sh.b;
                Complex v;
                try {
                    v = s.R(z) / sh.a;  // field in normalized coords
                } catch (const PoleAt&) {
                    continue;
                }
                // rays from the hyperbola must not point into the bounded
                // region: compare against the curve's outward normal, not the
                // raw vertical, or the shrinking bound near the core is missed
                double slope = -0.5 * ylev * B * (x > 0 ? 1.0 : -1.0) / (x * x);
                double outward = (ylev > 0 ? 1.0 : -1.0) * (std::imag(v) - slope * std::real(v));
                if (outward < -1e-9 * (1.0 + std::abs(v))) ++bad;
            }
        }
        return bad == 0;
    };
    double blo = 1e-3, bhi = 1e-3;
    bool found = false;
    for (int g = 0; g < 40; ++g) {
        if (confined(bhi)) { found = true; break; }
        blo = bhi;
        bhi *= 2.0;
    }
    if (found) {
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (blo + bhi);
            (confined(mid) ? bhi : blo) = mid;
        }
        sh.envelope_B = bhi;
    } else {
        sh.envelope_B = std::numeric_limits<double>::quiet_NaN();
    }
    return sh;
}

/// Purely rotational gap-1 case: the boundary is the first closed leaf (from
/// infinity inward) meeting Z(PQ) or the curve of inflections.
inline Polyline periodic_boundary(const OperatorSpec& s) {
    if (s.gap != 1) throw WrongCase("periodic_boundary needs gap 1");
    if (std::abs(std::real(s.lambda)) > 1e-9) throw WrongCase("periodic_boundary needs Re(lambda) = 0");
    if (regime(s).tag != RegimeTag::COMPACT) throw WrongCase("periodic_boundary needs the compact regime");

    Complex c(0);
    for (const ZpqEntry& e : s.zpq) c += e.z;
    if (!s.zpq.empty()) c /= double(s.zpq.size());
    Complex far = c;
    double spread = 1.0;
    for (const ZpqEntry& e : s.zpq)
        if (std::abs(e.z - c) >= std::abs(far - c)) far = e.z;
    spread = std::max(1.0, std::abs(far - c));
    Complex dir = (std::abs(far - c) > 1e-9) ? (far - c) / std::abs(far - c) : Complex(1, 0);

    auto leaf_at = [&](double sr) -> Polyline {
        Complex anchor = c + sr * dir;
        StopRule rule;
        double scale = std::max(sr, 0.1 * spread);
        rule.window = Window{c.real() - 20 * scale, c.imag() - 20 * scale, c.real() + 20 * scale,
                             c.imag() + 20 * scale};
        rule.arclength_cap = 400.0 * scale;
        rule.closure_step = 0.005 * scale;
        rule.max_vertex_gap = 0.01 * scale;
        return integral_curve(s, anchor, FlowDirection::FORWARD, rule);
    };
    auto is_inner = [&](const Polyline& leaf) {
        double min_ir = 1e300, min_root = 1e300;
        for (const Complex& v : leaf.vertices) {
            try {
                Complex r1 = s.R1(v);
                min_ir = std::min(min_ir, std::abs(std::imag(r1)) / (1.0 + std::abs(r1)));
            } catch (const PoleAt&) {
            }
            for (const ZpqEntry& e : s.zpq) min_root = std::min(min_root, std::abs(v - e.z));
        }
        if (min_ir <= 1e-2 || min_root <= 1e-3) return true;
        // a closed leaf past the boundary leaves some root of PQ outside:
        // detect it by winding number
        for (const ZpqEntry& e : s.zpq) {
            double ang = 0;
            for (size_t k = 0; k + 1 < leaf.vertices.size(); ++k)
                ang += std::arg((leaf.vertices[k + 1] - e.z) / (leaf.vertices[k] - e.z));
            if (std::abs(ang) < std::numbers::pi) return true;
        }
        return false;
    };
    auto closed_ok = [&](const Polyline& leaf) {
        auto it = leaf.meta.find("closed");
        return it != leaf.meta.end() && it->second > 0.5;
    };
    // a leaf that runs into the singular guard around a root of PQ is the
    // clearest inner signal there is; closure is only demanded of leaves
    // that avoided the roots
    auto inner = [&](const Polyline& leaf) {
        if (stop_reason(leaf) == StopReason::SINGULARITY) return true;
        if (!closed_ok(leaf)) throw NonClosure{};
        return is_inner(leaf);
    };

    double s_out = 3.0 * spread;
    Polyline leaf = leaf_at(s_out);
    for (int g = 0; g < 12 && inner(leaf); ++g) {
        s_out *= 1.7;
        leaf = leaf_at(s_out);
    }
    if (inner(leaf)) throw NonClosure{};

    double s_in = s_out;
    bool found = false;
    for (int g = 0; g < 60; ++g) {
        s_in *= 0.85;
        if (s_in < 1e-6 * spread) break;
        if (inner(leaf_at(s_in))) { found = true; break; }
    }
    if (!found) throw NonClosure{};

    while (s_out - s_in > 1e-6 * spread) {
        double mid = 0.5 * (s_in + s_out);
        (inner(leaf_at(mid)) ? s_in : s_out) = mid;
    }
    // the outer endpoint of the bisection is the limiting closed leaf; the
    // inner one may have been cut short by the singular guard
    Polyline result = leaf_at(s_out);
    if (!closed_ok(result)) throw NonClosure{};
    result.tag = CurveTag::BOUNDARY;
    result.meta["leaf_radius"] = s_out;
    return result;
}

/// Gap-1 operators whose residues at the simple roots of Q are all real
/// positive: the convex hull of Z(Q) is the whole story.
inline std::vector<Complex> residue_hull(const OperatorSpec& s, double tol = 1e-9) {
    if (s.gap != 1) throw WrongCase("residue_hull needs gap 1");
    Polynomial q1 = s.Q.derivative();
    RootSet rq = roots(s.Q);
    std::string offenders;
    std::vector<Complex> pts;
    for (const Root& r : rq.roots) {
        bool ok = r.multiplicity == 1;
        Complex pa = s.P.eval(r.z);
        Complex ra{0, 0};
        if (ok && std::abs(pa) > tol * (1.0 + s.P.norm_inf())) {
            ra = q1.eval(r.z) / pa;
            ok = std::abs(std::imag(ra)) <= 1e-6 * (1.0 + std::abs(ra)) && std::real(ra) > 0;
        } else {
            ok = false;
        }
        if (!ok) {
            offenders += (offenders.empty() ? "" : ", ");
            offenders += std::to_string(r.z.real()) + (r.z.imag() < 0 ? "-" : "+") +
                         std::to_string(std::abs(r.z.imag())) + "i";
        }
        pts.push_back(r.z);
    }
    if (!offenders.empty())
        throw PreconditionViolated("residue condition fails at roots of Q: " + offenders);
    return convex_hull(pts);
}

struct OracleCurve {
    std::string name;
    std::function<Complex(double)> sampler;
    double t0 = 0, t1 = 0;
    std::vector<std::pair<std::string, Complex>> special_points;

    Polyline sample(int n = 400) const {
        Polyline pl;
        pl.tag = CurveTag::BOUNDARY;
        for (int k = 0; k <= n; ++k) pl.vertices.push_back(sampler(t0 + (t1 - t0) * k / n));
        return pl;
    }
};

/// Boundary arcs of the hyperbola family (common root alpha in the open first
/// quadrant, R = -1/z): the real axis plus four explicit graphs.
inline std::vector<OracleCurve> oracle_hyperbola(Complex alpha) {
    double x0 = alpha.real(), y0 = alpha.imag();
    if (!(x0 > 0) || !(y0 > 0)) throw WrongCase("oracle_hyperbola needs Re, Im > 0");
    double xe = (3.0 + 2.0 * std::numbers::sqrt2) * x0;
    double ye = y0 / (3.0 + 2.0 * std::numbers::sqrt2);
    auto f1 = [=](double t) { return Complex(t, y0 * t / (2.0 * t - x0)); };
    std::vector<OracleCurve> out;
    out.push_back({"axis", [](double t) { return Complex(t, 0); }, -1e4, 1e4, {}});
    out.push_back({"f1", f1, x0, 1e4, {{"alpha", alpha}}});
    out.push_back({"f2", [=](double t) { return Complex(t, x0 * y0 / t); }, x0, xe,
                   {{"alpha", alpha}, {"extruding", Complex(xe, ye)}}});
    out.push_back({"f3",
                   [=](double t) {
                       double r = 2.0 * std::sqrt(x0 * t) + x0;
                       return Complex(t, x0 * y0 * t / (r * r));
                   },
                   0.0, xe,
                   {{"extruding", Complex(xe, ye)}, {"above_alpha", Complex(x0, y0 / 9.0)}}});
    out.push_back({"f4", f1, -1e4, 0.0, {}});
    return out;
}

struct SpiralOracle {
    OracleCurve gamma_arc;  // e^{-lambda t}, local
    OracleCurve alpha_arc;  // 1/(1 + lambda t), global
    Complex intersection{0, 0};
    double t_gamma = 0, t_alpha = 0;
};

/// The two spiral arcs for R = lambda z deflated at 1 and their first
/// intersection (smallest positive parameters).
inline SpiralOracle oracle_spiral(Complex lambda) {
    double lr = lambda.real(), li = lambda.imag();
    if (!(lr > 0) || li == 0) throw WrongCase("oracle_spiral needs Re > 0, Im != 0");
    double wind = li > 0 ? 1.0 : -1.0;  // gamma angle = -li*t
    // direction angle phi in (-arg lambda, 0) for winding li > 0; compare the
    // alpha radius with the gamma radius after one extra full turn
    double philim = std::atan2(std::abs(li), lr);
    auto alpha_t = [&](double phi) {
        // arg(1 + lambda t) = phi * wind in (0, philim)
        double tanp = std::tan(phi);
        return tanp / (std::abs(li) - lr * tanp);
    };
    auto gap = [&](double phi, int k) {
        double ta = alpha_t(phi);
        double ra = 1.0 / std::abs(1.0 + lambda * ta);
        double tg = (phi + 2.0 * std::numbers::pi * k) / std::abs(li);
        return std::exp(-lr * tg) - ra;
    };
    double t_g = 0, t_a = 0;
    bool found = false;
    for (int k = 1; k <= 64 && !found; ++k) {
        double lo = 1e-9, hi = philim - 1e-9;
        double flo = gap(lo, k), fhi = gap(hi, k);
        if (flo * fhi > 0) continue;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            (gap(mid, k) * flo > 0 ? lo : hi) = mid;
        }
        double phi = 0.5 * (lo + hi);
        t_a = alpha_t(phi);
        t_g = (phi + 2.0 * std::numbers::pi * k) / std::abs(li);
        found = true;
    }
    if (!found) throw WrongCase("oracle_spiral found no crossing");
    SpiralOracle so;
    so.t_gamma = t_g;
    so.t_alpha = t_a;
    so.intersection = 1.0 / (1.0 + lambda * t_a);
    so.gamma_arc = {"gamma", [=](double t) { return std::exp(-lambda * t); }, 0.0, t_g,
                    {{"root", Complex(1, 0)}, {"joint", so.intersection}}};
    so.alpha_arc = {"alpha", [=](double t) { return 1.0 / (1.0 + lambda * t); }, 0.0, t_a,
                    {{"root", Complex(1, 0)}, {"joint", so.intersection}}};
    (void)wind;
    return so;
}

struct UnitDiskOracle {
    int k = 1;
    OracleCurve circle;

    /// |z + t R(z)|^2 / |z|^2 for z = r^{1/k} e^{i theta}, written so the
    /// exterior invariance is sign-evident.
    static double ray_factor(int k, double r, double theta, double t) {
        double c = std::cos(k * theta);
        double den = (r + c) * (r + c) + (1.0 - c * c);
        double num = t * (2.0 * (r * r - 1.0) + t * ((r - c) * (r - c) + (1.0 - c * c)));
        (void)k;
        return 1.0 + num / den;
    }

    Complex field(Complex z) const {
        Complex zk = std::pow(z, k);
        return z * (zk - 1.0) / (zk + 1.0);
    }
    Complex advance(Complex z, double t) const { return z + t * field(z); }
    Complex first_integral(Complex z) const {
        Complex zk = std::pow(z, k);
        return std::log((1.0 - zk) * (1.0 - zk) / zk) / double(k);
    }
};

inline UnitDiskOracle oracle_unitdisk(int k) {
    if (k < 1) throw WrongCase("oracle_unitdisk needs k >= 1");
    UnitDiskOracle o;
    o.k = k;
    o.circle = {"circle", [](double t) { return std::exp(Complex(0, t)); }, 0.0,
                2.0 * std::numbers::pi, {}};
    return o;
}

struct StripSegmentRegion {
    double y0 = 1;
    bool contains(Complex z, double tol = 0.0) const {
        if (z.imag() >= -tol && z.imag() <= y0 / 2.0 + tol) return true;
        return std::abs(z.real()) <= tol && z.imag() >= y0 / 2.0 - tol &&
               z.imag() <= y0 + tol;
    }
};

inline StripSegmentRegion oracle_strip_segment(double y0) {
    if (!(y0 > 0)) throw WrongCase("oracle_strip_segment needs y0 > 0");
    return StripSegmentRegion{y0};
}

}  // namespace minvset
