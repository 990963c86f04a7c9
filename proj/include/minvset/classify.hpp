#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "minvset/field.hpp"
#include "minvset/integrate.hpp"
#include "minvset/minset.hpp"
#include "minvset/trace.hpp"
#include "minvset/trail.hpp"

namespace minvset {

enum class DeltaSign { MINUS, ZERO, PLUS, NOT_APPLICABLE };

inline const char* to_string(DeltaSign s) {
    switch (s) {
        case DeltaSign::MINUS: return "MINUS";
        case DeltaSign::ZERO: return "ZERO";
        case DeltaSign::PLUS: return "PLUS";
        default: return "NOT_APPLICABLE";
    }
}

struct DeltaHit {
    bool at_infinity = false;
    Complex u{0, 0};        // entry point for finite hits
    double direction = 0;   // sigma(z) for infinity hits
    double param = 0;       // distance along the ray
    DeltaSign sign = DeltaSign::NOT_APPLICABLE;
    bool crossing = true;   // false: grazing (tangential) contact
};

enum class PointType {
    LOCAL,
    GLOBAL,
    EXTRUDING,
    BOUNCING,
    SWITCH,
    C1_INFLECTION,
    C2_INFLECTION,
    ROOT_PQ,
    IR_SINGULAR,
    IR_TANGENCY,
    UNRESOLVED
};

inline const char* to_string(PointType t) {
    switch (t) {
        case PointType::LOCAL: return "LOCAL";
        case PointType::GLOBAL: return "GLOBAL";
        case PointType::EXTRUDING: return "EXTRUDING";
        case PointType::BOUNCING: return "BOUNCING";
        case PointType::SWITCH: return "SWITCH";
        case PointType::C1_INFLECTION: return "C1_INFLECTION";
        case PointType::C2_INFLECTION: return "C2_INFLECTION";
        case PointType::ROOT_PQ: return "ROOT_PQ";
        case PointType::IR_SINGULAR: return "IR_SINGULAR";
        case PointType::IR_TANGENCY: return "IR_TANGENCY";
        default: return "UNRESOLVED";
    }
}

enum class InflectionSide { PLUS, MINUS, ON };

struct BoundaryPoint {
    Complex z{0, 0};
    bool on_IR = false;
    LocusKind locus_kind = LocusKind::TRANSVERSE;
    bool gamma_nonempty = false;
    std::optional<Complex> gamma_hit;
    std::vector<DeltaHit> delta;
    PointType type = PointType::UNRESOLVED;
    InflectionSide inflection_side = InflectionSide::ON;
};

namespace detail {

inline bool on_inflection_band(const OperatorSpec& s, Complex z) {
    try {
        Complex r1 = s.R1(z);
        return std::abs(std::imag(r1)) <= 1e-3 * (1.0 + std::abs(r1));
    } catch (const PoleAt&) {
        return false;
    }
}

/// Grid-precision test for lying on the inflection curve: a sample taken from
/// the grid sits up to ~1.5h off the true curve, and |Im R'| grows away from
/// the curve at rate ~|R''|, so the band must scale with both.
inline bool near_inflection(const OperatorSpec& s, Complex z, double h) {
    try {
        Complex r1 = s.R1(z);
        double band = 1e-6 * (1.0 + std::abs(r1)) + 1.5 * h * std::abs(s.R2(z));
        return std::abs(std::imag(r1)) <= band;
    } catch (const PoleAt&) {
        return false;
    }
}

/// A stretch of trajectory can belong to the boundary only where the integral
/// curve bends towards the set: local arcs are locally convex with the set on
/// the concave side. The set side is probed from the grid two cells off the
/// trajectory normal; the curvature sign of an integral curve is the sign of
/// Im R'. Near the inflection curve the curvature vanishes and the test is
/// inconclusive, so it passes.
inline bool curves_towards_set(const OperatorSpec& s, const MinSetResult& res, Complex w) {
    double h = res.grid.h;
    Complex v;
    Complex r1;
    Complex r2;
    try {
        v = s.R(w);
        r1 = s.R1(w);
        r2 = s.R2(w);
    } catch (const PoleAt&) {
        return true;
    }
    double vn = std::abs(v);
    if (!(vn > 0) || !std::isfinite(vn)) return true;
    double imr1 = std::imag(r1);
    double band = 1e-6 * (1.0 + std::abs(r1)) + 1.5 * h * std::abs(r2);
    if (std::abs(imr1) <= band) return true;
    Complex n = Complex(0, 1) * v / vn;  // left normal of the motion
    for (double r : {2.0 * h, 3.0 * h}) {
        bool left = res.grid.kept_within(w + r * n, 0.25 * h);
        bool right = res.grid.kept_within(w - r * n, 0.25 * h);
        if (left == right) continue;  // pinch or one-dimensional piece: ambiguous
        return left ? (imr1 > 0) : (imr1 < 0);
    }
    return true;
}

/// Direction of the inflection curve I_R at z (unit vector), or nullopt at a
/// singular point of the curve.
inline std::optional<Complex> inflection_tangent(const OperatorSpec& s, Complex z, double step) {
    auto F = [&](Complex w) { return std::imag(s.R1(w)); };
    try {
        double fx = (F(z + Complex(step, 0)) - F(z - Complex(step, 0))) / (2 * step);
        double fy = (F(z + Complex(0, step)) - F(z - Complex(0, step))) / (2 * step);
        double gn = std::hypot(fx, fy);
        if (!(gn > 0) || !std::isfinite(gn)) return std::nullopt;
        return Complex(-fy / gn, fx / gn);
    } catch (const PoleAt&) {
        return std::nullopt;
    }
}

/// Is the field tangent to I_R at z (cross product of R with the curve
/// direction within tolerance)?
inline bool field_tangent_to_IR(const OperatorSpec& s, Complex z, double step) {
    auto t = inflection_tangent(s, z, step);
    if (!t) return false;
    try {
        Complex v = s.R(z);
        double vn = std::abs(v);
        if (!(vn > 0) || !std::isfinite(vn)) return false;
        double cross = std::imag(std::conj(*t) * v) / vn;
        return std::abs(cross) <= 1e-4;
    } catch (const PoleAt&) {
        return false;
    }
}

}  // namespace detail

struct GammaResult {
    bool nonempty = false;
    Complex hit{0, 0};
};

/// Gamma correspondence: intersections of the forward trajectory from z with
/// the computed set, minus the start point itself. The trajectory leaves a
/// boundary point tangentially, so samples near the start sit inside the
/// dilated set whether or not they genuinely belong to it. The initial
/// inside-run (flicker gaps shorter than 4h are bridged) counts only when it
/// is long (>= 6h of arc) and the integral curve bends towards the set at a
/// representative point of the run -- the signature of running along a local
/// arc rather than grazing a transverse one. After a sustained exit, a
/// re-entry into the set core always counts.
inline GammaResult gamma(const OperatorSpec& s, Complex z, const MinSetResult& res) {
    GammaResult g;
    double h = res.grid.h;
    StopRule rule;
    rule.window = res.window.inflated(1.1);
    rule.arclength_cap = 8.0 * (res.window.width() + res.window.height());
    rule.max_vertex_gap = h / 2.0;
    Polyline tr;
    try {
        tr = integral_curve(s, z, FlowDirection::FORWARD, rule);
    } catch (const StartAtSingularity&) {
        return g;
    }
    const double sustain = 4.0 * h;  // core loss shorter than this is a flicker
    const double min_run = 6.0 * h;  // shorter hugs are tangential grazing
    double run = 0, gap = 0;
    bool exited = false;
    Complex probe = z, last_in = z;
    bool have_probe = false;
    for (size_t i = 1; i < tr.vertices.size(); ++i) {
        Complex v = tr.vertices[i];
        double seg = std::abs(v - tr.vertices[i - 1]);
        if (!exited) {
            if (res.in_dilated_set(v)) {
                run += gap + seg;
                gap = 0;
                last_in = v;
                if (!have_probe && run >= 8.0 * h) {
                    probe = v;
                    have_probe = true;
                }
            } else {
                gap += seg;
                if (gap >= sustain) exited = true;
            }
        } else if (res.grid.kept_within(v, 0.25 * h)) {
            g.nonempty = true;
            g.hit = v;
            return g;
        }
    }
    if (run >= min_run) {
        if (!have_probe) probe = last_in;
        if (detail::curves_towards_set(s, res, probe)) {
            g.nonempty = true;
            g.hit = last_in;
        }
    } else if (run >= h) {
        // a short hug that runs into a root of P*Q is not grazing: the
        // trajectory terminates on a set member, so the stretch between z and
        // the root is a genuine intersection
        for (const ZpqEntry& e : s.zpq)
            if (std::abs(last_in - e.z) <= 2.0 * h) {
                g.nonempty = true;
                g.hit = last_in;
                break;
            }
    }
    return g;
}

/// Delta correspondence: hits of the punctured associated ray with the dilated
/// computed set, plus the at-infinity hit when the ray leaves towards one of
/// the set's limit directions.
inline std::vector<DeltaHit> delta(const OperatorSpec& s, Complex z, const MinSetResult& res) {
    std::vector<DeltaHit> hits;
    Complex v;
    try {
        v = s.R(z);
    } catch (const PoleAt&) {
        return hits;
    }
    double vn = std::abs(v);
    if (!(vn > 0) || !std::isfinite(vn)) return hits;
    Complex dir = v / vn;
    double h = res.grid.h;

    Complex r1{0, 0};
    bool have_r1 = true;
    try {
        r1 = s.R1(z);
    } catch (const PoleAt&) {
        have_r1 = false;
    }
    bool on_ir = have_r1 && detail::near_inflection(s, z, h);
    double tol_s = have_r1 ? 1e-3 * (1.0 + std::abs(r1)) : 0.0;
    auto finite_sign = [&](Complex u) {
        if (!on_ir) return DeltaSign::NOT_APPLICABLE;
        double sg = std::real(r1 + v / (u - z));
        if (sg <= -tol_s) return DeltaSign::MINUS;
        if (sg >= tol_s) return DeltaSign::PLUS;
        return DeltaSign::ZERO;
    };

    // The ray is punctured at z: the stretch of ray running through the cell
    // tube around z's own boundary arc must not register. Membership is
    // tested against the set core (quarter-cell reach); the initial core
    // component, with flicker gaps under 4h bridged, yields no hit. Only
    // after a sustained core exit does a core re-entry record one, and each
    // later component restarts the same state machine.
    const double step = h / 4.0;
    const double sustain = 4.0 * h;
    double gap = 0, comp_len = 0;
    bool exited = false;
    for (double t = step;; t += step) {
        Complex w = z + t * dir;
        if (!res.window.contains(w) || hits.size() >= 64) break;
        bool core = res.grid.kept_within(w, 0.25 * h);
        if (!exited) {
            if (core) {
                comp_len += gap + step;
                gap = 0;
            } else {
                gap += step;
                if (gap >= sustain) {
                    // a component entered after a previous exit and abandoned
                    // within 2h without depth was a grazing contact
                    if (!hits.empty() && !hits.back().at_infinity && comp_len <= 2.0 * h)
                        hits.back().crossing = false;
                    exited = true;
                    gap = 0;
                }
            }
        } else if (core) {
            DeltaHit hit;
            hit.u = w;
            hit.param = t;
            hit.sign = finite_sign(w);
            hits.push_back(hit);
            exited = false;
            comp_len = step;
        }
    }

    // Arcs flanking a set-member root of P*Q send their rays exactly through
    // that root; a sample displaced half a cell off the arc turns the hit
    // into a near miss of a couple of cells, so test the closest approach to
    // each such root explicitly.
    for (const ZpqEntry& e : s.zpq) {
        if (!res.window.contains(e.z)) continue;
        Complex d = e.z - z;
        double tc = std::real(std::conj(dir) * d);
        if (tc < 8.0 * h) continue;  // too close to the puncture at z
        double miss = std::abs(d - tc * dir);
        if (miss > 3.0 * h) continue;
        bool dup = false;
        for (const DeltaHit& hh : hits)
            if (!hh.at_infinity && std::abs(hh.u - e.z) <= 4.0 * h) dup = true;
        if (dup) continue;
        DeltaHit hit;
        hit.u = e.z;
        hit.param = tc;
        hit.sign = finite_sign(e.z);
        hits.push_back(hit);
    }

    // at-infinity hit: the ray direction against the angular limit directions
    // of the kept frame cells
    const Grid& g = res.grid;
    Complex c = res.window.center();
    double sigma = std::arg(v);
    double tol_ang = 3.0 * h / res.window.radius() + 2.0 * h / res.window.radius();
    bool inf_hit = false;
    for (int j = 0; j < g.ny && !inf_hit; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.is_frame(i, j) || g.at(i, j) == CellState::OUT) continue;
            double ang = std::arg(g.center(i, j) - c);
            double d = std::remainder(sigma - ang, 2.0 * std::numbers::pi);
            if (std::abs(d) <= tol_ang) { inf_hit = true; break; }
        }
    if (inf_hit) {
        DeltaHit hit;
        hit.at_infinity = true;
        hit.direction = sigma;
        hit.param = std::numeric_limits<double>::infinity();
        if (on_ir) {
            double sg = std::real(r1);
            hit.sign = sg <= -tol_s ? DeltaSign::MINUS
                                    : (sg >= tol_s ? DeltaSign::PLUS : DeltaSign::ZERO);
        }
        hits.push_back(hit);
    }
    return hits;
}

/// Full typology of a sampled boundary point.
inline BoundaryPoint classify_point(const OperatorSpec& s, Complex z, const MinSetResult& res,
                                    bool snapped = false) {
    BoundaryPoint bp;
    bp.z = z;
    double h = res.grid.h;
    double eps_sing = std::max(kSingRadius, h);

    for (const ZpqEntry& e : s.zpq)
        if (std::abs(z - e.z) <= eps_sing) {
            bp.type = PointType::ROOT_PQ;
            bp.locus_kind = LocusKind::SINGULAR;
            return bp;
        }

    Complex r1{0, 0};
    try {
        r1 = s.R1(z);
    } catch (const PoleAt&) {
        bp.type = PointType::UNRESOLVED;
        return bp;
    }
    double imr1 = std::imag(r1);
    bp.on_IR = detail::near_inflection(s, z, h);
    bp.inflection_side = bp.on_IR ? InflectionSide::ON
                                  : (imr1 > 0 ? InflectionSide::PLUS : InflectionSide::MINUS);

    GammaResult g = gamma(s, z, res);
    bp.gamma_nonempty = g.nonempty;
    if (g.nonempty) bp.gamma_hit = g.hit;
    bp.delta = delta(s, z, res);

    if (bp.on_IR) {
        // singular point of the inflection curve?
        const Polynomial& num2 = s.num2;
        if (num2.degree() >= 1) {
            for (const Root& r : roots(num2).roots)
                if (std::abs(z - r.z) <= 2.0 * h) {
                    bp.type = PointType::IR_SINGULAR;
                    bp.locus_kind = LocusKind::SINGULAR;
                    return bp;
                }
        }
        // isolated tangency of the field with the inflection curve; along an
        // R-invariant line the field is tangent everywhere, which is not a
        // tangency point, so neighbours along the curve must be transverse
        if (detail::field_tangent_to_IR(s, z, h)) {
            auto tdir = detail::inflection_tangent(s, z, h);
            bool invariant_line = tdir && detail::field_tangent_to_IR(s, z + 4.0 * h * *tdir, h) &&
                                  detail::field_tangent_to_IR(s, z - 4.0 * h * *tdir, h);
            if (!invariant_line) {
                bp.type = PointType::IR_TANGENCY;
                bp.locus_kind = LocusKind::TANGENCY_ISOLATED;
                return bp;
            }
        }
        bp.locus_kind = LocusKind::TRANSVERSE;
        bool dplus = false, dminus = false;
        for (const DeltaHit& hh : bp.delta) {
            if (hh.sign == DeltaSign::PLUS || hh.sign == DeltaSign::ZERO) dplus = true;
            if (hh.sign == DeltaSign::MINUS || hh.sign == DeltaSign::ZERO) dminus = true;
        }
        if (dplus)
            bp.type = (bp.gamma_nonempty || dminus) ? PointType::BOUNCING : PointType::SWITCH;
        else if (dminus && !bp.gamma_nonempty)
            bp.type = PointType::C1_INFLECTION;
        else
            bp.type = PointType::C2_INFLECTION;
        return bp;
    }

    bool d = !bp.delta.empty();
    if (bp.gamma_nonempty && !d) bp.type = PointType::LOCAL;
    else if (!bp.gamma_nonempty && d) bp.type = PointType::GLOBAL;
    else if (bp.gamma_nonempty && d) bp.type = PointType::EXTRUDING;
    else bp.type = PointType::UNRESOLVED;

    // A sample displaced off the computed set by grid quantization can lose
    // both its trajectory hug and its ray contact at once. When that happens,
    // classify its nearest certified set point and report that verdict for
    // the sample's position.
    if (bp.type == PointType::UNRESOLVED && !snapped) {
        Complex best{};
        double bd = 2.5 * h;
        for (const Complex& p : res.inner_points) {
            double dd = std::abs(p - z);
            if (dd < bd && dd > 1e-12) {
                bd = dd;
                best = p;
            }
        }
        if (bd < 2.5 * h) {
            BoundaryPoint sub = classify_point(s, best, res, true);
            if (sub.type != PointType::UNRESOLVED) {
                sub.z = z;
                return sub;
            }
        }
    }
    return bp;
}

enum class ArcKind { LOCAL_ARC, GLOBAL_ARC, LINE_SEGMENT };

inline const char* to_string(ArcKind k) {
    switch (k) {
        case ArcKind::LOCAL_ARC: return "LOCAL_ARC";
        case ArcKind::GLOBAL_ARC: return "GLOBAL_ARC";
        default: return "LINE_SEGMENT";
    }
}

struct ArcSegment {
    ArcKind kind = ArcKind::GLOBAL_ARC;
    Polyline polyline;
    BoundaryPoint endpoints[2];
    int orientation = +1;
    bool sigma_monotone = true;
};

struct BoundaryReport {
    std::vector<BoundaryPoint> points;      // sampled + special points
    std::vector<ArcSegment> segments;
    double unresolved_fraction = 0;
};

namespace detail {

inline bool is_special(PointType t) {
    return t != PointType::LOCAL && t != PointType::GLOBAL;
}

// max deviation of a polyline stretch from the integral curve through its
// midpoint (both directions)
inline double integral_deviation(const OperatorSpec& s, const std::vector<Complex>& stretch,
                                 const Window& win, double h) {
    if (stretch.size() < 3) return 0.0;
    Complex mid = stretch[stretch.size() / 2];
    double len = 0;
    for (size_t i = 1; i < stretch.size(); ++i) len += std::abs(stretch[i] - stretch[i - 1]);
    StopRule rule;
    rule.window = win.inflated(1.2);
    rule.arclength_cap = 1.2 * len + 10.0 * h;
    rule.max_vertex_gap = h / 2.0;
    Polyline curve;
    try {
        curve = integral_curve(s, mid, FlowDirection::FORWARD, rule);
        Polyline back = integral_curve(s, mid, FlowDirection::BACKWARD, rule);
        std::reverse(back.vertices.begin(), back.vertices.end());
        back.vertices.insert(back.vertices.end(), curve.vertices.begin(), curve.vertices.end());
        curve.vertices = std::move(back.vertices);
    } catch (const StartAtSingularity&) {
        return 1e300;
    }
    double worst = 0;
    for (const Complex& p : stretch)
        worst = std::max(worst, dist_point_polyline(p, curve));
    return worst;
}

inline double chord_deviation(const std::vector<Complex>& v) {
    if (v.size() < 3) return 0.0;
    double worst = 0;
    for (const Complex& p : v) worst = std::max(worst, dist_point_segment(p, v.front(), v.back()));
    return worst;
}

/// Derive a segment's kind (and orientation data) from its polyline geometry.
inline void rekind(const OperatorSpec& s, ArcSegment& seg, const Window& win, double h) {
    const std::vector<Complex>& v = seg.polyline.vertices;
    if (chord_deviation(v) <= h / 10.0) {
        seg.kind = ArcKind::LINE_SEGMENT;
    } else if (integral_deviation(s, v, win, h) <= 3.0 * h) {
        seg.kind = ArcKind::LOCAL_ARC;
        Complex mid = v[v.size() / 2];
        Complex tangent = v[v.size() / 2 + (v.size() > 2 ? 1 : 0)] - v[v.size() / 2 - 1];
        try {
            seg.orientation = std::real(tangent * std::conj(s.R(mid))) >= 0 ? +1 : -1;
        } catch (const PoleAt&) {
        }
    } else {
        seg.kind = ArcKind::GLOBAL_ARC;
        // sigma = arg R, unwrapped along the arc
        double prev = 0, acc = 0, backtrack = 0;
        bool first = true;
        for (const Complex& p : v) {
            double a;
            try {
                a = std::arg(s.R(p));
            } catch (const PoleAt&) {
                continue;
            }
            if (!first) {
                double d = std::remainder(a - prev, 2.0 * std::numbers::pi);
                acc += d;
                if (d * acc < 0) backtrack = std::max(backtrack, std::abs(d));
            }
            prev = a;
            first = false;
        }
        seg.orientation = acc >= 0 ? +1 : -1;
        seg.sigma_monotone = backtrack <= 1e-2;
    }
}

}  // namespace detail

/// Partition the extracted boundary at special points into local/global arcs
/// and line segments.
inline BoundaryReport segment_boundary(const OperatorSpec& s, const MinSetResult& res,
                                       int samples_per_curve = 160) {
    BoundaryReport rep;
    double h = res.grid.h;
    int unresolved = 0, total = 0;
    for (const Polyline& pl : res.boundary.curves) {
        size_t n = pl.vertices.size();
        if (n < 2) continue;
        size_t stride = std::max<size_t>(1, n / static_cast<size_t>(samples_per_curve));
        std::vector<size_t> sample_idx;
        std::vector<BoundaryPoint> sampled;
        for (size_t i = 0; i < n; i += stride) {
            sample_idx.push_back(i);
            sampled.push_back(classify_point(s, pl.vertices[i], res));
            ++total;
            if (sampled.back().type == PointType::UNRESOLVED) ++unresolved;
        }
        for (const BoundaryPoint& bp : sampled) rep.points.push_back(bp);

        // cut indices: runs of ordinary points split at special points
        std::vector<size_t> cuts;
        for (size_t k = 0; k < sampled.size(); ++k)
            if (detail::is_special(sampled[k].type)) cuts.push_back(k);
        if (cuts.empty()) cuts.push_back(0);
        auto make_segment = [&](size_t ka, size_t kb) {
            size_t ia = sample_idx[ka], ib = sample_idx[kb];
            ArcSegment seg;
            if (ia == ib) return;
            seg.polyline.tag = CurveTag::BOUNDARY;
            if (ia < ib)
                seg.polyline.vertices.assign(pl.vertices.begin() + ia, pl.vertices.begin() + ib + 1);
            else {  // wrap on closed curves
                seg.polyline.vertices.assign(pl.vertices.begin() + ia, pl.vertices.end());
                seg.polyline.vertices.insert(seg.polyline.vertices.end(), pl.vertices.begin(),
                                             pl.vertices.begin() + ib + 1);
            }
            seg.endpoints[0] = sampled[ka];
            seg.endpoints[1] = sampled[kb];
            detail::rekind(s, seg, res.window, h);
            if (seg.kind == ArcKind::LOCAL_ARC) {
                // geometry alone can mistake a short noisy stretch for an
                // integral-curve arc; demand one sample of matching pointwise
                // type as corroboration
                bool corroborated = false;
                size_t klo = std::min(ka, kb), khi = std::max(ka, kb);
                for (size_t k = klo; k <= khi && !corroborated; ++k)
                    corroborated = sampled[k].type == PointType::LOCAL;
                if (!corroborated) seg.kind = ArcKind::GLOBAL_ARC;
            }
            rep.segments.push_back(std::move(seg));
        };
        size_t first_seg = rep.segments.size();
        if (cuts.size() == 1 && !detail::is_special(sampled[cuts[0]].type)) {
            make_segment(0, sampled.size() - 1);  // one uncut run
        } else {
            for (size_t k = 0; k + 1 < cuts.size(); ++k) make_segment(cuts[k], cuts[k + 1]);
            if (pl.closed() && cuts.size() >= 2) make_segment(cuts.back(), cuts.front());
            else if (!pl.closed()) {
                if (cuts.front() > 0) make_segment(0, cuts.front());
                if (cuts.back() + 1 < sampled.size()) make_segment(cuts.back(), sampled.size() - 1);
            }
        }

        // Consolidation. Raw cutting splits at every special sample, so a
        // boundary stretch that runs along the inflection curve - where every
        // sample is special - shatters into two-sample slivers, and corner
        // slivers are too short for their deviation tests to mean anything.
        // Merge neighbouring segments of equal kind, then absorb short
        // leftovers into their longer neighbour, and merge once more.
        auto joined = [&](const ArcSegment& a, const ArcSegment& b) {
            return std::abs(a.polyline.vertices.back() - b.polyline.vertices.front()) < 1e-12;
        };
        auto fuse = [&](ArcSegment& a, const ArcSegment& b) {
            a.polyline.vertices.insert(a.polyline.vertices.end(), b.polyline.vertices.begin() + 1,
                                       b.polyline.vertices.end());
            a.endpoints[1] = b.endpoints[1];
        };
        auto pass = [&](bool absorb_short) {
            bool changed = true;
            while (changed) {
                changed = false;
                for (size_t k = first_seg; k + 1 < rep.segments.size(); ++k) {
                    ArcSegment& a = rep.segments[k];
                    ArcSegment& b = rep.segments[k + 1];
                    if (!joined(a, b)) continue;
                    bool same = a.kind == b.kind;
                    size_t na = a.polyline.vertices.size(), nb = b.polyline.vertices.size();
                    bool tiny = std::min(na, nb) <= 5 && na + nb >= 3;
                    if (same || (absorb_short && tiny)) {
                        // a sliver is sampling noise; the merged stretch keeps
                        // the longer side's verdict instead of re-deriving one
                        ArcSegment host = na >= nb ? a : b;
                        fuse(a, b);
                        a.kind = host.kind;
                        a.orientation = host.orientation;
                        a.sigma_monotone = host.sigma_monotone;
                        rep.segments.erase(rep.segments.begin() + k + 1);
                        changed = true;
                        break;
                    }
                }
            }
        };
        pass(false);
        pass(true);
        pass(false);
    }
    rep.unresolved_fraction = total ? double(unresolved) / double(total) : 0.0;
    return rep;
}

enum class CornerVerdict { ADMISSIBLE, VIOLATION };

/// A boundary corner is admissible when it sits at a simple zero of R with
/// vanishing residue phase, or at a common root of P and Q of equal
/// multiplicity.
inline CornerVerdict corner_admissibility(const OperatorSpec& s, Complex z, double tol = 1e-6) {
    for (const ZpqEntry& e : s.zpq) {
        if (std::abs(z - e.z) > std::max(tol, 1e-4)) continue;
        if (e.mult_p > 0 && e.mult_q > 0 && e.mult_p == e.mult_q) return CornerVerdict::ADMISSIBLE;
        if (e.mult_q > 0) {
            LocalData ld = local_expansion(s, e.z);
            if (ld.m_alpha == 1 && std::abs(ld.phi_alpha) <= tol) return CornerVerdict::ADMISSIBLE;
        }
    }
    return CornerVerdict::VIOLATION;
}

enum class ConvexityVerdict { PASSES, FAILS, SKIPPED };

/// Necessary conditions for local convexity of the boundary at z, checked for
/// the category the classifier detects. SKIPPED when z is not locally
/// half-plane supported.
inline ConvexityVerdict convexity_check(const OperatorSpec& s, Complex z,
                                        const MinSetResult& res) {
    const Grid& g = res.grid;
    double h = g.h;
    // gather kept cell centers near z and fit a direction by principal axis
    std::vector<Complex> near;
    auto c0 = g.cell_of(z);
    int reach = 5;
    int ci = c0 ? c0->first : 0, cj = c0 ? c0->second : 0;
    for (int j = cj - reach; j <= cj + reach; ++j)
        for (int i = ci - reach; i <= ci + reach; ++i) {
            if (!g.valid(i, j) || g.at(i, j) == CellState::OUT) continue;
            Complex c = g.center(i, j);
            if (std::abs(c - z) <= 5.0 * h) near.push_back(c);
        }
    if (near.size() < 3) return ConvexityVerdict::SKIPPED;
    double sxx = 0, sxy = 0, syy = 0;
    Complex mean(0);
    for (const Complex& c : near) mean += c;
    mean /= double(near.size());
    for (const Complex& c : near) {
        double dx = c.real() - mean.real(), dy = c.imag() - mean.imag();
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    Complex axis = std::exp(Complex(0, theta));
    double lo = 0, hi = 0;
    for (const Complex& c : near) {
        double side = std::imag((c - z) * std::conj(axis));
        lo = std::min(lo, side);
        hi = std::max(hi, side);
    }
    // half-plane support: all kept mass on one side (up to one cell of slop)
    if (lo < -h && hi > h) return ConvexityVerdict::SKIPPED;

    BoundaryPoint bp = classify_point(s, z, res);
    switch (bp.type) {
        case PointType::ROOT_PQ:
            return corner_admissibility(s, z) == CornerVerdict::ADMISSIBLE
                       ? ConvexityVerdict::PASSES
                       : ConvexityVerdict::FAILS;
        case PointType::SWITCH:
        case PointType::BOUNCING:
            return ConvexityVerdict::PASSES;  // transverse-locus convex categories
        case PointType::LOCAL:
            return ConvexityVerdict::PASSES;
        case PointType::GLOBAL: {
            for (const DeltaHit& hit : bp.delta) {
                if (hit.at_infinity) continue;
                try {
                    ConcavityVerdict v = trail_concavity(s, TrailAnchor{hit.u}, z, 1e-6);
                    return (v == ConcavityVerdict::SAME_SIDE ||
                            v == ConcavityVerdict::TRAIL_INFLECTION)
                               ? ConvexityVerdict::PASSES
                               : ConvexityVerdict::FAILS;
                } catch (const PreconditionViolated&) {
                }
            }
            return ConvexityVerdict::SKIPPED;
        }
        default:
            return ConvexityVerdict::SKIPPED;
    }
}

}  // namespace minvset
