#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include "minvset/field.hpp"
#include "minvset/geometry.hpp"

namespace minvset {

constexpr double kSingRadius = 1e-6;

struct StartAtSingularity : std::runtime_error {
    StartAtSingularity() : std::runtime_error("integral curve started at a zero/pole of R") {}
};

enum class FlowDirection { FORWARD, BACKWARD };

struct StopRule {
    Window window;
    double arclength_cap = 200.0;
    double closure_step = 0.0;   // h for closure detection; 0 disables
    double max_vertex_gap = 0.05;
};

enum class StopReason { WINDOW_EXIT, SINGULARITY, ARCLENGTH_CAP, CLOSED, STALLED };

namespace detail {

inline double dist_to_zpq(const OperatorSpec& s, Complex z) {
    double d = 1e300;
    for (const ZpqEntry& e : s.zpq) d = std::min(d, std::abs(z - e.z));
    return d;
}

}  // namespace detail

/// Adaptive Cash-Karp RK45 on zdot = +/- R(z). Vertices are emitted at most
/// max_vertex_gap apart. Reason for stopping is recorded in meta["stop"].
inline Polyline integral_curve(const OperatorSpec& s, Complex z0, FlowDirection dir,
                               const StopRule& stop) {
    if (detail::dist_to_zpq(s, z0) < kSingRadius) throw StartAtSingularity{};

    double sign = (dir == FlowDirection::FORWARD) ? 1.0 : -1.0;
    auto f = [&](Complex z) { return sign * s.R(z); };

    // Cash-Karp tableau
    static const double b5[6] = {37.0 / 378, 0, 250.0 / 621, 125.0 / 594, 0, 512.0 / 1771};
    static const double b4[6] = {2825.0 / 27648, 0,           18575.0 / 48384,
                                 13525.0 / 55296, 277.0 / 14336, 1.0 / 4};
    static const double a[6][5] = {
        {0, 0, 0, 0, 0},
        {1.0 / 5, 0, 0, 0, 0},
        {3.0 / 40, 9.0 / 40, 0, 0, 0},
        {3.0 / 10, -9.0 / 10, 6.0 / 5, 0, 0},
        {-11.0 / 54, 5.0 / 2, -70.0 / 27, 35.0 / 27, 0},
        {1631.0 / 55296, 175.0 / 512, 575.0 / 13824, 44275.0 / 110592, 253.0 / 4096}};

    Polyline out;
    out.tag = CurveTag::INTEGRAL;
    out.vertices.push_back(z0);

    Complex z = z0;
    double arclen = 0;
    double speed0 = std::abs(f(z0));
    double dt = (speed0 > 0) ? 0.25 * stop.max_vertex_gap / speed0 : 1e-3;
    const double tol = 1e-9;
    StopReason reason = StopReason::STALLED;
    Complex last_emitted = z0;

    for (int step = 0; step < 2000000; ++step) {
        if (!stop.window.contains(z)) { reason = StopReason::WINDOW_EXIT; break; }
        if (detail::dist_to_zpq(s, z) < kSingRadius) { reason = StopReason::SINGULARITY; break; }
        if (arclen > stop.arclength_cap) { reason = StopReason::ARCLENGTH_CAP; break; }
        if (stop.closure_step > 0 && arclen > 10.0 * stop.closure_step &&
            std::abs(z - z0) < stop.closure_step) {
            out.vertices.push_back(z0);
            reason = StopReason::CLOSED;
            break;
        }

        Complex k[6];
        bool ok = true;
        Complex znew, zerr;
        for (int attempt = 0; attempt < 60; ++attempt) {
            ok = true;
            try {
                for (int i = 0; i < 6; ++i) {
                    Complex zi = z;
                    for (int j = 0; j < i; ++j) zi += dt * a[i][j] * k[j];
                    k[i] = f(zi);
                }
            } catch (const PoleAt&) {
                ok = false;
            }
            if (ok) {
                znew = z;
                Complex z4 = z;
                for (int i = 0; i < 6; ++i) {
                    znew += dt * b5[i] * k[i];
                    z4 += dt * b4[i] * k[i];
                }
                zerr = znew - z4;
                double err = std::abs(zerr) / (tol * (1.0 + std::abs(z)));
                double ds = std::abs(znew - z);
                if (err <= 1.0 && ds <= stop.max_vertex_gap) break;
                double shrink = (err > 1.0) ? 0.9 * std::pow(err, -0.25) : 1.0;
                if (ds > stop.max_vertex_gap) shrink = std::min(shrink, 0.7 * stop.max_vertex_gap / ds);
                dt *= std::max(shrink, 0.1);
            } else {
                dt *= 0.5;
            }
            if (dt < 1e-16) break;
        }
        if (!ok || dt < 1e-16) { reason = StopReason::STALLED; break; }

        arclen += std::abs(znew - z);
        z = znew;
        if (std::abs(z - last_emitted) >= 0.2 * stop.max_vertex_gap) {
            out.vertices.push_back(z);
            last_emitted = z;
        }
        double err = std::abs(zerr) / (tol * (1.0 + std::abs(z)));
        double grow = (err > 1e-12) ? 0.9 * std::pow(err, -0.2) : 2.0;
        dt *= std::clamp(grow, 0.2, 2.0);
    }
    if (out.vertices.size() < 2 || std::abs(out.vertices.back() - z) > 1e-15)
        out.vertices.push_back(z);
    out.meta["stop"] = static_cast<double>(reason);
    out.meta["closed"] = (reason == StopReason::CLOSED) ? 1.0 : 0.0;
    return out;
}

inline StopReason stop_reason(const Polyline& pl) {
    auto it = pl.meta.find("stop");
    return (it == pl.meta.end()) ? StopReason::STALLED : static_cast<StopReason>(int(it->second));
}

}  // namespace minvset
