#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "minvset/field.hpp"
#include "minvset/geometry.hpp"
#include "minvset/roots.hpp"

namespace minvset {

struct DegenerateTrail : std::runtime_error {
    DegenerateTrail() : std::runtime_error("F_t vanishes identically: R = lambda(z - u)") {}
};

struct NotOnTrail : std::runtime_error {
    NotOnTrail() : std::runtime_error("point does not lie on the requested root trail") {}
};

/// u is either a finite point or a direction at infinity (angle in radians).
struct AtInfinity {
    double direction;
};
using TrailAnchor = std::variant<Complex, AtInfinity>;

namespace detail {

inline Polynomial trail_family(const OperatorSpec& s, Complex u, double t) {
    // F_t(z) = t Q(z) + (z - u) P(z)
    return t * s.Q + Polynomial{-u, Complex(1)} * s.P;
}

}  // namespace detail

/// Roots of t Q + (z-u) P continued over a log-spaced t grid. Each polyline is
/// one branch; branches leaving the window or the modulus cap carry
/// meta["escaped"] = 1.
inline CurveSet root_trail(const OperatorSpec& s, Complex u, double t_max = 1e4,
                          int n_steps = 400, double z_cap = 1e6) {
    // Degenerate exactly when Q is proportional to (z-u)P.
    {
        Polynomial zu = Polynomial{-u, Complex(1)} * s.P;
        if (s.Q.degree() == zu.degree()) {
            Complex c = s.Q.lead() / zu.lead();
            // F_t == 0 at t = -1/c needs c negative real.
            if ((s.Q - c * zu).norm_inf() <= 1e-10 * (1.0 + s.Q.norm_inf()) &&
                std::abs(c.imag()) <= 1e-10 * std::abs(c) && c.real() < 0)
                throw DegenerateTrail{};
        }
    }

    int deg0 = (Polynomial{-u, Complex(1)} * s.P).degree();
    std::vector<Complex> cur;
    cur.push_back(u);
    if (s.P.degree() >= 1)
        for (const Root& r : roots(s.P).roots)
            for (int k = 0; k < r.multiplicity; ++k) cur.push_back(r.z);
    (void)deg0;

    std::vector<Polyline> branches(cur.size());
    std::vector<bool> escaped(cur.size(), false);
    for (size_t b = 0; b < cur.size(); ++b) {
        branches[b].tag = CurveTag::TRAIL;
        branches[b].vertices.push_back(cur[b]);
    }

    double t_min = 1e-6 * t_max / n_steps;
    auto t_of = [&](int i) {
        if (i == 0) return 0.0;
        return t_min * std::pow(t_max / t_min, double(i - 1) / double(n_steps - 1));
    };

    double fscale = s.Q.norm_inf() * (1.0 + std::abs(u)) + s.P.norm_inf();
    for (int i = 1; i <= n_steps; ++i) {
        double t0 = t_of(i - 1), t1 = t_of(i);
        for (size_t b = 0; b < cur.size(); ++b) {
            if (escaped[b]) continue;
            Complex z = cur[b];
            double ta = t0;
            int halvings = 0;
            while (ta < t1) {
                double tb = t1;
                bool accepted = false;
                while (!accepted) {
                    Polynomial F = detail::trail_family(s, u, tb);
                    Polynomial Fp = F.derivative();
                    // Euler predictor dz/dt = -Q/F'
                    Complex fz = Fp.eval(z);
                    Complex zp = z;
                    if (std::abs(fz) > 1e-8 * (1.0 + fscale))
                        zp = z - (tb - ta) * s.Q.eval(z) / fz;
                    // Newton corrector
                    bool conv = false;
                    for (int it = 0; it < 30; ++it) {
                        Complex fv = F.eval(zp);
                        if (std::abs(fv) <= 1e-12 * (1.0 + fscale * (1.0 + std::abs(zp)))) {
                            conv = true;
                            break;
                        }
                        Complex dv = Fp.eval(zp);
                        if (std::abs(dv) < 1e-300) break;
                        Complex step = fv / dv;
                        if (std::abs(step) > 1.0 + std::abs(zp)) step *= (1.0 + std::abs(zp)) / std::abs(step);
                        zp -= step;
                    }
                    // Reject jumps onto another branch.
                    if (conv && std::abs(zp - z) < 0.5 * (1.0 + std::abs(z))) {
                        z = zp;
                        ta = tb;
                        accepted = true;
                    } else {
                        tb = ta + 0.5 * (tb - ta);
                        if (++halvings > 40) {
                            // Branch-point region: re-seed this branch from the
                            // nearest root of F at a slightly advanced t.
                            double td = std::min(t1, ta + 1e-3 * (t1 - t0) + 1e-12);
                            Polynomial F2 = detail::trail_family(s, u, td);
                            if (F2.degree() >= 1) {
                                RootSet rs = roots(F2, 1e-12);
                                double best = 1e300;
                                Complex bz = z;
                                for (const Root& r : rs.roots)
                                    if (std::abs(r.z - z) < best) {
                                        best = std::abs(r.z - z);
                                        bz = r.z;
                                    }
                                z = bz;
                                ta = td;
                                branches[b].meta["split"] = 1.0;
                            } else {
                                ta = t1;
                            }
                            accepted = true;
                        }
                    }
                }
            }
            cur[b] = z;
            branches[b].vertices.push_back(z);
            if (std::abs(z) > z_cap) {
                escaped[b] = true;
                branches[b].meta["escaped"] = 1.0;
            }
        }
    }

    CurveSet cs;
    for (Polyline& pl : branches)
        if (pl.vertices.size() >= 2) cs.curves.push_back(std::move(pl));
    return cs;
}

struct SlopeReport {
    int branch_count = 1;
    std::vector<double> slopes;  // angles mod pi
    bool on_inflection = false;  // branch fans sit on the curve of inflections
};

namespace detail {

inline bool on_trail(const OperatorSpec& s, const TrailAnchor& u, Complex z0, double tol) {
    if (std::holds_alternative<Complex>(u)) {
        Complex uf = std::get<Complex>(u);
        Complex t = (uf - z0) / s.R(z0);  // trail parameter; must be in R_{>=0}
        return std::abs(t.imag()) <= tol * (1.0 + std::abs(t)) && t.real() >= -tol;
    }
    double th = std::get<AtInfinity>(u).direction;
    Complex v = s.R(z0) * std::exp(Complex(0, -th));
    return std::abs(v.imag()) <= tol * (1.0 + std::abs(v)) && v.real() >= -tol;
}

inline double mod_pi(double a) {
    const double pi = std::numbers::pi;
    a = std::fmod(a, pi);
    if (a < 0) a += pi;
    return a;
}

}  // namespace detail

inline SlopeReport trail_slope(const OperatorSpec& s, const TrailAnchor& u, Complex z0,
                               double tol = 1e-6) {
    if (!detail::on_trail(s, u, z0, std::max(tol, 1e-6))) throw NotOnTrail{};
    SlopeReport rep;
    Complex R = s.R(z0), R1 = s.R1(z0);
    bool finite = std::holds_alternative<Complex>(u);
    Complex denom = finite ? R + (std::get<Complex>(u) - z0) * R1 : R1;
    double dscale = std::abs(R) + std::abs(R1) * (finite ? 1.0 + std::abs(z0) : 1.0);
    if (std::abs(denom) > 1e-9 * (1.0 + dscale)) {
        double slope = finite ? std::arg(R * R / denom) : std::arg(R / R1);
        rep.branch_count = 1;
        rep.slopes.push_back(detail::mod_pi(slope));
        return rep;
    }
    int m = 2;
    Complex rm;
    for (; m <= std::max(s.p, s.q) + 2; ++m) {
        rm = s.Rm(z0, m);
        if (std::abs(rm) > 1e-9 * (1.0 + dscale)) break;
    }
    double theta0 = std::arg(R / rm);
    rep.branch_count = m;
    for (int k = 0; k < m; ++k)
        rep.slopes.push_back(detail::mod_pi(theta0 / m + k * std::numbers::pi / m));
    rep.on_inflection = std::abs(std::imag(R1)) <= 1e-6 * (1.0 + std::abs(R1));
    return rep;
}

enum class ConcavityVerdict { SAME_SIDE, OPPOSITE_SIDE, TRAIL_INFLECTION };

struct PreconditionViolated : std::runtime_error {
    explicit PreconditionViolated(const std::string& what) : std::runtime_error(what) {}
};

/// Side of the trail germ relative to the associated ray (off the curve of
/// inflections), or relative to the forward-trajectory germ on the transverse
/// locus.
inline ConcavityVerdict trail_concavity(const OperatorSpec& s, const TrailAnchor& u, Complex z0,
                                        double tol = 1e-9) {
    Complex R = s.R(z0), R1 = s.R1(z0);
    double imr1 = std::imag(R1);
    bool on_ir = std::abs(imr1) <= 1e-3 * (1.0 + std::abs(R1));
    if (on_ir) {
        // Transverse-locus signing: s = R'(z0) + R(z0)/(u - z0).
        if (!std::holds_alternative<Complex>(u))
            throw PreconditionViolated("transverse-locus side test needs a finite anchor");
        Complex uf = std::get<Complex>(u);
        if (std::abs(uf - z0) < 1e-12) throw PreconditionViolated("z0 == u");
        double sgn = std::real(R1 + R / (uf - z0));
        return sgn > 0 ? ConcavityVerdict::OPPOSITE_SIDE : ConcavityVerdict::SAME_SIDE;
    }
    Complex f;
    if (std::holds_alternative<Complex>(u)) {
        Complex w = std::get<Complex>(u) - z0;
        if (std::abs(w) < 1e-12) throw PreconditionViolated("z0 == u");
        Complex R2 = s.R2(z0);
        Complex den = R1 * w + R;
        if (std::abs(den) < 1e-12 * (1.0 + std::abs(R)))
            throw PreconditionViolated("trail has a branch fan at z0");
        f = (R2 * w * w + 2.0 * R1 * w + 2.0 * R) * w / (den * den);
    } else {
        if (std::abs(R1) < 1e-12) throw PreconditionViolated("R'(z0) = 0");
        f = s.R2(z0) * R / (R1 * R1);
    }
    double imf = std::imag(f);
    if (std::abs(imf) <= tol * (1.0 + std::abs(f))) return ConcavityVerdict::TRAIL_INFLECTION;
    return (imf * imr1 < 0) ? ConcavityVerdict::SAME_SIDE : ConcavityVerdict::OPPOSITE_SIDE;
}

}  // namespace minvset
