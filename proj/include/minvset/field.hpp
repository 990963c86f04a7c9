#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "minvset/polynomial.hpp"
#include "minvset/roots.hpp"

namespace minvset {

struct BothZero : std::invalid_argument {
    BothZero() : std::invalid_argument("P and Q are both the zero polynomial") {}
};

struct PoleAt : std::runtime_error {
    Complex where;
    explicit PoleAt(Complex z) : std::runtime_error("evaluation at a pole of R"), where(z) {}
};

enum class RegimeTag {
    TRIVIAL_PLANE,
    COMPACT,
    STRIP_LIKE,
    CONE_LIKE,
    FULLY_IRREGULAR,
    NO_MINIMAL,
};

inline const char* to_string(RegimeTag t) {
    switch (t) {
        case RegimeTag::TRIVIAL_PLANE: return "TRIVIAL_PLANE";
        case RegimeTag::COMPACT: return "COMPACT";
        case RegimeTag::STRIP_LIKE: return "STRIP_LIKE";
        case RegimeTag::CONE_LIKE: return "CONE_LIKE";
        case RegimeTag::FULLY_IRREGULAR: return "FULLY_IRREGULAR";
        case RegimeTag::NO_MINIMAL: return "NO_MINIMAL";
    }
    return "?";
}

struct Regime {
    RegimeTag tag;
    std::string detail;
};

/// Cases of the full-irregularity theorem.
enum class IrregularCase {
    CONSTANT_R,        // R == lambda
    LINEAR_DEGQ1,      // R == lambda(z-a), lambda not in R_<0, deg Q = 1
    LINEAR_POSITIVE,   // R == lambda(z-a), lambda in R_>0, deg Q >= 2
    INTERLACING_LINE,  // all roots simple, interlacing on an R-invariant line
};

struct Line {
    Complex point;
    Complex direction;  // unit modulus
};

struct LocalData {
    Complex alpha;
    int m_alpha = 0;       // local order of R at alpha
    Complex r_alpha;       // leading local coefficient
    double phi_alpha = 0;  // arg r_alpha
    double d_alpha(double theta) const { return phi_alpha + m_alpha * theta; }
};

struct BoundsReport {
    int d = 0;
    int singular_max = 0;
    int tangency_isolated_max = 0;
    int tangency_lines_max = 0;
    int transverse_components_max = 0;
    double switch_bound = 0;
    double inflection_bound_lhs_max = 0;
    double local_arcs_bound = 0;
    bool local_arcs_is_log10 = false;
    int components_max = 1;
    bool degenerate = false;  // deg P + deg Q <= 1
};

/// A zero of P*Q with bookkeeping of how it splits between the two factors.
struct ZpqEntry {
    Complex z;
    int mult_p = 0;
    int mult_q = 0;
    int mult() const { return mult_p + mult_q; }
};

struct OperatorSpec {
    Polynomial P, Q;
    int p = -1, q = -1;
    Complex p_inf, q_inf;
    Complex lambda;
    double phi_inf = 0;
    int gap = 0;
    Complex mu;       // next asymptotic term (gap in {-1,0,1})
    int kappa = 0;    // its exponent index; 0 when no next term found
    Complex linA;     // gap 1 only: constant term of R = lambda z + A + mu z^-kappa
    std::vector<ZpqEntry> zpq;

    // Common factors are kept in P, Q (tails live at common roots) but the
    // rational function itself is evaluated from the deflated pair.
    Polynomial Pd, Qd;
    Polynomial num1;  // numerator of R'  over Pd^2
    Polynomial num2;  // numerator of R'' over Pd^3

    Complex R(Complex z) const {
        Complex pv = Pd.eval(z);
        if (std::abs(pv) < 1e-14 * (1.0 + Pd.norm_inf())) {
            Complex qv = Qd.eval(z);
            if (std::abs(qv) > 1e-10 * (1.0 + Qd.norm_inf())) throw PoleAt(z);
        }
        return Qd.eval(z) / pv;
    }
    Complex R1(Complex z) const {
        Complex pv = Pd.eval(z);
        return num1.eval(z) / (pv * pv);
    }
    Complex R2(Complex z) const {
        Complex pv = Pd.eval(z);
        return num2.eval(z) / (pv * pv * pv);
    }
    /// m-th derivative via numerator recurrence N_{k+1} = N_k' D - (k+1) N_k D'.
    Complex Rm(Complex z, int m) const {
        Polynomial N = Qd;
        Polynomial D = Pd;
        Polynomial Dp = D.derivative();
        for (int k = 0; k < m; ++k)
            N = N.derivative() * D - double(k + 1) * Dp * N;
        Complex pv = D.eval(z);
        Complex denom(1);
        for (int k = 0; k <= m; ++k) denom *= pv;
        return N.eval(z) / denom;
    }
};

namespace detail {

/// First `count` coefficients a_k of the expansion R(z) = z^gap * sum a_k z^-k,
/// by power-series division of the degree-reversed polynomials.
inline std::vector<Complex> laurent_at_infinity(const Polynomial& Q, const Polynomial& P,
                                                int count) {
    int s = Q.degree(), r = P.degree();
    std::vector<Complex> qr(static_cast<size_t>(count), Complex(0));
    std::vector<Complex> pr(static_cast<size_t>(count), Complex(0));
    for (int k = 0; k <= s && k < count; ++k) qr[static_cast<size_t>(k)] = Q.coeff(s - k);
    for (int k = 0; k <= r && k < count; ++k) pr[static_cast<size_t>(k)] = P.coeff(r - k);
    std::vector<Complex> a(static_cast<size_t>(count), Complex(0));
    for (int k = 0; k < count; ++k) {
        Complex acc = qr[static_cast<size_t>(k)];
        for (int j = 0; j < k; ++j) acc -= a[static_cast<size_t>(j)] * pr[static_cast<size_t>(k - j)];
        a[static_cast<size_t>(k)] = acc / pr[0];
    }
    return a;
}

inline bool same_point(Complex a, Complex b, double tol) {
    return std::abs(a - b) <= tol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

}  // namespace detail

inline OperatorSpec analyze(const Polynomial& P, const Polynomial& Q) {
    if (P.is_zero() && Q.is_zero()) throw BothZero{};
    OperatorSpec s;
    s.P = P;
    s.Q = Q;
    s.p = P.degree();
    s.q = Q.degree();
    s.p_inf = P.lead();
    s.q_inf = Q.lead();
    if (P.is_zero() || Q.is_zero())
        throw std::invalid_argument("P or Q identically zero: R degenerate");
    s.lambda = s.q_inf / s.p_inf;
    s.phi_inf = std::arg(s.lambda);
    s.gap = s.q - s.p;

    // Z(PQ) with per-factor multiplicities.
    RootSet rp, rq;
    if (s.p >= 1) rp = roots(P);
    if (s.q >= 1) rq = roots(Q);
    double mtol = 1e-6;
    for (const Root& r : rp.roots) {
        ZpqEntry e{r.z, r.multiplicity, 0};
        s.zpq.push_back(e);
    }
    for (const Root& r : rq.roots) {
        bool merged = false;
        for (ZpqEntry& e : s.zpq)
            if (detail::same_point(e.z, r.z, mtol)) {
                e.mult_q += r.multiplicity;
                merged = true;
                break;
            }
        if (!merged) s.zpq.push_back({r.z, 0, r.multiplicity});
    }
    std::sort(s.zpq.begin(), s.zpq.end(), [](const ZpqEntry& a, const ZpqEntry& b) {
        if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
        return a.z.imag() < b.z.imag();
    });

    // Deflated pair for R-evaluation.
    s.Pd = P;
    s.Qd = Q;
    for (const ZpqEntry& e : s.zpq) {
        int common = std::min(e.mult_p, e.mult_q);
        for (int k = 0; k < common; ++k) {
            s.Pd = s.Pd.deflate(e.z);
            s.Qd = s.Qd.deflate(e.z);
        }
    }
    s.num1 = s.Qd.derivative() * s.Pd - s.Qd * s.Pd.derivative();
    s.num2 = s.num1.derivative() * s.Pd - 2.0 * s.Pd.derivative() * s.num1;

    // mu, kappa from the Laurent series at infinity (relevant when |gap| <= 1).
    if (s.gap >= -1 && s.gap <= 1) {
        int count = std::max(s.p, s.q) + 6;
        auto a = detail::laurent_at_infinity(s.Qd, s.Pd, count);
        double scale = std::abs(a[0]);
        if (s.gap == -1) {
            // R = lambda/z + mu/z^2 + ...; mu may legitimately be 0.
            s.mu = a[1];
            s.kappa = 1;
        } else {
            int first = (s.gap == 1) ? 2 : 1;  // gap 1: skip lambda z + A
            if (s.gap == 1 && a.size() > 1) s.linA = a[1];
            for (int k = first; k < count; ++k) {
                if (std::abs(a[static_cast<size_t>(k)]) > 1e-12 * (1.0 + scale)) {
                    s.mu = a[static_cast<size_t>(k)];
                    s.kappa = (s.gap == 1) ? k - 1 : k;
                    break;
                }
            }
        }
    }
    return s;
}

inline LocalData local_expansion(const OperatorSpec& s, Complex alpha) {
    LocalData ld;
    ld.alpha = alpha;
    int mp = 0, mq = 0;
    for (const ZpqEntry& e : s.zpq)
        if (detail::same_point(e.z, alpha, 1e-6)) {
            mp = e.mult_p;
            mq = e.mult_q;
            break;
        }
    ld.m_alpha = mq - mp;
    Polynomial Pd = s.P, Qd = s.Q;
    for (int k = 0; k < mp; ++k) Pd = Pd.deflate(alpha);
    for (int k = 0; k < mq; ++k) Qd = Qd.deflate(alpha);
    ld.r_alpha = Qd.eval(alpha) / Pd.eval(alpha);
    ld.phi_alpha = std::arg(ld.r_alpha);
    return ld;
}

namespace detail {

/// If Q = S * P exactly (up to tolerance) return S, else nothing.
inline std::optional<Polynomial> exact_quotient(const Polynomial& Q, const Polynomial& P) {
    if (Q.degree() < P.degree()) return std::nullopt;
    auto [quot, rem] = Q.divmod(P);
    double scale = Q.norm_inf();
    if (rem.norm_inf() <= 1e-9 * (1.0 + scale)) return quot;
    return std::nullopt;
}

inline bool line_is_invariant(const OperatorSpec& s, const Line& ln, int samples, double tol) {
    double theta = std::arg(ln.direction);
    int good = 0, used = 0;
    for (int k = 0; k < samples; ++k) {
        double t = -5.0 + 10.0 * (k + 0.5) / samples;
        Complex z = ln.point + t * ln.direction;
        Complex pv = s.Pd.eval(z);
        if (std::abs(pv) < 1e-9 * (1.0 + s.Pd.norm_inf())) continue;
        Complex r = s.Qd.eval(z) / pv;
        ++used;
        if (std::abs(std::imag(std::exp(Complex(0, -theta)) * r)) <= tol * (1.0 + std::abs(r)))
            ++good;
    }
    return used > 0 && good == used;
}

}  // namespace detail

/// Lines Lambda with z + R(z) in Lambda for all z in Lambda. Candidates are
/// lines through root pairs of PQ plus asymptotic-axis lines through single roots.
inline std::vector<Line> invariant_lines(const OperatorSpec& s) {
    std::vector<Line> found;
    auto push_candidate = [&](Complex pt, Complex dir) {
        double n = std::abs(dir);
        if (n < 1e-12) return;
        dir /= n;
        if (dir.real() < 0 || (dir.real() == 0 && dir.imag() < 0)) dir = -dir;
        Line ln{pt, dir};
        if (!detail::line_is_invariant(s, ln, 20, 1e-9)) return;
        for (const Line& f : found) {
            // same direction and point on line?
            if (std::abs(f.direction - dir) > 1e-9) continue;
            Complex rel = (pt - f.point) / f.direction;
            if (std::abs(rel.imag()) < 1e-7 * (1.0 + std::abs(rel))) return;
        }
        found.push_back(ln);
    };

    const auto& Z = s.zpq;
    for (size_t i = 0; i < Z.size(); ++i)
        for (size_t j = i + 1; j < Z.size(); ++j)
            push_candidate(Z[i].z, Z[j].z - Z[i].z);

    // Asymptotic axes: directions where Im R' vanishes at infinity (mod pi).
    std::vector<double> axes;
    if (s.gap == -1) {
        axes = {s.phi_inf / 2.0, s.phi_inf / 2.0 + std::numbers::pi / 2.0};
    } else if (s.kappa > 0 &&
               (s.gap == 0 ||
                (s.gap == 1 && std::abs(s.lambda.imag()) <= 1e-12 * std::abs(s.lambda)))) {
        // R' ~ lambda - mu*kappa z^{-kappa-1}; axes where its imaginary part vanishes.
        int k = s.kappa + 1;
        double base = std::arg(-s.mu * double(s.kappa));
        for (int j = 0; j < k; ++j) axes.push_back(base / k + j * std::numbers::pi / k);
    }
    for (const ZpqEntry& e : Z)
        for (double th : axes) push_candidate(e.z, std::exp(Complex(0, th)));

    std::sort(found.begin(), found.end(), [](const Line& a, const Line& b) {
        return std::arg(a.direction) < std::arg(b.direction);
    });
    return found;
}

inline std::optional<IrregularCase> fully_irregular(const OperatorSpec& s) {
    // (a) R constant
    if (s.gap == 0) {
        Polynomial diff = s.Q - s.lambda * s.P;
        if (diff.norm_inf() <= 1e-10 * (1.0 + s.Q.norm_inf())) return IrregularCase::CONSTANT_R;
    }
    // (b),(c) R linear
    if (s.gap == 1) {
        if (auto quot = detail::exact_quotient(s.Q, s.P); quot && quot->degree() == 1) {
            Complex lam = quot->coeff(1);
            bool lam_neg_real = std::abs(lam.imag()) <= 1e-10 * std::abs(lam) && lam.real() < 0;
            if (s.q == 1 && !lam_neg_real) return IrregularCase::LINEAR_DEGQ1;
            bool lam_pos_real = std::abs(lam.imag()) <= 1e-10 * std::abs(lam) && lam.real() > 0;
            if (s.q >= 2 && lam_pos_real) return IrregularCase::LINEAR_POSITIVE;
            return std::nullopt;
        }
    }
    // (d) interlacing on an R-invariant line
    if (std::abs(s.gap) > 1) return std::nullopt;
    if (s.gap == 1) {
        bool lam_pos_real =
            std::abs(s.lambda.imag()) <= 1e-10 * std::abs(s.lambda) && s.lambda.real() > 0;
        if (!lam_pos_real) return std::nullopt;
    }
    // Alternation needs roots of both P and Q to be present.
    if (s.p == 0 || s.q == 0) return std::nullopt;
    // All roots simple and collinear?
    for (const ZpqEntry& e : s.zpq) {
        if (e.mult() != 1) return std::nullopt;
    }
    Complex base = s.zpq.front().z;
    Complex dir(1, 0);
    if (s.zpq.size() >= 2) dir = s.zpq[1].z - base;
    dir /= std::abs(dir);
    std::vector<std::pair<double, bool>> line_roots;  // (coord, is_root_of_P)
    for (const ZpqEntry& e : s.zpq) {
        Complex rel = (e.z - base) / dir;
        if (std::abs(rel.imag()) > 1e-8 * (1.0 + std::abs(rel))) return std::nullopt;
        line_roots.push_back({rel.real(), e.mult_p == 1});
    }
    Line ln{base, dir};
    if (!detail::line_is_invariant(s, ln, 20, 1e-8)) return std::nullopt;
    std::sort(line_roots.begin(), line_roots.end());
    for (size_t i = 1; i < line_roots.size(); ++i)
        if (line_roots[i].second == line_roots[i - 1].second) return std::nullopt;
    return IrregularCase::INTERLACING_LINE;
}

inline Regime regime(const OperatorSpec& s) {
    if (s.p == 0 && s.q == 0) return {RegimeTag::NO_MINIMAL, "P and Q both constant"};
    if (auto irr = fully_irregular(s)) {
        const char* which = nullptr;
        switch (*irr) {
            case IrregularCase::CONSTANT_R: which = "R constant"; break;
            case IrregularCase::LINEAR_DEGQ1: which = "R linear, deg Q = 1"; break;
            case IrregularCase::LINEAR_POSITIVE: which = "R linear, positive real slope"; break;
            case IrregularCase::INTERLACING_LINE: which = "real simple interlacing roots"; break;
        }
        return {RegimeTag::FULLY_IRREGULAR, which};
    }
    if (std::abs(s.gap) >= 2) return {RegimeTag::TRIVIAL_PLANE, "|deg Q - deg P| >= 2"};
    if (s.gap == 1) {
        if (s.lambda.real() < 0)
            return {RegimeTag::TRIVIAL_PLANE, "deg gap 1 with Re(lambda) < 0"};
        return {RegimeTag::COMPACT, "deg gap 1 with Re(lambda) >= 0"};
    }
    if (s.gap == 0) return {RegimeTag::CONE_LIKE, "deg gap 0"};
    return {RegimeTag::STRIP_LIKE, "deg gap -1"};
}

inline BoundsReport bounds(const OperatorSpec& s) {
    BoundsReport b;
    int p = s.p, q = s.q;
    b.degenerate = (p + q <= 1);
    b.d = std::max(0, 3 * p + q - 1);
    double d = b.d;
    b.singular_max = std::max(0, 4 * p + q - 2);
    b.tangency_isolated_max = 2 * b.d * b.d;
    b.tangency_lines_max = std::max(p, q) + 1;
    b.transverse_components_max = 2 * b.d * b.d + 6 * b.d + 2;
    b.switch_bound = (b.d >= 1) ? std::exp(16.0 * d * std::log(d)) + 46.0 * d * d * d : 0.0;
    b.inflection_bound_lhs_max = b.switch_bound;
    if (b.d >= 1) {
        double log10v = 16.0 * d * std::log10(d);
        if (log10v > 300.0) {
            b.local_arcs_bound = log10v;
            b.local_arcs_is_log10 = true;
        } else {
            b.local_arcs_bound = std::pow(d, 16.0 * d) + d * (2.0 * d + 1.0);
        }
    }
    b.components_max = (s.gap == 0) ? (p + q) / 2 : 1;
    return b;
}

}  // namespace minvset
