#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "minvset/integrate.hpp"
#include "minvset/trace.hpp"

using namespace minvset;

namespace {
Polynomial poly(std::initializer_list<Complex> cs) { return Polynomial(std::vector<Complex>(cs)); }

OperatorSpec inv_field() { return analyze(poly({0.0, 1.0}), poly({-1.0})); }  // R = -1/z
}  // namespace

TEST_CASE("integral curves follow closed-form flows") {
    // R = (1+i)z: trajectories conserve Im(log(z)/lambda)
    Complex lam(1, 1);
    OperatorSpec lin = analyze(poly({1.0}), poly({0.0, lam}));
    StopRule rule;
    rule.window = Window{-20, -20, 20, 20};
    rule.arclength_cap = 30;
    rule.max_vertex_gap = 0.05;
    Polyline tr = integral_curve(lin, Complex(1), FlowDirection::FORWARD, rule);
    REQUIRE(tr.vertices.size() >= 10);
    double c0 = std::imag(std::log(Complex(1)) / lam);
    for (const Complex& v : tr.vertices) {
        CHECK(std::abs(std::imag(std::log(v) / lam) - c0) < 1e-6);
    }

    // R = -1/z: hyperbolas xy = const
    OperatorSpec inv = inv_field();
    rule.arclength_cap = 10;
    Polyline hyp = integral_curve(inv, Complex(1, 1), FlowDirection::FORWARD, rule);
    for (const Complex& v : hyp.vertices) CHECK(std::abs(v.real() * v.imag() - 1.0) < 1e-5);

    // R = iz: circles close
    OperatorSpec rot = analyze(poly({1.0}), poly({0.0, Complex(0, 1)}));
    rule.arclength_cap = 100;
    rule.closure_step = 0.02;
    Polyline circ = integral_curve(rot, Complex(1), FlowDirection::FORWARD, rule);
    CHECK(stop_reason(circ) == StopReason::CLOSED);
    for (const Complex& v : circ.vertices) CHECK(std::abs(std::abs(v) - 1.0) < 1e-6);
}

TEST_CASE("inflection curve of R = -1/z is the pair of axes") {
    OperatorSpec inv = inv_field();
    CurveSet cs = inflection_curve(inv, Window{-2, -2, 2, 2}, 0.05);
    REQUIRE(!cs.curves.empty());
    size_t checked = 0;
    for (const Polyline& pl : cs.curves)
        for (const Complex& v : pl.vertices) {
            double r2 = std::norm(v);
            if (r2 < 1e-4) continue;  // the singular point at 0
            CHECK(std::abs(v.real() * v.imag()) <= 1e-3 * r2);
            ++checked;
        }
    CHECK(checked > 50);
}

TEST_CASE("inflection curve empty for genuinely spiraling linear fields") {
    OperatorSpec lin = analyze(poly({1.0}), poly({0.0, Complex(1, 1)}));
    CurveSet cs = inflection_curve(lin, Window{-2, -2, 2, 2}, 0.05);
    CHECK(cs.curves.empty());
}

TEST_CASE("inflection curve component bound and residuals") {
    // R = z(z-1)/(z+1): d = 4
    OperatorSpec rat = analyze(poly({1.0, 1.0}), poly({0.0, -1.0, 1.0}));
    CurveSet cs = inflection_curve(rat, Window{-3, -3, 3, 3}, 0.05);
    CHECK(cs.curves.size() <= 4);
    for (const Polyline& pl : cs.curves)
        for (const Complex& v : pl.vertices) {
            try {
                CHECK(std::abs(std::imag(rat.R1(v))) <= 1e-4 * (1.0 + std::abs(rat.R1(v))));
            } catch (const PoleAt&) {
            }
        }
}

TEST_CASE("locus decomposition: pole branch point and tangency line") {
    OperatorSpec inv = inv_field();
    CurveSet axes = inflection_curve(inv, Window{-2, -2, 2, 2}, 0.05);
    std::vector<LocusPoint> pts = locus_decomposition(inv, axes, 0.05);
    bool pole_found = false;
    for (const LocusPoint& lp : pts)
        if (lp.kind == LocusKind::SINGULAR && std::abs(lp.z) < 0.1) {
            pole_found = true;
            CHECK(lp.branch_count == 2);
        }
    CHECK(pole_found);

    // P = z, Q = z^2-1: the real axis is an R-invariant line, hence TANGENCY_LINE
    OperatorSpec inter = analyze(poly({0.0, 1.0}), poly({-1.0, 0.0, 1.0}));
    CurveSet ir = inflection_curve(inter, Window{-3, -3, 3, 3}, 0.05);
    locus_decomposition(inter, ir, 0.05);
    bool tangency_line = false;
    for (const Polyline& pl : ir.curves) {
        auto it = pl.meta.find("tangency_line");
        if (it == pl.meta.end() || it->second < 0.5) continue;
        bool on_real_axis = true;
        for (const Complex& v : pl.vertices)
            if (std::abs(v.imag()) > 1e-6) on_real_axis = false;
        if (on_real_axis) tangency_line = true;
    }
    CHECK(tangency_line);
}

TEST_CASE("inflection directions at infinity") {
    using std::numbers::pi;
    OperatorSpec inv = inv_field();  // phi_inf = pi
    std::vector<double> dirs = inflection_infinity(inv);
    REQUIRE(dirs.size() == 4);
    std::vector<double> want = {0.0, pi / 2, pi, 3 * pi / 2};
    for (double w : want) {
        bool hit = false;
        for (double d : dirs)
            if (std::abs(std::remainder(d - w, 2 * pi)) < 1e-9) hit = true;
        CHECK(hit);
    }

    OperatorSpec spiral = analyze(poly({-1.0, 1.0}),
                                  Polynomial::from_roots({Complex(1), Complex(0)}) * Complex(1, 6));
    CHECK(inflection_infinity(spiral).empty());

    // R = 1 + 1/z: four rays, regular 4-gon
    OperatorSpec shift = analyze(poly({0.0, 1.0}), poly({1.0, 1.0}));
    std::vector<double> d4 = inflection_infinity(shift);
    REQUIRE(d4.size() == 4);
    std::sort(d4.begin(), d4.end());
    for (size_t k = 1; k < d4.size(); ++k)
        CHECK(std::abs((d4[k] - d4[k - 1]) - pi / 2) < 1e-9);
}

TEST_CASE("horizontal locus") {
    OperatorSpec inv = inv_field();
    CurveSet hl = horizontal_locus(inv, Window{-3, -3, 3, 3}, 0.05);
    REQUIRE(!hl.curves.empty());
    size_t n = 0;
    for (const Polyline& pl : hl.curves)
        for (const Complex& v : pl.vertices) {
            CHECK(std::abs(v.imag()) < 1e-3);
            ++n;
        }
    CHECK(n > 20);

    // P = z^2+1, Q = 1: residual of the defining equation at extracted points
    OperatorSpec deep = analyze(poly({1.0, 0.0, 1.0}), poly({1.0}));
    CurveSet hl2 = horizontal_locus(deep, Window{-3, -3, 3, 3}, 0.02);
    double theta = (deep.phi_inf + std::numbers::pi) / 2.0;
    size_t m = 0;
    for (const Polyline& pl : hl2.curves)
        for (const Complex& v : pl.vertices) {
            try {
                Complex r = deep.R(v);
                CHECK(std::abs(std::imag(std::exp(Complex(0, -theta)) * r)) <=
                      1e-4 * (1.0 + std::abs(r)));
                ++m;
            } catch (const PoleAt&) {
            }
        }
    CHECK(m > 20);

    OperatorSpec gap1 = analyze(poly({1.0}), poly({0.0, 1.0, 1.0}));
    CHECK_THROWS_AS(horizontal_locus(gap1, Window{-1, -1, 1, 1}, 0.1), WrongRegime);
}

TEST_CASE("first integral conserved along unit-disk trajectories") {
    // k = 2: Q = z(z^2-1), P = z^2+1
    OperatorSpec s = analyze(poly({1.0, 0.0, 1.0}), poly({0.0, -1.0, 0.0, 1.0}));
    StopRule rule;
    rule.window = Window{-3, -3, 3, 3};
    rule.arclength_cap = 4;
    rule.max_vertex_gap = 0.02;
    Polyline tr = integral_curve(s, Complex(0.5, 0.3), FlowDirection::FORWARD, rule);
    auto fi = [](Complex z) {
        Complex zk = z * z;
        return std::imag(std::log((1.0 - zk) * (1.0 - zk) / zk)) / 2.0;
    };
    double c0 = fi(tr.vertices.front());
    for (const Complex& v : tr.vertices) {
        // compare modulo the principal-branch period of the log
        double d = std::remainder(fi(v) - c0, std::numbers::pi);
        CHECK(std::abs(d) < 1e-4);
    }
}
