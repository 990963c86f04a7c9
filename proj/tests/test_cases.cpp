#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "minvset/cases.hpp"
#include "minvset/minset.hpp"

using namespace minvset;

namespace {
Polynomial poly(std::initializer_list<Complex> cs) { return Polynomial(std::vector<Complex>(cs)); }

// Common-root family with R = -1/z: P = alpha z - z^2, Q = z - alpha.
OperatorSpec hyperbola_op(Complex alpha) {
    return analyze(poly({0.0, alpha, -1.0}), poly({-alpha, 1.0}));
}

// Membership in the closed region bounded by the explicit hyperbola arcs:
// the filled band under f3 (resp. f4) plus the hump between f2 and f1.
// Positive tol inflates the region, negative tol shrinks it.
struct HyperbolaRegion {
    double x0, y0, xe;
    double f1(double x) const { return y0 * x / (2.0 * x - x0); }
    double f2(double x) const { return x0 * y0 / x; }
    double f3(double x) const {
        double r = 2.0 * std::sqrt(x0 * x) + x0;
        return x0 * y0 * x / (r * r);
    }
    bool contains(Complex z, double tol) const {
        double x = z.real(), y = z.imag();
        if (std::abs(y) <= tol) return true;  // the real axis
        if (y < 0) return false;
        if (x <= tol) {  // left of the origin: band under f4
            if (x >= -tol) return y <= tol;
            return y <= f1(x) + tol;  // f4 is the same formula on x < 0
        }
        if (x <= xe + tol && y <= f3(std::min(x, xe)) + tol) return true;
        if (x >= x0 - tol && x <= xe + tol && y >= f2(std::max(x, x0)) - tol &&
            y <= f1(std::max(x, x0)) + tol)
            return true;
        if (x >= xe - tol && y <= f1(x) + tol) return true;  // bay closed past the cusp
        return false;
    }
};
}  // namespace

// ---------------------------------------------------------------- halflines

TEST_CASE("halflines_set: single common root, real direction") {
    // P = z-1, Q = 2(z-1): R = 2 after deflation, one half-line [1, inf)
    OperatorSpec s = analyze(poly({-1.0, 1.0}), poly({-2.0, 2.0}));
    CurveSet cs = halflines_set(s, Window{-3, -3, 3, 3});
    REQUIRE(cs.curves.size() == 1);
    for (const Complex& v : cs.curves[0].vertices) {
        CHECK(std::abs(v.imag()) < 1e-9);
        CHECK(v.real() >= 1.0 - 1e-9);
    }
    CHECK(std::abs(cs.curves[0].vertices.front() - Complex(1, 0)) < 1e-9);
}

TEST_CASE("halflines_set: Q = i P, rays point straight up from 0") {
    OperatorSpec s = analyze(poly({0.0, 0.0, 1.0}), poly({0.0, 0.0, Complex(0, 1)}));
    CurveSet cs = halflines_set(s, Window{-2, -2, 2, 2});
    REQUIRE(!cs.curves.empty());
    for (const Polyline& pl : cs.curves)
        for (const Complex& v : pl.vertices) {
            // the root of z^2 at 0 is only found to half precision
            CHECK(std::abs(v.real()) < 1e-6);
            CHECK(v.imag() >= -1e-6);
        }
}

TEST_CASE("halflines_set: component count bounded by (deg P + deg Q)/2") {
    OperatorSpec s = analyze(poly({-1.0, 0.0, 1.0}), poly({-2.0, 0.0, 2.0}));
    CurveSet cs = halflines_set(s, Window{-3, -3, 3, 3});
    CHECK(cs.curves.size() == 2);
    CHECK(2 * cs.curves.size() <= size_t(s.p + s.q));
}

TEST_CASE("halflines_set rejects non-constant R") {
    CHECK_THROWS_AS(halflines_set(hyperbola_op(Complex(1, 0.8)), Window{-2, -2, 2, 2}),
                    WrongCase);
}

// ---------------------------------------------------------------- strip hull

TEST_CASE("strip_hull: real common root degenerates to the axis") {
    OperatorSpec s = hyperbola_op(Complex(1, 0));
    StripHull sh = strip_hull(s, Window{-6, -2, 8, 2}, 0.05);
    CHECK(std::abs(sh.y_minus) < 1e-6);
    CHECK(std::abs(sh.y_plus) < 1e-6);
}

TEST_CASE("strip_hull: purely imaginary common root gives unit-height strip") {
    OperatorSpec s = hyperbola_op(Complex(0, 1));
    StripHull sh = strip_hull(s, Window{-6, -2, 6, 2}, 0.05);
    CHECK(sh.y_minus <= 1e-9);
    CHECK(sh.y_minus >= -1e-6);
    CHECK(sh.y_plus == Catch::Approx(1.0).margin(1e-6));
    // the strip contains both roots of PQ
    CHECK(sh.contains(Complex(0, 0), 1e-9));
    CHECK(sh.contains(Complex(0, 1), 1e-9));
}

TEST_CASE("strip_hull: contains the computed inner cloud, and is tight") {
    Complex alpha(1, 0.8);
    OperatorSpec s = hyperbola_op(alpha);
    Window win{-6, -0.8, 8, 1.6};
    double h = 0.05;
    StripHull sh = strip_hull(s, win, h);
    MinSetResult res = compute_minset(s, win, h, 12000);
    REQUIRE(!res.inner_points.empty());
    for (const Complex& z : res.inner_points) CHECK(sh.contains(z, 1.5 * h));
    // tightness: shrinking the top offset by 5% expels the common root
    CHECK(sh.contains(alpha, 1e-9));
    CHECK(sh.normalized_height(alpha) > 0.95 * sh.y_plus);
    CHECK(std::isfinite(sh.envelope_B));
}

TEST_CASE("strip_hull rejects the wrong degree gap") {
    OperatorSpec s = analyze(poly({1.0, 1.0}), poly({0.0, -1.0, 1.0}));  // gap 1
    CHECK_THROWS_AS(strip_hull(s, Window{-2, -2, 2, 2}, 0.05), WrongRegime);
}

// --------------------------------------------------------- periodic boundary

TEST_CASE("periodic_boundary: R = iz with roots {0,1} returns the unit circle") {
    // Q = i z (z-1), P = z-1
    OperatorSpec s = analyze(poly({-1.0, 1.0}),
                             poly({0.0, Complex(0, -1), Complex(0, 1)}));
    REQUIRE(s.gap == 1);
    REQUIRE(std::abs(s.lambda - Complex(0, 1)) < 1e-12);
    Polyline leaf = periodic_boundary(s);
    REQUIRE(leaf.vertices.size() > 8);

    double rlo = 1e300, rhi = 0, droot = 1e300;
    for (const Complex& v : leaf.vertices) {
        double r = std::abs(v);
        rlo = std::min(rlo, r);
        rhi = std::max(rhi, r);
        droot = std::min(droot, std::abs(v - Complex(1, 0)));
    }
    // level set of the conserved quantity (here log|z|): near-constant radius 1
    CHECK(rhi - rlo <= 1e-3);
    CHECK(rlo == Catch::Approx(1.0).margin(5e-3));
    // incidence certificate: the leaf meets a root of PQ
    CHECK(droot <= 5e-3);

    // convexity: polygonal turning keeps one sign (up to numerical dust)
    double pos = 0, neg = 0;
    size_t n = leaf.vertices.size();
    for (size_t k = 0; k + 2 < n; ++k) {
        Complex e1 = leaf.vertices[k + 1] - leaf.vertices[k];
        Complex e2 = leaf.vertices[k + 2] - leaf.vertices[k + 1];
        double cr = std::imag(std::conj(e1) * e2);
        (cr >= 0 ? pos : neg) += std::abs(cr);
    }
    CHECK(std::min(pos, neg) <= 1e-4 * std::max(pos, neg));
}

TEST_CASE("periodic_boundary rejects Re(lambda) != 0") {
    OperatorSpec s = analyze(poly({1.0, 1.0}), poly({0.0, -1.0, 1.0}));  // lambda = 1
    CHECK_THROWS_AS(periodic_boundary(s), WrongCase);
}

// -------------------------------------------------------------- residue hull

TEST_CASE("residue_hull: Q = z^3 - 1, P = Q' gives the cube-root triangle") {
    OperatorSpec s = analyze(poly({0.0, 0.0, 3.0}), poly({-1.0, 0.0, 0.0, 1.0}));
    std::vector<Complex> hull = residue_hull(s);
    REQUIRE(hull.size() == 3);
    for (const Complex& v : hull) CHECK(std::abs(std::pow(v, 3) - 1.0) < 1e-9);
}

TEST_CASE("residue_hull: single root Q = z, P = 1 collapses to a point") {
    OperatorSpec s = analyze(poly({1.0}), poly({0.0, 1.0}));
    std::vector<Complex> hull = residue_hull(s);
    REQUIRE(hull.size() == 1);
    CHECK(std::abs(hull[0]) < 1e-12);
}

TEST_CASE("residue_hull: negative residue at a root of Q is rejected") {
    // Q = z(z^2-1), P = z^2+1: at the root 0, Q'(0)/P(0) = -1
    OperatorSpec s = analyze(poly({1.0, 0.0, 1.0}), poly({0.0, -1.0, 0.0, 1.0}));
    CHECK_THROWS_AS(residue_hull(s), PreconditionViolated);
    try {
        residue_hull(s);
    } catch (const PreconditionViolated& e) {
        CHECK(std::string(e.what()).find("0") != std::string::npos);
    }
}

// --------------------------------------------------------- hyperbola oracle

TEST_CASE("oracle_hyperbola: cusp location and branch values") {
    Complex alpha(1, 0.8);
    auto curves = oracle_hyperbola(alpha);
    REQUIRE(curves.size() == 5);

    auto named = [&](const std::string& n) -> const OracleCurve& {
        for (const auto& c : curves)
            if (c.name == n) return c;
        FAIL("missing curve " + n);
        return curves[0];
    };
    const OracleCurve& f1 = named("f1");
    const OracleCurve& f2 = named("f2");
    const OracleCurve& f3 = named("f3");

    CHECK(std::abs(f1.sampler(1.0) - alpha) < 1e-12);  // f1 passes through alpha
    CHECK(f3.sampler(1.0).imag() == Catch::Approx(0.8 / 9.0).epsilon(1e-12));

    Complex cusp{};
    for (const auto& sp : f2.special_points)
        if (sp.first == "extruding") cusp = sp.second;
    CHECK(cusp.real() == Catch::Approx(5.828427).margin(1e-5));
    CHECK(cusp.imag() == Catch::Approx(0.137259).margin(1e-5));
    // f2 and f3 agree at the cusp
    CHECK(std::abs(f2.sampler(cusp.real()) - cusp) < 1e-9);
    CHECK(std::abs(f3.sampler(cusp.real()) - cusp) < 1e-9);

    for (const auto& c : curves) {
        Polyline pl = c.sample(64);
        for (const Complex& v : pl.vertices) CHECK(std::isfinite(std::abs(v)));
    }
}

TEST_CASE("oracle_hyperbola rejects roots outside the open first quadrant") {
    CHECK_THROWS_AS(oracle_hyperbola(Complex(-1, 0.5)), WrongCase);
    CHECK_THROWS_AS(oracle_hyperbola(Complex(1, 0)), WrongCase);
}

TEST_CASE("hyperbola region: rays from exterior points avoid the region") {
    Complex alpha(1, 0.8);
    HyperbolaRegion reg{alpha.real(), alpha.imag(),
                        (3.0 + 2.0 * std::numbers::sqrt2) * alpha.real()};
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> ux(-6.0, 8.0), uy(-1.6, 1.6);
    int tested = 0, violations = 0;
    while (tested < 1000) {
        Complex z(ux(rng), uy(rng));
        if (reg.contains(z, 0.02) || std::abs(z) < 0.05) continue;  // want clear exterior
        ++tested;
        Complex dir = -1.0 / z;  // ray direction of R = -1/z
        for (int k = 1; k <= 400; ++k) {
            double u = k / 400.0;
            Complex w = z + (400.0 * u * u) * dir;
            if (reg.contains(w, -1e-3)) {
                ++violations;
                break;
            }
        }
    }
    CHECK(violations == 0);
}

// ------------------------------------------------------------ spiral oracle

TEST_CASE("oracle_spiral: both arcs start at 1 and cross") {
    Complex lambda(1, 6);
    SpiralOracle so = oracle_spiral(lambda);
    CHECK(std::abs(so.gamma_arc.sampler(0.0) - 1.0) < 1e-12);
    CHECK(std::abs(so.alpha_arc.sampler(0.0) - 1.0) < 1e-12);
    CHECK(so.t_gamma > 0);
    CHECK(so.t_alpha > 0);
    // the two parametrizations meet at the reported intersection
    CHECK(std::abs(so.gamma_arc.sampler(so.t_gamma) - so.intersection) < 1e-6);
    CHECK(std::abs(so.alpha_arc.sampler(so.t_alpha) - so.intersection) < 1e-6);
    CHECK(std::abs(so.intersection) <= 1.0);

    // |gamma| = e^{-Re(lambda) t} strictly decreasing
    double prev = 2.0;
    for (int k = 0; k <= 50; ++k) {
        double r = std::abs(so.gamma_arc.sampler(so.t_gamma * k / 50.0));
        CHECK(r < prev);
        prev = r;
    }
}

TEST_CASE("oracle_spiral rejects degenerate rotation numbers") {
    CHECK_THROWS_AS(oracle_spiral(Complex(-1, 1)), WrongCase);
    CHECK_THROWS_AS(oracle_spiral(Complex(2, 0)), WrongCase);
}

// --------------------------------------------------------- unit-disk oracle

TEST_CASE("oracle_unitdisk: circle points never move inward") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uth(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> ut(0.0, 10.0);
    for (int k = 1; k <= 3; ++k)
        for (int it = 0; it < 500; ++it)
            CHECK(UnitDiskOracle::ray_factor(k, 1.0, uth(rng), ut(rng)) >= 1.0 - 1e-12);
}

TEST_CASE("oracle_unitdisk: explicit exterior point stays exterior") {
    UnitDiskOracle o = oracle_unitdisk(1);
    for (double t : {0.1, 1.0, 10.0}) CHECK(std::abs(o.advance(Complex(1.1, 0), t)) > 1.1);
}

TEST_CASE("oracle_unitdisk: factor formula matches direct evaluation") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> urho(1.0, 3.0), uth(0.0, 2.0 * std::numbers::pi),
        ut(0.0, 10.0);
    int failures = 0;
    for (int k = 1; k <= 2; ++k) {
        UnitDiskOracle o = oracle_unitdisk(k);
        for (int it = 0; it < 5000; ++it) {
            double rho = std::nextafter(urho(rng), 4.0);  // |z| in (1, 3]
            double th = uth(rng), t = std::nextafter(ut(rng), 11.0);
            Complex z = std::polar(rho, th);
            double direct = std::norm(o.advance(z, t)) / std::norm(z);
            double formula = UnitDiskOracle::ray_factor(k, std::pow(rho, k), th, t);
            if (std::abs(direct - formula) > 1e-7 * (1.0 + std::abs(direct))) ++failures;
            if (direct <= 1.0) ++failures;  // exterior invariance itself
        }
    }
    CHECK(failures == 0);
}

TEST_CASE("oracle_unitdisk: first integral has constant imaginary part on the circle") {
    for (int k = 1; k <= 3; ++k) {
        UnitDiskOracle o = oracle_unitdisk(k);
        double period = 2.0 * std::numbers::pi / k;
        for (int j = 1; j < 40; ++j) {
            double th = period * j / 40.0;  // stay inside one period, off the poles
            if (std::abs(th - period / 2.0) < 0.05) continue;
            double im = std::imag(o.first_integral(std::polar(1.0, th)));
            double frac = std::fmod(im - std::numbers::pi / k, period);
            if (frac < -period / 2) frac += period;
            if (frac > period / 2) frac -= period;
            CHECK(std::abs(frac) < 1e-9);
        }
    }
}

// ------------------------------------------------------ strip with a segment

TEST_CASE("oracle_strip_segment: membership triple") {
    for (double y0 : {1.0, 0.4}) {
        StripSegmentRegion reg = oracle_strip_segment(y0);
        CHECK(reg.contains(Complex(0, 0.75 * y0)));
        CHECK(reg.contains(Complex(1, 0.4 * y0)));
        CHECK(!reg.contains(Complex(1, 0.6 * y0)));
    }
    CHECK_THROWS_AS(oracle_strip_segment(0.0), WrongCase);
}

TEST_CASE("strip-segment region: rays from exterior points avoid the region") {
    StripSegmentRegion reg = oracle_strip_segment(1.0);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> ux(-3.0, 3.0), uy(-1.5, 2.0);
    int tested = 0, violations = 0;
    while (tested < 1000) {
        Complex z(ux(rng), uy(rng));
        if (reg.contains(z, 0.02) || std::abs(z) < 0.05) continue;
        ++tested;
        Complex dir = -1.0 / z;
        for (int k = 1; k <= 400; ++k) {
            double u = k / 400.0;
            Complex w = z + (100.0 * u * u) * dir;
            if (reg.contains(w, -1e-3)) {
                ++violations;
                break;
            }
        }
    }
    CHECK(violations == 0);
}
