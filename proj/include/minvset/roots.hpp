#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "minvset/polynomial.hpp"

namespace minvset {

struct Root {
    Complex z;
    int multiplicity = 1;
};

struct RootSet {
    std::vector<Root> roots;

    int total_multiplicity() const {
        int s = 0;
        for (const Root& r : roots) s += r.multiplicity;
        return s;
    }
};

struct NonConvergence : std::runtime_error {
    NonConvergence() : std::runtime_error("root finder did not converge") {}
};

namespace detail {

/// Agglomerative single-linkage clustering. Two clusters of sizes m1, m2 fuse
/// when their closest points are within 10*tol^(1/(m1+m2)); a multiplicity-m
/// root perturbed at machine level scatters its copies over a radius ~eps^(1/m).
inline RootSet cluster_roots(std::vector<Complex> pts, double tol) {
    std::vector<std::vector<Complex>> clusters;
    for (const Complex& p : pts) clusters.push_back({p});
    for (;;) {
        double best = 1e300;
        size_t bi = 0, bj = 0;
        for (size_t i = 0; i < clusters.size(); ++i)
            for (size_t j = i + 1; j < clusters.size(); ++j)
                for (const Complex& a : clusters[i])
                    for (const Complex& b : clusters[j]) {
                        double d = std::abs(a - b);
                        if (d < best) { best = d; bi = i; bj = j; }
                    }
        if (clusters.size() < 2) break;
        int m = static_cast<int>(clusters[bi].size() + clusters[bj].size());
        double thresh = 10.0 * std::pow(tol, 1.0 / m);
        if (best > thresh) break;
        clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
        clusters.erase(clusters.begin() + static_cast<long>(bj));
    }
    RootSet rs;
    for (const auto& cl : clusters) {
        Complex c(0);
        for (const Complex& p : cl) c += p;
        c /= double(cl.size());
        rs.roots.push_back({c, static_cast<int>(cl.size())});
    }
    // canonical order: by real part, then imaginary
    std::sort(rs.roots.begin(), rs.roots.end(), [](const Root& a, const Root& b) {
        if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
        return a.z.imag() < b.z.imag();
    });
    return rs;
}

}  // namespace detail

/// Aberth-Ehrlich simultaneous iteration. Residual target |p(r)| <= tol*||p||.
inline RootSet roots(const Polynomial& p, double tol = 1e-12) {
    int n = p.degree();
    if (n < 1) throw std::invalid_argument("roots: degree must be >= 1");
    const int kMaxIter = 200;

    double radius = 0.0;
    for (int k = 0; k < n; ++k) radius = std::max(radius, std::abs(p.coeff(k) / p.lead()));
    radius = 1.0 + radius;

    std::vector<Complex> z(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        double th = 2.0 * std::numbers::pi * k / n + 0.4;  // detuned from axes
        z[static_cast<size_t>(k)] = radius * Complex(std::cos(th), std::sin(th));
    }

    Polynomial dp = p.derivative();
    double scale = p.norm_inf();
    bool done = false;
    for (int it = 0; it < kMaxIter && !done; ++it) {
        done = true;
        for (int i = 0; i < n; ++i) {
            Complex zi = z[static_cast<size_t>(i)];
            Complex pv = p.eval(zi);
            if (std::abs(pv) <= tol * scale) continue;
            Complex dv = dp.eval(zi);
            Complex newton = (std::abs(dv) > 0) ? pv / dv : Complex(tol, tol);
            Complex sum(0);
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                Complex diff = zi - z[static_cast<size_t>(j)];
                if (std::abs(diff) < 1e-300) diff = Complex(1e-12, 1e-12);
                sum += Complex(1) / diff;
            }
            Complex denom = Complex(1) - newton * sum;
            Complex step = (std::abs(denom) > 1e-300) ? newton / denom : newton;
            z[static_cast<size_t>(i)] = zi - step;
            if (std::abs(step) > tol * (1.0 + std::abs(zi))) done = false;
        }
    }

    for (const Complex& r : z)
        if (std::abs(p.eval(r)) > std::sqrt(tol) * scale) throw NonConvergence{};

    return detail::cluster_roots(z, tol);
}

}  // namespace minvset
