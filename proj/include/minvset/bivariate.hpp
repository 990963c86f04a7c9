#pragma once

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "minvset/polynomial.hpp"

namespace minvset {

/// Real bivariate polynomial sum c_ij x^i y^j, sparse term list.
class BivariatePoly {
public:
    BivariatePoly() = default;

    void add(int i, int j, double c) {
        if (c == 0.0) return;
        map_[{i, j}] += c;
    }

    void compress(double cutoff = 0.0) {
        terms_.clear();
        double scale = 0.0;
        for (const auto& [ij, c] : map_) scale = std::max(scale, std::abs(c));
        for (const auto& [ij, c] : map_)
            if (std::abs(c) > cutoff * scale) terms_.push_back({ij.first, ij.second, c});
    }

    double eval(double x, double y) const {
        double acc = 0.0;
        for (const Term& t : terms_) acc += t.c * ipow(x, t.i) * ipow(y, t.j);
        return acc;
    }

    int total_degree() const {
        int d = -1;
        for (const Term& t : terms_) d = std::max(d, t.i + t.j);
        return d;
    }

    bool is_zero() const { return terms_.empty(); }

    struct Term {
        int i, j;
        double c;
    };
    const std::vector<Term>& terms() const { return terms_; }

private:
    static double ipow(double x, int n) {
        double r = 1.0;
        for (int k = 0; k < n; ++k) r *= x;
        return r;
    }

    std::map<std::pair<int, int>, double> map_;
    std::vector<Term> terms_;
};

namespace detail {

/// Expand p(x+iy) into real bivariate real/imag parts via binomial expansion.
inline void expand_real_imag(const Polynomial& p, BivariatePoly& re, BivariatePoly& im) {
    int n = p.degree();
    if (n < 0) return;
    // Pascal triangle up to n
    std::vector<std::vector<double>> binom(static_cast<size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        binom[static_cast<size_t>(k)].assign(static_cast<size_t>(k) + 1, 1.0);
        for (int j = 1; j < k; ++j)
            binom[static_cast<size_t>(k)][static_cast<size_t>(j)] =
                binom[static_cast<size_t>(k - 1)][static_cast<size_t>(j - 1)] +
                binom[static_cast<size_t>(k - 1)][static_cast<size_t>(j)];
    }
    for (int k = 0; k <= n; ++k) {
        Complex ck = p.coeff(k);
        if (std::abs(ck) == 0.0) continue;
        for (int j = 0; j <= k; ++j) {
            // term: ck * C(k,j) x^{k-j} (iy)^j
            double b = binom[static_cast<size_t>(k)][static_cast<size_t>(j)];
            Complex ij = (j % 4 == 0)   ? Complex(1, 0)
                         : (j % 4 == 1) ? Complex(0, 1)
                         : (j % 4 == 2) ? Complex(-1, 0)
                                        : Complex(0, -1);
            Complex w = ck * b * ij;
            re.add(k - j, j, w.real());
            im.add(k - j, j, w.imag());
        }
    }
}

}  // namespace detail

/// G(x,y) = Im( A(x+iy) * conj(B(x+iy)) ) = Im(A)Re(B) - Re(A)Im(B).
inline BivariatePoly im_conj_product(const Polynomial& A, const Polynomial& B) {
    BivariatePoly ra, ia, rb, ib;
    detail::expand_real_imag(A, ra, ia);
    detail::expand_real_imag(B, rb, ib);
    ra.compress();
    ia.compress();
    rb.compress();
    ib.compress();
    BivariatePoly g;
    for (const auto& s : ia.terms())
        for (const auto& t : rb.terms()) g.add(s.i + t.i, s.j + t.j, s.c * t.c);
    for (const auto& s : ra.terms())
        for (const auto& t : ib.terms()) g.add(s.i + t.i, s.j + t.j, -s.c * t.c);
    g.compress(1e-14);
    return g;
}

}  // namespace minvset
