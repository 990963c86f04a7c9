#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace minvset {

using Complex = std::complex<double>;

constexpr double kCoeffCutoff = 1e-13;

/// Dense complex polynomial, coefficients ascending by degree.
/// The zero polynomial is the empty coefficient sequence.
class Polynomial {
public:
    Polynomial() = default;
    Polynomial(std::initializer_list<Complex> cs) : coeffs_(cs) { normalize(); }
    explicit Polynomial(std::vector<Complex> cs) : coeffs_(std::move(cs)) { normalize(); }

    static Polynomial constant(Complex c) { return Polynomial{c}; }
    static Polynomial identity() { return Polynomial{Complex(0), Complex(1)}; }

    static Polynomial from_roots(const std::vector<Complex>& roots, Complex lead = Complex(1)) {
        Polynomial p{lead};
        for (const Complex& r : roots) p = p * Polynomial{-r, Complex(1)};
        return p;
    }

    bool is_zero() const { return coeffs_.empty(); }
    int degree() const { return coeffs_.empty() ? -1 : static_cast<int>(coeffs_.size()) - 1; }

    Complex coeff(int k) const {
        if (k < 0 || k >= static_cast<int>(coeffs_.size())) return Complex(0);
        return coeffs_[static_cast<size_t>(k)];
    }
    Complex lead() const { return coeffs_.empty() ? Complex(0) : coeffs_.back(); }
    const std::vector<Complex>& coeffs() const { return coeffs_; }

    /// Max coefficient modulus; scale reference for tolerances.
    double norm_inf() const {
        double m = 0.0;
        for (const Complex& c : coeffs_) m = std::max(m, std::abs(c));
        return m;
    }

    Complex eval(Complex z) const {
        Complex acc(0);
        for (size_t i = coeffs_.size(); i-- > 0;) acc = acc * z + coeffs_[i];
        return acc;
    }

    Polynomial derivative() const {
        if (coeffs_.size() <= 1) return Polynomial{};
        std::vector<Complex> d(coeffs_.size() - 1);
        for (size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = double(k) * coeffs_[k];
        return Polynomial(std::move(d));
    }

    /// Synthetic division by (z - a); remainder discarded (use only at known roots
    /// or when the remainder is irrelevant).
    Polynomial deflate(Complex a) const {
        if (coeffs_.size() <= 1) return Polynomial{};
        std::vector<Complex> q(coeffs_.size() - 1);
        Complex carry = coeffs_.back();
        for (size_t i = coeffs_.size() - 1; i-- > 0;) {
            q[i] = carry;
            carry = coeffs_[i] + carry * a;
        }
        return Polynomial(std::move(q));
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        std::vector<Complex> c(std::max(a.coeffs_.size(), b.coeffs_.size()), Complex(0));
        for (size_t i = 0; i < a.coeffs_.size(); ++i) c[i] += a.coeffs_[i];
        for (size_t i = 0; i < b.coeffs_.size(); ++i) c[i] += b.coeffs_[i];
        return Polynomial(std::move(c));
    }
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
        return a + (b * Complex(-1));
    }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.is_zero() || b.is_zero()) return Polynomial{};
        std::vector<Complex> c(a.coeffs_.size() + b.coeffs_.size() - 1, Complex(0));
        for (size_t i = 0; i < a.coeffs_.size(); ++i)
            for (size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
        return Polynomial(std::move(c));
    }
    friend Polynomial operator*(const Polynomial& a, Complex s) {
        std::vector<Complex> c = a.coeffs_;
        for (Complex& x : c) x *= s;
        return Polynomial(std::move(c));
    }
    friend Polynomial operator*(Complex s, const Polynomial& a) { return a * s; }

    /// Euclidean division: *this = q*div + r with deg r < deg div.
    std::pair<Polynomial, Polynomial> divmod(const Polynomial& div) const {
        if (div.is_zero()) throw std::invalid_argument("division by zero polynomial");
        std::vector<Complex> rem = coeffs_;
        int dd = div.degree();
        int dr = degree();
        if (dr < dd) return {Polynomial{}, *this};
        std::vector<Complex> q(static_cast<size_t>(dr - dd) + 1, Complex(0));
        for (int k = dr; k >= dd; --k) {
            Complex f = rem[static_cast<size_t>(k)] / div.lead();
            q[static_cast<size_t>(k - dd)] = f;
            for (int j = 0; j <= dd; ++j)
                rem[static_cast<size_t>(k - dd + j)] -= f * div.coeff(j);
        }
        rem.resize(static_cast<size_t>(dd));
        return {Polynomial(std::move(q)), Polynomial(std::move(rem))};
    }

private:
    void normalize() {
        double scale = 0.0;
        for (const Complex& c : coeffs_) scale = std::max(scale, std::abs(c));
        double cut = scale * kCoeffCutoff;
        while (!coeffs_.empty() && std::abs(coeffs_.back()) <= cut) coeffs_.pop_back();
        if (scale == 0.0) coeffs_.clear();
    }

    std::vector<Complex> coeffs_;
};

}  // namespace minvset
