#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "minvset/geometry.hpp"

namespace minvset {

enum class CellState : uint8_t { PINNED, IN, OUT };

/// Rectangular cell raster covering a window. Cell (i,j) is the square
/// [origin + (i,j)h, origin + (i+1,j+1)h].
struct Grid {
    Complex origin;
    double h = 0.02;
    int nx = 0, ny = 0;
    std::vector<CellState> state;

    static Grid cover(const Window& win, double h) {
        Grid g;
        g.h = h;
        g.origin = Complex(win.x0, win.y0);
        g.nx = std::max(1, static_cast<int>(std::ceil(win.width() / h)));
        g.ny = std::max(1, static_cast<int>(std::ceil(win.height() / h)));
        g.state.assign(static_cast<size_t>(g.nx) * g.ny, CellState::IN);
        return g;
    }

    size_t idx(int i, int j) const { return static_cast<size_t>(j) * nx + i; }
    bool valid(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }
    CellState at(int i, int j) const { return state[idx(i, j)]; }
    void set(int i, int j, CellState s) { state[idx(i, j)] = s; }

    Complex cell_min(int i, int j) const { return origin + Complex(i * h, j * h); }
    Complex center(int i, int j) const { return origin + Complex((i + 0.5) * h, (j + 0.5) * h); }

    std::optional<std::pair<int, int>> cell_of(Complex z) const {
        int i = static_cast<int>(std::floor((z.real() - origin.real()) / h));
        int j = static_cast<int>(std::floor((z.imag() - origin.imag()) / h));
        if (!valid(i, j)) return std::nullopt;
        return std::make_pair(i, j);
    }

    double dist_to_cell(Complex z, int i, int j) const {
        Complex lo = cell_min(i, j);
        double dx = std::max({lo.real() - z.real(), 0.0, z.real() - lo.real() - h});
        double dy = std::max({lo.imag() - z.imag(), 0.0, z.imag() - lo.imag() - h});
        return std::hypot(dx, dy);
    }

    /// Any kept (IN or PINNED) cell whose square comes within r of z?
    /// Optionally one cell is exempted (the candidate being tested).
    bool kept_within(Complex z, double r, int skip_i = -1, int skip_j = -1) const {
        int reach = static_cast<int>(std::ceil(r / h)) + 1;
        int ci = static_cast<int>(std::floor((z.real() - origin.real()) / h));
        int cj = static_cast<int>(std::floor((z.imag() - origin.imag()) / h));
        for (int j = cj - reach; j <= cj + reach; ++j) {
            for (int i = ci - reach; i <= ci + reach; ++i) {
                if (!valid(i, j)) continue;
                if (i == skip_i && j == skip_j) continue;
                CellState s = at(i, j);
                if (s == CellState::OUT) continue;
                if (dist_to_cell(z, i, j) <= r) return true;
            }
        }
        return false;
    }

    bool pinned_within(Complex z, double r) const {
        int reach = static_cast<int>(std::ceil(r / h)) + 1;
        int ci = static_cast<int>(std::floor((z.real() - origin.real()) / h));
        int cj = static_cast<int>(std::floor((z.imag() - origin.imag()) / h));
        for (int j = cj - reach; j <= cj + reach; ++j)
            for (int i = ci - reach; i <= ci + reach; ++i)
                if (valid(i, j) && at(i, j) == CellState::PINNED && dist_to_cell(z, i, j) <= r)
                    return true;
        return false;
    }

    size_t count(CellState s) const {
        size_t n = 0;
        for (CellState c : state) n += (c == s);
        return n;
    }

    Window window() const {
        return {origin.real(), origin.imag(), origin.real() + nx * h, origin.imag() + ny * h};
    }

    bool is_frame(int i, int j) const { return i == 0 || j == 0 || i == nx - 1 || j == ny - 1; }
};

}  // namespace minvset
