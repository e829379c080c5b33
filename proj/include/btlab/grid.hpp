#pragma once

#include <Eigen/Core>

#include "btlab/errors.hpp"

namespace btlab {

using Eigen::ArrayXd;
using Eigen::Index;

// Uniform 1-D spatial grid: x(i) = x0 + i*dx for 0 <= i < n.
struct Grid1D {
    double x0 = 0.0;
    double dx = 1.0;
    Index n = 2;

    double x(Index i) const { return x0 + static_cast<double>(i) * dx; }
    double x_end() const { return x(n - 1); }
    ArrayXd xs() const {
        return x0 + dx * ArrayXd::LinSpaced(n, 0.0, static_cast<double>(n - 1));
    }
    bool operator==(const Grid1D& o) const {
        return x0 == o.x0 && dx == o.dx && n == o.n;
    }
};

Grid1D make_grid(double x0, double dx, Index n);

// Real-valued samples on a Grid1D.
struct Field {
    Grid1D grid;
    ArrayXd samples;
};

Field make_field(const Grid1D& grid, ArrayXd samples);
Field zero_field(const Grid1D& grid);

// Contiguous lattice sites j0, j0+1, ..., j0+n-1.
struct LatticeWindow {
    long j0 = 0;
    Index n = 2;

    long j_end() const { return j0 + static_cast<long>(n) - 1; }
    // Offset of absolute site j inside the value array.
    Index offset(long j) const { return static_cast<Index>(j - j0); }
    bool operator==(const LatticeWindow& o) const { return j0 == o.j0 && n == o.n; }
};

LatticeWindow make_window(long j0, Index n);

// Real-valued sequence on a LatticeWindow.
struct Seq {
    LatticeWindow window;
    ArrayXd values;
};

Seq make_seq(const LatticeWindow& window, ArrayXd values);
Seq zero_seq(const LatticeWindow& window);

// Norms and discrete calculus. Quadrature is the composite trapezoid rule;
// derivatives use centered stencils in the interior (widest available per
// point, up to sixth order) and 2-point one-sided differences at the ends.
double l2_norm(const Field& f);
double h1_norm(const Field& f);
Field diff_x(const Field& f);
double l2_seq(const Seq& s);
double sup_norm(const Field& f);
double sup_norm(const Seq& s);

// Plain trapezoid integral of the samples.
double trapezoid(const Field& f);

// Cumulative integral anchored at index `anchor` (value 0 there), built from
// high-order composite cells (up to 6-point) so that exponentially
// accumulated quantities keep near round-off relative accuracy.
ArrayXd cumulative_integral(const ArrayXd& f, double dx, Index anchor);

// Values interpolated at cell midpoints (length n-1), 4-point stencils in
// the interior, 3-point one-sided at the two boundary cells.
ArrayXd cell_midpoints(const ArrayXd& f);

} // namespace btlab
