#include "btlab/grid.hpp"

#include <algorithm>
#include <cmath>

namespace btlab {

Grid1D make_grid(double x0, double dx, Index n) {
    if (!(dx > 0.0) || !std::isfinite(dx) || !std::isfinite(x0))
        throw InvalidValue("grid spacing must be positive and finite");
    if (n < 2) throw InvalidValue("grid needs at least 2 samples");
    return Grid1D{x0, dx, n};
}

Field make_field(const Grid1D& grid, ArrayXd samples) {
    if (samples.size() != grid.n)
        throw GridMismatch("sample count does not match grid");
    if (!samples.allFinite())
        throw InvalidValue("field contains non-finite samples");
    return Field{grid, std::move(samples)};
}

Field zero_field(const Grid1D& grid) {
    return Field{grid, ArrayXd::Zero(grid.n)};
}

LatticeWindow make_window(long j0, Index n) {
    if (n < 2) throw InvalidValue("lattice window needs at least 2 sites");
    return LatticeWindow{j0, n};
}

Seq make_seq(const LatticeWindow& window, ArrayXd values) {
    if (values.size() != window.n)
        throw WindowMismatch("value count does not match window");
    if (!values.allFinite())
        throw InvalidValue("sequence contains non-finite values");
    return Seq{window, std::move(values)};
}

Seq zero_seq(const LatticeWindow& window) {
    return Seq{window, ArrayXd::Zero(window.n)};
}

double trapezoid(const Field& f) {
    const ArrayXd& s = f.samples;
    const Index n = s.size();
    double sum = 0.5 * (s[0] + s[n - 1]);
    if (n > 2) sum += s.segment(1, n - 2).sum();
    return sum * f.grid.dx;
}

double l2_norm(const Field& f) {
    Field sq{f.grid, f.samples.square()};
    return std::sqrt(std::max(0.0, trapezoid(sq)));
}

double h1_norm(const Field& f) {
    const double a = l2_norm(f);
    const double b = l2_norm(diff_x(f));
    return std::sqrt(a * a + b * b);
}

Field diff_x(const Field& f) {
    const Index n = f.grid.n;
    if (n < 3) throw GridTooSmall("diff_x needs at least 3 samples");
    const ArrayXd& s = f.samples;
    const double inv = 1.0 / f.grid.dx;
    ArrayXd d(n);
    d[0] = (s[1] - s[0]) * inv;
    d[n - 1] = (s[n - 1] - s[n - 2]) * inv;
    for (Index i = 1; i + 1 < n; ++i) {
        const Index m = std::min(i, n - 1 - i);
        if (m >= 3) {
            d[i] = (45.0 * (s[i + 1] - s[i - 1]) - 9.0 * (s[i + 2] - s[i - 2]) +
                    (s[i + 3] - s[i - 3])) *
                   (inv / 60.0);
        } else if (m == 2) {
            d[i] = (8.0 * (s[i + 1] - s[i - 1]) - (s[i + 2] - s[i - 2])) *
                   (inv / 12.0);
        } else {
            d[i] = 0.5 * (s[i + 1] - s[i - 1]) * inv;
        }
    }
    return Field{f.grid, std::move(d)};
}

double l2_seq(const Seq& s) { return std::sqrt(s.values.square().sum()); }

double sup_norm(const Field& f) {
    return f.samples.size() == 0 ? 0.0 : f.samples.abs().maxCoeff();
}

double sup_norm(const Seq& s) {
    return s.values.size() == 0 ? 0.0 : s.values.abs().maxCoeff();
}

ArrayXd cumulative_integral(const ArrayXd& f, double dx, Index anchor) {
    const Index n = f.size();
    if (anchor < 0 || anchor >= n) throw InvalidValue("anchor out of range");
    // Integral over one cell [x_i, x_{i+1}] from the widest interpolatory
    // stencil the neighbourhood allows.
    const auto cell = [&](Index i) {
        if (i - 2 >= 0 && i + 3 < n)
            return dx *
                   (11.0 * f[i - 2] - 93.0 * f[i - 1] + 802.0 * f[i] +
                    802.0 * f[i + 1] - 93.0 * f[i + 2] + 11.0 * f[i + 3]) /
                   1440.0;
        if (i - 1 >= 0 && i + 2 < n)
            return dx *
                   (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2]) /
                   24.0;
        if (i == 0 && n >= 4)
            return dx * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]) / 24.0;
        if (i == n - 2 && n >= 4)
            return dx *
                   (f[n - 4] - 5.0 * f[n - 3] + 19.0 * f[n - 2] +
                    9.0 * f[n - 1]) /
                   24.0;
        return 0.5 * dx * (f[i] + f[i + 1]);
    };
    ArrayXd out(n);
    out[anchor] = 0.0;
    for (Index i = anchor; i + 1 < n; ++i) out[i + 1] = out[i] + cell(i);
    for (Index i = anchor; i > 0; --i) out[i - 1] = out[i] - cell(i - 1);
    return out;
}

ArrayXd cell_midpoints(const ArrayXd& f) {
    const Index n = f.size();
    if (n < 2) throw InvalidValue("need at least one cell");
    ArrayXd mid(n - 1);
    for (Index i = 0; i + 1 < n; ++i) {
        if (i >= 2 && i + 3 < n) {
            mid[i] = (3.0 * f[i - 2] - 25.0 * f[i - 1] + 150.0 * f[i] +
                      150.0 * f[i + 1] - 25.0 * f[i + 2] + 3.0 * f[i + 3]) /
                     256.0;
        } else if (i >= 1 && i + 2 < n) {
            mid[i] = (-f[i - 1] + 9.0 * f[i] + 9.0 * f[i + 1] - f[i + 2]) / 16.0;
        } else if (i == 0 && n >= 3) {
            mid[i] = (3.0 * f[0] + 6.0 * f[1] - f[2]) / 8.0;
        } else if (i + 2 == n && n >= 3) {
            mid[i] = (3.0 * f[n - 1] + 6.0 * f[n - 2] - f[n - 3]) / 8.0;
        } else {
            mid[i] = 0.5 * (f[i] + f[i + 1]);
        }
    }
    return mid;
}

} // namespace btlab
