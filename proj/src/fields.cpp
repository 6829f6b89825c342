#include "charpic/fields.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace charpic {

GridSpec::GridSpec(int nx, int ny, double x_span, double y_span, InsidePredicate inside)
    : nx_(nx), ny_(ny), x_span_(x_span), y_span_(y_span), inside_(std::move(inside)) {
    if (nx < 9 || ny < 9) throw GridMismatch("grid must have at least 9 nodes per axis");
    if (!(x_span > 0.0) || !(y_span > 0.0)) throw GridMismatch("grid spans must be positive");
    hx_ = x_span / (nx - 1);
    hy_ = y_span / (ny - 1);
    mask_.assign(static_cast<std::size_t>(nx) * ny, 0);
    row_lo_.assign(ny, nx);
    row_hi_.assign(ny, -1);
    col_lo_.assign(nx, ny);
    col_hi_.assign(nx, -1);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (inside_(x(i), y(j))) {
                mask_[idx(i, j)] = 1;
                ++masked_count_;
                row_lo_[j] = std::min(row_lo_[j], i);
                row_hi_[j] = std::max(row_hi_[j], i);
                col_lo_[i] = std::min(col_lo_[i], j);
                col_hi_[i] = std::max(col_hi_[i], j);
            }
        }
    }
}

GridSpecPtr GridSpec::for_region(const Region& region, int nx, int ny) {
    // capture only what the predicate needs; Region outlives nothing here
    // because CurvePair is copied into the closure
    CurvePair curves = region.curves();
    double y_A = region.y_A();
    double x_A = region.x_A();
    double y_B = region.y_B();
    auto inside = [curves, y_A, x_A, y_B](double x, double y) {
        const double ex = 1e-12 * x_A;
        const double ey = 1e-12 * y_B;
        if (x < -ex || x > x_A + ex || y < -ey || y > y_B + ey) return false;
        if (y > curves.b(std::clamp(x, 0.0, x_A)) + ey) return false;
        if (y <= y_A + ey && x > curves.a(std::clamp(y, 0.0, y_A)) + ex) return false;
        return true;
    };
    return std::make_shared<GridSpec>(nx, ny, x_A, y_B, inside);
}

GridField::GridField(GridSpecPtr spec, double fill) : spec_(std::move(spec)) {
    values_.assign(spec_->size(), std::numeric_limits<double>::quiet_NaN());
    for (int j = 0; j < spec_->ny(); ++j)
        for (int i = 0; i < spec_->nx(); ++i)
            if (spec_->masked(i, j)) values_[spec_->idx(i, j)] = fill;
}

GridField GridField::sample(GridSpecPtr spec, const std::function<double(double, double)>& g) {
    GridField f(spec);
    for (int j = 0; j < spec->ny(); ++j)
        for (int i = spec->row_lo(j); i <= spec->row_hi(j); ++i)
            if (spec->masked(i, j)) f.at(i, j) = g(spec->x(i), spec->y(j));
    return f;
}

namespace {

double extrapolate_pair(const GridField& f, int i1, int j1, int i2, int j2, double t1, double t2,
                        double t) {
    double v1 = f(i1, j1), v2 = f(i2, j2);
    if (t2 == t1) return v1;
    return v1 + (v2 - v1) * (t - t1) / (t2 - t1);
}

} // namespace

double corner_fill_value(const GridField& field, int i, int j) {
    const GridSpec& s = field.spec();
    if (s.masked(i, j)) return field(i, j);
    // nearest masked nodes along row j
    int lo = s.row_lo(j), hi = s.row_hi(j);
    if (lo <= hi) {
        if (lo == hi) return field(lo, j);
        if (i < lo) return extrapolate_pair(field, lo, j, lo + 1, j, lo, lo + 1, i);
        if (i > hi) return extrapolate_pair(field, hi - 1, j, hi, j, hi - 1, hi, i);
        // contiguous rows: unreachable, but fall through to the column path
    }
    int clo = s.col_lo(i), chi = s.col_hi(i);
    if (clo <= chi) {
        if (clo == chi) return field(i, clo);
        if (j < clo) return extrapolate_pair(field, i, clo, i, clo + 1, clo, clo + 1, j);
        if (j > chi) return extrapolate_pair(field, i, chi - 1, i, chi, chi - 1, chi, j);
    }
    // last resort: nearest masked node in the whole grid (thin-corner cells)
    double best = 0.0;
    long best_d = std::numeric_limits<long>::max();
    for (int jj = 0; jj < s.ny(); ++jj) {
        if (s.row_lo(jj) > s.row_hi(jj)) continue;
        for (int ii : {s.row_lo(jj), s.row_hi(jj)}) {
            long d = static_cast<long>(ii - i) * (ii - i) + static_cast<long>(jj - j) * (jj - j);
            if (d < best_d) {
                best_d = d;
                best = field(ii, jj);
            }
        }
    }
    return best;
}

double interpolate(const GridField& field, Point pt) {
    const GridSpec& s = field.spec();
    const double ex = 1e-10 * s.x_span();
    const double ey = 1e-10 * s.y_span();
    if (pt.x < -ex || pt.x > s.x_span() + ex || pt.y < -ey || pt.y > s.y_span() + ey ||
        !s.inside(std::clamp(pt.x, 0.0, s.x_span()), std::clamp(pt.y, 0.0, s.y_span())))
        throw PointOutsideRegion("interpolation point outside the solution region");

    double gx = std::clamp(pt.x, 0.0, s.x_span()) / s.hx();
    double gy = std::clamp(pt.y, 0.0, s.y_span()) / s.hy();
    int i = std::clamp(static_cast<int>(gx), 0, s.nx() - 2);
    int j = std::clamp(static_cast<int>(gy), 0, s.ny() - 2);
    double tx = gx - i;
    double ty = gy - j;

    double v00 = corner_fill_value(field, i, j);
    double v10 = corner_fill_value(field, i + 1, j);
    double v01 = corner_fill_value(field, i, j + 1);
    double v11 = corner_fill_value(field, i + 1, j + 1);
    return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 + (1 - tx) * ty * v01 + tx * ty * v11;
}

double sup_diff(const GridField& a, const GridField& b) {
    if (a.spec_ptr() != b.spec_ptr()) throw GridMismatch("fields live on different grids");
    const GridSpec& s = a.spec();
    double m = 0.0;
    for (int j = 0; j < s.ny(); ++j)
        for (int i = s.row_lo(j); i <= s.row_hi(j); ++i)
            if (s.masked(i, j)) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

double sup_norm_diff(const FieldTriple& a, const FieldTriple& b) {
    return sup_diff(a.u, b.u) + sup_diff(a.p, b.p) + sup_diff(a.q, b.q);
}

double sup_abs(const GridField& f) {
    const GridSpec& s = f.spec();
    double m = 0.0;
    for (int j = 0; j < s.ny(); ++j)
        for (int i = s.row_lo(j); i <= s.row_hi(j); ++i)
            if (s.masked(i, j)) m = std::max(m, std::abs(f(i, j)));
    return m;
}

FieldTriple derive_gradient_triple(const GridField& u) {
    const GridSpec& s = u.spec();
    FieldTriple t;
    t.u = u;
    t.p = GridField(u.spec_ptr());
    t.q = GridField(u.spec_ptr());
    auto val = [&](int i, int j) { return corner_fill_value(u, i, j); };
    for (int j = 0; j < s.ny(); ++j) {
        for (int i = s.row_lo(j); i <= s.row_hi(j); ++i) {
            if (!s.masked(i, j)) continue;
            bool left = i > 0 && s.masked(i - 1, j);
            bool right = i < s.nx() - 1 && s.masked(i + 1, j);
            if (left && right)
                t.p.at(i, j) = (val(i + 1, j) - val(i - 1, j)) / (2 * s.hx());
            else if (right)
                t.p.at(i, j) = (val(i + 1, j) - u(i, j)) / s.hx();
            else if (left)
                t.p.at(i, j) = (u(i, j) - val(i - 1, j)) / s.hx();
            else
                t.p.at(i, j) = 0.0;
            bool down = j > 0 && s.masked(i, j - 1);
            bool up = j < s.ny() - 1 && s.masked(i, j + 1);
            if (down && up)
                t.q.at(i, j) = (val(i, j + 1) - val(i, j - 1)) / (2 * s.hy());
            else if (up)
                t.q.at(i, j) = (val(i, j + 1) - u(i, j)) / s.hy();
            else if (down)
                t.q.at(i, j) = (u(i, j) - val(i, j - 1)) / s.hy();
            else
                t.q.at(i, j) = 0.0;
        }
    }
    return t;
}

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_csv(const std::string& path, const FieldTriple& t) {
    const GridSpec& s = t.u.spec();
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "x,y,u,p,q\n";
    for (int j = 0; j < s.ny(); ++j) {
        for (int i = s.row_lo(j); i <= s.row_hi(j); ++i) {
            if (!s.masked(i, j)) continue;
            out << format_double(s.x(i)) << ',' << format_double(s.y(j)) << ','
                << format_double(t.u(i, j)) << ',' << format_double(t.p(i, j)) << ','
                << format_double(t.q(i, j)) << '\n';
        }
    }
}

FieldTriple read_csv(const std::string& path, GridSpecPtr spec) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "' for reading");
    FieldTriple t{GridField(spec), GridField(spec), GridField(spec)};
    std::string line;
    if (!std::getline(in, line)) throw Error("empty CSV: " + path);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        double v[5];
        std::string cell;
        for (int k = 0; k < 5; ++k) {
            if (!std::getline(ss, cell, ',')) throw Error("short CSV row in " + path);
            v[k] = std::strtod(cell.c_str(), nullptr);
        }
        int i = static_cast<int>(std::lround(v[0] / spec->hx()));
        int j = static_cast<int>(std::lround(v[1] / spec->hy()));
        if (i < 0 || i >= spec->nx() || j < 0 || j >= spec->ny() || !spec->masked(i, j))
            throw Error("CSV row does not match a masked grid node in " + path);
        if (std::abs(spec->x(i) - v[0]) > 1e-9 * spec->x_span() ||
            std::abs(spec->y(j) - v[1]) > 1e-9 * spec->y_span())
            throw Error("CSV coordinates do not match the configured grid in " + path);
        t.u.at(i, j) = v[2];
        t.p.at(i, j) = v[3];
        t.q.at(i, j) = v[4];
        ++rows;
    }
    if (rows != spec->masked_count())
        throw Error("CSV row count does not match the masked node count in " + path);
    return t;
}

} // namespace charpic
