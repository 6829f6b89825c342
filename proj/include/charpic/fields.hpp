#ifndef CHARPIC_FIELDS_HPP
#define CHARPIC_FIELDS_HPP

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "charpic/errors.hpp"
#include "charpic/geometry.hpp"

namespace charpic {

// Structured grid over [0, x_span] x [0, y_span] with a mask selecting the
// nodes inside the solution region. Mask rows and columns are contiguous for
// the regions handled here, which the sweep kernels rely on.
class GridSpec {
public:
    using InsidePredicate = std::function<bool(double, double)>;

    GridSpec(int nx, int ny, double x_span, double y_span, InsidePredicate inside);

    static std::shared_ptr<const GridSpec> for_region(const Region& region, int nx, int ny);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double hx() const { return hx_; }
    double hy() const { return hy_; }
    double x_span() const { return x_span_; }
    double y_span() const { return y_span_; }

    double x(int i) const { return x_span_ * i / (nx_ - 1); }
    double y(int j) const { return y_span_ * j / (ny_ - 1); }

    bool masked(int i, int j) const { return mask_[idx(i, j)]; }
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
    std::size_t size() const { return mask_.size(); }
    std::size_t masked_count() const { return masked_count_; }

    // Inclusive masked index range of row j / column i; lo > hi means empty.
    int row_lo(int j) const { return row_lo_[j]; }
    int row_hi(int j) const { return row_hi_[j]; }
    int col_lo(int i) const { return col_lo_[i]; }
    int col_hi(int i) const { return col_hi_[i]; }

    bool inside(double x, double y) const { return inside_(x, y); }

private:
    int nx_, ny_;
    double x_span_, y_span_, hx_, hy_;
    std::vector<char> mask_;
    std::vector<int> row_lo_, row_hi_, col_lo_, col_hi_;
    std::size_t masked_count_ = 0;
    InsidePredicate inside_;
};

using GridSpecPtr = std::shared_ptr<const GridSpec>;

// Scalar field on the masked nodes of a GridSpec. Unmasked nodes carry NaN.
class GridField {
public:
    GridField() = default;
    explicit GridField(GridSpecPtr spec, double fill = 0.0);

    static GridField sample(GridSpecPtr spec, const std::function<double(double, double)>& g);

    const GridSpec& spec() const { return *spec_; }
    const GridSpecPtr& spec_ptr() const { return spec_; }

    double operator()(int i, int j) const { return values_[spec_->idx(i, j)]; }
    double& at(int i, int j) { return values_[spec_->idx(i, j)]; }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    bool valid() const { return spec_ != nullptr; }

private:
    GridSpecPtr spec_;
    std::vector<double> values_;
};

struct FieldTriple {
    GridField u, p, q;
};

// Bilinear interpolation. Unmasked corner nodes of the enclosing cell are
// filled by linear extrapolation from the two nearest masked nodes of their
// row (column and global fallbacks cover degenerate rows near the origin).
double interpolate(const GridField& field, Point pt);

// Value an unmasked corner contributes to bilinear stencils.
double corner_fill_value(const GridField& field, int i, int j);

// max |a-b| over masked nodes; GridMismatch if the specs differ.
double sup_diff(const GridField& a, const GridField& b);

// ||a-b|| = sup|u_a-u_b| + sup|p_a-p_b| + sup|q_a-q_b| over masked nodes.
double sup_norm_diff(const FieldTriple& a, const FieldTriple& b);

double sup_abs(const GridField& f);

// Centered finite differences of u on masked nodes (one-sided at the masked
// boundary); used to derive p, q columns for exports of u-only solves.
FieldTriple derive_gradient_triple(const GridField& u);

// CSV with header x,y,u,p,q; one row per masked node, row-major in y then x.
// Numbers are written in shortest round-trip form.
void write_csv(const std::string& path, const FieldTriple& t);
FieldTriple read_csv(const std::string& path, GridSpecPtr spec);

std::string format_double(double v);

} // namespace charpic

#endif
