#ifndef CHARPIC_SWEEP_HPP
#define CHARPIC_SWEEP_HPP

#include <functional>
#include <vector>

#include "charpic/boundary_data.hpp"
#include "charpic/fields.hpp"
#include "charpic/geometry.hpp"
#include "charpic/quadrature.hpp"

namespace charpic {

// Integrand of one Picard sweep: nodal values on the masked grid plus an
// evaluator for off-grid points (partial boundary cells, curve points).
struct IntegrandView {
    std::function<double(int, int)> node;
    std::function<double(double, double)> at;

    static IntegrandView of_field(const GridField& f);
    static IntegrandView of_xy(const GridSpec& spec,
                               const std::function<double(double, double)>& g);
    // f(x, y, u, p, q) evaluated on a field triple (interpolated off-grid).
    static IntegrandView of_rhs(const RhsFunction& f, const FieldTriple& v);
};

// Per-sweep integral transforms of an integrand g over the Case II region,
// computed with the composite trapezoid rule on grid-aligned nodes plus
// partial cells against the curved boundary:
//
//   column_to_curve(i,j) = int_{y_j}^{b(x_i)} g(x_i, eta) deta
//   strip_tau(i,j)       = int_{x_i}^{a(y_j)} int_{y_j}^{b(xi)} g deta dxi
//   strip_T(i,j)         = int_{x_i}^{x_A}    int_{y_j}^{b(xi)} g deta dxi
//   row_to_M(i,j)        = int_{x_i}^{a(y_j)} g(xi, y_j) dxi
//   row_to_AB(i,j)       = int_{x_i}^{x_A}    g(xi, y_j) dxi
//   edge_column(j)       = int_{y_j}^{b(a(y_j))} g(a(y_j), eta) deta
//
// strip_tau / row_to_M / edge_column are available on rows with y_j <= y_A,
// strip_T / row_to_AB on rows with y_j >= y_A (within boundary tolerance).
class SweepIntegrals {
public:
    SweepIntegrals(const Region& region, const GridSpec& spec, const IntegrandView& g,
                   const QuadratureRule& rule);

    double column_to_curve(int i, int j) const { return H_[spec_->idx(i, j)]; }
    double strip_tau(int i, int j) const { return Dtau_[spec_->idx(i, j)]; }
    double strip_T(int i, int j) const { return DT_[spec_->idx(i, j)]; }
    double row_to_M(int i, int j) const { return Rtau_[spec_->idx(i, j)]; }
    double row_to_AB(int i, int j) const { return RT_[spec_->idx(i, j)]; }
    double edge_column(int j) const { return E_[j]; }

    bool row_is_oac(int j) const { return row_oac_[j]; }
    bool row_is_abc(int j) const { return row_abc_[j]; }

private:
    const GridSpec* spec_;
    std::vector<double> H_, Dtau_, DT_, Rtau_, RT_, E_;
    std::vector<char> row_oac_, row_abc_;
};

// Cumulative integrals of the u_x-data psi along grid rows.
class PsiIntegrals {
public:
    PsiIntegrals(const Region& region, const GridSpec& spec, const ScalarFunction& psi);

    // int_{x_i}^{x_A} psi (row independent)
    double to_AB(int i) const { return to_right_[i]; }
    // int_{x_i}^{a(y_j)} psi (rows with y_j <= y_A)
    double to_M(int i, int j) const {
        return to_right_[i] - to_right_[row_K_[j]] + row_partial_[j];
    }

private:
    std::vector<double> to_right_;
    std::vector<int> row_K_;
    std::vector<double> row_partial_;
};

} // namespace charpic

#endif
