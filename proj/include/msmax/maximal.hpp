#pragma once

// Multilinear fractional maximal operators on a grid. For a rectangle R the
// averaged quantity is
//
//   A(R) = prod_i |R|^{alpha/(mn) - 1} * integral_R |f_i|,
//
// and each operator returns, per cell, the maximum of A(R) over the rectangles
// of its family that contain the cell.
//
// The all-rectangle operators cost O(prod_j N_j^2) value evaluations with
// O(prod_{j>0} N_j^2) scratch memory (N_j cells per axis); the dyadic ones cost
// O(N * prod_j (L_j + 1)).

#include <span>
#include <vector>

#include "msmax/grid.hpp"
#include "msmax/profile.hpp"

namespace msmax::maximal {

GridFunction strong_maximal_dyadic(std::span<const GridFunction> fs, const ExponentProfile& prof);

GridFunction strong_maximal(std::span<const GridFunction> fs, const ExponentProfile& prof);

/// Rectangles with every continuum side length <= 2^k.
GridFunction strong_maximal_truncated(std::span<const GridFunction> fs, const ExponentProfile& prof,
                                      int k);

/// Average over `shifts` of tau_{-t} M^d tau_t (f), shifts in whole cells.
///
/// The dyadic system is that of a padded canvas four boxes wide per axis with
/// the box at offset two boxes, so no mass leaves the canvas for any
/// |t_j| <= N_j and shift 0 reproduces strong_maximal_dyadic. Every shift must
/// also lie in B_k = [-2^{k+2}, 2^{k+2}]^n.
GridFunction shift_averaged_dyadic(std::span<const GridFunction> fs, const ExponentProfile& prof,
                                   int k, std::span<const Index> shifts);

/// Every integer cell shift in B_k intersected with the grid extent.
std::vector<Index> shift_lattice(const GridShape& shape, int k);

/// 2^{n+1} * 4^{mn - alpha}: the factor relating the truncated operator to the
/// shift average.
double domination_constant(const ExponentProfile& prof);

/// Cubes only (equal continuum side lengths).
GridFunction cube_maximal(std::span<const GridFunction> fs, const ExponentProfile& prof);

/// Dyadic cubes of level >= coarsest_level.
GridFunction cube_maximal_dyadic(std::span<const GridFunction> fs, const ExponentProfile& prof,
                                 int coarsest_level = 0);

struct Witness {
  double value = 0.0;
  GridRectangle rect;
};

/// Value and maximizing rectangle at one cell; ties go to the first rectangle
/// in enumeration order.
Witness maximal_witness(std::span<const GridFunction> fs, const ExponentProfile& prof,
                        RectFamily family, bool cubes_only, const Index& cell);

/// A(R) for a single rectangle.
double rectangle_average(std::span<const GridFunction> fs, const ExponentProfile& prof,
                         const GridRectangle& r);

/// ||g||_{L^{q,infty}(nu)} for piecewise-constant g: the maximum over the
/// distinct values v of g of v * nu({g >= v})^{1/q}.
double weak_norm_estimate(const GridFunction& g, const GridFunction& nu, double q);

/// integral |g|^q nu.
double weighted_lq_power(const GridFunction& g, const GridFunction& nu, double q);

}  // namespace msmax::maximal
