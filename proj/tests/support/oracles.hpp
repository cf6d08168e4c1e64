#pragma once

#include "elfarol/world.hpp"

namespace elfarol::testing {

// Independent check of signed_boundary_distance: minimum Euclidean distance
// from pos to any cell on the other side of the bar boundary, negated inside.
double brute_force_signed_distance(Position pos, const GridConfig& grid);

// Independent two-sided p oracle for the t distribution: direct numerical
// integration of the density (geometric segmentation + adaptive Simpson),
// written before the incomplete-beta implementation it cross-checks.
double t_two_sided_p_by_integration(double t, double df);

}  // namespace elfarol::testing
