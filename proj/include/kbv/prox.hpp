#pragma once

// Proximal maps used by the primal-dual solvers. All norms carry the cell-area
// weight h^2 (the discrete L^p norms of grid.hpp), and the proximal distance is
// the matching weighted L^2 distance.

#include <span>

namespace kbv::prox {

/// In place: x <- argmin_z  weight * ||z||_p^q + 1/2 ||z - x||_2^2,
/// for (p, q) in {1, 2}^2. Norms are weighted by cell_area.
///   (1,1) soft threshold, (2,2) quadratic shrink,
///   (2,1) block shrink, (1,2) sorted water-filling.
void fidelity(std::span<double> x, int p, int q, double weight, double cell_area);

/// In place: clip pointwise magnitudes |(x_k, y_k)| at the level rho solving
/// sum_k (|(x_k, y_k)| - rho)_+ = budget. This is the prox of
/// (budget * h^2) * max_k |(x_k, y_k)| under the h^2-weighted distance.
/// Returns rho; everything is zeroed (rho = 0) when the magnitudes sum to at most budget.
double clip_to_budget(std::span<double> x, std::span<double> y, double budget);

/// In place: project each (x_k, y_k) onto the closed unit disk.
void project_unit_ball(std::span<double> x, std::span<double> y);

}  // namespace kbv::prox
