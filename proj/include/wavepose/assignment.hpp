#ifndef WAVEPOSE_ASSIGNMENT_HPP
#define WAVEPOSE_ASSIGNMENT_HPP

#include <vector>

#include <Eigen/Core>

namespace wavepose {

/// Minimum-total-cost assignment of rows to columns (rows <= cols required).
/// Returns col index per row. O(n^2 m) shortest augmenting path.
std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost);

}  // namespace wavepose

#endif  // WAVEPOSE_ASSIGNMENT_HPP
