#pragma once

// Data-parallel inner loops. Each kernel has a serial reference version and
// an OpenMP version that must produce bit-identical output: every parallel
// loop writes independent slots and all reductions happen serially
// afterwards, in index order.

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace sctrim::kernels {

/// True when the library was compiled with OpenMP.
bool openmp_enabled();
int max_threads();

/// Nearest-center assignment for k-means. `labels` holds the current
/// assignment on entry (or -1) and the new one on exit; a point keeps its
/// current label when that center ties for nearest, otherwise the smallest
/// center index wins. Returns the within-cluster sum of squares.
double assign_serial(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
                     std::vector<int>& labels);
double assign_parallel(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
                       std::vector<int>& labels);

/// Symmetric Euclidean distance matrix between rows of `points`.
Eigen::MatrixXd pairwise_distances_serial(const Eigen::MatrixXd& points);
Eigen::MatrixXd pairwise_distances_parallel(const Eigen::MatrixXd& points);

/// R^2 of y on [1, selected columns, candidate] for every candidate column of
/// `donors`. Rank-deficient candidate sets score -infinity.
std::vector<double> candidate_r2_serial(const Eigen::VectorXd& y, const Eigen::MatrixXd& donors,
                                        const std::vector<int>& selected,
                                        const std::vector<int>& candidates);
std::vector<double> candidate_r2_parallel(const Eigen::VectorXd& y,
                                          const Eigen::MatrixXd& donors,
                                          const std::vector<int>& selected,
                                          const std::vector<int>& candidates);

/// Fills the symmetric n x n matrix K(i, j) = entry(i, j) from its lower
/// triangle.
using EntryFn = std::function<double(int, int)>;
Eigen::MatrixXd symmetric_fill_serial(int n, const EntryFn& entry);
Eigen::MatrixXd symmetric_fill_parallel(int n, const EntryFn& entry);

// Dispatchers used by the library: parallel when OpenMP is available.
double assign(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
              std::vector<int>& labels);
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points);
std::vector<double> candidate_r2(const Eigen::VectorXd& y, const Eigen::MatrixXd& donors,
                                 const std::vector<int>& selected,
                                 const std::vector<int>& candidates);
Eigen::MatrixXd symmetric_fill(int n, const EntryFn& entry);

}  // namespace sctrim::kernels
