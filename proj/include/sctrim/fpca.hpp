#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace sctrim {

/// Clamped knot vector with equally spaced interior knots on [0, 1]:
/// degree+1 zeros, basis_size-degree-1 interior knots, degree+1 ones.
std::vector<double> clamped_uniform_knots(int basis_size, int degree);

/// Values of all basis_size B-spline basis functions at x in [0, 1]
/// (de Boor's triangular scheme). x == 1 belongs to the last span.
Eigen::VectorXd bspline_eval(const std::vector<double>& knots, int degree, int basis_size,
                             double x);

/// Basis evaluated at t0 equally spaced points 0, 1/(t0-1), ..., 1.
/// Requires basis_size >= degree+1 and t0 > basis_size. Rows sum to one.
Eigen::MatrixXd bspline_basis(int t0, int basis_size, int degree = 3);

/// min(floor(t0/2), 15), raised to degree+1 when that is smaller.
int default_basis_size(int t0, int degree = 3);

/// Smallest t0 for which the default basis is feasible.
int min_fpca_periods(int degree = 3);

struct FpcaOptions {
    std::optional<int> basis_size;  // default_basis_size(t0) when empty
    int degree = 3;
    double variance_target = 0.95;
};

struct FpcaScores {
    Eigen::MatrixXd scores;    // units x K
    Eigen::VectorXd explained; // K variance fractions, non-increasing
    int basis_size = 0;
    int K = 0;
    bool degenerate = false;   // every curve identical after smoothing
};

/// Smooths each curve onto the B-spline basis by least squares, centers the
/// coefficients across units, and projects them on the leading eigenvectors
/// of their covariance. K is the smallest count whose cumulative explained
/// variance reaches the target.
FpcaScores fpca_scores(const Eigen::MatrixXd& pre_curves, const FpcaOptions& opts = {});

/// Least-squares spline coefficients (units x basis_size) of each row.
Eigen::MatrixXd spline_coefficients(const Eigen::MatrixXd& curves, const Eigen::MatrixXd& basis);

}  // namespace sctrim
