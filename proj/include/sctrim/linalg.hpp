#pragma once

#include <Eigen/Dense>

namespace sctrim {

/// Least-squares fit of y on [1, X].
struct InterceptFit {
    bool full_rank = false;
    double intercept = 0.0;
    Eigen::VectorXd coef;      // one per column of X
    Eigen::VectorXd residual;  // y - fitted
    double ssr = 0.0;
};

/// Column-pivoted QR solve. `full_rank` is false when [1, X] is rank
/// deficient at relative tolerance `rank_tol`; coefficients are then left
/// empty.
InterceptFit fit_with_intercept(const Eigen::Ref<const Eigen::VectorXd>& y,
                                const Eigen::Ref<const Eigen::MatrixXd>& X,
                                double rank_tol = 1e-10);

/// Coefficient of determination for a residual sum of squares against y.
/// A constant y yields 1 when the fit is exact and 0 otherwise.
double r2_from_ssr(const Eigen::Ref<const Eigen::VectorXd>& y, double ssr);

}  // namespace sctrim
