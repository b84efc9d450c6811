#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace sctrim {

/// Best rank-k approximation U_k S_k V_k^T. Throws UsageError unless
/// 1 <= k <= min(rows, cols).
Eigen::MatrixXd svd_truncate(const Eigen::MatrixXd& Y, int k);

/// sign(x) * max(|x| - tau, 0).
double soft_threshold(double x, double tau);

/// Elementwise soft threshold.
Eigen::MatrixXd soft_threshold(const Eigen::MatrixXd& X, double tau);

/// Proximal operator of tau * nuclear norm: shrinks every singular value by
/// tau.
Eigen::MatrixXd singular_value_threshold(const Eigen::MatrixXd& Y, double tau);

struct RpcaOptions {
    std::optional<double> lambda;  // default 1 / sqrt(max(rows, cols))
    double tol = 1e-7;
    int max_iter = 1000;
};

/// Y = L + S split from principal component pursuit.
struct LowRankDecomposition {
    Eigen::MatrixXd L;
    Eigen::MatrixXd S;
    double lambda = 0.0;
    int iterations = 0;
    bool converged = false;
    double residual = 0.0;  // ||Y - L - S||_F / ||Y||_F at exit

    /// ||L_k||_* + lambda ||S_k||_1 after each iteration.
    std::vector<double> objective_path;
    /// mu ||S_k - S_{k-1}||_F^2 + ||Z_k - Z_{k-1}||_F^2 / mu for dual Z. ADMM
    /// guarantees this sequence is non-increasing; the objective itself may
    /// oscillate while the iterates are infeasible.
    std::vector<double> step_path;
};

/// min ||L||_* + lambda ||S||_1 s.t. Y = L + S, by ADMM on the augmented
/// Lagrangian with penalty mu = rows*cols / (4 ||Y||_1) held fixed.
/// Non-convergence is reported through `converged`, never thrown.
LowRankDecomposition rpca(const Eigen::MatrixXd& Y, const RpcaOptions& opts = {});

/// ||L||_* + lambda ||S||_1.
double rpca_objective(const Eigen::MatrixXd& L, const Eigen::MatrixXd& S, double lambda);

}  // namespace sctrim
