#include "sctrim/lowrank.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include "sctrim/errors.hpp"

namespace sctrim {

namespace {

using Svd = Eigen::BDCSVD<Eigen::MatrixXd>;

Svd thin_svd(const Eigen::MatrixXd& Y) {
    return Svd(Y, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

double nuclear_norm(const Eigen::MatrixXd& X) {
    if (X.size() == 0) return 0.0;
    return Svd(X).singularValues().sum();
}

}  // namespace

Eigen::MatrixXd svd_truncate(const Eigen::MatrixXd& Y, int k) {
    const int max_rank = static_cast<int>(std::min(Y.rows(), Y.cols()));
    if (k < 1 || k > max_rank) {
        throw UsageError("svd_truncate: rank " + std::to_string(k) + " outside [1, " +
                         std::to_string(max_rank) + "]");
    }
    const Svd svd = thin_svd(Y);
    return svd.matrixU().leftCols(k) * svd.singularValues().head(k).asDiagonal() *
           svd.matrixV().leftCols(k).transpose();
}

double soft_threshold(double x, double tau) {
    if (x > tau) return x - tau;
    if (x < -tau) return x + tau;
    return 0.0;
}

Eigen::MatrixXd soft_threshold(const Eigen::MatrixXd& X, double tau) {
    return X.unaryExpr([tau](double v) { return soft_threshold(v, tau); });
}

Eigen::MatrixXd singular_value_threshold(const Eigen::MatrixXd& Y, double tau) {
    if (Y.size() == 0) return Y;
    const Svd svd = thin_svd(Y);
    const Eigen::VectorXd s = svd.singularValues().unaryExpr(
        [tau](double v) { return std::max(v - tau, 0.0); });
    return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

double rpca_objective(const Eigen::MatrixXd& L, const Eigen::MatrixXd& S, double lambda) {
    return nuclear_norm(L) + lambda * S.cwiseAbs().sum();
}

LowRankDecomposition rpca(const Eigen::MatrixXd& Y, const RpcaOptions& opts) {
    if (!Y.allFinite()) throw DataError("rpca: input matrix has non-finite entries");
    if (opts.tol <= 0.0) throw UsageError("rpca: tol must be positive");
    if (opts.max_iter < 1) throw UsageError("rpca: max_iter must be >= 1");

    const double m = static_cast<double>(Y.rows());
    const double n = static_cast<double>(Y.cols());
    LowRankDecomposition out;
    out.lambda = opts.lambda.value_or(1.0 / std::sqrt(std::max(m, n)));
    if (!(out.lambda > 0.0)) throw UsageError("rpca: lambda must be positive");
    out.L = Eigen::MatrixXd::Zero(Y.rows(), Y.cols());
    out.S = Eigen::MatrixXd::Zero(Y.rows(), Y.cols());

    const double norm_l1 = Y.cwiseAbs().sum();
    const double norm_fro = Y.norm();
    if (norm_l1 == 0.0) {
        out.converged = true;
        return out;
    }

    const double mu = m * n / (4.0 * norm_l1);
    const double inv_mu = 1.0 / mu;
    Eigen::MatrixXd dual = Eigen::MatrixXd::Zero(Y.rows(), Y.cols());
    Eigen::MatrixXd prev_S = out.S;

    for (int it = 1; it <= opts.max_iter; ++it) {
        const Svd svd = thin_svd(Y - out.S + inv_mu * dual);
        const Eigen::VectorXd sv = svd.singularValues().unaryExpr(
            [inv_mu](double v) { return std::max(v - inv_mu, 0.0); });
        out.L = svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
        out.S = soft_threshold(Y - out.L + inv_mu * dual, out.lambda * inv_mu);

        const Eigen::MatrixXd gap = Y - out.L - out.S;
        dual += mu * gap;
        out.iterations = it;
        out.residual = gap.norm() / norm_fro;
        // sv already holds the singular values of L.
        out.objective_path.push_back(sv.sum() + out.lambda * out.S.cwiseAbs().sum());
        const double step = mu * (out.S - prev_S).squaredNorm() + mu * gap.squaredNorm();
        assert(out.step_path.empty() || step <= out.step_path.back() * (1.0 + 1e-9) ||
               step <= 1e-24 * out.step_path.front());
        out.step_path.push_back(step);
        prev_S = out.S;
        if (out.residual <= opts.tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

}  // namespace sctrim
