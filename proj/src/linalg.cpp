#include "sctrim/linalg.hpp"

namespace sctrim {

InterceptFit fit_with_intercept(const Eigen::Ref<const Eigen::VectorXd>& y,
                                const Eigen::Ref<const Eigen::MatrixXd>& X, double rank_tol) {
    const Eigen::Index n = y.size();
    Eigen::MatrixXd A(n, X.cols() + 1);
    A.col(0).setOnes();
    A.rightCols(X.cols()) = X;

    InterceptFit fit;
    if (A.cols() > n) return fit;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(rank_tol);
    if (qr.rank() < A.cols()) return fit;

    const Eigen::VectorXd beta = qr.solve(y);
    fit.full_rank = true;
    fit.intercept = beta(0);
    fit.coef = beta.tail(X.cols());
    fit.residual = y - A * beta;
    fit.ssr = fit.residual.squaredNorm();
    return fit;
}

double r2_from_ssr(const Eigen::Ref<const Eigen::VectorXd>& y, double ssr) {
    const double sst = (y.array() - y.mean()).square().sum();
    if (sst <= 0.0) return ssr <= 1e-24 ? 1.0 : 0.0;
    return 1.0 - ssr / sst;
}

}  // namespace sctrim
