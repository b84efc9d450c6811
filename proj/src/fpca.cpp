#include "sctrim/fpca.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sctrim/errors.hpp"

namespace sctrim {

std::vector<double> clamped_uniform_knots(int basis_size, int degree) {
    if (degree < 0 || basis_size < degree + 1) {
        throw UsageError("B-spline basis of size " + std::to_string(basis_size) +
                         " needs at least degree+1 = " + std::to_string(degree + 1) + " functions");
    }
    const int interior = basis_size - degree - 1;
    std::vector<double> knots;
    knots.reserve(basis_size + degree + 1);
    for (int i = 0; i <= degree; ++i) knots.push_back(0.0);
    for (int i = 1; i <= interior; ++i) knots.push_back(static_cast<double>(i) / (interior + 1));
    for (int i = 0; i <= degree; ++i) knots.push_back(1.0);
    return knots;
}

Eigen::VectorXd bspline_eval(const std::vector<double>& knots, int degree, int basis_size,
                             double x) {
    // Span index s with knots[s] <= x < knots[s+1], clamped to the last span.
    int span = basis_size - 1;
    if (x < knots[basis_size]) {
        span = static_cast<int>(std::upper_bound(knots.begin() + degree,
                                                 knots.begin() + basis_size + 1, x) -
                                knots.begin()) - 1;
    }

    std::vector<double> N(degree + 1, 0.0), left(degree + 1), right(degree + 1);
    N[0] = 1.0;
    for (int j = 1; j <= degree; ++j) {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double denom = right[r + 1] + left[j - r];
            const double tmp = denom == 0.0 ? 0.0 : N[r] / denom;
            N[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        N[j] = saved;
    }

    Eigen::VectorXd out = Eigen::VectorXd::Zero(basis_size);
    for (int r = 0; r <= degree; ++r) out(span - degree + r) = N[r];
    return out;
}

Eigen::MatrixXd bspline_basis(int t0, int basis_size, int degree) {
    if (degree < 0) throw UsageError("B-spline degree must be >= 0");
    if (basis_size < degree + 1) {
        throw UsageError("basis_size " + std::to_string(basis_size) + " < degree+1 = " +
                         std::to_string(degree + 1));
    }
    if (t0 <= basis_size) {
        throw UsageError("need more periods (" + std::to_string(t0) + ") than basis functions (" +
                         std::to_string(basis_size) + ")");
    }
    const std::vector<double> knots = clamped_uniform_knots(basis_size, degree);
    Eigen::MatrixXd B(t0, basis_size);
    for (int i = 0; i < t0; ++i) {
        const double x = static_cast<double>(i) / (t0 - 1);
        B.row(i) = bspline_eval(knots, degree, basis_size, x).transpose();
    }
    return B;
}

int default_basis_size(int t0, int degree) {
    return std::max(std::min(t0 / 2, 15), degree + 1);
}

int min_fpca_periods(int degree) {
    // default_basis_size is degree+1 for short series; t0 must exceed it.
    return degree + 2;
}

Eigen::MatrixXd spline_coefficients(const Eigen::MatrixXd& curves, const Eigen::MatrixXd& basis) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
    return qr.solve(curves.transpose()).transpose();
}

FpcaScores fpca_scores(const Eigen::MatrixXd& pre_curves, const FpcaOptions& opts) {
    const int n = static_cast<int>(pre_curves.rows());
    const int t0 = static_cast<int>(pre_curves.cols());
    if (n < 3) throw UsageError("fpca needs at least 3 curves, got " + std::to_string(n));
    if (t0 < 4) throw UsageError("fpca needs at least 4 periods, got " + std::to_string(t0));
    if (!(opts.variance_target > 0.0 && opts.variance_target <= 1.0)) {
        throw UsageError("variance_target must lie in (0, 1]");
    }
    const int basis_size = opts.basis_size.value_or(default_basis_size(t0, opts.degree));
    if (t0 <= basis_size) {
        throw UsageError("fpca with a " + std::to_string(basis_size) +
                         "-function basis needs at least " + std::to_string(basis_size + 1) +
                         " pre-intervention periods, got " + std::to_string(t0));
    }

    const Eigen::MatrixXd B = bspline_basis(t0, basis_size, opts.degree);
    Eigen::MatrixXd C = spline_coefficients(pre_curves, B);
    C.rowwise() -= C.colwise().mean();
    const Eigen::MatrixXd cov = C.transpose() * C / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    // Eigen returns ascending eigenvalues; reverse to descending.
    const Eigen::VectorXd evals = eig.eigenvalues().reverse();
    const Eigen::MatrixXd evecs = eig.eigenvectors().rowwise().reverse();
    const double total = evals.cwiseMax(0.0).sum();

    FpcaScores out;
    out.basis_size = basis_size;
    const double scale = std::max(1.0, cov.diagonal().cwiseAbs().maxCoeff());
    if (!(total > 1e-14 * scale) || evals(0) <= 0.0) {
        out.degenerate = true;
        out.K = 1;
        out.scores = Eigen::MatrixXd::Zero(n, 1);
        out.explained = Eigen::VectorXd::Zero(1);
        return out;
    }

    int positive = 0;
    while (positive < evals.size() && evals(positive) > 1e-14 * evals(0)) ++positive;
    int K = 0;
    double cum = 0.0;
    while (K < positive) {
        cum += evals(K) / total;
        ++K;
        if (cum >= opts.variance_target - 1e-12) break;
    }
    out.K = K;
    out.explained = evals.head(K) / total;
    out.scores = C * evecs.leftCols(K);
    return out;
}

}  // namespace sctrim
