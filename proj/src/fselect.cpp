#include "sctrim/fselect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sctrim/errors.hpp"
#include "sctrim/kernels.hpp"
#include "sctrim/linalg.hpp"

namespace sctrim {

double r_squared(const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
    if (X.rows() != y.size()) throw UsageError("r_squared: X and y row counts differ");
    const InterceptFit fit = fit_with_intercept(y, X);
    if (!fit.full_rank) return -std::numeric_limits<double>::infinity();
    return r2_from_ssr(y, fit.ssr);
}

int mbic_stop(ForwardPath& path, int n_units, int penalty_len) {
    if (path.sigma2_path.empty()) throw UsageError("mbic_stop: empty forward path");
    if (penalty_len < 2) throw UsageError("mbic_stop: penalty length must be >= 2");
    if (n_units < 2) throw UsageError("mbic_stop: need at least 2 units");
    const double per_donor = std::log(std::log(static_cast<double>(n_units))) *
                             std::log(static_cast<double>(penalty_len)) / penalty_len;
    path.mbic_path.clear();
    int best = 1;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t r = 1; r <= path.sigma2_path.size(); ++r) {
        const double s2 = std::max(path.sigma2_path[r - 1], 1e-12);
        const double value = std::log(s2) + per_donor * static_cast<double>(r);
        path.mbic_path.push_back(value);
        if (value < best_value) {
            best_value = value;
            best = static_cast<int>(r);
        }
    }
    return best;
}

ForwardPath forward_select(const Eigen::VectorXd& treated_pre, const Eigen::MatrixXd& donor_pre,
                           const ForwardOptions& opts) {
    const int t0 = static_cast<int>(donor_pre.rows());
    const int J = static_cast<int>(donor_pre.cols());
    if (treated_pre.size() != t0) throw UsageError("forward_select: length mismatch");
    if (J < 1) throw UsageError("forward_select: no donors");
    if (t0 < 3) throw UsageError("forward_select: need at least 3 pre-intervention periods");
    const int cap = std::min(t0 - 2, J);
    const int r_max = opts.r_max < 0 ? cap : opts.r_max;
    if (r_max < 1 || r_max > cap) {
        throw UsageError("forward_select: r_max = " + std::to_string(r_max) +
                         " must lie in [1, min(T0-2, J) = " + std::to_string(cap) + "]");
    }

    ForwardPath path;
    std::vector<int> remaining(J);
    for (int j = 0; j < J; ++j) remaining[j] = j;

    for (int round = 0; round < r_max; ++round) {
        const std::vector<double> scores =
            kernels::candidate_r2(treated_pre, donor_pre, path.order, remaining);
        int best = -1;
        for (std::size_t c = 0; c < remaining.size(); ++c) {
            if (!std::isfinite(scores[c])) continue;
            if (best < 0 || scores[c] > scores[best]) best = static_cast<int>(c);
        }
        if (best < 0) break;  // every remaining candidate is collinear

        path.order.push_back(remaining[best]);
        remaining.erase(remaining.begin() + best);

        Eigen::MatrixXd X(t0, path.order.size());
        for (std::size_t s = 0; s < path.order.size(); ++s) X.col(s) = donor_pre.col(path.order[s]);
        const InterceptFit fit = fit_with_intercept(treated_pre, X);
        path.r2_path.push_back(r2_from_ssr(treated_pre, fit.ssr));
        path.sigma2_path.push_back(fit.ssr / t0);
    }
    if (path.order.empty()) throw NumericalError("forward_select: no donor admits a regression");

    const int n_units = opts.n_units < 0 ? J + 1 : opts.n_units;
    int penalty_len = t0;
    if (opts.penalty == PenaltyLength::post) {
        if (opts.post_len < 2) throw UsageError("forward_select: post-period penalty needs post_len >= 2");
        penalty_len = opts.post_len;
    }
    path.chosen_r = mbic_stop(path, n_units, penalty_len);
    return path;
}

}  // namespace sctrim
