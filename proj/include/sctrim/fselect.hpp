#pragma once

#include <vector>

#include <Eigen/Dense>

namespace sctrim {

/// R^2 of the least-squares fit of y on [1, X]; -infinity when [1, X] is
/// rank deficient.
double r_squared(const Eigen::VectorXd& y, const Eigen::MatrixXd& X);

/// Which sample length enters the modified-BIC penalty log(n)/n.
enum class PenaltyLength {
    pre,   // estimation sample (number of pre-intervention periods)
    post,  // post-intervention length, as the criterion is printed
};

struct ForwardPath {
    std::vector<int> order;         // donor columns in selection order
    std::vector<double> r2_path;    // R^2 after each addition
    std::vector<double> sigma2_path;  // residual variance SSR / T0 after each addition
    std::vector<double> mbic_path;  // criterion value at each r
    int chosen_r = 0;

    /// The first chosen_r donors.
    std::vector<int> chosen() const {
        return {order.begin(), order.begin() + chosen_r};
    }
};

/// Modified BIC stopping rule:
///   argmin_r log(max(sigma2_r, 1e-12)) + log(log(n_units)) * r * log(len) / len
/// returned as a 1-based count. Also fills path.mbic_path.
int mbic_stop(ForwardPath& path, int n_units, int penalty_len);

struct ForwardOptions {
    int r_max = -1;         // -1: min(T0 - 2, J)
    int n_units = -1;       // -1: J + 1
    PenaltyLength penalty = PenaltyLength::pre;
    int post_len = 0;       // required when penalty == post
};

/// Greedy forward selection: each round adds the donor whose inclusion gives
/// the largest joint R^2 (intercept always included), ties to the smaller
/// column index. Donors are never removed. chosen_r comes from mbic_stop.
ForwardPath forward_select(const Eigen::VectorXd& treated_pre, const Eigen::MatrixXd& donor_pre,
                           const ForwardOptions& opts = {});

}  // namespace sctrim
