#pragma once

#include <optional>

#include <Eigen/Dense>

#include "sctrim/estimators.hpp"

namespace sctrim {

enum class Window { pre, post };
enum class Intervention { main, placebo };

const char* to_string(Intervention i);  // "Main Intervention" / "Placebo Intervention"

/// Mean post-period gap.
double att(const Eigen::VectorXd& gaps, int t0);

/// Root mean squared gap over the chosen window.
double rmse(const Eigen::VectorXd& gaps, Window window, int t0);

/// rmse_post / rmse_pre; +infinity when rmse_pre is zero.
double post_pre_ratio(double rmse_pre, double rmse_post);

/// Sum of squared post gaps over sum of squared pre gaps (the criterion as
/// printed rather than as tabulated); +infinity when the pre sum is zero.
double post_pre_ratio_sum_squares(const Eigen::VectorXd& gaps, int t0);

/// 100 * sum(post gaps) / sum(post fitted); empty when the denominator is 0.
std::optional<double> att_percent(const Eigen::VectorXd& gaps, const Eigen::VectorXd& fitted,
                                  int t0);

enum class RatioMode { rmse, sum_squares };

struct ReportOptions {
    RatioMode ratio = RatioMode::rmse;
};

struct EstimateReport {
    Method method = Method::osc;
    Intervention intervention = Intervention::main;
    int t0 = 0;
    double att = 0.0;
    std::optional<double> att_per;
    double rmse_pre = 0.0;
    double rmse_post = 0.0;
    double ratio = 0.0;
    bool ratio_infinite = false;
    Estimate estimate;
};

/// Scores an estimate against its treatment spec.
EstimateReport make_report(const Estimate& est, int t0, Intervention tag,
                           const ReportOptions& opts = {});

/// estimate() followed by make_report().
EstimateReport run_estimate(const PanelMatrix& panel, const TreatmentSpec& spec, Method method,
                            const EstimateConfig& config = {}, const ReportOptions& opts = {},
                            Intervention tag = Intervention::main);

/// Smallest pre-period count a method can be estimated with under `config`.
int min_pre_periods(Method method, const EstimateConfig& config);

/// Full re-estimation with the intervention moved back to placebo_t0 (the
/// post window becomes placebo_t0+1..T). Requires placebo_t0 < spec.t0.
EstimateReport placebo_in_time(const PanelMatrix& panel, const TreatmentSpec& spec, Method method,
                               int placebo_t0, const EstimateConfig& config = {},
                               const ReportOptions& opts = {});

}  // namespace sctrim
