#include "sctrim/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "sctrim/errors.hpp"

namespace sctrim {

const char* to_string(Intervention i) {
    return i == Intervention::main ? "Main Intervention" : "Placebo Intervention";
}

namespace {

void check_split(const Eigen::VectorXd& gaps, int t0) {
    if (t0 < 1 || t0 >= gaps.size()) {
        throw UsageError("t0 = " + std::to_string(t0) + " leaves an empty pre or post window");
    }
}

}  // namespace

double att(const Eigen::VectorXd& gaps, int t0) {
    check_split(gaps, t0);
    return gaps.tail(gaps.size() - t0).mean();
}

double rmse(const Eigen::VectorXd& gaps, Window window, int t0) {
    check_split(gaps, t0);
    const auto seg = window == Window::pre ? gaps.head(t0) : gaps.tail(gaps.size() - t0);
    return std::sqrt(seg.squaredNorm() / static_cast<double>(seg.size()));
}

double post_pre_ratio(double rmse_pre, double rmse_post) {
    if (rmse_pre == 0.0) return std::numeric_limits<double>::infinity();
    return rmse_post / rmse_pre;
}

double post_pre_ratio_sum_squares(const Eigen::VectorXd& gaps, int t0) {
    check_split(gaps, t0);
    const double pre = gaps.head(t0).squaredNorm();
    if (pre == 0.0) return std::numeric_limits<double>::infinity();
    return gaps.tail(gaps.size() - t0).squaredNorm() / pre;
}

std::optional<double> att_percent(const Eigen::VectorXd& gaps, const Eigen::VectorXd& fitted,
                                  int t0) {
    check_split(gaps, t0);
    const Eigen::Index n = gaps.size() - t0;
    const double denom = fitted.tail(n).sum();
    if (denom == 0.0) return std::nullopt;
    return 100.0 * gaps.tail(n).sum() / denom;
}

EstimateReport make_report(const Estimate& est, int t0, Intervention tag,
                           const ReportOptions& opts) {
    const Eigen::VectorXd& gaps = est.series.gaps;
    EstimateReport r;
    r.method = est.method;
    r.intervention = tag;
    r.t0 = t0;
    r.att = att(gaps, t0);
    r.att_per = att_percent(gaps, est.series.fitted, t0);
    r.rmse_pre = rmse(gaps, Window::pre, t0);
    r.rmse_post = rmse(gaps, Window::post, t0);
    r.ratio = opts.ratio == RatioMode::rmse ? post_pre_ratio(r.rmse_pre, r.rmse_post)
                                            : post_pre_ratio_sum_squares(gaps, t0);
    r.ratio_infinite = std::isinf(r.ratio);
    r.estimate = est;
    return r;
}

EstimateReport run_estimate(const PanelMatrix& panel, const TreatmentSpec& spec, Method method,
                            const EstimateConfig& config, const ReportOptions& opts,
                            Intervention tag) {
    return make_report(estimate(panel, spec, method, config), spec.t0, tag, opts);
}

int min_pre_periods(Method method, const EstimateConfig& config) {
    switch (method) {
        case Method::osc: return 2;
        case Method::fspda: return 3;
        case Method::fpca_synth:
            if (config.fpca.basis_size) return std::max(4, *config.fpca.basis_size + 1);
            return std::max(4, min_fpca_periods(config.fpca.degree));
    }
    return 2;
}

EstimateReport placebo_in_time(const PanelMatrix& panel, const TreatmentSpec& spec, Method method,
                               int placebo_t0, const EstimateConfig& config,
                               const ReportOptions& opts) {
    spec.validate(panel);
    if (placebo_t0 >= spec.t0) {
        throw UsageError("placebo t0 (" + std::to_string(placebo_t0) +
                         ") must precede the actual intervention t0 (" + std::to_string(spec.t0) +
                         ")");
    }
    const int minimum = min_pre_periods(method, config);
    if (placebo_t0 < minimum) {
        throw UsageError("placebo t0 (" + std::to_string(placebo_t0) + ") is too short for " +
                         to_string(method) + "; the minimum is " + std::to_string(minimum) +
                         " pre-intervention periods");
    }
    TreatmentSpec placebo{spec.treated_index, placebo_t0};
    return run_estimate(panel, placebo, method, config, opts, Intervention::placebo);
}

}  // namespace sctrim
