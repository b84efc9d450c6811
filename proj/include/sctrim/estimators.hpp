#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sctrim/cluster.hpp"
#include "sctrim/fpca.hpp"
#include "sctrim/fselect.hpp"
#include "sctrim/lowrank.hpp"
#include "sctrim/panel.hpp"

namespace sctrim {

enum class WeightRegime { simplex, nonneg, unconstrained };

/// Donor weights, aligned with the DonorSelection they were fitted on.
struct WeightVector {
    Eigen::VectorXd weights;
    WeightRegime regime = WeightRegime::simplex;
    std::optional<double> intercept;  // OLS only
    double objective = 0.0;           // pre-period sum of squared residuals
    int iterations = 0;
};

const char* to_string(WeightRegime r);

/// Observed minus fitted over the full horizon.
struct CounterfactualSeries {
    Eigen::VectorXd observed;
    Eigen::VectorXd fitted;
    Eigen::VectorXd gaps;
};

/// Euclidean projection onto the probability simplex.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

/// min ||y - X w||^2 over the probability simplex. Projected gradient with
/// momentum restarts, stopped when the improvement falls below 1e-12 or after
/// 10 000 iterations, then an exact equality-constrained solve on the
/// detected support whenever that solve is feasible and no worse.
WeightVector fit_simplex(const Eigen::VectorXd& treated_pre, const Eigen::MatrixXd& donor_pre);

/// min ||y - L w||^2 subject to w >= 0 (Lawson-Hanson active set).
WeightVector fit_nonneg(const Eigen::VectorXd& treated_pre, const Eigen::MatrixXd& L_pre);

/// Unconstrained least squares with intercept. Throws NumericalError when
/// [1, X] is rank deficient.
WeightVector fit_ols(const Eigen::VectorXd& treated_pre, const Eigen::MatrixXd& donor_pre);

enum class Method { osc, fpca_synth, fspda };

const char* to_string(Method m);
/// Parses "osc", "fpca_synth" or "fspda"; throws UsageError otherwise.
Method parse_method(const std::string& name);

struct EstimateConfig {
    RpcaOptions rpca;
    FpcaOptions fpca;
    ClusterTrimOptions cluster;
    int fselect_r_max = -1;
    PenaltyLength fselect_penalty = PenaltyLength::pre;
};

struct Estimate {
    Method method = Method::osc;
    DonorSelection donors = DonorSelection::full(0, 2);
    WeightVector weights;
    CounterfactualSeries series;
    std::map<std::string, double> diagnostics;
    std::map<std::string, std::vector<double>> paths;
};

/// Applies fitted weights (plus intercept) to observed donor outcomes over
/// every period.
CounterfactualSeries assemble_counterfactual(const PanelMatrix& panel, const TreatmentSpec& spec,
                                             const DonorSelection& donors,
                                             const WeightVector& weights);

/// osc: full pool, simplex weights on raw outcomes.
/// fpca_synth: fPCA scores -> cluster trim -> RPCA of the trimmed donors'
///   pre-period matrix -> nonnegative weights on its low-rank part.
/// fspda: forward selection with modified-BIC stop -> OLS with intercept.
Estimate estimate(const PanelMatrix& panel, const TreatmentSpec& spec, Method method,
                  const EstimateConfig& config = {});

}  // namespace sctrim
