#include "sctrim/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sctrim/errors.hpp"
#include "sctrim/linalg.hpp"

namespace sctrim {

const char* to_string(WeightRegime r) {
    switch (r) {
        case WeightRegime::simplex: return "simplex";
        case WeightRegime::nonneg: return "nonneg";
        case WeightRegime::unconstrained: return "unconstrained";
    }
    return "unknown";
}

const char* to_string(Method m) {
    switch (m) {
        case Method::osc: return "osc";
        case Method::fpca_synth: return "fpca_synth";
        case Method::fspda: return "fspda";
    }
    return "unknown";
}

Method parse_method(const std::string& name) {
    if (name == "osc") return Method::osc;
    if (name == "fpca_synth") return Method::fpca_synth;
    if (name == "fspda") return Method::fspda;
    throw UsageError("unknown method '" + name + "' (expected osc, fpca_synth or fspda)");
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
    const Eigen::Index n = v.size();
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0;
    double theta = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        cum += u[i];
        const double t = (cum - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) theta = t;
    }
    return (v.array() - theta).cwiseMax(0.0);
}

namespace {

constexpr int kSimplexMaxIter = 10000;
constexpr double kSimplexMinImprovement = 1e-12;

double sse(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const Eigen::VectorXd& w) {
    return (y - X * w).squaredNorm();
}

// Exact minimizer of ||y - X_S w||^2 s.t. sum(w) = 1 on the support S, via
// the KKT system. Empty when the system is singular.
std::optional<Eigen::VectorXd> simplex_polish(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                              const std::vector<int>& support) {
    const int s = static_cast<int>(support.size());
    Eigen::MatrixXd Xs(X.rows(), s);
    for (int i = 0; i < s; ++i) Xs.col(i) = X.col(support[i]);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(s + 1, s + 1);
    K.topLeftCorner(s, s) = 2.0 * Xs.transpose() * Xs;
    K.block(0, s, s, 1).setOnes();
    K.block(s, 0, 1, s).setOnes();
    Eigen::VectorXd rhs(s + 1);
    rhs.head(s) = 2.0 * Xs.transpose() * y;
    rhs(s) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (!lu.isInvertible()) return std::nullopt;
    const Eigen::VectorXd sol = lu.solve(rhs);
    if ((sol.head(s).array() < 0.0).any()) return std::nullopt;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(X.cols());
    for (int i = 0; i < s; ++i) w(support[i]) = sol(i);
    return w;
}

}  // namespace

WeightVector fit_simplex(const Eigen::VectorXd& treated_pre, const Eigen::MatrixXd& donor_pre) {
    const Eigen::Index J = donor_pre.cols();
    if (J < 1) throw UsageError("fit_simplex: no donors");
    if (donor_pre.rows() != treated_pre.size()) throw UsageError("fit_simplex: length mismatch");
    if (donor_pre.rows() < 2) throw UsageError("fit_simplex: need at least 2 pre-periods");

    WeightVector out;
    out.regime = WeightRegime::simplex;
    if (J == 1) {
        out.weights = Eigen::VectorXd::Ones(1);
        out.objective = sse(treated_pre, donor_pre, out.weights);
        return out;
    }

    const Eigen::MatrixXd gram = donor_pre.transpose() * donor_pre;
    const Eigen::VectorXd xty = donor_pre.transpose() * treated_pre;
    const double lipschitz =
        2.0 * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram, Eigen::EigenvaluesOnly)
                  .eigenvalues()
                  .maxCoeff();
    const double step = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

    Eigen::VectorXd w = Eigen::VectorXd::Constant(J, 1.0 / static_cast<double>(J));
    Eigen::VectorXd z = w;
    double f = sse(treated_pre, donor_pre, w);
    double momentum = 1.0;
    int it = 0;
    while (it < kSimplexMaxIter) {
        ++it;
        const Eigen::VectorXd grad = 2.0 * (gram * z - xty);
        const Eigen::VectorXd w_next = project_to_simplex(z - step * grad);
        const double f_next = sse(treated_pre, donor_pre, w_next);
        if (f_next > f) {
            // Momentum overshot: restart from the best point.
            if (momentum == 1.0) break;
            momentum = 1.0;
            z = w;
            continue;
        }
        const double improvement = f - f_next;
        const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        z = w_next + ((momentum - 1.0) / momentum_next) * (w_next - w);
        momentum = momentum_next;
        w = w_next;
        f = f_next;
        if (improvement < kSimplexMinImprovement) break;
    }

    std::vector<int> support;
    for (Eigen::Index j = 0; j < J; ++j) {
        if (w(j) > 1e-10) support.push_back(static_cast<int>(j));
    }
    if (auto polished = simplex_polish(treated_pre, donor_pre, support)) {
        const double fp = sse(treated_pre, donor_pre, *polished);
        if (fp <= f) {
            w = *polished;
            f = fp;
        }
    }
    w = w.cwiseMax(0.0);
    w /= w.sum();
    out.weights = w;
    out.objective = sse(treated_pre, donor_pre, w);
    out.iterations = it;
    return out;
}

WeightVector fit_nonneg(const Eigen::VectorXd& treated_pre, const Eigen::MatrixXd& L_pre) {
    const Eigen::Index T = L_pre.rows();
    const Eigen::Index J = L_pre.cols();
    if (J < 1) throw UsageError("fit_nonneg: no donors");
    if (T != treated_pre.size()) throw UsageError("fit_nonneg: length mismatch");

    const Eigen::VectorXd& b = treated_pre;
    const Eigen::MatrixXd& A = L_pre;
    const double tol = 1e-12 * std::max(1.0, A.norm() * b.norm());

    Eigen::VectorXd x = Eigen::VectorXd::Zero(J);
    std::vector<char> passive(J, 0);
    std::vector<char> blocked(J, 0);

    auto passive_solve = [&](Eigen::VectorXd& s) {
        std::vector<int> idx;
        for (Eigen::Index j = 0; j < J; ++j) {
            if (passive[j]) idx.push_back(static_cast<int>(j));
        }
        Eigen::MatrixXd Ap(T, idx.size());
        for (std::size_t c = 0; c < idx.size(); ++c) Ap.col(c) = A.col(idx[c]);
        const Eigen::VectorXd sp = Ap.colPivHouseholderQr().solve(b);
        s.setZero(J);
        for (std::size_t c = 0; c < idx.size(); ++c) s(idx[c]) = sp(c);
    };

    const int max_outer = static_cast<int>(3 * J + 30);
    int outer = 0;
    Eigen::VectorXd s(J);
    for (; outer < max_outer; ++outer) {
        const Eigen::VectorXd grad = A.transpose() * (b - A * x);
        Eigen::Index enter = -1;
        double best = tol;
        for (Eigen::Index j = 0; j < J; ++j) {
            if (!passive[j] && !blocked[j] && grad(j) > best) {
                best = grad(j);
                enter = j;
            }
        }
        if (enter < 0) break;
        passive[enter] = 1;

        bool first = true;
        for (int inner = 0; inner < 3 * J + 30; ++inner) {
            passive_solve(s);
            if (first && s(enter) <= 0.0) {
                // Entering column adds nothing numerically; skip it this round.
                passive[enter] = 0;
                blocked[enter] = 1;
                break;
            }
            first = false;
            bool all_positive = true;
            for (Eigen::Index j = 0; j < J; ++j) {
                if (passive[j] && s(j) <= 0.0) all_positive = false;
            }
            if (all_positive) {
                x = s;
                std::fill(blocked.begin(), blocked.end(), 0);
                break;
            }
            double alpha = 1.0;
            for (Eigen::Index j = 0; j < J; ++j) {
                if (passive[j] && s(j) <= 0.0) alpha = std::min(alpha, x(j) / (x(j) - s(j)));
            }
            x += alpha * (s - x);
            for (Eigen::Index j = 0; j < J; ++j) {
                if (passive[j] && x(j) <= 1e-15 * std::max(1.0, x.cwiseAbs().maxCoeff())) {
                    passive[j] = 0;
                    x(j) = 0.0;
                }
            }
            std::fill(blocked.begin(), blocked.end(), 0);
        }
    }

    WeightVector out;
    out.regime = WeightRegime::nonneg;
    out.weights = x.cwiseMax(0.0);
    out.objective = (b - A * out.weights).squaredNorm();
    out.iterations = outer;
    return out;
}

WeightVector fit_ols(const Eigen::VectorXd& treated_pre, const Eigen::MatrixXd& donor_pre) {
    if (donor_pre.rows() != treated_pre.size()) throw UsageError("fit_ols: length mismatch");
    const InterceptFit fit = fit_with_intercept(treated_pre, donor_pre);
    if (!fit.full_rank) {
        throw NumericalError("fit_ols: donors plus intercept are rank deficient (" +
                             std::to_string(donor_pre.cols()) + " donors, " +
                             std::to_string(donor_pre.rows()) +
                             " pre-periods); shrink the donor set");
    }
    WeightVector out;
    out.regime = WeightRegime::unconstrained;
    out.weights = fit.coef;
    out.intercept = fit.intercept;
    out.objective = fit.ssr;
    return out;
}

CounterfactualSeries assemble_counterfactual(const PanelMatrix& panel, const TreatmentSpec& spec,
                                             const DonorSelection& donors,
                                             const WeightVector& weights) {
    const auto& idx = donors.indices();
    if (static_cast<Eigen::Index>(idx.size()) != weights.weights.size()) {
        throw UsageError("weights and donor selection differ in length");
    }
    const auto& Y = panel.values();
    CounterfactualSeries s;
    s.observed = Y.row(spec.treated_index).transpose();
    s.fitted = Eigen::VectorXd::Constant(panel.n_periods(), weights.intercept.value_or(0.0));
    for (std::size_t c = 0; c < idx.size(); ++c) {
        s.fitted += weights.weights(c) * Y.row(idx[c]).transpose();
    }
    s.gaps = s.observed - s.fitted;
    return s;
}

namespace {

Eigen::MatrixXd donor_pre_matrix(const PanelMatrix& panel, int t0, const std::vector<int>& rows) {
    Eigen::MatrixXd M(t0, rows.size());
    for (std::size_t c = 0; c < rows.size(); ++c) {
        M.col(c) = panel.values().row(rows[c]).head(t0).transpose();
    }
    return M;
}

}  // namespace

Estimate estimate(const PanelMatrix& panel, const TreatmentSpec& spec, Method method,
                  const EstimateConfig& config) {
    spec.validate(panel);
    const int t0 = spec.t0;
    const Eigen::VectorXd treated_pre =
        panel.values().row(spec.treated_index).head(t0).transpose();

    Estimate est;
    est.method = method;
    switch (method) {
        case Method::osc: {
            est.donors = DonorSelection::full(spec.treated_index, panel.n_units());
            est.weights = fit_simplex(treated_pre,
                                      donor_pre_matrix(panel, t0, est.donors.indices()));
            break;
        }
        case Method::fpca_synth: {
            const FpcaScores scores = fpca_scores(panel.values().leftCols(t0), config.fpca);
            est.diagnostics["fpca_components"] = scores.K;
            est.diagnostics["fpca_basis_size"] = scores.basis_size;
            est.diagnostics["fpca_degenerate"] = scores.degenerate ? 1.0 : 0.0;
            est.donors = trim_by_cluster(scores, spec.treated_index, panel.unit_labels(),
                                         config.cluster);
            const Eigen::MatrixXd donor_pre = donor_pre_matrix(panel, t0, est.donors.indices());
            const LowRankDecomposition lr = rpca(donor_pre, config.rpca);
            est.diagnostics["rpca_lambda"] = lr.lambda;
            est.diagnostics["rpca_iterations"] = lr.iterations;
            est.diagnostics["rpca_converged"] = lr.converged ? 1.0 : 0.0;
            est.diagnostics["rpca_residual"] = lr.residual;
            est.weights = fit_nonneg(treated_pre, lr.L);
            break;
        }
        case Method::fspda: {
            const PrePostSplit split = split_pre_post(panel, spec);
            ForwardOptions fo;
            fo.r_max = config.fselect_r_max;
            fo.n_units = panel.n_units();
            fo.penalty = config.fselect_penalty;
            fo.post_len = panel.n_periods() - t0;
            const ForwardPath path = forward_select(split.treated_pre, split.donor_pre, fo);
            std::vector<int> rows;
            for (int c : path.chosen()) rows.push_back(split.donor_rows[c]);
            std::map<std::string, double> diag{{"chosen_r", path.chosen_r},
                                               {"path_length", static_cast<double>(path.order.size())}};
            est.donors = DonorSelection::make(std::move(rows), spec.treated_index, panel.n_units(),
                                              SelectionMethod::forward_selection, std::move(diag));
            est.paths["r2_path"] = path.r2_path;
            est.paths["mbic_path"] = path.mbic_path;
            est.weights = fit_ols(treated_pre, donor_pre_matrix(panel, t0, est.donors.indices()));
            break;
        }
    }
    est.series = assemble_counterfactual(panel, spec, est.donors, est.weights);
    return est;
}

}  // namespace sctrim
