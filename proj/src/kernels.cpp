#include "sctrim/kernels.hpp"

#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sctrim/linalg.hpp"

namespace sctrim::kernels {

bool openmp_enabled() {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace {

// Nearest center for one point; the serial and parallel kernels share it.
inline int nearest(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers, Eigen::Index i,
                   int current, double& best_d2) {
    int best = -1;
    best_d2 = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
        const double d2 = (points.row(i) - centers.row(c)).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = static_cast<int>(c);
        }
    }
    if (current >= 0 && current < centers.rows()) {
        const double dc = (points.row(i) - centers.row(current)).squaredNorm();
        if (dc <= best_d2) {
            best_d2 = dc;
            best = current;
        }
    }
    return best;
}

inline double candidate_score(const Eigen::VectorXd& y, const Eigen::MatrixXd& donors,
                              const std::vector<int>& selected, int candidate) {
    Eigen::MatrixXd X(donors.rows(), selected.size() + 1);
    for (std::size_t s = 0; s < selected.size(); ++s) X.col(s) = donors.col(selected[s]);
    X.col(selected.size()) = donors.col(candidate);
    const InterceptFit fit = fit_with_intercept(y, X);
    if (!fit.full_rank) return -std::numeric_limits<double>::infinity();
    return r2_from_ssr(y, fit.ssr);
}

}  // namespace

double assign_serial(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
                     std::vector<int>& labels) {
    const Eigen::Index n = points.rows();
    labels.resize(n, -1);
    std::vector<double> d2(n);
    for (Eigen::Index i = 0; i < n; ++i) labels[i] = nearest(points, centers, i, labels[i], d2[i]);
    double sse = 0.0;
    for (double v : d2) sse += v;
    return sse;
}

double assign_parallel(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
                       std::vector<int>& labels) {
    const Eigen::Index n = points.rows();
    labels.resize(n, -1);
    std::vector<double> d2(n);
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) labels[i] = nearest(points, centers, i, labels[i], d2[i]);
    double sse = 0.0;
    for (double v : d2) sse += v;
    return sse;
}

Eigen::MatrixXd pairwise_distances_serial(const Eigen::MatrixXd& points) {
    const Eigen::Index n = points.rows();
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            const double d = (points.row(i) - points.row(j)).norm();
            D(i, j) = d;
            D(j, i) = d;
        }
    }
    return D;
}

Eigen::MatrixXd pairwise_distances_parallel(const Eigen::MatrixXd& points) {
    const Eigen::Index n = points.rows();
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
#pragma omp parallel for schedule(dynamic, 8)
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            const double d = (points.row(i) - points.row(j)).norm();
            D(i, j) = d;
            D(j, i) = d;
        }
    }
    return D;
}

std::vector<double> candidate_r2_serial(const Eigen::VectorXd& y, const Eigen::MatrixXd& donors,
                                        const std::vector<int>& selected,
                                        const std::vector<int>& candidates) {
    std::vector<double> out(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        out[c] = candidate_score(y, donors, selected, candidates[c]);
    }
    return out;
}

std::vector<double> candidate_r2_parallel(const Eigen::VectorXd& y,
                                          const Eigen::MatrixXd& donors,
                                          const std::vector<int>& selected,
                                          const std::vector<int>& candidates) {
    std::vector<double> out(candidates.size());
    const auto n = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t c = 0; c < n; ++c) {
        out[c] = candidate_score(y, donors, selected, candidates[c]);
    }
    return out;
}

Eigen::MatrixXd symmetric_fill_serial(int n, const EntryFn& entry) {
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            K(i, j) = entry(i, j);
            K(j, i) = K(i, j);
        }
    }
    return K;
}

Eigen::MatrixXd symmetric_fill_parallel(int n, const EntryFn& entry) {
    Eigen::MatrixXd K(n, n);
#pragma omp parallel for schedule(dynamic, 8)
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            K(i, j) = entry(i, j);
            K(j, i) = K(i, j);
        }
    }
    return K;
}

double assign(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
              std::vector<int>& labels) {
    return openmp_enabled() ? assign_parallel(points, centers, labels)
                            : assign_serial(points, centers, labels);
}

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points) {
    return openmp_enabled() ? pairwise_distances_parallel(points)
                            : pairwise_distances_serial(points);
}

std::vector<double> candidate_r2(const Eigen::VectorXd& y, const Eigen::MatrixXd& donors,
                                 const std::vector<int>& selected,
                                 const std::vector<int>& candidates) {
    return openmp_enabled() ? candidate_r2_parallel(y, donors, selected, candidates)
                            : candidate_r2_serial(y, donors, selected, candidates);
}

Eigen::MatrixXd symmetric_fill(int n, const EntryFn& entry) {
    return openmp_enabled() ? symmetric_fill_parallel(n, entry) : symmetric_fill_serial(n, entry);
}

}  // namespace sctrim::kernels
