#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sctrim/fpca.hpp"
#include "sctrim/panel.hpp"

namespace sctrim {

struct ClusterAssignment {
    std::vector<int> labels;  // one per point, in [0, k)
    Eigen::MatrixXd centers;  // k x d, each the mean of its members
    int k = 0;
    double sse = 0.0;         // within-cluster sum of squares
    double mean_silhouette = 0.0;
    std::vector<double> sse_path;  // SSE after each Lloyd iteration of the winning restart
};

/// Lloyd's algorithm from k-means++ seeds, best of `restarts` by SSE.
/// Restart r draws from its own stream derived from (seed, r), so running
/// restarts concurrently does not change the result. Iterates until labels
/// stop changing or 300 iterations. An empty cluster takes over the point
/// farthest from its current center.
ClusterAssignment kmeans(const Eigen::MatrixXd& points, int k, int restarts, std::uint64_t seed);

/// Mean silhouette width with Euclidean distance. Singleton clusters score 0,
/// as does any point whose a(i) and b(i) are both zero. Throws UsageError
/// when fewer than two clusters are present.
double silhouette_mean(const Eigen::MatrixXd& points, const std::vector<int>& labels);

/// Runs kmeans for k = k_min..k_max and keeps the highest mean silhouette;
/// ties go to the smaller k.
ClusterAssignment choose_k(const Eigen::MatrixXd& points, int k_min, int k_max, int restarts,
                           std::uint64_t seed);

struct ClusterTrimOptions {
    int k_max = 10;  // further capped at n-1
    int restarts = 10;
    std::uint64_t seed = 0;
};

/// Clusters the fPCA score rows and keeps the donors sharing the treated
/// unit's cluster. Rows are put in unit-label order before seeding, which
/// makes the result independent of panel row order. Falls back to the full
/// pool (with a warning) when the treated unit ends up alone.
DonorSelection trim_by_cluster(const FpcaScores& scores, int treated_index,
                               const std::vector<std::string>& unit_labels,
                               const ClusterTrimOptions& opts);

}  // namespace sctrim
