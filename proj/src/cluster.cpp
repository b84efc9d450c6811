#include "sctrim/cluster.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "sctrim/errors.hpp"
#include "sctrim/kernels.hpp"

namespace sctrim {

namespace {

constexpr int kMaxLloydIterations = 300;

std::mt19937_64 restart_stream(std::uint64_t seed, int restart) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(restart)};
    return std::mt19937_64(seq);
}

Eigen::MatrixXd plus_plus_seeds(const Eigen::MatrixXd& points, int k, std::mt19937_64& rng) {
    const Eigen::Index n = points.rows();
    Eigen::MatrixXd centers(k, points.cols());
    std::vector<char> chosen(n, 0);

    std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
    Eigen::Index pick = first(rng);
    centers.row(0) = points.row(pick);
    chosen[pick] = 1;

    Eigen::VectorXd d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double total = d2.sum();
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            const double target = u(rng);
            double acc = 0.0;
            pick = -1;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2(i);
                if (d2(i) > 0.0 && acc >= target) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) {
                // Rounding left target just above acc; take the last positive weight.
                for (Eigen::Index i = n - 1; i >= 0; --i) {
                    if (d2(i) > 0.0) {
                        pick = i;
                        break;
                    }
                }
            }
        } else {
            pick = 0;
            while (pick < n - 1 && chosen[pick]) ++pick;
        }
        centers.row(c) = points.row(pick);
        chosen[pick] = 1;
        d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }
    return centers;
}

Eigen::MatrixXd cluster_means(const Eigen::MatrixXd& points, const std::vector<int>& labels,
                              int k, std::vector<int>& counts) {
    Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(k, points.cols());
    counts.assign(k, 0);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        centers.row(labels[i]) += points.row(i);
        ++counts[labels[i]];
    }
    for (int c = 0; c < k; ++c) {
        if (counts[c] > 0) centers.row(c) /= static_cast<double>(counts[c]);
    }
    return centers;
}

double within_sse(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
                  const std::vector<int>& labels) {
    double sse = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        sse += (points.row(i) - centers.row(labels[i])).squaredNorm();
    }
    return sse;
}

// Moves, for every empty cluster, the point farthest from its own center
// (taken from a cluster with at least two members) into it.
void fill_empty_clusters(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers, int k,
                         std::vector<int>& labels) {
    std::vector<int> counts(k, 0);
    for (int l : labels) ++counts[l];
    for (int c = 0; c < k; ++c) {
        if (counts[c] > 0) continue;
        Eigen::Index far = -1;
        double far_d2 = -1.0;
        for (Eigen::Index i = 0; i < points.rows(); ++i) {
            if (counts[labels[i]] < 2) continue;
            const double d2 = (points.row(i) - centers.row(labels[i])).squaredNorm();
            if (d2 > far_d2) {
                far_d2 = d2;
                far = i;
            }
        }
        --counts[labels[far]];
        labels[far] = c;
        ++counts[c];
    }
}

ClusterAssignment lloyd(const Eigen::MatrixXd& points, int k, std::mt19937_64& rng) {
    ClusterAssignment a;
    a.k = k;
    a.centers = plus_plus_seeds(points, k, rng);
    a.labels.assign(points.rows(), -1);
    std::vector<int> counts;
    for (int it = 0; it < kMaxLloydIterations; ++it) {
        std::vector<int> next = a.labels;
        kernels::assign(points, a.centers, next);
        fill_empty_clusters(points, a.centers, k, next);
        const bool stable = next == a.labels;
        a.labels = std::move(next);
        a.centers = cluster_means(points, a.labels, k, counts);
        a.sse_path.push_back(within_sse(points, a.centers, a.labels));
        if (stable) break;
    }
    a.sse = a.sse_path.back();
    return a;
}

}  // namespace

ClusterAssignment kmeans(const Eigen::MatrixXd& points, int k, int restarts, std::uint64_t seed) {
    const int n = static_cast<int>(points.rows());
    if (k < 1) throw UsageError("kmeans: k must be >= 1");
    if (k > n) {
        throw UsageError("kmeans: k = " + std::to_string(k) + " exceeds the number of points (" +
                         std::to_string(n) + ")");
    }
    if (restarts < 1) throw UsageError("kmeans: restarts must be >= 1");
    if (!points.allFinite()) throw DataError("kmeans: non-finite point coordinates");

    std::vector<ClusterAssignment> runs(restarts);
#pragma omp parallel for schedule(dynamic, 1)
    for (int r = 0; r < restarts; ++r) {
        auto rng = restart_stream(seed, r);
        runs[r] = lloyd(points, k, rng);
    }
    int best = 0;
    for (int r = 1; r < restarts; ++r) {
        if (runs[r].sse < runs[best].sse) best = r;
    }
    ClusterAssignment out = std::move(runs[best]);
    out.mean_silhouette = k >= 2 ? silhouette_mean(points, out.labels) : 0.0;
    return out;
}

double silhouette_mean(const Eigen::MatrixXd& points, const std::vector<int>& labels) {
    const int n = static_cast<int>(points.rows());
    if (static_cast<int>(labels.size()) != n) {
        throw UsageError("silhouette: one label per point required");
    }
    if (n == 0) throw UsageError("silhouette: no points");
    const int k = *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<int> counts(k, 0);
    for (int l : labels) {
        if (l < 0) throw UsageError("silhouette: negative cluster label");
        ++counts[l];
    }
    const int nonempty = static_cast<int>(std::count_if(counts.begin(), counts.end(),
                                                        [](int c) { return c > 0; }));
    if (nonempty < 2) throw UsageError("silhouette needs at least two non-empty clusters");

    const Eigen::MatrixXd D = kernels::pairwise_distances(points);
    double total = 0.0;
    std::vector<double> sums(k);
    for (int i = 0; i < n; ++i) {
        const int own = labels[i];
        if (counts[own] == 1) continue;  // s(i) = 0
        std::fill(sums.begin(), sums.end(), 0.0);
        for (int j = 0; j < n; ++j) sums[labels[j]] += D(i, j);
        const double a = sums[own] / (counts[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c != own && counts[c] > 0) b = std::min(b, sums[c] / counts[c]);
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / n;
}

ClusterAssignment choose_k(const Eigen::MatrixXd& points, int k_min, int k_max, int restarts,
                           std::uint64_t seed) {
    const int n = static_cast<int>(points.rows());
    if (k_min < 2) throw UsageError("choose_k: k range must start at 2 or above");
    if (k_max < k_min) throw UsageError("choose_k: empty k range");
    if (k_max > n - 1) {
        throw UsageError("choose_k: k_max = " + std::to_string(k_max) + " exceeds n-1 = " +
                         std::to_string(n - 1));
    }
    ClusterAssignment best;
    bool have = false;
    for (int k = k_min; k <= k_max; ++k) {
        ClusterAssignment a = kmeans(points, k, restarts, seed);
        if (!have || a.mean_silhouette > best.mean_silhouette) {
            best = std::move(a);
            have = true;
        }
    }
    return best;
}

DonorSelection trim_by_cluster(const FpcaScores& scores, int treated_index,
                               const std::vector<std::string>& unit_labels,
                               const ClusterTrimOptions& opts) {
    const int n = static_cast<int>(scores.scores.rows());
    if (static_cast<int>(unit_labels.size()) != n) {
        throw UsageError("trim_by_cluster: one unit label per score row required");
    }
    if (treated_index < 0 || treated_index >= n) {
        throw UsageError("trim_by_cluster: treated index out of range");
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return unit_labels[a] < unit_labels[b]; });
    Eigen::MatrixXd P(n, scores.scores.cols());
    int treated_pos = 0;
    for (int p = 0; p < n; ++p) {
        P.row(p) = scores.scores.row(order[p]);
        if (order[p] == treated_index) treated_pos = p;
    }

    std::map<std::string, double> diag;
    const double spread = n > 0 ? (P.rowwise() - P.colwise().mean()).cwiseAbs().maxCoeff() : 0.0;
    const double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
    const int k_max = std::min(opts.k_max, n - 1);
    if (scores.degenerate || spread <= 1e-12 * scale || k_max < 2) {
        diag["k"] = 1.0;
        diag["mean_silhouette"] = 0.0;
        diag["fallback_full"] = 0.0;
        std::vector<int> all;
        for (int j = 0; j < n; ++j) {
            if (j != treated_index) all.push_back(j);
        }
        diag["cluster_size"] = static_cast<double>(n);
        return DonorSelection::make(std::move(all), treated_index, n,
                                    SelectionMethod::fpca_cluster, std::move(diag));
    }

    const ClusterAssignment a = choose_k(P, 2, k_max, opts.restarts, opts.seed);
    const int treated_cluster = a.labels[treated_pos];
    std::vector<int> keep;
    for (int p = 0; p < n; ++p) {
        if (p != treated_pos && a.labels[p] == treated_cluster) keep.push_back(order[p]);
    }
    std::sort(keep.begin(), keep.end());

    diag["k"] = a.k;
    diag["mean_silhouette"] = a.mean_silhouette;
    diag["cluster_size"] = static_cast<double>(keep.size() + 1);
    if (keep.empty()) {
        diag["fallback_full"] = 1.0;
        for (int j = 0; j < n; ++j) {
            if (j != treated_index) keep.push_back(j);
        }
        return DonorSelection::make(
            std::move(keep), treated_index, n, SelectionMethod::fpca_cluster, std::move(diag),
            {"treated unit is alone in its cluster; falling back to the full donor pool"});
    }
    diag["fallback_full"] = 0.0;
    return DonorSelection::make(std::move(keep), treated_index, n, SelectionMethod::fpca_cluster,
                                std::move(diag));
}

}  // namespace sctrim
