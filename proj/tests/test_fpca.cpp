#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "sctrim/errors.hpp"
#include "sctrim/fpca.hpp"

using namespace sctrim;

namespace {

Eigen::MatrixXd score_distances(const Eigen::MatrixXd& S) {
    Eigen::MatrixXd D(S.rows(), S.rows());
    for (int i = 0; i < S.rows(); ++i)
        for (int j = 0; j < S.rows(); ++j) D(i, j) = (S.row(i) - S.row(j)).norm();
    return D;
}

Eigen::MatrixXd smooth_curves(int n, int t0, std::mt19937_64& rng) {
    Eigen::MatrixXd Y(n, t0);
    std::normal_distribution<double> N(0, 1);
    for (int i = 0; i < n; ++i) {
        const double a = N(rng), b = N(rng), c = N(rng);
        for (int t = 0; t < t0; ++t) {
            const double x = static_cast<double>(t) / (t0 - 1);
            Y(i, t) = a + b * std::sin(3 * x) + c * x * x + 0.05 * N(rng);
        }
    }
    return Y;
}

}  // namespace

TEST_CASE("basis rows are a partition of unity") {
    for (int degree : {0, 1, 2, 3, 4}) {
        for (int basis : {degree + 1, degree + 3, 12}) {
            if (basis < degree + 1) continue;
            const Eigen::MatrixXd B = bspline_basis(basis + 7, basis, degree);
            for (int i = 0; i < B.rows(); ++i) {
                CHECK(B.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(B.row(i).minCoeff() >= -1e-15);
            }
        }
    }
}

TEST_CASE("degree 0 basis is a set of indicator blocks") {
    const Eigen::MatrixXd B = bspline_basis(8, 4, 0);
    for (int i = 0; i < 8; ++i) {
        int ones = 0;
        for (int j = 0; j < 4; ++j) {
            CHECK((B(i, j) == 0.0 || B(i, j) == 1.0));
            ones += B(i, j) == 1.0;
        }
        CHECK(ones == 1);
    }
    CHECK(B(0, 0) == 1.0);
    CHECK(B(7, 3) == 1.0);
}

TEST_CASE("cubic basis matches the recursive Cox-de Boor definition") {
    for (int basis : {4, 6, 9, 15}) {
        const auto knots = clamped_uniform_knots(basis, 3);
        std::vector<double> xs;
        for (std::size_t k = 3; k + 1 < knots.size() - 3; ++k) {
            if (knots[k + 1] > knots[k]) xs.push_back(0.5 * (knots[k] + knots[k + 1]));
        }
        xs.push_back(0.0);
        xs.push_back(1.0);
        xs.push_back(0.3141);
        for (double x : xs) {
            const Eigen::VectorXd v = bspline_eval(knots, 3, basis, x);
            for (int i = 0; i < basis; ++i) {
                CHECK(v(i) == doctest::Approx(oracle::cox_de_boor(knots, i, 3, x)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("infeasible basis sizes are rejected") {
    CHECK_THROWS_AS(bspline_basis(10, 3, 3), UsageError);
    CHECK_THROWS_AS(bspline_basis(5, 5, 3), UsageError);
    CHECK_THROWS_AS(bspline_basis(5, 6, 3), UsageError);
    CHECK_NOTHROW(bspline_basis(5, 4, 3));
}

TEST_CASE("default basis size") {
    CHECK(default_basis_size(30) == 15);
    CHECK(default_basis_size(40) == 15);
    CHECK(default_basis_size(12) == 6);
    CHECK(default_basis_size(5) == 4);
    CHECK(min_fpca_periods() == 5);
}

TEST_CASE("identical curves give zero scores and a degenerate flag") {
    Eigen::MatrixXd Y(6, 12);
    for (int i = 0; i < 6; ++i)
        for (int t = 0; t < 12; ++t) Y(i, t) = std::cos(0.4 * t);
    const FpcaScores s = fpca_scores(Y);
    CHECK(s.degenerate);
    CHECK(s.K == 1);
    CHECK(s.scores.isZero(1e-12));
}

TEST_CASE("duplicated curves share score rows") {
    std::mt19937_64 rng(21);
    const Eigen::MatrixXd base = smooth_curves(2, 20, rng);
    Eigen::MatrixXd Y(6, 20);
    Y << base.row(0), base.row(0), base.row(0), base.row(1), base.row(1), base.row(1);
    const FpcaScores s = fpca_scores(Y);
    CHECK((s.scores.row(0) - s.scores.row(2)).norm() <= 1e-9);
    CHECK((s.scores.row(3) - s.scores.row(5)).norm() <= 1e-9);
    CHECK((s.scores.row(0) - s.scores.row(3)).norm() > 1e-3);
}

TEST_CASE("scores match an independent Jacobi eigendecomposition") {
    std::mt19937_64 rng(22);
    const int n = 5, t0 = 9, basis = 4;
    const Eigen::MatrixXd Y = oracle::random_matrix(n, t0, rng);
    FpcaOptions o;
    o.basis_size = basis;
    o.variance_target = 1.0;
    const FpcaScores s = fpca_scores(Y, o);

    // oracle: normal-equation smoothing, centering, Jacobi on the covariance
    const Eigen::MatrixXd B = bspline_basis(t0, basis, 3);
    Eigen::MatrixXd C(n, basis);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd c;
        REQUIRE(oracle::normal_equations(Y.row(i).transpose(), B, c));
        C.row(i) = c.transpose();
    }
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(basis);
    for (int i = 0; i < n; ++i) mean += C.row(i);
    mean /= n;
    for (int i = 0; i < n; ++i) C.row(i) -= mean;
    Eigen::MatrixXd cov = oracle::gram(C) / (n - 1);
    Eigen::VectorXd ev;
    Eigen::MatrixXd V;
    oracle::jacobi_eigen(cov, ev, V);
    const double total = ev.sum();

    REQUIRE(s.K == 4);
    for (int k = 0; k < s.K; ++k) CHECK(s.explained(k) == doctest::Approx(ev(k) / total).epsilon(1e-9));
    const Eigen::MatrixXd oracle_scores = C * V.leftCols(s.K);
    CHECK((score_distances(s.scores) - score_distances(oracle_scores)).norm() <= 1e-9);
    // each component agrees up to sign
    for (int k = 0; k < s.K; ++k) {
        const double same = (s.scores.col(k) - oracle_scores.col(k)).norm();
        const double flip = (s.scores.col(k) + oracle_scores.col(k)).norm();
        CHECK(std::min(same, flip) <= 1e-8);
    }
}

TEST_CASE("score invariants: explained ordering, K bound, one row per unit") {
    std::mt19937_64 rng(23);
    for (double target : {0.5, 0.9, 0.95, 1.0}) {
        const Eigen::MatrixXd Y = smooth_curves(30, 24, rng) + 0.3 * oracle::random_matrix(30, 24, rng);
        FpcaOptions o;
        o.variance_target = target;
        const FpcaScores s = fpca_scores(Y, o);
        CHECK(s.scores.rows() == 30);
        CHECK(s.K <= s.basis_size);
        CHECK(s.explained.sum() <= 1 + 1e-9);
        CHECK(s.explained.sum() >= target - 1e-9);
        for (int k = 0; k < s.K; ++k) {
            CHECK(s.explained(k) > 0);
            if (k) CHECK(s.explained(k) <= s.explained(k - 1) + 1e-15);
        }
        // K is the smallest count reaching the target
        if (s.K > 1) CHECK(s.explained.head(s.K - 1).sum() < target);
    }
}

TEST_CASE("scores ignore a curve added to every unit") {
    std::mt19937_64 rng(24);
    const Eigen::MatrixXd Y = smooth_curves(12, 20, rng);
    Eigen::MatrixXd shifted = Y;
    for (int i = 0; i < 12; ++i)
        for (int t = 0; t < 20; ++t) shifted(i, t) += 5.0 + std::sin(0.7 * t) + 0.2 * t;
    const FpcaScores a = fpca_scores(Y), b = fpca_scores(shifted);
    REQUIRE(a.K == b.K);
    CHECK((score_distances(a.scores) - score_distances(b.scores)).norm() <= 1e-8);
}

TEST_CASE("spline reconstruction error is non-increasing under knot refinement") {
    // interior grids 1/2, 1/4, 1/8, 1/16 nest, so each space contains the last
    std::mt19937_64 rng(25);
    const Eigen::MatrixXd Y = oracle::random_matrix(4, 30, rng);
    double prev = std::numeric_limits<double>::infinity();
    for (int basis : {4, 5, 7, 11, 19}) {
        const Eigen::MatrixXd B = bspline_basis(30, basis, 3);
        const Eigen::MatrixXd C = spline_coefficients(Y, B);
        const double err = (Y - C * B.transpose()).norm();
        CHECK(err <= prev * (1 + 1e-9) + 1e-12);
        prev = err;
    }
}

TEST_CASE("fpca input guards") {
    CHECK_THROWS_AS(fpca_scores(Eigen::MatrixXd::Ones(2, 10)), UsageError);
    CHECK_THROWS_AS(fpca_scores(Eigen::MatrixXd::Ones(4, 3)), UsageError);
    FpcaOptions bad;
    bad.variance_target = 0.0;
    CHECK_THROWS_AS(fpca_scores(Eigen::MatrixXd::Random(4, 10), bad), UsageError);
}
