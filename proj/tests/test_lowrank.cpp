#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "sctrim/errors.hpp"
#include "sctrim/lowrank.hpp"

using namespace sctrim;

TEST_CASE("svd_truncate reproduces an exact-rank input") {
    std::mt19937_64 rng(1);
    const Eigen::MatrixXd Y = oracle::random_matrix(9, 2, rng) * oracle::random_matrix(2, 7, rng);
    CHECK((svd_truncate(Y, 2) - Y).norm() <= 1e-10);
}

TEST_CASE("svd_truncate on diag(3, 1)") {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
    D(0, 0) = 3;
    D(1, 1) = 1;
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(2, 2);
    expect(0, 0) = 3;
    CHECK((svd_truncate(D, 1) - expect).norm() <= 1e-12);
}

TEST_CASE("svd_truncate error equals the singular-value tail") {
    std::mt19937_64 rng(2);
    const Eigen::MatrixXd Y = oracle::random_matrix(10, 8, rng);
    const double err = (Y - svd_truncate(Y, 3)).norm();
    CHECK(err == doctest::Approx(oracle::svd_tail(Y, 3)).epsilon(1e-9));
}

TEST_CASE("svd_truncate error is non-increasing in k and rank is bounded") {
    std::mt19937_64 rng(3);
    const Eigen::MatrixXd Y = oracle::random_matrix(12, 9, rng);
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 9; ++k) {
        const Eigen::MatrixXd Yk = svd_truncate(Y, k);
        const double err = (Y - Yk).norm();
        CHECK(err <= prev + 1e-12);
        prev = err;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(Yk);
        const auto s = svd.singularValues();
        for (int i = k; i < s.size(); ++i) CHECK(s(i) <= 1e-9 * s(0));
    }
    CHECK_THROWS_AS(svd_truncate(Y, 0), UsageError);
    CHECK_THROWS_AS(svd_truncate(Y, 10), UsageError);
}

TEST_CASE("soft_threshold values and oddness") {
    CHECK(soft_threshold(5.0, 2.0) == 3.0);
    CHECK(soft_threshold(-1.5, 2.0) == 0.0);
    CHECK(soft_threshold(0.0, 1.0) == 0.0);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(-10, 10), T(0, 5);
    for (int i = 0; i < 1000; ++i) {
        const double x = U(rng), t = T(rng);
        CHECK(soft_threshold(-x, t) == -soft_threshold(x, t));
    }
}

TEST_CASE("singular_value_threshold") {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
    D(0, 0) = 3;
    D(1, 1) = 1;
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(2, 2);
    expect(0, 0) = 2;
    CHECK((singular_value_threshold(D, 1.0) - expect).norm() <= 1e-12);

    std::mt19937_64 rng(5);
    const Eigen::MatrixXd Y = oracle::random_matrix(6, 5, rng);
    CHECK((singular_value_threshold(Y, 0.0) - Y).norm() <= 1e-10);
    const double smax = Eigen::JacobiSVD<Eigen::MatrixXd>(Y).singularValues()(0);
    CHECK(singular_value_threshold(Y, smax).norm() <= 1e-12);
}

TEST_CASE("rpca on the zero matrix") {
    const LowRankDecomposition d = rpca(Eigen::MatrixXd::Zero(5, 4));
    CHECK(d.converged);
    CHECK(d.iterations <= 1);
    CHECK(d.L.isZero(0.0));
    CHECK(d.S.isZero(0.0));
}

TEST_CASE("rpca recovers a rank-1 block under sparse spikes") {
    Eigen::MatrixXd L0 = Eigen::MatrixXd::Zero(20, 20);
    // 10 e1 e1^T padded out to a dense rank-1 pattern
    Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(20, 1.0, 2.0);
    Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(20, 2.0, 1.0);
    L0 = 10.0 * u * v.transpose() / (u.norm() * v.norm());
    Eigen::MatrixXd S0 = Eigen::MatrixXd::Zero(20, 20);
    S0(1, 3) = 50;
    S0(7, 7) = -50;
    S0(12, 0) = 50;
    S0(15, 18) = -50;
    S0(19, 9) = 50;
    const LowRankDecomposition d = rpca(L0 + S0);
    CHECK(d.converged);
    CHECK((d.L - L0).norm() / L0.norm() <= 1e-5);
    CHECK((d.S - S0).norm() / S0.norm() <= 1e-5);
}

TEST_CASE("rpca on dense noise beats the trivial feasible point") {
    std::mt19937_64 rng(6);
    const Eigen::MatrixXd Y = oracle::random_matrix(25, 18, rng);
    const LowRankDecomposition d = rpca(Y);
    const double lam = 1.0 / std::sqrt(25.0);
    CHECK(d.lambda == doctest::Approx(lam));
    CHECK(rpca_objective(d.L, d.S, d.lambda) <=
          rpca_objective(Y, Eigen::MatrixXd::Zero(25, 18), d.lambda));
}

TEST_CASE("rpca contract: shapes, reconstruction, residual when converged") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::MatrixXd Y =
            oracle::random_matrix(30, 3, rng) * oracle::random_matrix(3, 12, rng) +
            0.1 * oracle::random_matrix(30, 12, rng);
        const LowRankDecomposition d = rpca(Y);
        CHECK(d.L.rows() == 30);
        CHECK(d.S.cols() == 12);
        const double res = (Y - d.L - d.S).norm() / Y.norm();
        CHECK(res == doctest::Approx(d.residual).epsilon(1e-6));
        if (d.converged) CHECK(d.residual <= 1e-7);
    }
}

TEST_CASE("rpca reports non-convergence instead of throwing") {
    std::mt19937_64 rng(8);
    const Eigen::MatrixXd Y = oracle::random_matrix(20, 20, rng);
    RpcaOptions o;
    o.max_iter = 3;
    const LowRankDecomposition d = rpca(Y, o);
    CHECK_FALSE(d.converged);
    CHECK(d.iterations == 3);
    CHECK(d.residual > 1e-7);
}

TEST_CASE("rpca rejects non-finite input") {
    Eigen::MatrixXd Y = Eigen::MatrixXd::Ones(4, 4);
    Y(2, 2) = std::nan("");
    CHECK_THROWS_AS(rpca(Y), DataError);
}

TEST_CASE("ADMM step certificate is non-increasing") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXd Y = oracle::random_matrix(40, 3, rng) * oracle::random_matrix(3, 30, rng);
        std::bernoulli_distribution spike(0.05);
        for (int i = 0; i < Y.rows(); ++i)
            for (int j = 0; j < Y.cols(); ++j)
                if (spike(rng)) Y(i, j) += 10.0;
        const LowRankDecomposition d = rpca(Y);
        REQUIRE(d.step_path.size() == static_cast<std::size_t>(d.iterations));
        for (std::size_t k = 1; k < d.step_path.size(); ++k) {
            CHECK(d.step_path[k] <= d.step_path[k - 1] * (1 + 1e-9) + 1e-24 * d.step_path[0]);
        }
    }
}
