#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "sctrim/errors.hpp"
#include "sctrim/gpsim.hpp"
#include "sctrim/metrics.hpp"

using namespace sctrim;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(xs.size());
    int i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

// treated = 0.3 a + 0.7 b exactly, plus three unrelated donors
PanelMatrix mix_panel(int T) {
    Eigen::MatrixXd Y(6, T);
    for (int t = 0; t < T; ++t) {
        const double a = 5 + std::sin(0.4 * t) + 0.2 * t;
        const double b = 7 + std::cos(0.25 * t) - 0.1 * t;
        Y(0, t) = 0.3 * a + 0.7 * b;
        Y(1, t) = a;
        Y(2, t) = b;
        Y(3, t) = 40 + 5 * std::sin(1.3 * t);
        Y(4, t) = -20 + 0.5 * t * std::cos(0.9 * t);
        Y(5, t) = 60 - 2.0 * t + std::sin(2.1 * t);
    }
    std::vector<std::string> units{"T", "A", "B", "C", "D", "E"}, times;
    for (int t = 0; t < T; ++t) times.push_back("p" + std::to_string(100 + t));
    return PanelMatrix(Y, units, times);
}

}  // namespace

TEST_CASE("att and rmse on a hand fixture") {
    const Eigen::VectorXd g = vec({1, -1, 2, 3, 5});
    CHECK(att(g, 3) == doctest::Approx(4.0));
    CHECK(rmse(g, Window::pre, 3) == doctest::Approx(std::sqrt(6.0 / 3)));
    CHECK(rmse(g, Window::post, 3) == doctest::Approx(std::sqrt(34.0 / 2)));
    CHECK_THROWS_AS(att(g, 5), UsageError);
    CHECK_THROWS_AS(rmse(g, Window::pre, 0), UsageError);
}

TEST_CASE("ratio fixtures") {
    CHECK(post_pre_ratio(3.355, 24.583) == doctest::Approx(7.327).epsilon(1e-3));
    CHECK(post_pre_ratio(17.867, 37.213) == doctest::Approx(2.083).epsilon(1e-3));
    CHECK(post_pre_ratio(2.67, 2.604) == doctest::Approx(0.975).epsilon(1e-3));
    CHECK(std::isinf(post_pre_ratio(0.0, 1.0)));
    CHECK(std::isinf(post_pre_ratio(0.0, 0.0)));
}

TEST_CASE("sum-of-squares ratio") {
    const Eigen::VectorXd g = vec({1, -1, 2, 3, 5});
    CHECK(post_pre_ratio_sum_squares(g, 3) == doctest::Approx(34.0 / 6.0));
    CHECK(std::isinf(post_pre_ratio_sum_squares(vec({0, 0, 1}), 2)));
}

TEST_CASE("ATT percent") {
    // observed 110, fitted 100 in every post period
    const Eigen::VectorXd fitted = vec({90, 95, 100, 100}), gaps = vec({0.5, -0.5, 10, 10});
    CHECK(*att_percent(gaps, fitted, 2) == doctest::Approx(10.0));
    CHECK_FALSE(att_percent(gaps, vec({1, 1, 2, -2}), 2).has_value());

    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::VectorXd f = 50.0 + oracle::random_vector(12, rng).array();
        const Eigen::VectorXd g = oracle::random_vector(12, rng);
        const double via_att = 100.0 * att(g, 7) / f.tail(5).mean();
        CHECK(*att_percent(g, f, 7) == doctest::Approx(via_att).epsilon(1e-12));
    }
}

TEST_CASE("metric linearity and homogeneity") {
    std::mt19937_64 rng(72);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd a = oracle::random_vector(15, rng), b = oracle::random_vector(15, rng);
        CHECK(att(a + b, 10) == doctest::Approx(att(a, 10) + att(b, 10)).epsilon(1e-12));
        CHECK(att(-2.5 * a, 10) == doctest::Approx(-2.5 * att(a, 10)).epsilon(1e-12));
        CHECK(rmse(-2.5 * a, Window::pre, 10) ==
              doctest::Approx(2.5 * rmse(a, Window::pre, 10)).epsilon(1e-12));
        const double r = post_pre_ratio(rmse(a, Window::pre, 10), rmse(a, Window::post, 10));
        const double rs = post_pre_ratio(rmse(4.0 * a, Window::pre, 10), rmse(4.0 * a, Window::post, 10));
        CHECK(r == doctest::Approx(rs).epsilon(1e-12));
    }
}

TEST_CASE("report fields are consistent") {
    TwoPoolConfig c;
    c.relevant_units = 10;
    c.irrelevant_units = 10;
    c.periods = 30;
    c.t0 = 22;
    const SimPanel sim = make_two_pool_panel(c, 4);
    EstimateConfig cfg;
    cfg.cluster.seed = 4;
    for (Method m : {Method::osc, Method::fpca_synth, Method::fspda}) {
        CAPTURE(to_string(m));
        const EstimateReport r = run_estimate(sim.panel, sim.spec, m, cfg);
        CHECK(r.method == m);
        CHECK(r.intervention == Intervention::main);
        CHECK(r.t0 == 22);
        const Eigen::VectorXd& g = r.estimate.series.gaps;
        CHECK(r.att == doctest::Approx(g.tail(8).mean()).epsilon(1e-12));
        CHECK(r.rmse_pre == doctest::Approx(std::sqrt(g.head(22).squaredNorm() / 22)).epsilon(1e-12));
        CHECK_FALSE(r.ratio_infinite);
        CHECK(r.ratio * r.rmse_pre == doctest::Approx(r.rmse_post).epsilon(1e-12));
    }
}

TEST_CASE("perfect pre-fit marks the ratio infinite") {
    const PanelMatrix p = mix_panel(20);
    // shift the post period so the pre-fit stays exact but gaps appear
    Eigen::MatrixXd Y = p.values();
    Y.block(0, 15, 1, 5).array() += 3.0;
    const PanelMatrix q(Y, p.unit_labels(), p.time_labels());
    const EstimateReport r = run_estimate(q, TreatmentSpec{0, 15}, Method::osc);
    CHECK(r.rmse_pre <= 1e-6);
    CHECK(r.att == doctest::Approx(3.0).epsilon(1e-4));
    if (r.rmse_pre == 0.0) {
        CHECK(r.ratio_infinite);
        CHECK(std::isinf(r.ratio));
    } else {
        CHECK(r.ratio > 1e4);
    }
}

TEST_CASE("sum-of-squares mode in reports") {
    TwoPoolConfig c;
    c.relevant_units = 8;
    c.irrelevant_units = 8;
    c.periods = 25;
    c.t0 = 18;
    const SimPanel sim = make_two_pool_panel(c, 5);
    ReportOptions opts;
    opts.ratio = RatioMode::sum_squares;
    const EstimateReport r = run_estimate(sim.panel, sim.spec, Method::osc, {}, opts);
    CHECK(r.ratio == doctest::Approx(post_pre_ratio_sum_squares(r.estimate.series.gaps, 18)).epsilon(1e-12));
}

TEST_CASE("placebo t0 must precede the intervention") {
    const PanelMatrix p = mix_panel(24);
    const TreatmentSpec spec{0, 18};
    CHECK_THROWS_AS(placebo_in_time(p, spec, Method::osc, 18), UsageError);
    CHECK_THROWS_AS(placebo_in_time(p, spec, Method::osc, 20), UsageError);
    CHECK_THROWS_AS(placebo_in_time(p, spec, Method::osc, 0), UsageError);
}

TEST_CASE("placebo on an exact mixture has zero effect") {
    const PanelMatrix p = mix_panel(24);
    const EstimateReport r = placebo_in_time(p, TreatmentSpec{0, 18}, Method::osc, 12);
    CHECK(r.intervention == Intervention::placebo);
    CHECK(r.t0 == 12);
    CHECK(std::abs(r.att) <= 1e-4);
    CHECK(r.estimate.series.gaps.size() == 24);
    CHECK(std::string(to_string(Intervention::placebo)) == "Placebo Intervention");
    CHECK(std::string(to_string(Intervention::main)) == "Main Intervention");

    const EstimateReport s = placebo_in_time(p, TreatmentSpec{0, 18}, Method::fspda, 12);
    CHECK(std::abs(s.att) <= 1e-6);
}

TEST_CASE("placebo too short for a method names the minimum") {
    const PanelMatrix p = mix_panel(24);
    const int need = min_pre_periods(Method::fpca_synth, {});
    CHECK(need >= 5);
    try {
        placebo_in_time(p, TreatmentSpec{0, 18}, Method::fpca_synth, need - 1);
        FAIL("expected UsageError");
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find(std::to_string(need)) != std::string::npos);
    }
    CHECK(min_pre_periods(Method::osc, {}) >= 1);
    CHECK(min_pre_periods(Method::fspda, {}) >= 3);
}

TEST_CASE("placebo on the default simulation stays near the main fit") {
    const SimPanel sim = make_two_pool_panel(TwoPoolConfig{}, 11);
    EstimateConfig cfg;
    cfg.cluster.seed = 11;
    const EstimateReport main = run_estimate(sim.panel, sim.spec, Method::fpca_synth, cfg);
    const EstimateReport plac = placebo_in_time(sim.panel, sim.spec, Method::fpca_synth, 20, cfg);
    CHECK(plac.intervention == Intervention::placebo);
    CHECK(std::isfinite(plac.ratio));
    CHECK(plac.ratio <= 3.0 * main.ratio);
    CHECK(plac.ratio >= main.ratio / 3.0);
}
