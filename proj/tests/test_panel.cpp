#include <doctest.h>

#include <sstream>

#include "sctrim/errors.hpp"
#include "sctrim/panel.hpp"

using namespace sctrim;

namespace {

PanelMatrix parse(const std::string& text, PanelFormat fmt) {
    std::istringstream in(text);
    return parse_panel(in, fmt);
}

PanelMatrix toy() {
    Eigen::MatrixXd v(3, 4);
    v << 1, 2, 3, 4,
         5, 6, 7, 8,
         9, 10, 11, 12;
    return PanelMatrix(v, {"a", "b", "c"}, {"1", "2", "3", "4"});
}

}  // namespace

TEST_CASE("wide CSV with 3 units and 4 periods") {
    const PanelMatrix p = parse("unit,1,2,3,4\na,1,2,3,4\nb,5,6,7,8\nc,9,10,11,12\n",
                                PanelFormat::wide);
    CHECK(p.n_units() == 3);
    CHECK(p.n_periods() == 4);
    CHECK(p.values()(2, 3) == 12.0);
    CHECK(p.find_unit("b") == 1);
    CHECK(p.find_period("3") == 2);
    CHECK(p.find_unit("zz") == -1);
}

TEST_CASE("long CSV pivots to the same panel as wide") {
    const PanelMatrix w = parse("unit,1,2,3\na,1,2,3\nb,4,5,6\n", PanelFormat::wide);
    // rows shuffled; time must come back sorted
    const PanelMatrix l = parse(
        "unit,time,value\nb,3,6\na,2,2\na,1,1\nb,1,4\na,3,3\nb,2,5\n", PanelFormat::long_);
    CHECK(l.unit_labels() == std::vector<std::string>{"b", "a"});
    CHECK(l.time_labels() == w.time_labels());
    CHECK(l.values().row(1) == w.values().row(0));
    CHECK(l.values().row(0) == w.values().row(1));
}

TEST_CASE("long CSV time sorts numerically, not lexically") {
    const PanelMatrix l = parse("unit,time,value\na,10,3\na,9,2\na,1,1\nb,1,4\nb,9,5\nb,10,6\n",
                                PanelFormat::long_);
    CHECK(l.time_labels() == std::vector<std::string>{"1", "9", "10"});
    CHECK(l.values()(0, 2) == 3.0);
}

TEST_CASE("long CSV gap is reported with unit and period") {
    try {
        parse("unit,time,value\na,1,1\na,2,2\na,3,3\nb,1,4\nb,3,6\n", PanelFormat::long_);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("'b'") != std::string::npos);
        CHECK(msg.find("'2'") != std::string::npos);
    }
}

TEST_CASE("malformed input is rejected") {
    CHECK_THROWS_AS(parse("unit,time,value\na,1,1\na,1,2\na,2,2\na,3,3\nb,1,1\nb,2,2\nb,3,3\n",
                          PanelFormat::long_),
                    DataError);
    try {
        parse("unit,1,2,3\na,1,x,3\nb,4,5,6\n", PanelFormat::wide);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse("unit,1,2,3\na,1,,3\nb,4,5,6\n", PanelFormat::wide), DataError);
    CHECK_THROWS_AS(parse("unit,1,2,3\na,1,2,3\na,4,5,6\n", PanelFormat::wide), DataError);
    CHECK_THROWS_AS(parse("unit,1,2,3\na,1,2,3\n", PanelFormat::wide), DataError);
    CHECK_THROWS_AS(parse("unit,1,2,3\na,1,2,nan\nb,4,5,6\n", PanelFormat::wide), DataError);
    CHECK_THROWS_AS(load_panel("/nonexistent/panel.csv", PanelFormat::wide), DataError);
}

TEST_CASE("quoted labels survive a write/parse round trip") {
    Eigen::MatrixXd v(2, 3);
    v << 0.1, 1.0 / 3.0, -2e-300,
         1e300, 4.0, 5.5;
    const PanelMatrix p(v, {"Paris, FR", "say \"hi\""}, {"2011-01", "2011-02", "2011-03"});
    std::ostringstream out;
    write_panel_wide(out, p);
    const PanelMatrix q = parse(out.str(), PanelFormat::wide);
    CHECK(q.unit_labels() == p.unit_labels());
    CHECK(q.time_labels() == p.time_labels());
    CHECK(q.values() == p.values());
}

TEST_CASE("split_pre_post partitions and reassembles exactly") {
    Eigen::MatrixXd v(3, 4);
    v << 1.1, 2.2, 3.3, 4.4,
         0.5, 0.25, 0.125, 0.0625,
         7, 8, 9, 10;
    const PanelMatrix p(v, {"a", "b", "c"}, {"1", "2", "3", "4"});
    const TreatmentSpec spec{1, 3};
    const PrePostSplit s = split_pre_post(p, spec);
    CHECK(s.treated_pre.size() == 3);
    CHECK(s.treated_post.size() == 1);
    CHECK(s.donor_pre.rows() == 3);
    CHECK(s.donor_pre.cols() == 2);
    CHECK(s.donor_rows == std::vector<int>{0, 2});
    Eigen::VectorXd row(4);
    row << s.treated_pre, s.treated_post;
    CHECK(row == v.row(1).transpose());
    Eigen::VectorXd d(4);
    d << s.donor_pre.col(1), s.donor_post.col(1);
    CHECK(d == v.row(2).transpose());
}

TEST_CASE("treatment index and t0 bounds") {
    const PanelMatrix p = toy();
    CHECK_THROWS_AS(split_pre_post(p, TreatmentSpec{0, 4}), UsageError);
    CHECK_THROWS_AS(split_pre_post(p, TreatmentSpec{0, 0}), UsageError);
    CHECK_THROWS_AS(split_pre_post(p, TreatmentSpec{3, 2}), UsageError);
    CHECK_NOTHROW(split_pre_post(p, TreatmentSpec{2, 3}));
}

TEST_CASE("normalize_to_base") {
    Eigen::MatrixXd v(2, 3);
    v << 50, 75, 100,
         2, 1, 4;
    const PanelMatrix p(v, {"a", "b"}, {"1", "2", "3"});
    const PanelMatrix n = normalize_to_base(p, BaseNormalization::first_period_100);
    CHECK(n.values()(0, 0) == 100.0);
    CHECK(n.values()(0, 1) == doctest::Approx(150.0).epsilon(1e-14));
    CHECK(n.values()(0, 2) == doctest::Approx(200.0).epsilon(1e-14));
    CHECK(n.values()(1, 2) == doctest::Approx(200.0).epsilon(1e-14));

    const PanelMatrix same = normalize_to_base(p, BaseNormalization::none);
    CHECK(same.values() == p.values());

    Eigen::MatrixXd z(2, 3);
    z << 0, 1, 2,
         1, 2, 3;
    CHECK_THROWS_AS(normalize_to_base(PanelMatrix(z, {"a", "b"}, {"1", "2", "3"}),
                                      BaseNormalization::first_period_100),
                    DataError);
}

TEST_CASE("aggregate_blocks averages fixed blocks") {
    Eigen::MatrixXd v(2, 7);
    v << 1, 2, 3, 4, 5, 6, 7,
         0, 0, 3, 3, 6, 6, 9;
    const PanelMatrix p(v, {"a", "b"}, {"d1", "d2", "d3", "d4", "d5", "d6", "d7"});
    const PanelMatrix w = aggregate_blocks(p, 3);
    CHECK(w.n_periods() == 3);
    CHECK(w.time_labels() == std::vector<std::string>{"d1", "d4", "d7"});
    CHECK(w.values()(0, 0) == doctest::Approx(2.0));
    CHECK(w.values()(0, 1) == doctest::Approx(5.0));
    CHECK(w.values()(0, 2) == doctest::Approx(7.0));
    CHECK(w.values()(1, 1) == doctest::Approx(5.0));
    CHECK(aggregate_blocks(p, 1).values() == p.values());
    CHECK_THROWS_AS(aggregate_blocks(p, 0), UsageError);
}

TEST_CASE("panel construction invariants") {
    Eigen::MatrixXd v = Eigen::MatrixXd::Ones(2, 3);
    CHECK_THROWS_AS(PanelMatrix(v, {"a"}, {"1", "2", "3"}), DataError);
    CHECK_THROWS_AS(PanelMatrix(v, {"a", "a"}, {"1", "2", "3"}), DataError);
    CHECK_THROWS_AS(PanelMatrix(Eigen::MatrixXd::Ones(1, 3), {"a"}, {"1", "2", "3"}), DataError);
    CHECK_THROWS_AS(PanelMatrix(Eigen::MatrixXd::Ones(2, 2), {"a", "b"}, {"1", "2"}), DataError);
    v(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(PanelMatrix(v, {"a", "b"}, {"1", "2", "3"}), DataError);
}

TEST_CASE("donor selection validation") {
    CHECK_THROWS_AS(DonorSelection::make({}, 0, 4, SelectionMethod::full), UsageError);
    CHECK_THROWS_AS(DonorSelection::make({0, 1}, 0, 4, SelectionMethod::full), UsageError);
    CHECK_THROWS_AS(DonorSelection::make({1, 1}, 0, 4, SelectionMethod::full), UsageError);
    CHECK_THROWS_AS(DonorSelection::make({5}, 0, 4, SelectionMethod::full), UsageError);
    const DonorSelection all = DonorSelection::full(2, 4);
    CHECK(all.indices() == std::vector<int>{0, 1, 3});
    CHECK(all.method() == SelectionMethod::full);
}
