#include "sctrim/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

#include "csv.hpp"
#include "sctrim/errors.hpp"

namespace sctrim {

PanelMatrix::PanelMatrix(Eigen::MatrixXd values, std::vector<std::string> unit_labels,
                         std::vector<std::string> time_labels)
    : values_(std::move(values)),
      unit_labels_(std::move(unit_labels)),
      time_labels_(std::move(time_labels)) {
    if (values_.rows() < 2 || values_.cols() < 3) {
        throw DataError("panel needs at least 2 units and 3 periods, got " +
                        std::to_string(values_.rows()) + "x" + std::to_string(values_.cols()));
    }
    if (static_cast<Eigen::Index>(unit_labels_.size()) != values_.rows() ||
        static_cast<Eigen::Index>(time_labels_.size()) != values_.cols()) {
        throw DataError("panel label counts do not match the value matrix");
    }
    std::set<std::string> seen;
    for (const auto& u : unit_labels_) {
        if (!seen.insert(u).second) throw DataError("duplicate unit label '" + u + "'");
    }
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
        for (Eigen::Index t = 0; t < values_.cols(); ++t) {
            if (!std::isfinite(values_(i, t))) {
                throw DataError("non-finite value for unit '" + unit_labels_[i] + "' at period '" +
                                time_labels_[t] + "'");
            }
        }
    }
}

int PanelMatrix::find_unit(const std::string& label) const {
    auto it = std::find(unit_labels_.begin(), unit_labels_.end(), label);
    return it == unit_labels_.end() ? -1 : static_cast<int>(it - unit_labels_.begin());
}

int PanelMatrix::find_period(const std::string& label) const {
    auto it = std::find(time_labels_.begin(), time_labels_.end(), label);
    return it == time_labels_.end() ? -1 : static_cast<int>(it - time_labels_.begin());
}

void TreatmentSpec::validate(const PanelMatrix& panel) const {
    if (treated_index < 0 || treated_index >= panel.n_units()) {
        throw UsageError("treated index " + std::to_string(treated_index) + " outside [0, " +
                         std::to_string(panel.n_units()) + ")");
    }
    if (t0 < 1 || t0 > panel.n_periods() - 1) {
        throw UsageError("t0 = " + std::to_string(t0) + " must lie in [1, " +
                         std::to_string(panel.n_periods() - 1) +
                         "] so that both pre and post periods exist");
    }
}

const char* to_string(SelectionMethod m) {
    switch (m) {
        case SelectionMethod::full: return "full";
        case SelectionMethod::fpca_cluster: return "fpca_cluster";
        case SelectionMethod::forward_selection: return "forward_selection";
    }
    return "unknown";
}

DonorSelection DonorSelection::make(std::vector<int> indices, int treated_index, int n_units,
                                    SelectionMethod method,
                                    std::map<std::string, double> diagnostics,
                                    std::vector<std::string> warnings) {
    if (indices.empty()) throw UsageError("donor selection is empty");
    std::set<int> seen;
    for (int j : indices) {
        if (j < 0 || j >= n_units) {
            throw UsageError("donor index " + std::to_string(j) + " out of range");
        }
        if (j == treated_index) throw UsageError("donor selection contains the treated unit");
        if (!seen.insert(j).second) {
            throw UsageError("duplicate donor index " + std::to_string(j));
        }
    }
    DonorSelection s;
    s.indices_ = std::move(indices);
    s.method_ = method;
    s.diagnostics_ = std::move(diagnostics);
    s.warnings_ = std::move(warnings);
    return s;
}

DonorSelection DonorSelection::full(int treated_index, int n_units) {
    std::vector<int> idx;
    idx.reserve(n_units);
    for (int j = 0; j < n_units; ++j) {
        if (j != treated_index) idx.push_back(j);
    }
    return make(std::move(idx), treated_index, n_units, SelectionMethod::full);
}

namespace {

double parse_cell(const std::string& s, std::size_t line_no, const std::string& what) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first < last && std::isspace(static_cast<unsigned char>(*first))) ++first;
    while (last > first && std::isspace(static_cast<unsigned char>(last[-1]))) --last;
    if (first == last) {
        throw DataError("missing value for " + what + " (row " + std::to_string(line_no) + ")");
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw DataError("non-numeric value '" + s + "' for " + what + " (row " +
                        std::to_string(line_no) + ")");
    }
    if (!std::isfinite(v)) {
        throw DataError("non-finite value for " + what + " (row " + std::to_string(line_no) + ")");
    }
    return v;
}

bool parses_as_number(const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

PanelMatrix parse_wide(std::istream& in) {
    detail::CsvReader reader(in);
    std::vector<std::string> header;
    if (!reader.next(header)) throw DataError("empty CSV: header row required");
    if (header.size() < 2) throw DataError("wide CSV header needs a unit column and periods");
    std::vector<std::string> times(header.begin() + 1, header.end());

    std::vector<std::string> units;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        const std::size_t line = reader.line();
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() > header.size()) {
            throw DataError("row " + std::to_string(line) + " has more cells than the header");
        }
        const std::string& unit = fields[0];
        std::vector<double> row(times.size());
        for (std::size_t t = 0; t < times.size(); ++t) {
            const std::string what = "unit '" + unit + "', period '" + times[t] + "'";
            if (t + 1 >= fields.size()) {
                throw DataError("missing value for " + what + " (row " + std::to_string(line) + ")");
            }
            row[t] = parse_cell(fields[t + 1], line, what);
        }
        units.push_back(unit);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("wide CSV has no unit rows");
    Eigen::MatrixXd values(rows.size(), times.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t t = 0; t < times.size(); ++t) values(i, t) = rows[i][t];
    }
    return PanelMatrix(std::move(values), std::move(units), std::move(times));
}

PanelMatrix parse_long(std::istream& in) {
    detail::CsvReader reader(in);
    std::vector<std::string> header;
    if (!reader.next(header)) throw DataError("empty CSV: header row required");
    if (header.size() != 3) throw DataError("long CSV header must be unit,time,value");

    std::vector<std::string> units;
    std::unordered_map<std::string, int> unit_pos;
    std::vector<std::string> times;
    std::unordered_map<std::string, int> time_pos;
    std::map<std::pair<int, int>, double> cells;

    std::vector<std::string> f;
    while (reader.next(f)) {
        const std::size_t line = reader.line();
        if (f.size() == 1 && f[0].empty()) continue;
        if (f.size() != 3) {
            throw DataError("row " + std::to_string(line) + " must have 3 cells, has " +
                            std::to_string(f.size()));
        }
        auto [uit, unew] = unit_pos.try_emplace(f[0], static_cast<int>(units.size()));
        if (unew) units.push_back(f[0]);
        auto [tit, tnew] = time_pos.try_emplace(f[1], static_cast<int>(times.size()));
        if (tnew) times.push_back(f[1]);
        const double v = parse_cell(f[2], line, "unit '" + f[0] + "', period '" + f[1] + "'");
        if (!cells.emplace(std::make_pair(uit->second, tit->second), v).second) {
            throw DataError("duplicate (unit, time) pair ('" + f[0] + "', '" + f[1] + "') at row " +
                            std::to_string(line));
        }
    }
    if (units.empty()) throw DataError("long CSV has no data rows");

    std::vector<int> order(times.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    const bool numeric = std::all_of(times.begin(), times.end(), parses_as_number);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (numeric) return std::stod(times[a]) < std::stod(times[b]);
        return times[a] < times[b];
    });

    Eigen::MatrixXd values(units.size(), times.size());
    std::vector<std::string> sorted_times(times.size());
    std::string gaps;
    int n_gaps = 0;
    for (std::size_t c = 0; c < order.size(); ++c) {
        sorted_times[c] = times[order[c]];
        for (std::size_t u = 0; u < units.size(); ++u) {
            auto it = cells.find({static_cast<int>(u), order[c]});
            if (it == cells.end()) {
                if (n_gaps++ < 10) {
                    gaps += (gaps.empty() ? "" : ", ") + std::string("('") + units[u] + "', '" +
                            times[order[c]] + "')";
                }
                continue;
            }
            values(u, c) = it->second;
        }
    }
    if (n_gaps > 0) {
        throw DataError("long CSV is missing " + std::to_string(n_gaps) +
                        " (unit, time) cell(s): " + gaps + (n_gaps > 10 ? ", ..." : ""));
    }
    return PanelMatrix(std::move(values), std::move(units), std::move(sorted_times));
}

}  // namespace

PanelMatrix parse_panel(std::istream& in, PanelFormat format) {
    return format == PanelFormat::wide ? parse_wide(in) : parse_long(in);
}

PanelMatrix load_panel(const std::string& path, PanelFormat format) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return parse_panel(in, format);
}

void write_panel_wide(std::ostream& out, const PanelMatrix& panel) {
    out << "unit";
    for (const auto& t : panel.time_labels()) out << ',' << detail::csv_escape(t);
    out << '\n';
    for (int i = 0; i < panel.n_units(); ++i) {
        out << detail::csv_escape(panel.unit_labels()[i]);
        for (int t = 0; t < panel.n_periods(); ++t) {
            out << ',' << detail::format_double(panel.values()(i, t));
        }
        out << '\n';
    }
}

PrePostSplit split_pre_post(const PanelMatrix& panel, const TreatmentSpec& spec) {
    spec.validate(panel);
    const int T = panel.n_periods();
    const int t0 = spec.t0;
    const auto& Y = panel.values();

    PrePostSplit s;
    s.donor_rows.reserve(panel.n_units() - 1);
    for (int j = 0; j < panel.n_units(); ++j) {
        if (j != spec.treated_index) s.donor_rows.push_back(j);
    }
    const int J = static_cast<int>(s.donor_rows.size());
    s.treated_pre = Y.row(spec.treated_index).head(t0).transpose();
    s.treated_post = Y.row(spec.treated_index).tail(T - t0).transpose();
    s.donor_pre.resize(t0, J);
    s.donor_post.resize(T - t0, J);
    for (int c = 0; c < J; ++c) {
        s.donor_pre.col(c) = Y.row(s.donor_rows[c]).head(t0).transpose();
        s.donor_post.col(c) = Y.row(s.donor_rows[c]).tail(T - t0).transpose();
    }
    return s;
}

PanelMatrix normalize_to_base(const PanelMatrix& panel, BaseNormalization base) {
    if (base == BaseNormalization::none) return panel;
    Eigen::MatrixXd v = panel.values();
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        const double first = v(i, 0);
        if (first == 0.0) {
            throw DataError("cannot normalize unit '" + panel.unit_labels()[i] +
                            "': first-period value is zero");
        }
        v.row(i) *= 100.0 / first;
        v(i, 0) = 100.0;
    }
    return PanelMatrix(std::move(v), panel.unit_labels(), panel.time_labels());
}

PanelMatrix aggregate_blocks(const PanelMatrix& panel, int block) {
    if (block < 1) throw UsageError("aggregation block must be >= 1");
    if (block == 1) return panel;
    const int T = panel.n_periods();
    const int n_blocks = (T + block - 1) / block;
    Eigen::MatrixXd v(panel.n_units(), n_blocks);
    std::vector<std::string> labels(n_blocks);
    for (int b = 0; b < n_blocks; ++b) {
        const int start = b * block;
        const int len = std::min(block, T - start);
        v.col(b) = panel.values().middleCols(start, len).rowwise().mean();
        labels[b] = panel.time_labels()[start];
    }
    return PanelMatrix(std::move(v), panel.unit_labels(), std::move(labels));
}

}  // namespace sctrim
