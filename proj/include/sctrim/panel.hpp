#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sctrim {

/// Outcome matrix with units as rows and time periods as columns.
///
/// Immutable after construction. The constructor enforces: every cell finite,
/// at least 2 units and 3 periods, unique unit labels, and label counts that
/// match the matrix shape.
class PanelMatrix {
public:
    PanelMatrix(Eigen::MatrixXd values, std::vector<std::string> unit_labels,
                std::vector<std::string> time_labels);

    const Eigen::MatrixXd& values() const { return values_; }
    const std::vector<std::string>& unit_labels() const { return unit_labels_; }
    const std::vector<std::string>& time_labels() const { return time_labels_; }

    int n_units() const { return static_cast<int>(values_.rows()); }
    int n_periods() const { return static_cast<int>(values_.cols()); }

    /// Row index of a unit label, or -1.
    int find_unit(const std::string& label) const;
    /// Column index of a time label, or -1.
    int find_period(const std::string& label) const;

private:
    Eigen::MatrixXd values_;
    std::vector<std::string> unit_labels_;
    std::vector<std::string> time_labels_;
};

/// Treated unit and number of pre-intervention periods.
struct TreatmentSpec {
    int treated_index = 0;
    int t0 = 0;

    /// Throws UsageError unless 1 <= t0 <= T-1 and treated_index is a row.
    void validate(const PanelMatrix& panel) const;
};

enum class SelectionMethod { full, fpca_cluster, forward_selection };

const char* to_string(SelectionMethod m);

/// Ordered donor subset with provenance.
///
/// Construction goes through make(), which rejects empty sets, duplicates,
/// out-of-range indices, and the treated unit.
class DonorSelection {
public:
    static DonorSelection make(std::vector<int> indices, int treated_index, int n_units,
                               SelectionMethod method,
                               std::map<std::string, double> diagnostics = {},
                               std::vector<std::string> warnings = {});

    /// Every unit except the treated one, in row order.
    static DonorSelection full(int treated_index, int n_units);

    const std::vector<int>& indices() const { return indices_; }
    SelectionMethod method() const { return method_; }
    const std::map<std::string, double>& diagnostics() const { return diagnostics_; }
    const std::vector<std::string>& warnings() const { return warnings_; }
    std::size_t size() const { return indices_.size(); }

private:
    DonorSelection() = default;

    std::vector<int> indices_;
    SelectionMethod method_ = SelectionMethod::full;
    std::map<std::string, double> diagnostics_;
    std::vector<std::string> warnings_;
};

enum class PanelFormat { wide, long_ };

/// Reads a CSV panel. Wide: `unit,<t1>,<t2>,...`; long: `unit,time,value`.
/// Long input is pivoted with time sorted ascending (numerically when every
/// time label parses as a number). Throws DataError on any gap, duplicate,
/// or non-numeric cell.
PanelMatrix load_panel(const std::string& path, PanelFormat format);
PanelMatrix parse_panel(std::istream& in, PanelFormat format);

/// Writes `panel` in wide format with full round-trip precision.
void write_panel_wide(std::ostream& out, const PanelMatrix& panel);

struct PrePostSplit {
    Eigen::VectorXd treated_pre;   // T0
    Eigen::MatrixXd donor_pre;     // T0 x J
    Eigen::VectorXd treated_post;  // T - T0
    Eigen::MatrixXd donor_post;    // (T - T0) x J
    std::vector<int> donor_rows;   // panel row of each donor column
};

/// Partitions the panel at spec.t0. Donor matrices are time-major (periods as
/// rows) and keep the panel's row order for their columns.
PrePostSplit split_pre_post(const PanelMatrix& panel, const TreatmentSpec& spec);

enum class BaseNormalization { none, first_period_100 };

/// Scales each unit so its first-period value is 100.
PanelMatrix normalize_to_base(const PanelMatrix& panel, BaseNormalization base);

/// Averages consecutive blocks of `block` periods (e.g. daily -> weekly).
/// A trailing partial block is averaged over the periods it has. The new time
/// label of each block is the label of its first period.
PanelMatrix aggregate_blocks(const PanelMatrix& panel, int block);

}  // namespace sctrim
