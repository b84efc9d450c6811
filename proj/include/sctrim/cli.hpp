#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sctrim/estimators.hpp"
#include "sctrim/gpsim.hpp"
#include "sctrim/metrics.hpp"
#include "sctrim/panel.hpp"

namespace sctrim::cli {

/// Everything a subcommand needs. Built from defaults, then a JSON config
/// file, then command-line flags (flags win).
struct RunConfig {
    std::string input;
    PanelFormat format = PanelFormat::wide;
    std::string treated;
    std::optional<int> t0;               // number of pre-intervention periods
    std::optional<std::string> t0_label; // label of the last pre-intervention period
    std::vector<Method> methods{Method::osc, Method::fpca_synth, Method::fspda};
    std::optional<int> placebo_t0;
    std::optional<std::string> placebo_t0_label;
    BaseNormalization normalization = BaseNormalization::none;
    int aggregate = 1;  // block length for mean aggregation, 1 = off
    std::optional<std::uint64_t> seed;
    EstimateConfig estimate;
    ReportOptions report;
    TwoPoolConfig sim;
    int replications = 20;
    std::string out = "out";
};

/// Applies the keys of `j` on top of `cfg`. Unknown keys and wrong types
/// throw UsageError.
void apply_json(RunConfig& cfg, const nlohmann::json& j);

/// Every knob, including the ones left at automatic values (as null).
nlohmann::ordered_json to_json(const RunConfig& cfg);

nlohmann::ordered_json report_json(const EstimateReport& report, const PanelMatrix& panel);

/// Donor label and weight for every nonzero weight, in donor order.
std::vector<std::pair<std::string, double>> nonzero_weights(const EstimateReport& report,
                                                            const PanelMatrix& panel);

void write_counterfactual_csv(std::ostream& out, const EstimateReport& report,
                              const PanelMatrix& panel);
void write_weights_csv(std::ostream& out, const EstimateReport& report, const PanelMatrix& panel);
void write_summary_csv(std::ostream& out, const std::vector<EstimateReport>& reports);
/// Observed vs fitted with a vertical line after the last pre-period.
void write_plot_svg(std::ostream& out, const EstimateReport& report, const PanelMatrix& panel);

/// Panel as loaded and preprocessed (aggregation, then normalization).
PanelMatrix load_input(const RunConfig& cfg);
TreatmentSpec resolve_spec(const RunConfig& cfg, const PanelMatrix& panel);

struct BenchmarkRow {
    std::uint64_t seed = 0;
    Method method = Method::osc;
    int selected = 0;
    int selected_irrelevant = 0;
    int weighted = 0;
    int weighted_irrelevant = 0;
    double att = 0.0;
    double rmse_pre = 0.0;
    double rmse_post = 0.0;
    double ratio = 0.0;
    bool ratio_infinite = false;
};

/// One simulated panel per seed, every configured method fitted on it. The
/// cluster seed follows the replication seed.
std::vector<BenchmarkRow> benchmark_rows(const RunConfig& cfg,
                                         const std::vector<std::uint64_t>& seeds);

void cmd_simulate(const RunConfig& cfg);
void cmd_fit(const RunConfig& cfg);
void cmd_placebo(const RunConfig& cfg);
void cmd_benchmark(const RunConfig& cfg);

/// Parses arguments, runs the subcommand, and maps failures to exit codes:
/// 0 ok, 1 usage, 2 data, 3 numerical.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sctrim::cli
