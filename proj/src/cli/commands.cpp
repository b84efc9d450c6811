#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>

#include <CLI11.hpp>

#include "cli_internal.hpp"
#include "csv.hpp"
#include "sctrim/cli.hpp"
#include "sctrim/errors.hpp"

namespace sctrim::cli {

namespace fs = std::filesystem;
using detail::csv_escape;
using detail::format_double;

namespace {

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    body(out);
    out.flush();
    if (!out) throw DataError("failed while writing '" + path.string() + "'");
}

fs::path prepare_out(const RunConfig& cfg) {
    const fs::path dir(cfg.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory '" + cfg.out + "': " + ec.message());
    write_file(dir / "config.resolved.json",
               [&](std::ostream& o) { o << to_json(cfg).dump(2) << '\n'; });
    return dir;
}

std::uint64_t require_seed(const RunConfig& cfg, const char* why) {
    if (!cfg.seed) throw UsageError(std::string("a seed is required for ") + why);
    return *cfg.seed;
}

bool uses_fpca(const RunConfig& cfg) {
    return std::find(cfg.methods.begin(), cfg.methods.end(), Method::fpca_synth) !=
           cfg.methods.end();
}

EstimateConfig estimate_config(const RunConfig& cfg) {
    EstimateConfig ec = cfg.estimate;
    if (uses_fpca(cfg)) ec.cluster.seed = require_seed(cfg, "fpca_synth (k-means seeding)");
    else if (cfg.seed) ec.cluster.seed = *cfg.seed;
    return ec;
}

int resolve_t0(const PanelMatrix& panel, const std::optional<int>& count,
               const std::optional<std::string>& label, const char* what) {
    if (count && label) {
        throw UsageError(std::string("give either ") + what + " or " + what +
                         "_label, not both");
    }
    if (label) {
        const int idx = panel.find_period(*label);
        if (idx < 0) {
            throw UsageError(std::string(what) + "_label '" + *label +
                             "' is not a period of the panel");
        }
        return idx + 1;
    }
    if (count) return *count;
    throw UsageError(std::string(what) + " is required (pre-period count or " + what +
                     "_label)");
}

// Re-throws estimator failures with the method name in front, keeping the
// error category (and so the exit code).
template <typename F>
auto with_context(Method m, F&& f) -> decltype(f()) {
    const std::string prefix = std::string(to_string(m)) + ": ";
    try {
        return f();
    } catch (const UsageError& e) {
        throw UsageError(prefix + e.what());
    } catch (const DataError& e) {
        throw DataError(prefix + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(prefix + e.what());
    }
}

void write_method_outputs(const fs::path& dir, const EstimateReport& r, const PanelMatrix& panel,
                          const std::string& suffix) {
    const std::string stem = std::string(to_string(r.method)) + suffix;
    write_file(dir / ("report_" + stem + ".json"),
               [&](std::ostream& o) { o << report_json(r, panel).dump(2) << '\n'; });
    write_file(dir / ("counterfactual_" + stem + ".csv"),
               [&](std::ostream& o) { write_counterfactual_csv(o, r, panel); });
    write_file(dir / ("weights_" + stem + ".csv"),
               [&](std::ostream& o) { write_weights_csv(o, r, panel); });
    write_file(dir / ("plot_" + stem + ".svg"),
               [&](std::ostream& o) { write_plot_svg(o, r, panel); });
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2) return v[n / 2];
    const double a = v[n / 2 - 1], b = v[n / 2];
    return std::isinf(a) || std::isinf(b) ? (std::isinf(a) ? a : b) : 0.5 * (a + b);
}

std::string number_cell(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return format_double(v);
}

}  // namespace

PanelMatrix load_input(const RunConfig& cfg) {
    if (cfg.input.empty()) throw UsageError("an input panel is required (--input)");
    if (cfg.aggregate < 1) throw UsageError("aggregate must be >= 1");
    PanelMatrix panel = load_panel(cfg.input, cfg.format);
    if (cfg.aggregate > 1) panel = aggregate_blocks(panel, cfg.aggregate);
    return normalize_to_base(panel, cfg.normalization);
}

TreatmentSpec resolve_spec(const RunConfig& cfg, const PanelMatrix& panel) {
    if (cfg.treated.empty()) throw UsageError("the treated unit label is required (--treated)");
    const int row = panel.find_unit(cfg.treated);
    if (row < 0) throw UsageError("treated unit '" + cfg.treated + "' is not in the panel");
    TreatmentSpec spec{row, resolve_t0(panel, cfg.t0, cfg.t0_label, "t0")};
    spec.validate(panel);
    return spec;
}

std::vector<BenchmarkRow> benchmark_rows(const RunConfig& cfg,
                                         const std::vector<std::uint64_t>& seeds) {
    const int n = static_cast<int>(seeds.size());
    const int m = static_cast<int>(cfg.methods.size());
    std::vector<BenchmarkRow> rows(static_cast<std::size_t>(n) * m);
    std::vector<std::exception_ptr> failures(n);

#pragma omp parallel for schedule(dynamic, 1)
    for (int s = 0; s < n; ++s) {
        try {
            const SimPanel sim = make_two_pool_panel(cfg.sim, seeds[s]);
            EstimateConfig ec = cfg.estimate;
            ec.cluster.seed = seeds[s];
            for (int k = 0; k < m; ++k) {
                const Method method = cfg.methods[k];
                const EstimateReport r = with_context(method, [&] {
                    return run_estimate(sim.panel, sim.spec, method, ec, cfg.report);
                });
                BenchmarkRow& row = rows[static_cast<std::size_t>(s) * m + k];
                row.seed = seeds[s];
                row.method = method;
                row.att = r.att;
                row.rmse_pre = r.rmse_pre;
                row.rmse_post = r.rmse_post;
                row.ratio = r.ratio;
                row.ratio_infinite = r.ratio_infinite;
                const auto& idx = r.estimate.donors.indices();
                const Eigen::VectorXd& w = r.estimate.weights.weights;
                for (std::size_t i = 0; i < idx.size(); ++i) {
                    const bool irrelevant = sim.pools[idx[i]] == Pool::irrelevant;
                    const bool weighted = w(static_cast<Eigen::Index>(i)) != 0.0;
                    ++row.selected;
                    row.selected_irrelevant += irrelevant;
                    row.weighted += weighted;
                    row.weighted_irrelevant += irrelevant && weighted;
                }
            }
        } catch (...) {
            failures[s] = std::current_exception();
        }
    }
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
    return rows;
}

void cmd_simulate(const RunConfig& cfg) {
    const std::uint64_t seed = require_seed(cfg, "simulate");
    const SimPanel sim = make_two_pool_panel(cfg.sim, seed);
    const fs::path dir = prepare_out(cfg);
    write_file(dir / "panel.csv", [&](std::ostream& o) { write_panel_wide(o, sim.panel); });
    write_file(dir / "labels.csv", [&](std::ostream& o) {
        o << "unit,pool,treated\n";
        for (int i = 0; i < sim.panel.n_units(); ++i) {
            o << csv_escape(sim.panel.unit_labels()[i]) << ',' << to_string(sim.pools[i]) << ','
              << (i == sim.spec.treated_index ? 1 : 0) << '\n';
        }
    });
}

void cmd_fit(const RunConfig& cfg) {
    const PanelMatrix panel = load_input(cfg);
    const TreatmentSpec spec = resolve_spec(cfg, panel);
    const EstimateConfig ec = estimate_config(cfg);
    std::vector<EstimateReport> reports;
    for (Method m : cfg.methods) {
        reports.push_back(
            with_context(m, [&] { return run_estimate(panel, spec, m, ec, cfg.report); }));
    }
    const fs::path dir = prepare_out(cfg);
    for (const EstimateReport& r : reports) write_method_outputs(dir, r, panel, "");
    write_file(dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, reports); });
}

void cmd_placebo(const RunConfig& cfg) {
    const PanelMatrix panel = load_input(cfg);
    const TreatmentSpec spec = resolve_spec(cfg, panel);
    const int placebo_t0 =
        resolve_t0(panel, cfg.placebo_t0, cfg.placebo_t0_label, "placebo_t0");
    if (placebo_t0 >= spec.t0) {
        throw UsageError("placebo_t0 (" + std::to_string(placebo_t0) +
                         " pre-periods) must come before t0 (" + std::to_string(spec.t0) + ")");
    }
    const EstimateConfig ec = estimate_config(cfg);
    std::vector<EstimateReport> main, placebo;
    for (Method m : cfg.methods) {
        main.push_back(
            with_context(m, [&] { return run_estimate(panel, spec, m, ec, cfg.report); }));
        placebo.push_back(with_context(
            m, [&] { return placebo_in_time(panel, spec, m, placebo_t0, ec, cfg.report); }));
    }
    const fs::path dir = prepare_out(cfg);
    for (const EstimateReport& r : main) write_method_outputs(dir, r, panel, "");
    for (const EstimateReport& r : placebo) write_method_outputs(dir, r, panel, "_placebo");
    std::vector<EstimateReport> all = main;
    all.insert(all.end(), placebo.begin(), placebo.end());
    write_file(dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, all); });
}

void cmd_benchmark(const RunConfig& cfg) {
    const std::uint64_t seed = require_seed(cfg, "benchmark");
    if (cfg.replications < 1) throw UsageError("replications must be >= 1");
    std::vector<std::uint64_t> seeds;
    for (int r = 0; r < cfg.replications; ++r) seeds.push_back(seed + static_cast<std::uint64_t>(r));
    const std::vector<BenchmarkRow> rows = benchmark_rows(cfg, seeds);

    const fs::path dir = prepare_out(cfg);
    write_file(dir / "benchmark_runs.csv", [&](std::ostream& o) {
        o << "seed,method,selected,selected_irrelevant,weighted,weighted_irrelevant,ATT,RMSE,"
             "PostRMSE,Ratio\n";
        for (const BenchmarkRow& r : rows) {
            o << r.seed << ',' << to_string(r.method) << ',' << r.selected << ','
              << r.selected_irrelevant << ',' << r.weighted << ',' << r.weighted_irrelevant << ','
              << format_double(r.att) << ',' << format_double(r.rmse_pre) << ','
              << format_double(r.rmse_post) << ','
              << (r.ratio_infinite ? std::string("inf") : format_double(r.ratio)) << '\n';
        }
    });
    write_file(dir / "benchmark_summary.csv", [&](std::ostream& o) {
        o << "method,replications,median_abs_ATT,mean_ATT,median_RMSE,median_PostRMSE,"
             "median_Ratio,mean_selected,mean_selected_irrelevant,mean_weighted,"
             "mean_weighted_irrelevant,runs_without_irrelevant_weight\n";
        for (Method m : cfg.methods) {
            std::vector<double> abs_att, rmse, post, ratio;
            double att_sum = 0, sel = 0, sel_irr = 0, wt = 0, wt_irr = 0;
            int clean = 0;
            for (const BenchmarkRow& r : rows) {
                if (r.method != m) continue;
                abs_att.push_back(std::abs(r.att));
                att_sum += r.att;
                rmse.push_back(r.rmse_pre);
                post.push_back(r.rmse_post);
                ratio.push_back(r.ratio_infinite ? std::numeric_limits<double>::infinity()
                                                 : r.ratio);
                sel += r.selected;
                sel_irr += r.selected_irrelevant;
                wt += r.weighted;
                wt_irr += r.weighted_irrelevant;
                clean += r.weighted_irrelevant == 0;
            }
            const double n = static_cast<double>(abs_att.size());
            o << to_string(m) << ',' << abs_att.size() << ',' << number_cell(median(abs_att))
              << ',' << number_cell(att_sum / n) << ',' << number_cell(median(rmse)) << ','
              << number_cell(median(post)) << ',' << number_cell(median(ratio)) << ','
              << number_cell(sel / n) << ',' << number_cell(sel_irr / n) << ','
              << number_cell(wt / n) << ',' << number_cell(wt_irr / n) << ',' << clean << '\n';
        }
    });
}

namespace {

nlohmann::json flag_value(const KeyInfo& info, const std::string& raw) {
    const std::string flag = "--" + info.key;
    auto fail = [&](const char* want) -> nlohmann::json {
        throw UsageError("option " + flag + " expects " + want + ", got '" + raw + "'");
    };
    switch (info.kind) {
        case ValueKind::text:
        case ValueKind::list:
            return raw;
        case ValueKind::integer: {
            long long v = 0;
            auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
            if (ec != std::errc() || p != raw.data() + raw.size()) return fail("an integer");
            return v;
        }
        case ValueKind::seed: {
            std::uint64_t v = 0;
            auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
            if (ec != std::errc() || p != raw.data() + raw.size()) {
                return fail("a non-negative integer");
            }
            return v;
        }
        case ValueKind::real: {
            char* end = nullptr;
            const double v = std::strtod(raw.c_str(), &end);
            if (raw.empty() || end != raw.c_str() + raw.size()) return fail("a number");
            return v;
        }
    }
    return fail("a value");
}

std::string flag_name(const std::string& key) {
    std::string s = key;
    std::replace(s.begin(), s.end(), '_', '-');
    return "--" + s;
}

struct Subcommand {
    CLI::App* app = nullptr;
    std::string config_path;
    std::map<std::string, std::string> values;
    std::function<void(const RunConfig&)> run;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Donor-pool selection and synthetic control estimation"};
    app.name("sctrim");
    app.require_subcommand(1);

    const std::vector<KeyInfo> keys = config_keys();
    std::vector<std::unique_ptr<Subcommand>> subs;
    auto add_sub = [&](const char* name, const char* help,
                       std::function<void(const RunConfig&)> fn) {
        auto s = std::make_unique<Subcommand>();
        s->app = app.add_subcommand(name, help);
        s->run = std::move(fn);
        s->app->add_option("--config", s->config_path, "JSON config file (flags override it)");
        for (const KeyInfo& k : keys) {
            s->app->add_option(flag_name(k.key), s->values[k.key], k.help);
        }
        subs.push_back(std::move(s));
    };
    add_sub("simulate", "write a two-pool Gaussian-process panel", cmd_simulate);
    add_sub("fit", "estimate counterfactuals for each method", cmd_fit);
    add_sub("placebo", "main and in-time placebo estimates", cmd_placebo);
    add_sub("benchmark", "repeated simulate + fit with donor-pool accounting", cmd_benchmark);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        for (const auto& s : subs) {
            if (!s->app->parsed()) continue;
            RunConfig cfg;
            if (!s->config_path.empty()) {
                std::ifstream in(s->config_path);
                if (!in) throw UsageError("cannot open config '" + s->config_path + "'");
                nlohmann::json j;
                try {
                    j = nlohmann::json::parse(in);
                } catch (const nlohmann::json::parse_error& e) {
                    throw UsageError("config '" + s->config_path + "' is not valid JSON: " +
                                     e.what());
                }
                apply_json(cfg, j);
            }
            nlohmann::json overrides = nlohmann::json::object();
            for (const KeyInfo& k : keys) {
                if (s->app->count(flag_name(k.key)) > 0) {
                    overrides[k.key] = flag_value(k, s->values.at(k.key));
                }
            }
            apply_json(cfg, overrides);
            s->run(cfg);
        }
        return 0;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace sctrim::cli
