#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include "csv.hpp"
#include "sctrim/cli.hpp"

namespace sctrim::cli {

using detail::csv_escape;
using detail::format_double;

namespace {

std::string ratio_cell(const EstimateReport& r) {
    return r.ratio_infinite ? "inf" : format_double(r.ratio);
}

std::string fixed2(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
    return std::string(buf, ptr);
}

// Finite doubles as numbers, anything else as null (JSON has no inf/nan).
nlohmann::ordered_json number_or_null(double v) {
    return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

std::vector<std::pair<std::string, double>> nonzero_weights(const EstimateReport& report,
                                                            const PanelMatrix& panel) {
    std::vector<std::pair<std::string, double>> out;
    const auto& idx = report.estimate.donors.indices();
    const Eigen::VectorXd& w = report.estimate.weights.weights;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (w(static_cast<Eigen::Index>(i)) != 0.0) {
            out.emplace_back(panel.unit_labels()[idx[i]], w(static_cast<Eigen::Index>(i)));
        }
    }
    return out;
}

nlohmann::ordered_json report_json(const EstimateReport& r, const PanelMatrix& panel) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["method"] = to_string(r.method);
    j["intervention"] = to_string(r.intervention);
    j["ATT_per"] = r.att_per ? number_or_null(*r.att_per) : ordered_json(nullptr);
    j["ATT"] = r.att;
    j["RMSE"] = r.rmse_pre;
    j["PostRMSE"] = r.rmse_post;
    j["Ratio"] = r.ratio_infinite ? ordered_json(nullptr) : number_or_null(r.ratio);
    j["Ratio_infinite"] = r.ratio_infinite;
    j["t0"] = r.t0;
    j["last_pre_period"] = panel.time_labels()[r.t0 - 1];

    const Estimate& e = r.estimate;
    ordered_json weights = ordered_json::array();
    for (const auto& [unit, w] : nonzero_weights(r, panel)) {
        weights.push_back({{"unit", unit}, {"weight", w}});
    }
    j["weights"] = weights;
    j["weight_regime"] = to_string(e.weights.regime);
    j["intercept"] = e.weights.intercept ? ordered_json(*e.weights.intercept)
                                         : ordered_json(nullptr);

    ordered_json donors;
    donors["selection"] = to_string(e.donors.method());
    donors["count"] = e.donors.size();
    std::vector<std::string> units;
    for (int i : e.donors.indices()) units.push_back(panel.unit_labels()[i]);
    donors["units"] = units;
    donors["warnings"] = e.donors.warnings();
    j["donors"] = donors;

    ordered_json diag = ordered_json::object();
    for (const auto& [k, v] : e.donors.diagnostics()) diag["selection_" + k] = number_or_null(v);
    for (const auto& [k, v] : e.diagnostics) diag[k] = number_or_null(v);
    diag["pre_sse"] = e.weights.objective;
    diag["solver_iterations"] = e.weights.iterations;
    j["diagnostics"] = diag;

    ordered_json paths = ordered_json::object();
    for (const auto& [k, v] : e.paths) {
        ordered_json arr = ordered_json::array();
        for (double x : v) arr.push_back(number_or_null(x));
        paths[k] = arr;
    }
    j["paths"] = paths;
    return j;
}

void write_counterfactual_csv(std::ostream& out, const EstimateReport& r,
                              const PanelMatrix& panel) {
    const CounterfactualSeries& s = r.estimate.series;
    out << "time,observed,fitted,gap\n";
    for (Eigen::Index t = 0; t < s.observed.size(); ++t) {
        out << csv_escape(panel.time_labels()[t]) << ',' << format_double(s.observed(t)) << ','
            << format_double(s.fitted(t)) << ',' << format_double(s.gaps(t)) << '\n';
    }
}

void write_weights_csv(std::ostream& out, const EstimateReport& r, const PanelMatrix& panel) {
    out << "unit,weight\n";
    for (const auto& [unit, w] : nonzero_weights(r, panel)) {
        out << csv_escape(unit) << ',' << format_double(w) << '\n';
    }
}

void write_summary_csv(std::ostream& out, const std::vector<EstimateReport>& reports) {
    out << "method,intervention,ATT_per,ATT,RMSE,PostRMSE,Ratio\n";
    for (const EstimateReport& r : reports) {
        out << to_string(r.method) << ',' << to_string(r.intervention) << ','
            << (r.att_per ? format_double(*r.att_per) : std::string()) << ','
            << format_double(r.att) << ',' << format_double(r.rmse_pre) << ','
            << format_double(r.rmse_post) << ',' << ratio_cell(r) << '\n';
    }
}

void write_plot_svg(std::ostream& out, const EstimateReport& r, const PanelMatrix& panel) {
    const CounterfactualSeries& s = r.estimate.series;
    const double W = 800, H = 420, left = 60, right = 20, top = 40, bottom = 50;
    const Eigen::Index T = s.observed.size();
    double lo = std::min(s.observed.minCoeff(), s.fitted.minCoeff());
    double hi = std::max(s.observed.maxCoeff(), s.fitted.maxCoeff());
    if (hi - lo < 1e-12) {
        lo -= 1.0;
        hi += 1.0;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    auto X = [&](double t) { return left + (W - left - right) * t / std::max<double>(1, T - 1); };
    auto Y = [&](double v) { return top + (H - top - bottom) * (hi - v) / (hi - lo); };
    auto polyline = [&](const Eigen::VectorXd& v, const char* style) {
        out << "<polyline fill=\"none\" " << style << " points=\"";
        for (Eigen::Index t = 0; t < T; ++t) {
            if (t) out << ' ';
            out << fixed2(X(static_cast<double>(t))) << ',' << fixed2(Y(v(t)));
        }
        out << "\"/>\n";
    };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">"
        << to_string(r.method) << ": " << to_string(r.intervention) << " (ATT "
        << fixed2(r.att) << ")</text>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right
        << "\" y2=\"" << H - bottom << "\" stroke=\"#444\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << H - bottom << "\" stroke=\"#444\"/>\n";
    for (double v : {lo + pad, hi - pad}) {
        out << "<text x=\"" << left - 6 << "\" y=\"" << fixed2(Y(v) + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fixed2(v)
            << "</text>\n";
    }
    for (Eigen::Index t : {Eigen::Index(0), Eigen::Index(r.t0 - 1), T - 1}) {
        out << "<text x=\"" << fixed2(X(static_cast<double>(t))) << "\" y=\"" << H - bottom + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << xml_escape(panel.time_labels()[t]) << "</text>\n";
    }
    const std::string xi = fixed2(X(r.t0 - 1.0));
    out << "<line x1=\"" << xi << "\" y1=\"" << top << "\" x2=\"" << xi << "\" y2=\""
        << H - bottom << "\" stroke=\"#c0392b\" stroke-dasharray=\"6 4\"/>\n";
    polyline(s.observed, "stroke=\"black\" stroke-width=\"2\"");
    polyline(s.fitted, "stroke=\"#2471a3\" stroke-width=\"2\" stroke-dasharray=\"8 4\"");
    out << "<text x=\"" << W - right - 160 << "\" y=\"" << top + 14
        << "\" font-family=\"sans-serif\" font-size=\"12\">observed (solid)</text>\n";
    out << "<text x=\"" << W - right - 160 << "\" y=\"" << top + 30
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#2471a3\">"
        << "synthetic (dashed)</text>\n";
    out << "</svg>\n";
}

}  // namespace sctrim::cli
