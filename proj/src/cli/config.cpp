#include <cmath>
#include <functional>
#include <limits>

#include "cli_internal.hpp"
#include "sctrim/cli.hpp"
#include "sctrim/errors.hpp"

namespace sctrim::cli {

using nlohmann::json;

namespace {

[[noreturn]] void bad_type(const std::string& key, const char* want) {
    throw UsageError("config key '" + key + "' must be " + want);
}

std::string as_string(const std::string& key, const json& v) {
    if (!v.is_string()) bad_type(key, "a string");
    return v.get<std::string>();
}

long long as_integer(const std::string& key, const json& v) {
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::isfinite(d) && d == std::floor(d)) return static_cast<long long>(d);
    }
    bad_type(key, "an integer");
}

int as_int(const std::string& key, const json& v) {
    const long long x = as_integer(key, v);
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
        bad_type(key, "an integer in int range");
    }
    return static_cast<int>(x);
}

std::uint64_t as_seed(const std::string& key, const json& v) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    const long long x = as_integer(key, v);
    if (x < 0) bad_type(key, "a non-negative integer");
    return static_cast<std::uint64_t>(x);
}

double as_real(const std::string& key, const json& v) {
    if (!v.is_number()) bad_type(key, "a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) bad_type(key, "finite");
    return d;
}

std::vector<Method> as_methods(const std::string& key, const json& v) {
    std::vector<Method> out;
    if (v.is_string()) {
        for (const std::string& name : split_list(v.get<std::string>())) {
            out.push_back(parse_method(name));
        }
    } else if (v.is_array()) {
        for (const json& e : v) out.push_back(parse_method(as_string(key, e)));
    } else {
        bad_type(key, "a list of method names");
    }
    if (out.empty()) throw UsageError("at least one method is required");
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (std::size_t k = 0; k < i; ++k) {
            if (out[i] == out[k]) {
                throw UsageError(std::string("method '") + to_string(out[i]) + "' listed twice");
            }
        }
    }
    return out;
}

PanelFormat as_format(const std::string& key, const json& v) {
    const std::string s = as_string(key, v);
    if (s == "wide") return PanelFormat::wide;
    if (s == "long") return PanelFormat::long_;
    throw UsageError("format must be 'wide' or 'long', got '" + s + "'");
}

BaseNormalization as_normalization(const std::string& key, const json& v) {
    const std::string s = as_string(key, v);
    if (s == "none") return BaseNormalization::none;
    if (s == "first_period_100") return BaseNormalization::first_period_100;
    throw UsageError("normalize must be 'none' or 'first_period_100', got '" + s + "'");
}

PenaltyLength as_penalty(const std::string& key, const json& v) {
    const std::string s = as_string(key, v);
    if (s == "pre") return PenaltyLength::pre;
    if (s == "post") return PenaltyLength::post;
    throw UsageError("fselect_penalty must be 'pre' or 'post', got '" + s + "'");
}

RatioMode as_ratio(const std::string& key, const json& v) {
    const std::string s = as_string(key, v);
    if (s == "rmse") return RatioMode::rmse;
    if (s == "sum_squares") return RatioMode::sum_squares;
    throw UsageError("ratio must be 'rmse' or 'sum_squares', got '" + s + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, const json&)>;

struct Entry {
    KeyInfo info;
    Setter set;
};

// Nullable keys accept null to go back to the automatic value.
template <typename T, typename F>
Setter optional_field(std::optional<T> RunConfig::*field, F conv) {
    return [field, conv](RunConfig& c, const std::string& k, const json& v) {
        if (v.is_null()) c.*field = std::nullopt;
        else c.*field = conv(k, v);
    };
}

const std::vector<Entry>& entries() {
    static const std::vector<Entry> table = [] {
        std::vector<Entry> t;
        auto add = [&t](const char* key, ValueKind kind, const char* help, Setter s) {
            t.push_back({{key, kind, help}, std::move(s)});
        };
        using K = ValueKind;
        add("input", K::text, "panel CSV", [](RunConfig& c, const std::string& k, const json& v) {
            c.input = as_string(k, v);
        });
        add("format", K::text, "wide | long", [](RunConfig& c, const std::string& k, const json& v) {
            c.format = as_format(k, v);
        });
        add("treated", K::text, "treated unit label",
            [](RunConfig& c, const std::string& k, const json& v) { c.treated = as_string(k, v); });
        add("t0", K::integer, "number of pre-intervention periods",
            optional_field(&RunConfig::t0, as_int));
        add("t0_label", K::text, "label of the last pre-intervention period",
            optional_field(&RunConfig::t0_label, as_string));
        add("methods", K::list, "comma separated: osc,fpca_synth,fspda",
            [](RunConfig& c, const std::string& k, const json& v) { c.methods = as_methods(k, v); });
        add("placebo_t0", K::integer, "pre-period count of the placebo intervention",
            optional_field(&RunConfig::placebo_t0, as_int));
        add("placebo_t0_label", K::text, "last pre-period label of the placebo intervention",
            optional_field(&RunConfig::placebo_t0_label, as_string));
        add("normalize", K::text, "none | first_period_100",
            [](RunConfig& c, const std::string& k, const json& v) {
                c.normalization = as_normalization(k, v);
            });
        add("aggregate", K::integer, "average blocks of this many periods (1 = off)",
            [](RunConfig& c, const std::string& k, const json& v) { c.aggregate = as_int(k, v); });
        add("seed", K::seed, "random seed", optional_field(&RunConfig::seed, as_seed));
        add("rpca_lambda", K::real, "RPCA sparsity weight (default 1/sqrt(max(m,n)))",
            [](RunConfig& c, const std::string& k, const json& v) {
                if (v.is_null()) c.estimate.rpca.lambda = std::nullopt;
                else c.estimate.rpca.lambda = as_real(k, v);
            });
        add("rpca_tol", K::real, "RPCA relative residual tolerance",
            [](RunConfig& c, const std::string& k, const json& v) {
                c.estimate.rpca.tol = as_real(k, v);
            });
        add("rpca_max_iter", K::integer, "RPCA iteration cap",
            [](RunConfig& c, const std::string& k, const json& v) {
                c.estimate.rpca.max_iter = as_int(k, v);
            });
        add("fpca_basis", K::integer, "B-spline basis size (default min(T0/2, 15))",
            [](RunConfig& c, const std::string& k, const json& v) {
                if (v.is_null()) c.estimate.fpca.basis_size = std::nullopt;
                else c.estimate.fpca.basis_size = as_int(k, v);
            });
        add("fpca_degree", K::integer, "B-spline degree",
            [](RunConfig& c, const std::string& k, const json& v) {
                c.estimate.fpca.degree = as_int(k, v);
            });
        add("fpca_variance", K::real, "explained-variance target for fPCA scores",
            [](RunConfig& c, const std::string& k, const json& v) {
                c.estimate.fpca.variance_target = as_real(k, v);
            });
        add("cluster_k_max", K::integer, "largest k tried",
            [](RunConfig& c, const std::string& k, const json& v) {
                c.estimate.cluster.k_max = as_int(k, v);
            });
        add("cluster_restarts", K::integer, "k-means restarts per k",
            [](RunConfig& c, const std::string& k, const json& v) {
                c.estimate.cluster.restarts = as_int(k, v);
            });
        add("fselect_r_max", K::integer, "forward-selection cap (-1 = min(T0-2, J))",
            [](RunConfig& c, const std::string& k, const json& v) {
                c.estimate.fselect_r_max = as_int(k, v);
            });
        add("fselect_penalty", K::text, "mBIC penalty length: pre | post",
            [](RunConfig& c, const std::string& k, const json& v) {
                c.estimate.fselect_penalty = as_penalty(k, v);
            });
        add("ratio", K::text, "rmse | sum_squares",
            [](RunConfig& c, const std::string& k, const json& v) {
                c.report.ratio = as_ratio(k, v);
            });
        add("out", K::text, "output directory",
            [](RunConfig& c, const std::string& k, const json& v) { c.out = as_string(k, v); });
        add("replications", K::integer, "benchmark replications",
            [](RunConfig& c, const std::string& k, const json& v) {
                c.replications = as_int(k, v);
            });

        auto sim_int = [&](const char* key, int TwoPoolConfig::*f, const char* help) {
            add(key, K::integer, help, [f](RunConfig& c, const std::string& k, const json& v) {
                c.sim.*f = as_int(k, v);
            });
        };
        auto sim_real = [&](const char* key, double TwoPoolConfig::*f, const char* help) {
            add(key, K::real, help, [f](RunConfig& c, const std::string& k, const json& v) {
                c.sim.*f = as_real(k, v);
            });
        };
        sim_int("sim_relevant_units", &TwoPoolConfig::relevant_units, "relevant pool size");
        sim_int("sim_irrelevant_units", &TwoPoolConfig::irrelevant_units, "irrelevant pool size");
        sim_int("sim_periods", &TwoPoolConfig::periods, "simulated periods");
        sim_int("sim_t0", &TwoPoolConfig::t0, "simulated pre-intervention periods");
        sim_real("sim_relevant_lengthscale", &TwoPoolConfig::relevant_lengthscale,
                 "relevant rbf lengthscale");
        sim_real("sim_relevant_amplitude", &TwoPoolConfig::relevant_amplitude,
                 "relevant constant kernel");
        sim_real("sim_relevant_trend", &TwoPoolConfig::relevant_trend, "relevant trend slope");
        sim_real("sim_relevant_noise", &TwoPoolConfig::relevant_noise,
                 "relevant white-noise variance");
        sim_real("sim_irrelevant_period", &TwoPoolConfig::irrelevant_period,
                 "irrelevant exp-sine-squared period");
        sim_real("sim_irrelevant_lengthscale", &TwoPoolConfig::irrelevant_lengthscale,
                 "irrelevant exp-sine-squared lengthscale");
        sim_real("sim_irrelevant_amplitude", &TwoPoolConfig::irrelevant_amplitude,
                 "irrelevant constant kernel");
        sim_real("sim_irrelevant_noise", &TwoPoolConfig::irrelevant_noise,
                 "irrelevant white-noise variance");
        sim_real("sim_irrelevant_trend", &TwoPoolConfig::irrelevant_trend,
                 "irrelevant trend slope");
        return t;
    }();
    return table;
}

const char* format_name(PanelFormat f) { return f == PanelFormat::wide ? "wide" : "long"; }

template <typename T>
json nullable(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

}  // namespace

std::vector<KeyInfo> config_keys() {
    std::vector<KeyInfo> out;
    for (const Entry& e : entries()) out.push_back(e.info);
    return out;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (ch != ' ') {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

void apply_json(RunConfig& cfg, const json& j) {
    if (!j.is_object()) throw UsageError("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        const Entry* hit = nullptr;
        for (const Entry& e : entries()) {
            if (e.info.key == key) {
                hit = &e;
                break;
            }
        }
        if (!hit) throw UsageError("unknown config key '" + key + "'");
        hit->set(cfg, key, value);
    }
}

nlohmann::ordered_json to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["input"] = c.input;
    j["format"] = format_name(c.format);
    j["treated"] = c.treated;
    j["t0"] = nullable(c.t0);
    j["t0_label"] = nullable(c.t0_label);
    std::vector<std::string> methods;
    for (Method m : c.methods) methods.emplace_back(to_string(m));
    j["methods"] = methods;
    j["placebo_t0"] = nullable(c.placebo_t0);
    j["placebo_t0_label"] = nullable(c.placebo_t0_label);
    j["normalize"] =
        c.normalization == BaseNormalization::none ? "none" : "first_period_100";
    j["aggregate"] = c.aggregate;
    j["seed"] = nullable(c.seed);
    j["rpca_lambda"] = nullable(c.estimate.rpca.lambda);
    j["rpca_tol"] = c.estimate.rpca.tol;
    j["rpca_max_iter"] = c.estimate.rpca.max_iter;
    j["fpca_basis"] = nullable(c.estimate.fpca.basis_size);
    j["fpca_degree"] = c.estimate.fpca.degree;
    j["fpca_variance"] = c.estimate.fpca.variance_target;
    j["cluster_k_max"] = c.estimate.cluster.k_max;
    j["cluster_restarts"] = c.estimate.cluster.restarts;
    j["fselect_r_max"] = c.estimate.fselect_r_max;
    j["fselect_penalty"] = c.estimate.fselect_penalty == PenaltyLength::pre ? "pre" : "post";
    j["ratio"] = c.report.ratio == RatioMode::rmse ? "rmse" : "sum_squares";
    j["out"] = c.out;
    j["replications"] = c.replications;
    j["sim_relevant_units"] = c.sim.relevant_units;
    j["sim_irrelevant_units"] = c.sim.irrelevant_units;
    j["sim_periods"] = c.sim.periods;
    j["sim_t0"] = c.sim.t0;
    j["sim_relevant_lengthscale"] = c.sim.relevant_lengthscale;
    j["sim_relevant_amplitude"] = c.sim.relevant_amplitude;
    j["sim_relevant_trend"] = c.sim.relevant_trend;
    j["sim_relevant_noise"] = c.sim.relevant_noise;
    j["sim_irrelevant_period"] = c.sim.irrelevant_period;
    j["sim_irrelevant_lengthscale"] = c.sim.irrelevant_lengthscale;
    j["sim_irrelevant_amplitude"] = c.sim.irrelevant_amplitude;
    j["sim_irrelevant_noise"] = c.sim.irrelevant_noise;
    j["sim_irrelevant_trend"] = c.sim.irrelevant_trend;
    return j;
}

}  // namespace sctrim::cli
