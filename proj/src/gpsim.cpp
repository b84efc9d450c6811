#include "sctrim/gpsim.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "sctrim/errors.hpp"
#include "sctrim/kernels.hpp"

namespace sctrim {

KernelSpec KernelSpec::rbf(double lengthscale) {
    KernelSpec k;
    k.kind = Kind::rbf;
    k.lengthscale = lengthscale;
    return k;
}

KernelSpec KernelSpec::constant(double amplitude) {
    KernelSpec k;
    k.kind = Kind::constant;
    k.amplitude = amplitude;
    return k;
}

KernelSpec KernelSpec::exp_sine_squared(double lengthscale, double period) {
    KernelSpec k;
    k.kind = Kind::exp_sine_squared;
    k.lengthscale = lengthscale;
    k.period = period;
    return k;
}

KernelSpec KernelSpec::white(double noise_variance) {
    KernelSpec k;
    k.kind = Kind::white;
    k.noise = noise_variance;
    return k;
}

KernelSpec KernelSpec::sum(std::vector<KernelSpec> children) {
    KernelSpec k;
    k.kind = Kind::sum;
    k.children = std::move(children);
    return k;
}

KernelSpec KernelSpec::product(std::vector<KernelSpec> children) {
    KernelSpec k;
    k.kind = Kind::product;
    k.children = std::move(children);
    return k;
}

void KernelSpec::validate() const {
    const bool composite = kind == Kind::sum || kind == Kind::product;
    if (composite) {
        if (children.size() < 2) throw UsageError("composite kernel needs at least two children");
        for (const auto& c : children) c.validate();
        return;
    }
    if (!children.empty()) throw UsageError("leaf kernel cannot have children");
    switch (kind) {
        case Kind::rbf:
            if (!(lengthscale > 0.0)) throw UsageError("rbf lengthscale must be positive");
            break;
        case Kind::constant:
            if (!(amplitude > 0.0)) throw UsageError("constant kernel amplitude must be positive");
            break;
        case Kind::exp_sine_squared:
            if (!(lengthscale > 0.0) || !(period > 0.0)) {
                throw UsageError("exp_sine_squared lengthscale and period must be positive");
            }
            break;
        case Kind::white:
            if (!(noise > 0.0)) throw UsageError("white kernel variance must be positive");
            break;
        default: break;
    }
}

double KernelSpec::operator()(double x, double xp, bool same) const {
    const double d = std::abs(x - xp);
    switch (kind) {
        case Kind::rbf: return std::exp(-d * d / (2.0 * lengthscale * lengthscale));
        case Kind::constant: return amplitude;
        case Kind::exp_sine_squared: {
            const double s = std::sin(std::numbers::pi * d / period);
            return std::exp(-2.0 * s * s / (lengthscale * lengthscale));
        }
        case Kind::white: return same ? noise : 0.0;
        case Kind::sum: {
            double acc = 0.0;
            for (const auto& c : children) acc += c(x, xp, same);
            return acc;
        }
        case Kind::product: {
            double acc = 1.0;
            for (const auto& c : children) acc *= c(x, xp, same);
            return acc;
        }
    }
    return 0.0;
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const std::vector<double>& times) {
    spec.validate();
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) throw UsageError("kernel times must be strictly increasing");
    }
    return kernels::symmetric_fill(static_cast<int>(times.size()), [&](int i, int j) {
        return spec(times[i], times[j], i == j);
    });
}

Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& K) {
    const Eigen::Index n = K.rows();
    for (double jitter = 1e-10; jitter <= 1e-6 * (1.0 + 1e-9); jitter *= 10.0) {
        Eigen::LLT<Eigen::MatrixXd> llt(K + jitter * Eigen::MatrixXd::Identity(n, n));
        if (llt.info() == Eigen::Success) return llt.matrixL();
    }
    throw NumericalError("covariance matrix is not positive definite even with jitter 1e-6");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Eigen::MatrixXd sample_gp(const KernelSpec& spec, const std::vector<double>& times, int n_draws,
                          std::uint64_t seed, const std::optional<Eigen::VectorXd>& mean) {
    if (n_draws < 0) throw UsageError("sample_gp: negative draw count");
    const Eigen::Index T = static_cast<Eigen::Index>(times.size());
    if (mean && mean->size() != T) throw UsageError("sample_gp: mean length differs from times");
    const Eigen::MatrixXd L = jittered_cholesky(kernel_matrix(spec, times));

    Eigen::MatrixXd out(n_draws, T);
#pragma omp parallel for schedule(static)
    for (int d = 0; d < n_draws; ++d) {
        std::mt19937_64 rng(derive_seed(seed, 0, static_cast<std::uint64_t>(d)));
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXd z(T);
        for (Eigen::Index t = 0; t < T; ++t) z(t) = normal(rng);
        Eigen::VectorXd f = L * z;
        if (mean) f += *mean;
        out.row(d) = f.transpose();
    }
    return out;
}

const char* to_string(Pool p) { return p == Pool::relevant ? "relevant" : "irrelevant"; }

namespace {

std::string unit_label(const char* prefix, int i, int count) {
    int width = 2;
    for (int c = count - 1; c >= 100; c /= 10) ++width;
    std::string digits = std::to_string(i);
    if (static_cast<int>(digits.size()) < width) digits.insert(0, width - digits.size(), '0');
    return std::string(prefix) + "_" + digits;
}

enum Stream : std::uint64_t { kLatent = 1, kRelevantNoise = 2, kIrrelevant = 3 };

}  // namespace

SimPanel make_two_pool_panel(const TwoPoolConfig& c, std::uint64_t seed) {
    if (c.relevant_units < 2 || c.irrelevant_units < 2) {
        throw UsageError("each pool needs at least 2 units");
    }
    if (c.periods < 3) throw UsageError("simulation needs at least 3 periods");
    if (c.t0 < 1 || c.t0 > c.periods - 1) throw UsageError("simulation t0 must lie in [1, T-1]");

    std::vector<double> times(c.periods);
    for (int t = 0; t < c.periods; ++t) times[t] = t + 1.0;
    Eigen::VectorXd trend(c.periods);
    Eigen::VectorXd irrelevant_mean(c.periods);
    for (int t = 0; t < c.periods; ++t) {
        trend(t) = c.relevant_trend * times[t];
        irrelevant_mean(t) = c.irrelevant_trend * times[t];
    }

    const KernelSpec latent_kernel = KernelSpec::product(
        {KernelSpec::constant(c.relevant_amplitude), KernelSpec::rbf(c.relevant_lengthscale)});
    const KernelSpec unit_noise = KernelSpec::white(c.relevant_noise);
    const KernelSpec irrelevant_kernel = KernelSpec::sum(
        {KernelSpec::product({KernelSpec::constant(c.irrelevant_amplitude),
                              KernelSpec::exp_sine_squared(c.irrelevant_lengthscale,
                                                           c.irrelevant_period)}),
         KernelSpec::white(c.irrelevant_noise)});

    const Eigen::VectorXd shared =
        sample_gp(latent_kernel, times, 1, derive_seed(seed, kLatent, 0), trend).row(0).transpose();

    const int n = c.relevant_units + c.irrelevant_units;
    Eigen::MatrixXd Y(n, c.periods);
    std::vector<std::string> labels(n);
    std::vector<Pool> pools(n);
    for (int i = 0; i < c.relevant_units; ++i) {
        const Eigen::VectorXd noise =
            sample_gp(unit_noise, times, 1, derive_seed(seed, kRelevantNoise, i)).row(0).transpose();
        Y.row(i) = (shared + noise).transpose();
        labels[i] = unit_label("rel", i, c.relevant_units);
        pools[i] = Pool::relevant;
    }
    for (int j = 0; j < c.irrelevant_units; ++j) {
        const int row = c.relevant_units + j;
        Y.row(row) = sample_gp(irrelevant_kernel, times, 1, derive_seed(seed, kIrrelevant, j),
                                  irrelevant_mean);
        labels[row] = unit_label("irr", j, c.irrelevant_units);
        pools[row] = Pool::irrelevant;
    }

    std::vector<std::string> time_labels(c.periods);
    for (int t = 0; t < c.periods; ++t) time_labels[t] = std::to_string(t + 1);
    return SimPanel{PanelMatrix(std::move(Y), std::move(labels), std::move(time_labels)),
                    std::move(pools), TreatmentSpec{0, c.t0}, 0.0};
}

}  // namespace sctrim
