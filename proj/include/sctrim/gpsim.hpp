#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sctrim/panel.hpp"

namespace sctrim {

/// Covariance function tree. Leaves: rbf, constant, exp_sine_squared,
/// white; composites: sum, product (two or more children).
struct KernelSpec {
    enum class Kind { rbf, constant, exp_sine_squared, white, sum, product };

    Kind kind = Kind::rbf;
    double lengthscale = 1.0;  // rbf, exp_sine_squared
    double amplitude = 1.0;    // constant
    double period = 1.0;       // exp_sine_squared
    double noise = 1.0;        // white (variance)
    std::vector<KernelSpec> children;

    static KernelSpec rbf(double lengthscale);
    static KernelSpec constant(double amplitude);
    static KernelSpec exp_sine_squared(double lengthscale, double period);
    static KernelSpec white(double noise_variance);
    static KernelSpec sum(std::vector<KernelSpec> children);
    static KernelSpec product(std::vector<KernelSpec> children);

    /// Throws UsageError on non-positive scales or malformed composites.
    void validate() const;

    /// k(x, x'). `same` marks the diagonal, where the white kernel is active.
    double operator()(double x, double xp, bool same) const;
};

/// Gram matrix K(i, j) = k(times[i], times[j]). Times must be strictly
/// increasing.
Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const std::vector<double>& times);

/// Lower Cholesky factor of K + jitter*I, with jitter escalating x10 from
/// 1e-10 to 1e-6. Throws NumericalError if every attempt fails.
Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& K);

/// Stable 64-bit sub-seed for (seed, stream, index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// n_draws rows, each a draw from N(mean, K) over `times`. Draw i uses the
/// sub-seed derive_seed(seed, 0, i), so output does not depend on how draws
/// are scheduled. Mean defaults to zero.
Eigen::MatrixXd sample_gp(const KernelSpec& spec, const std::vector<double>& times, int n_draws,
                          std::uint64_t seed,
                          const std::optional<Eigen::VectorXd>& mean = std::nullopt);

enum class Pool { relevant, irrelevant };
const char* to_string(Pool p);

struct TwoPoolConfig {
    int relevant_units = 80;  // includes the treated unit
    int irrelevant_units = 80;
    int periods = 40;
    int t0 = 30;

    double relevant_lengthscale = 8.0;
    double relevant_amplitude = 4.0;
    double relevant_trend = 0.3;  // per period
    double relevant_noise = 0.25;

    double irrelevant_period = 7.0;
    double irrelevant_lengthscale = 1.0;
    double irrelevant_amplitude = 16.0;
    double irrelevant_noise = 4.0;
    double irrelevant_trend = 0.0;  // per period, mean of every irrelevant draw
};

struct SimPanel {
    PanelMatrix panel;
    std::vector<Pool> pools;  // one per unit
    TreatmentSpec spec;
    double true_att = 0.0;
};

/// Two donor pools over times 1..periods. Relevant units share one smooth
/// latent draw (constant x rbf, plus a linear trend) and add their own white
/// noise; irrelevant units are independent draws from constant x
/// exp_sine_squared + white. The treated unit is the first relevant unit.
SimPanel make_two_pool_panel(const TwoPoolConfig& config, std::uint64_t seed);

}  // namespace sctrim
