#pragma once

#include <filesystem>
#include <vector>

#include "uail/common.hpp"
#include "uail/nn/adam.hpp"
#include "uail/nn/mlp.hpp"

namespace uail::aleatoric {

/// Log-variance outputs are clamped to this symmetric range everywhere, so
/// exp() stays comfortably inside double range while still spanning
/// variances from ~4.5e-5 to ~2.2e4.
inline constexpr double kLogVarClamp = 10.0;

/// A regression output paired with its predicted log variance u = log(sigma^2).
struct AleatoricPrediction {
  std::vector<double> value;
  std::vector<double> log_variance;
};

/// Heteroscedastic regression loss, summed over dimensions:
///   sum_d [ 1/2 * exp(-u_d) * (y_d - value_d)^2 + 1/2 * u_d ]
/// Inputs are validated for finiteness before any arithmetic.
double aleatoric_loss(const AleatoricPrediction& pred, const std::vector<double>& target);

/// Tape form over matching [batch, d] tensors; returns the scalar sum of all
/// per-entry terms (never an average).
nn::Value aleatoric_loss_terms(nn::Tape& tape, nn::Value value, nn::Value log_variance, nn::Value target);

/// A bundle of conflicting labels attached to one shared input. The "true"
/// statistics use the population (divide-by-N) variance, matching the
/// stationary point of the loss above.
struct ReplicatedLabelSuite {
  nn::Tensor shared_input;      // shape [d]
  std::vector<double> labels;   // N >= 2
  double true_mean = 0.0;
  double true_variance = 0.0;   // population variance

  ReplicatedLabelSuite(nn::Tensor input, std::vector<double> labels_in);
};

/// Draws N labels ~ Normal(mean, sqrt(noise_variance)) around a fixed input.
ReplicatedLabelSuite make_noisy_suite(std::size_t input_dim, double mean, double noise_variance, std::size_t n_labels,
                                      Rng& rng);

struct ReplicatedFitConfig {
  std::vector<std::size_t> hidden{16};
  std::size_t epochs = 3000;
  double lr = 1e-2;
  /// Convergence gate: per-label allowance above the analytic optimum.
  double tolerance = 0.05;
  std::uint64_t seed = 1;
};

struct ReplicatedFitResult {
  double fitted_mean = 0.0;
  double fitted_variance = 0.0;  // exp(fitted log variance)
  double final_loss = 0.0;
  double analytic_optimum = 0.0;
  std::size_t epochs_run = 0;
};

/// Trains a small value/log-variance head on the suite until the predicted
/// variance matches the labels' population variance. Throws NumericError
/// (carrying the final loss) if the loss plateaus above the analytic optimum
/// plus tolerance.
ReplicatedFitResult fit_replicated(const ReplicatedLabelSuite& suite, const ReplicatedFitConfig& cfg);

struct CalibrationRow {
  double true_variance = 0.0;
  double recovered_variance = 0.0;
  double relative_error = 0.0;
  std::size_t n_labels = 0;
  std::size_t epochs = 0;
};

/// Fits one suite per noise level and reports recovered vs true variance.
/// A sweep needs at least 3 levels to say anything about monotonicity;
/// single levels go through fit_replicated directly.
std::vector<CalibrationRow> calibration_sweep(const std::vector<ReplicatedLabelSuite>& suites,
                                              const ReplicatedFitConfig& cfg);

std::string calibration_csv(const std::vector<CalibrationRow>& rows);
void write_calibration_csv(const std::filesystem::path& path, const std::vector<CalibrationRow>& rows);

}  // namespace uail::aleatoric
