#include "uail/aleatoric/aleatoric.hpp"

#include <cmath>
#include <sstream>

namespace uail::aleatoric {

using nn::Tape;
using nn::Tensor;
using nn::Value;

double aleatoric_loss(const AleatoricPrediction& pred, const std::vector<double>& target) {
  if (pred.value.size() != pred.log_variance.size())
    throw ShapeError("aleatoric_loss: value and log_variance lengths differ");
  if (pred.value.size() != target.size())
    throw ShapeError("aleatoric_loss: prediction and target lengths differ");
  if (!all_finite(pred.value) || !all_finite(pred.log_variance) || !all_finite(target))
    throw NumericError("aleatoric_loss: non-finite input");
  double loss = 0.0;
  for (std::size_t d = 0; d < target.size(); ++d) {
    const double r = target[d] - pred.value[d];
    const double u = pred.log_variance[d];
    loss += 0.5 * std::exp(-u) * r * r + 0.5 * u;
  }
  return loss;
}

Value aleatoric_loss_terms(Tape& tape, Value value, Value log_variance, Value target) {
  Value residual = tape.sub(target, value);
  Value weighted = tape.mul(tape.exp_act(tape.scale(log_variance, -1.0)), tape.square(residual));
  Value terms = tape.add(tape.scale(weighted, 0.5), tape.scale(log_variance, 0.5));
  return tape.sum(terms);
}

ReplicatedLabelSuite::ReplicatedLabelSuite(Tensor input, std::vector<double> labels_in)
    : shared_input(std::move(input)), labels(std::move(labels_in)) {
  if (labels.size() < 2) throw Error("ReplicatedLabelSuite: need at least 2 labels");
  if (!all_finite(labels)) throw NumericError("ReplicatedLabelSuite: non-finite label");
  double sum = 0.0;
  for (double y : labels) sum += y;
  true_mean = sum / static_cast<double>(labels.size());
  double ss = 0.0;
  for (double y : labels) ss += (y - true_mean) * (y - true_mean);
  true_variance = ss / static_cast<double>(labels.size());
}

ReplicatedLabelSuite make_noisy_suite(std::size_t input_dim, double mean, double noise_variance, std::size_t n_labels,
                                      Rng& rng) {
  Tensor x = Tensor::zeros({input_dim});
  for (double& v : x.data) v = rng.uniform(-1.0, 1.0);
  std::vector<double> labels(n_labels);
  const double sd = std::sqrt(noise_variance);
  for (double& y : labels) y = rng.normal(mean, sd);
  return ReplicatedLabelSuite(std::move(x), std::move(labels));
}

namespace {

double analytic_optimum(const ReplicatedLabelSuite& suite) {
  const double n = static_cast<double>(suite.labels.size());
  double u_star = suite.true_variance > 0.0 ? std::log(suite.true_variance) : -kLogVarClamp;
  u_star = std::clamp(u_star, -kLogVarClamp, kLogVarClamp);
  return n * (0.5 * std::exp(-u_star) * suite.true_variance + 0.5 * u_star);
}

}  // namespace

ReplicatedFitResult fit_replicated(const ReplicatedLabelSuite& suite, const ReplicatedFitConfig& cfg) {
  const std::size_t n = suite.labels.size();
  Rng rng(cfg.seed);

  nn::ParamStore store;
  std::vector<nn::LayerSpec> layers;
  for (std::size_t w : cfg.hidden) layers.push_back({w, nn::Activation::kRelu});
  layers.push_back({2, nn::Activation::kIdentity});  // [value, log variance]
  nn::Mlp head(store, "head", suite.shared_input.size(), layers, rng);
  nn::Adam adam(store, {.lr = cfg.lr});

  Tensor input = suite.shared_input;
  input.shape = {1, input.size()};
  Tensor targets = Tensor::zeros({n, 1});
  for (std::size_t i = 0; i < n; ++i) targets.data[i] = suite.labels[i];
  const std::vector<std::uint32_t> replicate(n, 0);

  double final_loss = 0.0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Tape tape(&store);
    Value out = head.forward(tape, tape.input(input));
    Value value = tape.slice_cols(out, 0, 1);
    Value logvar = tape.clamp(tape.slice_cols(out, 1, 2), -kLogVarClamp, kLogVarClamp);
    Value loss = aleatoric_loss_terms(tape, tape.gather_rows(value, replicate),
                                      tape.gather_rows(logvar, replicate), tape.input(targets));
    final_loss = tape.value(loss).data[0];
    if (!std::isfinite(final_loss))
      throw NumericError("fit_replicated: non-finite loss at epoch " + std::to_string(epoch));
    store.zero_grads();
    tape.backward(loss, store);
    adam.step(store);
  }

  Tensor out = head.eval(store, input);
  ReplicatedFitResult res;
  res.fitted_mean = out.data[0];
  res.fitted_variance = std::exp(std::clamp(out.data[1], -kLogVarClamp, kLogVarClamp));
  res.final_loss = final_loss;
  res.analytic_optimum = analytic_optimum(suite);
  res.epochs_run = cfg.epochs;

  const double gate = res.analytic_optimum + cfg.tolerance * static_cast<double>(n);
  if (final_loss > gate) {
    std::ostringstream msg;
    msg << "fit_replicated: did not converge, final loss " << final_loss << " vs analytic optimum "
        << res.analytic_optimum << " (+" << cfg.tolerance << "/label allowance)";
    throw NumericError(msg.str());
  }
  return res;
}

std::vector<CalibrationRow> calibration_sweep(const std::vector<ReplicatedLabelSuite>& suites,
                                              const ReplicatedFitConfig& cfg) {
  if (suites.size() < 3) throw ConfigError("calibration_sweep: need at least 3 noise levels");
  std::vector<CalibrationRow> rows;
  rows.reserve(suites.size());
  for (std::size_t i = 0; i < suites.size(); ++i) {
    ReplicatedFitConfig level_cfg = cfg;
    level_cfg.seed = derive_seed(cfg.seed, "calibration-level", i);
    const ReplicatedFitResult fit = fit_replicated(suites[i], level_cfg);
    CalibrationRow row;
    row.true_variance = suites[i].true_variance;
    row.recovered_variance = fit.fitted_variance;
    row.relative_error = suites[i].true_variance > 0.0
                             ? std::fabs(fit.fitted_variance - suites[i].true_variance) / suites[i].true_variance
                             : fit.fitted_variance;
    row.n_labels = suites[i].labels.size();
    row.epochs = fit.epochs_run;
    rows.push_back(row);
  }
  return rows;
}

std::string calibration_csv(const std::vector<CalibrationRow>& rows) {
  std::ostringstream out;
  out << "true_variance,recovered_variance,relative_error,n_labels,epochs\n";
  out.precision(12);
  for (const auto& r : rows)
    out << r.true_variance << ',' << r.recovered_variance << ',' << r.relative_error << ',' << r.n_labels << ','
        << r.epochs << '\n';
  return out.str();
}

void write_calibration_csv(const std::filesystem::path& path, const std::vector<CalibrationRow>& rows) {
  atomic_write_file(path, calibration_csv(rows));
}

}  // namespace uail::aleatoric
