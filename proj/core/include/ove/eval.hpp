#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ove/linear_model.hpp"
#include "ove/sparse.hpp"

namespace ove {

inline constexpr double kNlpdFloor = 1e-12;

/// Removes the shared-shift freedom of softmax parameters: subtracts, for
/// every feature, the mean weight across classes and the mean bias.
LinearModel gauge_fixed(const LinearModel& model);

/// ‖w_ref − w‖₂ / ‖w_ref‖₂ over all weights and biases. Callers gauge-fix
/// both models first when comparing trained softmax parameters.
double param_norm(const LinearModel& reference, const LinearModel& candidate);

double error_rate(std::span<const int> predicted, std::span<const int> truth);

/// Mean −log p(t_i | x_i), probabilities floored at kNlpdFloor.
double nlpd(std::span<const std::vector<double>> prob_rows, std::span<const int> truth);

/// Trailing moving average; the window is truncated at the start so the
/// output has the input's length.
std::vector<double> smooth_trace(std::span<const double> trace, std::size_t window);
/// Keeps every factor-th value, starting with the first.
std::vector<double> thin_trace(std::span<const double> trace, std::size_t factor);

struct MethodReport {
  std::string method;
  std::optional<double> norm;  // absent for the reference method
  double error = 0.0;
  double nlpd = 0.0;
  std::optional<double> bound_final;

  nlohmann::json to_json() const;
};

/// Predictions and exact-softmax nlpd of a model on a test set.
MethodReport evaluate_model(const std::string& method, const LinearModel& model,
                            const SparseDataset& test);

/// Table-shaped CSV: method,norm,error,nlpd (empty norm for the reference).
void write_report_table(std::span<const MethodReport> reports, std::ostream& out);

}  // namespace ove
