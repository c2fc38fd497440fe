#include "ove/full_batch.hpp"

#include <algorithm>
#include <cmath>

#include <ceres/gradient_problem.h>
#include <ceres/gradient_problem_solver.h>
#include <ceres/iteration_callback.h>

#include "ove/errors.hpp"
#include "ove/objectives.hpp"

namespace ove {

namespace {

// Ceres minimizes, so this exposes −objective. For Bouchard's bound the
// per-instance α_n are re-solved at every evaluation point.
class NegatedObjective final : public ceres::FirstOrderFunction {
 public:
  NegatedObjective(const SparseDataset& data, ObjectiveKind kind, double lambda,
                   const LinearModel& shape)
      : data_(data), kind_(kind), lambda_(lambda), model_(shape) {}

  bool Evaluate(const double* parameters, double* cost, double* gradient) const override {
    auto p = model_.parameters();
    std::copy(parameters, parameters + p.size(), p.begin());
    Objective obj{kind_, lambda_, {}};
    if (kind_ == ObjectiveKind::kBouchard) obj.alphas = optimize_alphas(model_, data_);
    if (gradient == nullptr) {
      *cost = -objective_value(model_, data_, obj);
    } else {
      const ValueAndGradient vg = evaluate(model_, data_, obj);
      *cost = -vg.value;
      const auto g = vg.gradient.parameters();
      std::transform(g.begin(), g.end(), gradient, [](double v) { return -v; });
    }
    return std::isfinite(*cost);
  }

  int NumParameters() const override { return static_cast<int>(model_.num_parameters()); }

 private:
  const SparseDataset& data_;
  ObjectiveKind kind_;
  double lambda_;
  mutable LinearModel model_;
};

class TraceRecorder final : public ceres::IterationCallback {
 public:
  explicit TraceRecorder(std::vector<TracePoint>& trace, long offset)
      : trace_(trace), offset_(offset) {}

  ceres::CallbackReturnType operator()(const ceres::IterationSummary& summary) override {
    trace_.push_back({offset_ + summary.iteration, -summary.cost});
    return ceres::SOLVER_CONTINUE;
  }

 private:
  std::vector<TracePoint>& trace_;
  long offset_;
};

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

FullBatchFit fit_full_batch(const SparseDataset& data, ObjectiveKind kind, double lambda,
                            const FullBatchFitOptions& options, const LinearModel* init) {
  if (data.empty()) throw InvalidArgument("fit_full_batch: empty dataset");
  LinearModel model = init ? *init : LinearModel(data.num_classes(), data.num_features());
  if (model.num_classes() != data.num_classes() || model.num_features() != data.num_features()) {
    throw InvalidArgument("fit_full_batch: initial model does not match the data shape");
  }

  FullBatchFit fit;
  std::vector<double> x(model.parameters().begin(), model.parameters().end());
  int used = 0;
  const double tolerance = options.gradient_tolerance * static_cast<double>(data.size());
  // L-BFGS can stop on a stalled line search before the gradient test is
  // met; a fresh restart discards the curvature pairs and usually recovers.
  for (int restart = 0; restart < 4 && used < options.max_iterations; ++restart) {
    ceres::GradientProblem problem(new NegatedObjective(data, kind, lambda, model));
    ceres::GradientProblemSolver::Options opts;
    opts.line_search_direction_type = ceres::LBFGS;
    opts.max_lbfgs_rank = options.lbfgs_rank;
    opts.max_num_iterations = options.max_iterations - used;
    opts.gradient_tolerance = 0.5 * tolerance;
    opts.function_tolerance = 1e-16;
    opts.parameter_tolerance = 1e-16;
    opts.logging_type = ceres::SILENT;
    opts.minimizer_progress_to_stdout = false;
    TraceRecorder recorder(fit.trace, used);
    opts.callbacks.push_back(&recorder);
    opts.update_state_every_iteration = false;

    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(opts, problem, x.data(), &summary);
    used += std::max(1, static_cast<int>(summary.iterations.size()) - 1);

    std::copy(x.begin(), x.end(), model.parameters().begin());
    Objective obj{kind, lambda, {}};
    if (kind == ObjectiveKind::kBouchard) obj.alphas = optimize_alphas(model, data);
    const ValueAndGradient vg = evaluate(model, data, obj);
    fit.objective = vg.value;
    fit.gradient_inf_norm = inf_norm(vg.gradient.parameters());
    fit.alphas = std::move(obj.alphas);
    if (!std::isfinite(fit.objective) || !model.all_finite()) {
      throw NumericalError("fit_full_batch: non-finite objective or parameters");
    }
    if (fit.gradient_inf_norm <= tolerance) {
      fit.converged = true;
      break;
    }
  }
  fit.iterations = used;
  fit.model = std::move(model);
  return fit;
}

}  // namespace ove
