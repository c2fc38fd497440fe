#pragma once

#include <cstdint>

#include "ove/objective_kind.hpp"

namespace ove {

/// Settings for the doubly stochastic optimizers (nonparametric and linear).
struct TrainConfig {
  int minibatch_size = 1;     // b
  int remaining_classes = 1;  // S, classes drawn per instance besides its label
  int epochs = 1;
  double lr0 = 0.01;
  double lr_decay = 1.0;      // multiplier applied after every epoch
  double lambda = 0.0;        // L2 strength on weights (biases are never penalized)
  std::uint64_t seed = 0;
  ObjectiveKind objective = ObjectiveKind::kOve;
  long log_interval = 1;      // iterations between trace points

  /// Throws InvalidArgument when a field is out of its domain.
  void validate() const;
  /// validate() plus S <= num_classes - 1.
  void validate_for(int num_classes) const;
};

}  // namespace ove
