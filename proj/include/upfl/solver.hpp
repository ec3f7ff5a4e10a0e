#pragma once

#include <string>
#include <vector>

#include "upfl/errors.hpp"
#include "upfl/model.hpp"
#include "upfl/objective.hpp"
#include "upfl/rng.hpp"

namespace upfl {

struct SolverSpec {
  int epochs = 10;
  int batch_size = 10;
  double learning_rate = 0.05;
  double momentum = 0.5;

  void validate() const {
    if (epochs < 1) throw ConfigError("solver: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("solver: batch_size must be >= 1");
    if (!(learning_rate > 0.0) && learning_rate != 0.0)
      throw ConfigError("solver: learning_rate must be >= 0");
    if (momentum < 0.0 || momentum >= 1.0)
      throw ConfigError("solver: momentum must lie in [0, 1)");
  }
};

/// Mini-batch SGD with classical (heavy-ball) momentum:
///   v <- momentum * v - lr * g,   w <- w + v.
/// Batch order is a seeded shuffle per epoch, so the result is fully
/// determined by (init, samples, spec, stream). epochs_override, when
/// positive, replaces spec.epochs (straggler-reduced rounds).
inline ModelVector solve_sgd(const LocalObjective& obj, const ModelVector& init,
                             const SolverSpec& spec, RngStream& stream,
                             int epochs_override = 0,
                             const std::string& context = {}) {
  spec.validate();
  obj.validate(init);
  const int epochs = epochs_override > 0 ? epochs_override : spec.epochs;
  const size_t n = obj.samples.size();
  const size_t batch = std::min<size_t>(static_cast<size_t>(spec.batch_size), n);

  ModelVector w = init;
  ModelVector velocity = ModelVector::zeros(init.shape());
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;

  for (int e = 0; e < epochs; ++e) {
    stream.shuffle(order);
    for (size_t start = 0; start < n; start += batch) {
      const size_t len = std::min(batch, n - start);
      const ModelVector g =
          batch_gradient(obj, w, std::span<const size_t>(order.data() + start, len));
      for (size_t i = 0; i < w.size(); ++i) {
        velocity[i] = spec.momentum * velocity[i] - spec.learning_rate * g[i];
        w[i] += velocity[i];
      }
    }
    if (!w.all_finite())
      throw DivergenceError("solve_sgd: non-finite iterate after epoch " +
                            std::to_string(e + 1) +
                            (context.empty() ? "" : " (" + context + ")"));
  }
  return w;
}

}  // namespace upfl
