#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "upfl/errors.hpp"
#include "upfl/model.hpp"
#include "upfl/rng.hpp"

namespace upfl {

enum class Parity { odd, even };

/// Per-round execution plan. Sampling and straggler assignment are keyed by
/// (master_seed, data-round index) only, so all strategies sharing a master
/// seed see identical plans.
struct RoundPlan {
  int round_index = 1;
  Parity parity = Parity::odd;
  std::vector<int> selected;             // ascending device ids
  std::map<int, int> epochs_per_device;  // straggler-reduced epochs
};

/// Uniform subset of round(fraction * num_devices) devices, at least 1.
inline std::vector<int> sample_clients(int num_devices, double participation_fraction,
                                       uint64_t master_seed, int data_round) {
  if (!(participation_fraction > 0.0) || participation_fraction > 1.0)
    throw ConfigError("sample_clients: participation fraction must lie in (0, 1]");
  int k = static_cast<int>(
      std::llround(participation_fraction * static_cast<double>(num_devices)));
  k = std::clamp(k, 1, num_devices);
  RngStream rng = RngStream::keyed(master_seed, "round/sample",
                                   static_cast<uint64_t>(data_round));
  return rng.sample_without_replacement(num_devices, k);
}

/// round(fraction * |selected|) devices train a uniform number of epochs in
/// {1, ..., E-1}; the rest train the full E.
inline std::map<int, int> assign_stragglers(const std::vector<int>& selected,
                                            double straggler_fraction, int full_epochs,
                                            uint64_t master_seed, int data_round) {
  if (straggler_fraction < 0.0 || straggler_fraction > 1.0)
    throw ConfigError("assign_stragglers: fraction must lie in [0, 1]");
  if (full_epochs < 1) throw ConfigError("assign_stragglers: epochs must be >= 1");
  const int n = static_cast<int>(selected.size());
  const int k = static_cast<int>(
      std::llround(straggler_fraction * static_cast<double>(n)));
  RngStream rng = RngStream::keyed(master_seed, "round/straggler",
                                   static_cast<uint64_t>(data_round));
  const std::vector<int> straggler_pos = rng.sample_without_replacement(n, k);
  std::map<int, int> epochs;
  for (int id : selected) epochs[id] = full_epochs;
  for (int pos : straggler_pos) {
    const int id = selected[static_cast<size_t>(pos)];
    epochs[id] = full_epochs == 1
                     ? 1
                     : 1 + static_cast<int>(rng.uniform_below(
                               static_cast<uint64_t>(full_epochs - 1)));
  }
  return epochs;
}

inline RoundPlan make_round_plan(int num_devices, double participation,
                                 double straggler_fraction, int full_epochs,
                                 uint64_t master_seed, int data_round) {
  RoundPlan plan;
  plan.round_index = data_round;
  plan.parity = Parity::odd;
  plan.selected = sample_clients(num_devices, participation, master_seed, data_round);
  plan.epochs_per_device = assign_stragglers(plan.selected, straggler_fraction,
                                             full_epochs, master_seed, data_round);
  return plan;
}

/// Weighted average of local models; weights are renormalized over the
/// participating subset. Summation runs in ascending device-id order so the
/// result is independent of how local updates were scheduled.
inline ModelVector aggregate(const std::map<int, ModelVector>& locals,
                             const std::vector<double>& device_weights) {
  if (locals.empty()) throw ContractError("aggregate: no local models");
  double total = 0.0;
  for (const auto& [id, w] : locals) {
    if (id < 0 || static_cast<size_t>(id) >= device_weights.size())
      throw ContractError("aggregate: device id " + std::to_string(id) +
                          " outside weight table");
    if (!(device_weights[static_cast<size_t>(id)] > 0.0))
      throw ContractError("aggregate: non-positive weight for device " +
                          std::to_string(id));
    total += device_weights[static_cast<size_t>(id)];
  }
  ModelVector out = ModelVector::zeros(locals.begin()->second.shape());
  for (const auto& [id, w] : locals)
    out.axpy(device_weights[static_cast<size_t>(id)] / total, w);
  return out;
}

}  // namespace upfl
