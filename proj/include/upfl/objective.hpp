#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "upfl/data.hpp"
#include "upfl/errors.hpp"
#include "upfl/model.hpp"

namespace upfl {

// Multiclass softmax regression with mean cross-entropy. The local objective
// evaluated here is
//   F(w) + (prox_mu/2) * ||w - prox_anchor||^2 + <linear_term, w>
// where the prox and linear parts are optional. The same structure carries
// FedProx (prox), objective-perturbation noise and Scaffold control-variate
// corrections (both are linear terms).
struct LocalObjective {
  std::span<const Sample> samples;
  ShapeTag shape;
  double prox_mu = 0.0;
  std::optional<ModelVector> prox_anchor;
  std::optional<ModelVector> linear_term;

  void validate(const ModelVector& w) const {
    if (!(w.shape() == shape))
      throw ContractError("objective: model shape " + w.shape().str() +
                          " does not match data shape " + shape.str());
    if ((prox_mu > 0.0) != prox_anchor.has_value())
      throw ContractError("objective: prox_anchor must be present iff prox_mu > 0");
    if (prox_anchor) w.check_same_shape(*prox_anchor, "prox_anchor");
    if (linear_term) w.check_same_shape(*linear_term, "linear_term");
    if (samples.empty()) throw ContractError("objective: empty sample set");
  }
};

namespace detail {

inline void logits_of(const ModelVector& w, const Sample& s, std::vector<double>& z) {
  const int C = w.shape().classes;
  const int dx = w.shape().dim_x;
  z.resize(static_cast<size_t>(C));
  for (int c = 0; c < C; ++c) {
    double acc = w.bias(c);
    for (int j = 0; j < dx; ++j) acc += w.weight(c, j) * s.x[static_cast<size_t>(j)];
    z[static_cast<size_t>(c)] = acc;
  }
}

// log(sum exp(z)) with max-shift; z is replaced by softmax probabilities.
inline double softmax_inplace(std::vector<double>& z) {
  double zmax = -std::numeric_limits<double>::infinity();
  for (double v : z) zmax = std::max(zmax, v);
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return zmax + std::log(sum);
}

}  // namespace detail

/// Mean cross-entropy over a sample range (no prox/linear terms).
inline double base_loss(const ModelVector& w, std::span<const Sample> samples) {
  std::vector<double> z;
  double acc = 0.0;
  for (const Sample& s : samples) {
    detail::logits_of(w, s, z);
    const double zy = z[static_cast<size_t>(s.y)];
    const double lse = detail::softmax_inplace(z);
    acc += lse - zy;
  }
  return acc / static_cast<double>(samples.size());
}

/// Mean cross-entropy gradient accumulated into g (must be zeroed by caller).
inline void accumulate_base_gradient(const ModelVector& w,
                                     std::span<const Sample> samples,
                                     ModelVector& g) {
  const int C = w.shape().classes;
  const int dx = w.shape().dim_x;
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  std::vector<double> z;
  for (const Sample& s : samples) {
    detail::logits_of(w, s, z);
    detail::softmax_inplace(z);
    z[static_cast<size_t>(s.y)] -= 1.0;
    for (int c = 0; c < C; ++c) {
      const double gz = z[static_cast<size_t>(c)] * inv_n;
      if (gz == 0.0) continue;
      for (int j = 0; j < dx; ++j)
        g.weight(c, j) += gz * s.x[static_cast<size_t>(j)];
      g.bias(c) += gz;
    }
  }
}

inline double loss(const LocalObjective& obj, const ModelVector& w) {
  obj.validate(w);
  double value = base_loss(w, obj.samples);
  if (obj.prox_anchor) {
    const ModelVector d = w - *obj.prox_anchor;
    value += 0.5 * obj.prox_mu * d.dot(d);
  }
  if (obj.linear_term) value += obj.linear_term->dot(w);
  return value;
}

inline ModelVector gradient(const LocalObjective& obj, const ModelVector& w) {
  obj.validate(w);
  ModelVector g = ModelVector::zeros(w.shape());
  accumulate_base_gradient(w, obj.samples, g);
  if (obj.prox_anchor) {
    for (size_t i = 0; i < g.size(); ++i)
      g[i] += obj.prox_mu * (w[i] - (*obj.prox_anchor)[i]);
  }
  if (obj.linear_term) g += *obj.linear_term;
  return g;
}

/// Mini-batch gradient at w over samples[idx[first..last)].
inline ModelVector batch_gradient(const LocalObjective& obj, const ModelVector& w,
                                  std::span<const size_t> batch_idx) {
  ModelVector g = ModelVector::zeros(w.shape());
  const int C = w.shape().classes;
  const int dx = w.shape().dim_x;
  const double inv_n = 1.0 / static_cast<double>(batch_idx.size());
  std::vector<double> z;
  for (size_t bi : batch_idx) {
    const Sample& s = obj.samples[bi];
    detail::logits_of(w, s, z);
    detail::softmax_inplace(z);
    z[static_cast<size_t>(s.y)] -= 1.0;
    for (int c = 0; c < C; ++c) {
      const double gz = z[static_cast<size_t>(c)] * inv_n;
      if (gz == 0.0) continue;
      for (int j = 0; j < dx; ++j)
        g.weight(c, j) += gz * s.x[static_cast<size_t>(j)];
      g.bias(c) += gz;
    }
  }
  if (obj.prox_anchor) {
    for (size_t i = 0; i < g.size(); ++i)
      g[i] += obj.prox_mu * (w[i] - (*obj.prox_anchor)[i]);
  }
  if (obj.linear_term) g += *obj.linear_term;
  return g;
}

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Mean cross-entropy and argmax accuracy on a split. Argmax ties break
/// toward the lowest class index.
inline EvalResult evaluate(const ModelVector& w, std::span<const Sample> split) {
  if (split.empty()) throw EvalError("evaluate: empty split");
  std::vector<double> z;
  double loss_acc = 0.0;
  size_t correct = 0;
  for (const Sample& s : split) {
    detail::logits_of(w, s, z);
    int best = 0;
    for (int c = 1; c < static_cast<int>(z.size()); ++c)
      if (z[static_cast<size_t>(c)] > z[static_cast<size_t>(best)]) best = c;
    if (best == s.y) ++correct;
    const double zy = z[static_cast<size_t>(s.y)];
    loss_acc += detail::softmax_inplace(z) - zy;
  }
  return {loss_acc / static_cast<double>(split.size()),
          static_cast<double>(correct) / static_cast<double>(split.size())};
}

}  // namespace upfl
