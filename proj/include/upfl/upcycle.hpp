#pragma once

#include <cmath>
#include <string>

#include "upfl/errors.hpp"
#include "upfl/model.hpp"

namespace upfl {

/// Even-round server-side extrapolation:
///   result = current + c_m * (current - previous).
/// Pure server arithmetic; touches no client data and no auxiliary state.
/// c_m == 0 returns current unchanged (the lambda -> infinity limit).
inline ModelVector upcycled_even_update(const ModelVector& current,
                                        const ModelVector& previous, double c_m) {
  current.check_same_shape(previous, "upcycled_even_update");
  if (c_m < 0.0) throw ConfigError("upcycled_even_update: coefficient must be >= 0");
  if (c_m == 0.0) return current;
  ModelVector out = current;
  for (size_t i = 0; i < out.size(); ++i)
    out[i] += c_m * (current[i] - previous[i]);
  return out;
}

/// How the extrapolation coefficient c_m evolves over even rounds.
///
///   prox:      c_m = mu / (mu + lambda_m), lambda_m = lambda0 + slope*(m-1)
///   alg1:      c_m = lambda_m / 2 (the pseudocode form of the same step)
///   corollary: c_m = c0 / sqrt(M), constant in m (the 1/sqrt(M) schedule)
///   fixed:     c_m = c0
struct CoefficientSchedule {
  enum class Mode { prox, alg1, corollary, fixed };
  Mode mode = Mode::prox;
  double mu = 0.1;
  double lambda0 = 0.04;
  double lambda_slope = 0.0;
  double c0 = 0.5;

  static Mode parse_mode(const std::string& s) {
    if (s == "prox") return Mode::prox;
    if (s == "alg1") return Mode::alg1;
    if (s == "corollary") return Mode::corollary;
    if (s == "fixed") return Mode::fixed;
    throw ConfigError("unknown coefficient schedule mode '" + s +
                      "' (expected prox|alg1|corollary|fixed)");
  }

  double lambda_at(int m) const {
    return lambda0 + lambda_slope * static_cast<double>(m - 1);
  }

  /// Coefficient for the m-th even update of a run with M data rounds.
  double at(int m, int total_data_rounds) const {
    switch (mode) {
      case Mode::prox: {
        if (!(mu > 0.0)) throw ConfigError("prox schedule requires mu > 0");
        const double lam = lambda_at(m);
        if (lam < 0.0) throw ConfigError("prox schedule: lambda_m must be >= 0");
        return mu / (mu + lam);
      }
      case Mode::alg1: {
        const double lam = lambda_at(m);
        if (lam < 0.0) throw ConfigError("alg1 schedule: lambda_m must be >= 0");
        return lam / 2.0;
      }
      case Mode::corollary:
        if (total_data_rounds < 1)
          throw ConfigError("corollary schedule: M must be >= 1");
        return c0 / std::sqrt(static_cast<double>(total_data_rounds));
      case Mode::fixed:
        return c0;
    }
    throw ConfigError("unknown coefficient schedule mode");
  }
};

}  // namespace upfl
