#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "upfl/errors.hpp"
#include "upfl/model.hpp"
#include "upfl/rng.hpp"

namespace upfl {

struct Sample {
  std::vector<double> x;
  int y = 0;

  bool operator==(const Sample&) const = default;
};

struct DeviceShard {
  int device_id = 0;
  std::vector<Sample> train;
  std::vector<Sample> test;

  bool operator==(const DeviceShard&) const = default;
};

/// Per-device sample counts: either fixed, or lognormal clamped to a range.
struct SizeSpec {
  enum class Mode { fixed, lognormal };
  Mode mode = Mode::lognormal;
  int fixed_n = 150;
  double log_mean = 5.0106352940962555;  // ln 150
  double log_sigma = 1.0;
  int min_n = 20;
  int max_n = 2000;

  static SizeSpec fixed(int n) {
    SizeSpec s;
    s.mode = Mode::fixed;
    s.fixed_n = n;
    return s;
  }

  int draw(RngStream& rng) const {
    if (mode == Mode::fixed) return fixed_n;
    const double n = std::exp(log_mean + log_sigma * rng.normal());
    const long r = std::lround(n);
    return static_cast<int>(std::clamp<long>(r, min_n, max_n));
  }
};

/// Immutable collection of per-device shards sharing one feature/label space.
///
/// shard() is the accessor the training path must use; it counts reads so
/// tests can assert that extrapolation-only rounds touch no client data.
/// Metric evaluation goes through eval_shard(), which does not count.
class FederatedDataset {
public:
  FederatedDataset(std::vector<DeviceShard> devices, int dim_x, int classes,
                   std::optional<uint64_t> seed = std::nullopt)
      : devices_(std::move(devices)), dim_x_(dim_x), classes_(classes), seed_(seed) {
    validate();
  }

  FederatedDataset(const FederatedDataset& o)
      : devices_(o.devices_), dim_x_(o.dim_x_), classes_(o.classes_), seed_(o.seed_) {}

  int dim_x() const { return dim_x_; }
  int classes() const { return classes_; }
  std::optional<uint64_t> seed() const { return seed_; }
  ShapeTag shape() const { return ShapeTag{dim_x_, classes_}; }
  size_t num_devices() const { return devices_.size(); }

  /// Training-path accessor; every call is counted.
  const DeviceShard& shard(size_t idx) const {
    train_reads_.fetch_add(1, std::memory_order_relaxed);
    return devices_.at(idx);
  }

  /// Measurement-path accessor (metrics, diagnostics); not counted.
  const DeviceShard& eval_shard(size_t idx) const { return devices_.at(idx); }

  uint64_t shard_read_count() const {
    return train_reads_.load(std::memory_order_relaxed);
  }

  /// Data fractions p_i from training-set sizes.
  std::vector<double> device_weights() const {
    std::vector<double> w(devices_.size());
    double total = 0.0;
    for (size_t i = 0; i < devices_.size(); ++i) {
      w[i] = static_cast<double>(devices_[i].train.size());
      total += w[i];
    }
    for (double& x : w) x /= total;
    return w;
  }

  bool same_content(const FederatedDataset& o) const {
    return devices_ == o.devices_ && dim_x_ == o.dim_x_ && classes_ == o.classes_;
  }

private:
  void validate() const {
    if (devices_.empty()) throw SchemaError("dataset has no devices");
    if (dim_x_ < 1 || classes_ < 2)
      throw SchemaError("dataset dimensions invalid: d_x=" + std::to_string(dim_x_) +
                        " C=" + std::to_string(classes_));
    std::vector<int> seen;
    for (const auto& d : devices_) {
      if (d.train.empty())
        throw SchemaError("device " + std::to_string(d.device_id) +
                          " has an empty train split");
      for (const auto* split : {&d.train, &d.test}) {
        for (const auto& s : *split) {
          if (static_cast<int>(s.x.size()) != dim_x_)
            throw SchemaError("device " + std::to_string(d.device_id) +
                              ": feature length " + std::to_string(s.x.size()) +
                              " != d_x " + std::to_string(dim_x_));
          for (double v : s.x)
            if (!std::isfinite(v))
              throw SchemaError("device " + std::to_string(d.device_id) +
                                ": non-finite feature");
          if (s.y < 0 || s.y >= classes_)
            throw SchemaError("device " + std::to_string(d.device_id) + ": label " +
                              std::to_string(s.y) + " outside [0," +
                              std::to_string(classes_) + ")");
        }
      }
      seen.push_back(d.device_id);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
      throw SchemaError("duplicate device_id in dataset");
  }

  std::vector<DeviceShard> devices_;
  int dim_x_;
  int classes_;
  std::optional<uint64_t> seed_;
  mutable std::atomic<uint64_t> train_reads_{0};
};

struct SyntheticSpec {
  double beta = 0.0;       // spread of per-device logit-map means
  double gamma = 0.0;      // spread of per-device feature means
  bool iid = false;        // single shared logit map and feature mean
  int num_devices = 30;
  int dim_x = 20;
  int classes = 10;
  SizeSpec sizes;
  uint64_t seed = 0;
};

/// Logit map (W, b) used while generating one device's labels.
struct LogitMap {
  std::vector<double> w;  // classes x dim_x, row-major
  std::vector<double> b;  // classes
};

namespace detail {

// Per-device generation state. Streams are keyed by (seed, purpose,
// device_id) so the result is independent of generation order.
inline LogitMap synthetic_logit_map(const SyntheticSpec& spec, int device_id) {
  LogitMap lm;
  lm.w.resize(static_cast<size_t>(spec.classes) * static_cast<size_t>(spec.dim_x));
  lm.b.resize(static_cast<size_t>(spec.classes));
  if (spec.iid) {
    RngStream rng = RngStream::keyed(spec.seed, "syn/shared-logits");
    for (double& v : lm.w) v = rng.normal();
    for (double& v : lm.b) v = rng.normal();
  } else {
    RngStream rng = RngStream::keyed(spec.seed, "syn/logits",
                                     static_cast<uint64_t>(device_id));
    const double u_k = std::sqrt(spec.beta) * rng.normal();
    for (double& v : lm.w) v = u_k + rng.normal();
    for (double& v : lm.b) v = u_k + rng.normal();
  }
  return lm;
}

inline std::vector<double> synthetic_feature_mean(const SyntheticSpec& spec,
                                                  int device_id) {
  std::vector<double> v(static_cast<size_t>(spec.dim_x));
  if (spec.iid) {
    RngStream rng = RngStream::keyed(spec.seed, "syn/shared-mean");
    for (double& x : v) x = rng.normal();
  } else {
    RngStream rng = RngStream::keyed(spec.seed, "syn/mean",
                                     static_cast<uint64_t>(device_id));
    const double b_k = std::sqrt(spec.gamma) * rng.normal();
    for (double& x : v) x = b_k + rng.normal();
  }
  return v;
}

inline int argmax_label(const LogitMap& lm, const std::vector<double>& x,
                        int classes, int dim_x) {
  int best = 0;
  double best_z = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < classes; ++c) {
    double z = lm.b[static_cast<size_t>(c)];
    const double* row = lm.w.data() + static_cast<size_t>(c) * static_cast<size_t>(dim_x);
    for (int j = 0; j < dim_x; ++j) z += row[j] * x[static_cast<size_t>(j)];
    if (z > best_z) {
      best_z = z;
      best = c;
    }
  }
  return best;
}

}  // namespace detail

/// Non-iid synthetic classification data.
///
/// Device k draws a logit map W_k, b_k with entries Normal(u_k, 1),
/// u_k ~ Normal(0, beta); features x ~ Normal(v_k, Sigma) with diagonal
/// Sigma_jj = j^-1.2 and v_k entrywise Normal(B_k, 1), B_k ~ Normal(0, gamma);
/// labels are argmax of softmax(W_k x + b_k). With iid set, one shared
/// (W, b, v) is drawn for all devices and beta/gamma are ignored.
/// Fully determined by spec.seed.
inline FederatedDataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.num_devices < 1 || spec.dim_x < 1 || spec.classes < 2)
    throw ConfigError("generate_synthetic: need devices >= 1, d_x >= 1, C >= 2");
  if (spec.beta < 0 || spec.gamma < 0)
    throw ConfigError("generate_synthetic: beta and gamma must be >= 0");

  std::vector<double> sigma_diag(static_cast<size_t>(spec.dim_x));
  for (int j = 0; j < spec.dim_x; ++j)
    sigma_diag[static_cast<size_t>(j)] = std::pow(static_cast<double>(j + 1), -1.2);

  std::vector<DeviceShard> devices;
  devices.reserve(static_cast<size_t>(spec.num_devices));
  for (int k = 0; k < spec.num_devices; ++k) {
    const LogitMap lm = detail::synthetic_logit_map(spec, k);
    const std::vector<double> mean = detail::synthetic_feature_mean(spec, k);

    RngStream size_rng = RngStream::keyed(spec.seed, "syn/size", static_cast<uint64_t>(k));
    const int n_k = spec.sizes.draw(size_rng);

    RngStream x_rng = RngStream::keyed(spec.seed, "syn/x", static_cast<uint64_t>(k));
    DeviceShard shard;
    shard.device_id = k;
    shard.train.reserve(static_cast<size_t>(n_k));
    for (int s = 0; s < n_k; ++s) {
      Sample smp;
      smp.x.resize(static_cast<size_t>(spec.dim_x));
      for (int j = 0; j < spec.dim_x; ++j)
        smp.x[static_cast<size_t>(j)] =
            mean[static_cast<size_t>(j)] +
            std::sqrt(sigma_diag[static_cast<size_t>(j)]) * x_rng.normal();
      smp.y = detail::argmax_label(lm, smp.x, spec.classes, spec.dim_x);
      shard.train.push_back(std::move(smp));
    }
    devices.push_back(std::move(shard));
  }
  return FederatedDataset(std::move(devices), spec.dim_x, spec.classes, spec.seed);
}

/// Per-device shuffled split; train keeps ceil((1-f) * n). Deterministic in seed.
inline FederatedDataset split_train_test(const FederatedDataset& ds,
                                         double test_fraction, uint64_t seed) {
  if (test_fraction < 0.0 || test_fraction >= 1.0)
    throw ConfigError("split_train_test: test_fraction must lie in [0, 1)");
  std::vector<DeviceShard> out;
  out.reserve(ds.num_devices());
  for (size_t i = 0; i < ds.num_devices(); ++i) {
    const DeviceShard& d = ds.eval_shard(i);
    std::vector<Sample> all = d.train;
    all.insert(all.end(), d.test.begin(), d.test.end());
    const size_t n = all.size();
    if (test_fraction > 0.0 && n < 2)
      throw SplitError("device " + std::to_string(d.device_id) +
                       ": need at least 2 samples to split, have " + std::to_string(n));
    const size_t n_test =
        n - static_cast<size_t>(std::ceil((1.0 - test_fraction) * static_cast<double>(n)));
    RngStream rng = RngStream::keyed(seed, "split",
                                     static_cast<uint64_t>(d.device_id));
    std::vector<size_t> idx(n);
    for (size_t j = 0; j < n; ++j) idx[j] = j;
    rng.shuffle(idx);
    DeviceShard nd;
    nd.device_id = d.device_id;
    for (size_t j = 0; j < n; ++j) {
      Sample& s = all[idx[j]];
      if (j < n - n_test)
        nd.train.push_back(std::move(s));
      else
        nd.test.push_back(std::move(s));
    }
    out.push_back(std::move(nd));
  }
  return FederatedDataset(std::move(out), ds.dim_x(), ds.classes(), ds.seed());
}

/// Scale every feature vector by 1/max_norm so that all norms are <= 1.
/// Labels are unchanged. Returns the scale that was applied.
inline std::pair<FederatedDataset, double> normalize_features(const FederatedDataset& ds) {
  double max_norm = 0.0;
  for (size_t i = 0; i < ds.num_devices(); ++i) {
    const DeviceShard& d = ds.eval_shard(i);
    for (const auto* split : {&d.train, &d.test}) {
      for (const Sample& s : *split) {
        double n2 = 0.0;
        for (double v : s.x) n2 += v * v;
        max_norm = std::max(max_norm, std::sqrt(n2));
      }
    }
  }
  const double scale = max_norm > 0.0 ? 1.0 / max_norm : 1.0;
  std::vector<DeviceShard> out;
  out.reserve(ds.num_devices());
  for (size_t i = 0; i < ds.num_devices(); ++i) {
    DeviceShard d = ds.eval_shard(i);
    for (auto* split : {&d.train, &d.test})
      for (Sample& s : *split)
        for (double& v : s.x) v *= scale;
    out.push_back(std::move(d));
  }
  return {FederatedDataset(std::move(out), ds.dim_x(), ds.classes(), ds.seed()), scale};
}

// File format: JSON lines. The first line is a header object {"d_x":..,"C":..};
// each following line is {"device":int,"x":[..],"y":int,"split":"train"|"test"}.

inline void save_dataset(const FederatedDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("save_dataset: cannot open " + path + " for writing");
  nlohmann::json header;
  header["d_x"] = ds.dim_x();
  header["C"] = ds.classes();
  out << header.dump() << "\n";
  for (size_t i = 0; i < ds.num_devices(); ++i) {
    const DeviceShard& d = ds.eval_shard(i);
    for (const auto& [split, name] :
         {std::pair{&d.train, "train"}, std::pair{&d.test, "test"}}) {
      for (const Sample& s : *split) {
        nlohmann::json rec;
        rec["device"] = d.device_id;
        rec["x"] = s.x;
        rec["y"] = s.y;
        rec["split"] = name;
        out << rec.dump() << "\n";
      }
    }
  }
  if (!out) throw ConfigError("save_dataset: write to " + path + " failed");
}

inline FederatedDataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_dataset: cannot open " + path);
  std::string line;
  long line_no = 0;

  auto parse_line = [&](const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ParseError("invalid JSON", line_no);
    return j;
  };

  if (!std::getline(in, line)) throw ParseError("missing header line", 1);
  ++line_no;
  nlohmann::json header = parse_line(line);
  if (!header.is_object() || !header.contains("d_x") || !header.contains("C"))
    throw ParseError("header must carry d_x and C", line_no);
  const int dim_x = header["d_x"].get<int>();
  const int classes = header["C"].get<int>();

  std::map<int, DeviceShard> by_device;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json rec = parse_line(line);
    for (const char* key : {"device", "x", "y", "split"})
      if (!rec.contains(key))
        throw ParseError(std::string("record missing field '") + key + "'", line_no);
    Sample s;
    s.x = rec["x"].get<std::vector<double>>();
    s.y = rec["y"].get<int>();
    if (static_cast<int>(s.x.size()) != dim_x)
      throw SchemaError("line " + std::to_string(line_no) + ": feature length " +
                        std::to_string(s.x.size()) + " != d_x " + std::to_string(dim_x));
    if (s.y < 0 || s.y >= classes)
      throw SchemaError("line " + std::to_string(line_no) + ": label " +
                        std::to_string(s.y) + " outside [0," + std::to_string(classes) + ")");
    const int dev = rec["device"].get<int>();
    const std::string split = rec["split"].get<std::string>();
    DeviceShard& shard = by_device[dev];
    shard.device_id = dev;
    if (split == "train")
      shard.train.push_back(std::move(s));
    else if (split == "test")
      shard.test.push_back(std::move(s));
    else
      throw ParseError("split must be 'train' or 'test'", line_no);
  }
  if (by_device.empty()) throw ParseError("dataset has no records", line_no);
  std::vector<DeviceShard> devices;
  devices.reserve(by_device.size());
  for (auto& [id, shard] : by_device) devices.push_back(std::move(shard));
  return FederatedDataset(std::move(devices), dim_x, classes);
}

}  // namespace upfl
