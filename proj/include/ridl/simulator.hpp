#pragma once

// Monte Carlo estimate of the noise index: M independent trajectories of
// x(t+1) = P(t) x(t) + n(t) from x(0) = 0, each with its own RNG stream.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "ridl/errors.hpp"
#include "ridl/graph.hpp"
#include "ridl/linalg.hpp"
#include "ridl/ridl.hpp"
#include "ridl/rng.hpp"
#include "ridl/tolerances.hpp"

namespace ridl {

/// Zero-mean noise laws, each scaled to variance sigma2.
enum class NoiseDistribution { gaussian, rademacher, uniform };

inline constexpr std::string_view to_string(NoiseDistribution d) {
  switch (d) {
    case NoiseDistribution::gaussian: return "gaussian";
    case NoiseDistribution::rademacher: return "rademacher";
    case NoiseDistribution::uniform: return "uniform";
  }
  return "unknown";
}

inline NoiseDistribution parse_noise(std::string_view name) {
  for (auto d : {NoiseDistribution::gaussian, NoiseDistribution::rademacher, NoiseDistribution::uniform})
    if (to_string(d) == name) return d;
  throw ValidationError("unknown noise distribution \"" + std::string(name) + "\"");
}

struct SimConfig {
  /// Time steps T; 0 selects default_horizon().
  std::size_t horizon = 0;
  /// Independent replications M.
  std::size_t ensemble = 1000;
  NoiseDistribution noise = NoiseDistribution::gaussian;
  /// Relative change of the ensemble-mean disagreement between the final 10%
  /// of the horizon and the 10% before it, below which the run counts as converged.
  double burn_in_check = 0.05;
  std::uint64_t seed = 1;
  /// Worker threads; 0 uses the hardware concurrency. Results do not depend on it.
  std::size_t threads = 0;
};

struct SimEstimate {
  double j_hat = 0.0;
  double std_error = 0.0;
  std::size_t samples_used = 0;
  bool converged = false;
  double drift = 0.0;
  std::uint64_t seed = 0;
  std::size_t horizon = 0;
  /// Ensemble mean of ||x(t) - mean(x(t)) 1||^2 for t = 1..T.
  std::vector<double> mean_disagreement;
};

/// P x + n.
inline Vector step(const Vector& x, const StochasticMatrixSample& sample, const Vector& noise) {
  if (sample.matrix.rows() != x.size() || sample.matrix.cols() != x.size() || noise.size() != x.size()) {
    throw ValidationError("step: dimension mismatch");
  }
  return sample.matrix * x + noise;
}

/// ||x - mean(x) 1||^2
inline double disagreement(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s;
}

inline double disagreement(const Vector& x) {
  return disagreement(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

/// Sparse evaluation of (I - eps L(pattern)) x.
inline void apply_ridl(const UndirectedGraph& g, double epsilon, const ActivationPattern& pattern,
                       std::span<const double> x, std::span<double> out) {
  for (std::size_t i = 0; i < g.n(); ++i) {
    double acc = 0.0;
    if (pattern.gamma[i]) {
      for (auto j : g.neighbors(i))
        if (pattern.gamma[j]) acc += x[i] - x[j];
    }
    out[i] = x[i] - epsilon * acc;
  }
}

/// Smallest T with (1 - eps p^2 lambda_2)^(2T) < 1e-4, capped at Limits::max_horizon.
inline std::size_t default_horizon(const UndirectedGraph& g, const RidlConfig& cfg) {
  const SpectralData s = laplacian_spectrum(g);
  const double rho = 1.0 - cfg.epsilon * cfg.p * cfg.p * s[1];
  if (!(rho > 0.0)) return 1;
  if (!(rho < 1.0)) return Limits::max_horizon;
  const double t = std::ceil(std::log(1e-4) / (2.0 * std::log(rho)));
  return static_cast<std::size_t>(std::clamp(t, 1.0, static_cast<double>(Limits::max_horizon)));
}

namespace sim_detail {

class NoiseSource {
 public:
  NoiseSource(NoiseDistribution d, double sigma2) : dist_(d), sigma_(std::sqrt(sigma2)) {}

  double operator()(Rng& rng) {
    if (sigma_ == 0.0) return 0.0;
    switch (dist_) {
      case NoiseDistribution::gaussian: return gauss_(rng) * sigma_;
      case NoiseDistribution::rademacher: return uniform01(rng) < 0.5 ? sigma_ : -sigma_;
      case NoiseDistribution::uniform: return (2.0 * uniform01(rng) - 1.0) * std::sqrt(3.0) * sigma_;
    }
    return 0.0;
  }

 private:
  NoiseDistribution dist_;
  double sigma_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

struct ChunkResult {
  std::vector<double> final_disagreement;
  std::vector<double> curve_sum;
};

}  // namespace sim_detail

inline SimEstimate estimate_noise_index(const UndirectedGraph& g, const RidlConfig& cfg, const SimConfig& sim) {
  cfg.validate_for(g);
  const auto cond = check_consensus_conditions(g, cfg);
  if (!cond.passed()) throw ValidationError("estimate_noise_index: consensus conditions fail");
  if (sim.ensemble == 0) throw ValidationError("estimate_noise_index: ensemble must be at least 1");
  if (!(sim.burn_in_check > 0.0)) throw ValidationError("estimate_noise_index: burn_in_check must be positive");

  const std::size_t n = g.n();
  const std::size_t horizon = sim.horizon ? sim.horizon : default_horizon(g, cfg);
  const std::size_t m = sim.ensemble;
  // The chunking depends only on M, so the reduction order is fixed.
  const std::size_t chunks = std::min<std::size_t>(m, 64);

  std::vector<sim_detail::ChunkResult> results(chunks);
  auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = c * m / chunks;
    const std::size_t end = (c + 1) * m / chunks;
    auto& res = results[c];
    res.final_disagreement.reserve(end - begin);
    res.curve_sum.assign(horizon, 0.0);
    std::vector<double> x(n), next(n);
    ActivationPattern pattern;
    pattern.gamma.resize(n);
    for (std::size_t r = begin; r < end; ++r) {
      Rng rng = make_stream(sim.seed, r);
      sim_detail::NoiseSource noise(sim.noise, cfg.sigma2);
      std::fill(x.begin(), x.end(), 0.0);
      for (std::size_t t = 0; t < horizon; ++t) {
        for (auto& gi : pattern.gamma) gi = uniform01(rng) < cfg.p ? 1 : 0;
        apply_ridl(g, cfg.epsilon, pattern, x, next);
        for (std::size_t i = 0; i < n; ++i) next[i] += noise(rng);
        std::swap(x, next);
        res.curve_sum[t] += disagreement(x);
      }
      res.final_disagreement.push_back(disagreement(x));
    }
  };

  std::size_t workers = sim.threads ? sim.threads : std::max(1U, std::thread::hardware_concurrency());
  workers = std::min(workers, chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next_chunk{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t c = next_chunk++; c < chunks; c = next_chunk++) run_chunk(c);
      });
    }
  }

  SimEstimate est;
  est.seed = sim.seed;
  est.horizon = horizon;
  est.samples_used = m;
  est.mean_disagreement.assign(horizon, 0.0);
  const double nd = static_cast<double>(n);
  double sum = 0.0;
  for (const auto& res : results) {
    for (double d : res.final_disagreement) sum += d / nd;
    for (std::size_t t = 0; t < horizon; ++t) est.mean_disagreement[t] += res.curve_sum[t];
  }
  for (auto& v : est.mean_disagreement) v /= static_cast<double>(m);
  est.j_hat = sum / static_cast<double>(m);
  if (m > 1) {
    double ss = 0.0;
    for (const auto& res : results)
      for (double d : res.final_disagreement) ss += (d / nd - est.j_hat) * (d / nd - est.j_hat);
    est.std_error = std::sqrt(ss / static_cast<double>(m - 1) / static_cast<double>(m));
  }

  // Drift test: mean over the final window of w = ceil(T/10) steps against
  // the mean over the w steps before it.
  if (horizon >= 2) {
    const std::size_t w = std::max<std::size_t>(1, std::min((horizon + 9) / 10, horizon / 2));
    double last = 0.0, before = 0.0;
    for (std::size_t t = horizon - w; t < horizon; ++t) last += est.mean_disagreement[t];
    for (std::size_t t = horizon - 2 * w; t < horizon - w; ++t) before += est.mean_disagreement[t];
    last /= static_cast<double>(w);
    before /= static_cast<double>(w);
    est.drift = last > 0.0 ? std::abs(last - before) / last : 0.0;
    est.converged = est.drift < sim.burn_in_check;
  } else {
    est.drift = std::numeric_limits<double>::infinity();
    est.converged = false;
  }
  return est;
}

}  // namespace ridl
