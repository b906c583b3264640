#pragma once

// Monte Carlo simulation of the full generative model with reproducible,
// worker-count-independent output.

#include <array>
#include <cstdint>
#include <vector>

#include "cascades/model.hpp"
#include "cascades/schedule.hpp"

namespace cascades {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Uniform stream for one trial. The key is the master seed and the upper half
// of the counter is the trial index, so every (seed, trial) pair owns a
// disjoint, reproducible stream.
class CounterStream {
 public:
  CounterStream(std::uint64_t master_seed, std::uint64_t trial_index);

  std::uint64_t next_u64();
  // 53-bit uniform in [0, 1).
  double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t trial_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

CounterStream derive_stream(std::uint64_t master_seed, std::uint64_t trial_index);

struct TrajectoryRecord {
  Label theta = Label::One;
  // Index k holds time t = k + 1.
  std::vector<Label> signals;
  std::vector<std::uint8_t> revealers;
  std::vector<Label> actions;
  std::vector<double> log_ratios;  // J_t after player t; J_0 = 0
  std::vector<std::uint8_t> errors;
};

// Runs players 1..reveal_probs.size(). Per step the stream is read exactly
// twice: the signal first, then the revealer flag. `on_step(t, x, revealer, z, j)`
// sees every step.
template <class Stream, class OnStep>
void run_trajectory(const UrnParams& params, const std::vector<double>& reveal_probs,
                    Label theta, Stream& stream, OnStep&& on_step) {
  double log_ratio = 0.0;
  for (std::size_t k = 0; k < reveal_probs.size(); ++k) {
    const double p = reveal_probs[k];
    const double u_signal = stream.next_uniform();
    const double u_reveal = stream.next_uniform();
    const Label signal = u_signal < params.majority_prob() ? theta : opposite(theta);
    const bool revealer = u_reveal < p;
    const Regime regime = classify(log_ratio, params);
    const Label action = decide(regime, signal, revealer);
    log_ratio += log_update_factor(regime, action, p, params);
    on_step(static_cast<std::int64_t>(k + 1), signal, revealer, action, log_ratio);
  }
}

template <class Stream>
TrajectoryRecord simulate_trajectory(const UrnParams& params, const Schedule& schedule,
                                     Label theta, std::int64_t t_max, Stream& stream) {
  std::vector<double> reveal_probs;
  reveal_probs.reserve(static_cast<std::size_t>(t_max));
  for (std::int64_t t = 1; t <= t_max; ++t) reveal_probs.push_back(schedule.evaluate(t));

  TrajectoryRecord rec;
  rec.theta = theta;
  run_trajectory(params, reveal_probs, theta, stream,
                 [&](std::int64_t, Label x, bool revealer, Label z, double j) {
                   rec.signals.push_back(x);
                   rec.revealers.push_back(revealer ? 1 : 0);
                   rec.actions.push_back(z);
                   rec.log_ratios.push_back(j);
                   rec.errors.push_back(z != theta ? 1 : 0);
                 });
  return rec;
}

enum class ThetaSampling : std::uint8_t {
  // One uniform per trial, before step 1: theta = 1 iff u < 1/2.
  PerTrial,
  // Even trial indices use theta = 1, odd use theta = 2; the theta variate is
  // still consumed so streams line up with PerTrial.
  Stratified,
};

struct ErrorEstimate {
  std::int64_t trials = 0;
  // Index k holds time t = k + 1.
  std::vector<std::int64_t> error_counts;
  std::vector<std::int64_t> revealer_counts;

  std::int64_t t_max() const { return static_cast<std::int64_t>(error_counts.size()); }
  double mean(std::int64_t t) const;
  double stderr_of_mean(std::int64_t t) const;
};

// Throws DomainError if trials < 1 or t_max < 1. Output is identical for any
// worker count.
ErrorEstimate estimate_errors(const UrnParams& params, const Schedule& schedule,
                              std::int64_t t_max, std::int64_t trials, std::uint64_t master_seed,
                              int workers = 1, ThetaSampling sampling = ThetaSampling::PerTrial);

}  // namespace cascades
