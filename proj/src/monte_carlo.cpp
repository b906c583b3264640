#include "cascades/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "cascades/error.hpp"

namespace cascades {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

CounterStream::CounterStream(std::uint64_t master_seed, std::uint64_t trial_index)
    : key_{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)},
      trial_(trial_index) {}

void CounterStream::refill() {
  buffer_ = philox4x32({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                        static_cast<std::uint32_t>(trial_), static_cast<std::uint32_t>(trial_ >> 32)},
                       key_);
  ++block_;
  used_ = 0;
}

std::uint64_t CounterStream::next_u64() {
  if (used_ >= 4) refill();
  const std::uint64_t lo = buffer_[used_];
  const std::uint64_t hi = buffer_[used_ + 1];
  used_ += 2;
  return (hi << 32) | lo;
}

CounterStream derive_stream(std::uint64_t master_seed, std::uint64_t trial_index) {
  return CounterStream(master_seed, trial_index);
}

double ErrorEstimate::mean(std::int64_t t) const {
  return static_cast<double>(error_counts.at(static_cast<std::size_t>(t - 1))) /
         static_cast<double>(trials);
}

double ErrorEstimate::stderr_of_mean(std::int64_t t) const {
  const double m = mean(t);
  return std::sqrt(m * (1.0 - m) / static_cast<double>(trials));
}

ErrorEstimate estimate_errors(const UrnParams& params, const Schedule& schedule,
                              std::int64_t t_max, std::int64_t trials, std::uint64_t master_seed,
                              int workers, ThetaSampling sampling) {
  if (trials < 1) throw Error(ErrorCode::DomainError, "trials must be >= 1");
  if (t_max < 1) throw Error(ErrorCode::DomainError, "t_max must be >= 1");
  workers = static_cast<int>(std::clamp<std::int64_t>(workers, 1, trials));

  std::vector<double> reveal_probs;
  reveal_probs.reserve(static_cast<std::size_t>(t_max));
  for (std::int64_t t = 1; t <= t_max; ++t) reveal_probs.push_back(schedule.evaluate(t));

  const auto n = static_cast<std::size_t>(t_max);
  struct Counts {
    std::vector<std::int64_t> errors;
    std::vector<std::int64_t> revealers;
  };
  std::vector<Counts> partial(static_cast<std::size_t>(workers),
                              Counts{std::vector<std::int64_t>(n, 0), std::vector<std::int64_t>(n, 0)});

  auto run_range = [&](std::int64_t begin, std::int64_t end, Counts& counts) {
    for (std::int64_t trial = begin; trial < end; ++trial) {
      CounterStream stream = derive_stream(master_seed, static_cast<std::uint64_t>(trial));
      const double u_theta = stream.next_uniform();
      Label theta = u_theta < 0.5 ? Label::One : Label::Two;
      if (sampling == ThetaSampling::Stratified) theta = trial % 2 == 0 ? Label::One : Label::Two;
      run_trajectory(params, reveal_probs, theta, stream,
                     [&](std::int64_t t, Label, bool revealer, Label z, double) {
                       const auto k = static_cast<std::size_t>(t - 1);
                       counts.errors[k] += z != theta ? 1 : 0;
                       counts.revealers[k] += revealer ? 1 : 0;
                     });
    }
  };

  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    const std::int64_t begin = trials * w / workers;
    const std::int64_t end = trials * (w + 1) / workers;
    if (w + 1 == workers) {
      run_range(begin, end, partial[static_cast<std::size_t>(w)]);
    } else {
      pool.emplace_back(run_range, begin, end, std::ref(partial[static_cast<std::size_t>(w)]));
    }
  }
  for (auto& th : pool) th.join();

  ErrorEstimate est;
  est.trials = trials;
  est.error_counts.assign(n, 0);
  est.revealer_counts.assign(n, 0);
  for (const auto& c : partial) {
    for (std::size_t k = 0; k < n; ++k) {
      est.error_counts[k] += c.errors[k];
      est.revealer_counts[k] += c.revealers[k];
    }
  }
  return est;
}

}  // namespace cascades
