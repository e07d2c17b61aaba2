#pragma once

// Martingale model of forecast evolution over a linear state space model
//
//   W_{n+1} = G W_n + Z_{n+1},   Z_n - E Z = sum_{j>=0} eps_n(n - j),
//
// where eps_n(k) is the information about the weather at time n revealed to
// the forecaster at time k. Forecasts F_{n|k} = E[W_n | eps entries revealed
// by k] then form a martingale in k.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mmfe {

using TimeIndex = std::int64_t;

/// Variance schedule of the disturbance array for one weather coordinate:
/// var eps_{n+j}(n) = sigma2 * gamma^(2j) for 0 <= j <= trunc_lag, zero beyond.
struct DisturbanceSchedule {
  double sigma2 = 1.0;
  double gamma = 0.95;
  double mean_z = 0.0;  ///< E Z_0
  int trunc_lag = 1;

  /// Smallest lag L with gamma^(2(L+1)) below 1e-12 (at least 1).
  static int default_trunc_lag(double gamma);
  static DisturbanceSchedule with_default_lag(double sigma2, double gamma, double mean_z);

  void validate() const;

  /// var eps_{n+lag}(n).
  double lag_variance(std::int64_t lag) const;
  /// Sum of lag variances over [first, last] (clipped to [0, trunc_lag]).
  double lag_variance_sum(std::int64_t first, std::int64_t last) const;
  /// var Z_0 = sum of all lag variances.
  double total_variance() const { return lag_variance_sum(0, trunc_lag); }
};

/// The weather/forecast generative model: G, per-coordinate schedules, and
/// the mean structure E W = (I - G)^{-1} E Z.
class MmfeModel {
 public:
  MmfeModel(Eigen::MatrixXd g, std::vector<DisturbanceSchedule> schedules);

  static MmfeModel scalar(double g, const DisturbanceSchedule& schedule);

  int dim() const { return static_cast<int>(g_.rows()); }
  int trunc_lag() const { return trunc_lag_; }
  const Eigen::MatrixXd& g() const { return g_; }
  const DisturbanceSchedule& schedule(int coord) const { return schedules_.at(coord); }
  const Eigen::VectorXd& mean_z() const { return mean_z_; }
  const Eigen::VectorXd& mean_w() const { return mean_w_; }

  /// Per-coordinate var eps_{n+lag}(n).
  Eigen::VectorXd lag_variances(std::int64_t lag) const;
  Eigen::VectorXd lag_variance_sums(std::int64_t first, std::int64_t last) const;

 private:
  Eigen::MatrixXd g_;
  std::vector<DisturbanceSchedule> schedules_;
  int trunc_lag_;
  Eigen::VectorXd mean_z_;
  Eigen::VectorXd mean_w_;
};

/// Target-time window of an epsilon array. Entries eps_n(k) are held for
/// first_target <= n <= last_target and k <= min(n, last_reveal); entries
/// with n - k > trunc_lag are identically zero.
struct TimeWindow {
  TimeIndex first_target = 0;
  TimeIndex last_target = 0;
  std::optional<TimeIndex> last_reveal;
};

/// Realized triangular disturbance array over a finite window.
class EpsilonArray {
 public:
  using ConstEntry = Eigen::Map<const Eigen::VectorXd>;

  EpsilonArray(int dim, int trunc_lag, TimeWindow window, std::uint64_t seed = 0);

  int dim() const { return dim_; }
  int trunc_lag() const { return trunc_lag_; }
  const TimeWindow& window() const { return window_; }
  std::uint64_t seed() const { return seed_; }

  /// True when eps_target(reveal) is available (possibly as a truncated zero).
  bool covers(TimeIndex target, TimeIndex reveal) const;

  /// eps_target(reveal). Throws InvalidHorizonError when reveal > target and
  /// IncompleteArrayError when the entry lies outside the window.
  ConstEntry at(TimeIndex target, TimeIndex reveal) const;
  double at(TimeIndex target, TimeIndex reveal, int coord) const { return at(target, reveal)(coord); }

  void set(TimeIndex target, TimeIndex reveal, const Eigen::Ref<const Eigen::VectorXd>& value);
  void set(TimeIndex target, TimeIndex reveal, int coord, double value);

  /// Sum of eps_target(r) over reveal times r in [first_reveal, last_reveal].
  Eigen::VectorXd reveal_sum(TimeIndex target, TimeIndex first_reveal, TimeIndex last_reveal) const;

 private:
  std::size_t offset(TimeIndex target, TimeIndex reveal) const;
  [[noreturn]] void throw_missing(TimeIndex target, TimeIndex reveal) const;

  int dim_;
  int trunc_lag_;
  TimeWindow window_;
  std::uint64_t seed_;
  std::vector<double> values_;
  Eigen::VectorXd zero_;
};

/// The counter-based draw used to fill epsilon arrays: eps_target(reveal) for
/// one coordinate, scaled by the schedule's standard deviation.
double epsilon_draw(const MmfeModel& model, std::uint64_t seed, TimeIndex target, TimeIndex reveal,
                    int coord);

/// Independent Gaussian entries with the schedule variances; deterministic in
/// `seed` and independent of the window shape.
EpsilonArray sample_epsilon_array(const MmfeModel& model, const TimeWindow& window, std::uint64_t seed);

/// F_{n|k}: the forecast of W_n made with the information revealed by time k.
Eigen::VectorXd forecast(const MmfeModel& model, const EpsilonArray& eps,
                         const Eigen::Ref<const Eigen::VectorXd>& w_k, TimeIndex k, TimeIndex n);

/// D_{n|k} = sum_{i=0..n-k} G^i eps_{n-i}(k).
Eigen::VectorXd martingale_difference(const MmfeModel& model, const EpsilonArray& eps, TimeIndex n,
                                      TimeIndex k);

/// Realized W_n obtained by running the state recursion forward from W_start.
Eigen::VectorXd realized_weather(const MmfeModel& model, const EpsilonArray& eps,
                                 const Eigen::Ref<const Eigen::VectorXd>& w_start, TimeIndex start,
                                 TimeIndex n);

/// r-period forward forecast (F_{n+1|n}, ..., F_{n+r|n}).
struct ForecastVector {
  TimeIndex base_time = 0;
  std::vector<Eigen::VectorXd> values;

  int horizon() const { return static_cast<int>(values.size()); }
  /// Entry j in 1..r, i.e. F_{base+j|base}.
  const Eigen::VectorXd& entry(int j) const { return values.at(j - 1); }
};

ForecastVector forecast_vector(const MmfeModel& model, const EpsilonArray& eps,
                               const Eigen::Ref<const Eigen::VectorXd>& w_n, TimeIndex n, int r);

/// Information revealed at time n+1 that drives one roll of an r-vector:
/// reveal[i] = eps_{n+1+i}(n+1) for 0 <= i <= r, and `aggregate` the
/// long-horizon term added to the last entry.
struct FreshNoise {
  std::vector<Eigen::VectorXd> reveal;
  Eigen::VectorXd aggregate;
};

/// Fresh noise read from an array; aggregate = sum_{j<=n} eps_{n+1+r}(j).
FreshNoise fresh_noise_from_array(const MmfeModel& model, const EpsilonArray& eps, TimeIndex n, int r);

struct RollResult {
  Eigen::VectorXd w_next;
  ForecastVector next;
};

/// One step of the r-dimensional forecast Markov chain:
/// F_{n+1+j|n+1} = F_{n+1+j|n} + sum_{i<=j} G^i eps_{n+1+j-i}(n+1) for j < r,
/// F_{n+1+r|n+1} = G F_{n+r|n} + E Z + aggregate + sum_{i<=r} G^i eps_{n+1+r-i}(n+1),
/// W_{n+1} = F_{n+1|n} + eps_{n+1}(n+1).
RollResult roll_forecast_vector(const MmfeModel& model, const ForecastVector& fvec, const FreshNoise& fresh);

/// Scalar fast path of roll_forecast_vector for d = 1: `forecasts` holds
/// F_{n+1|n}..F_{n+r|n} and is updated in place; `reveal` has r+1 entries.
/// Returns W_{n+1}.
double roll_forecast_scalar(double g, double mean_z, std::span<double> forecasts,
                            std::span<const double> reveal, double aggregate);

/// W_{n+1}(G_k) = G w_cur + Z_{n+1}(G_k) with
/// Z_{n+1}(G_k) = F_{n+1|k} - G F_{n|k} + sum of eps_{n+1}(r), k < r <= n+1.
Eigen::VectorXd conditional_weather_step(const MmfeModel& model, const Eigen::Ref<const Eigen::VectorXd>& w_cur,
                                         const Eigen::Ref<const Eigen::VectorXd>& f_next_given_k,
                                         const Eigen::Ref<const Eigen::VectorXd>& f_cur_given_k,
                                         std::span<const Eigen::VectorXd> post_k_noise);

/// Conditional variance of Z_{n+1}(G_k) given G_k, per coordinate.
Eigen::VectorXd conditional_noise_variance(const MmfeModel& model, TimeIndex n, TimeIndex k);

/// The G_0-measurable part sum_{j<=0} eps_{n+1+r}(j) of the long-horizon term.
Eigen::VectorXd g0_aggregate(const MmfeModel& model, const EpsilonArray& frozen, TimeIndex n, int r);

/// Fresh noise for the conditional chain: aggregate = sum_{1<=j<=n} eps_{n+1+r}(j),
/// the part of the long-horizon term not fixed at time 0.
FreshNoise conditional_fresh_noise_from_array(const MmfeModel& model, const EpsilonArray& eps, TimeIndex n,
                                              int r);

/// One step of the forecast chain conditional on the time-0 information.
RollResult conditional_forecast_roll(const MmfeModel& model, const ForecastVector& fvec,
                                     const Eigen::Ref<const Eigen::VectorXd>& g0_agg, const FreshNoise& fresh);

/// Covariances of the roll increments beta_{n+1,j}, j = 0..r (index 0 is the
/// weather surprise). With `conditional_step` set the long-horizon term only
/// carries the variance not yet fixed at time 0; otherwise the full tail.
std::vector<Eigen::MatrixXd> roll_increment_covariances(const MmfeModel& model, int r,
                                                        std::optional<TimeIndex> conditional_step = {});

/// Comma-separated path export: header `n,W_n,F_{n+1|n},...,F_{n+r|n}`.
struct PathRecord {
  TimeIndex n = 0;
  Eigen::VectorXd w;
  ForecastVector forecasts;
};
void write_path_csv(std::ostream& out, std::span<const PathRecord> path);

inline Eigen::VectorXd vec1(double x) { return Eigen::VectorXd::Constant(1, x); }

}  // namespace mmfe
