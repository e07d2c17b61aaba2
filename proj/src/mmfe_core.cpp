#include "mmfe/mmfe_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "mmfe/errors.hpp"
#include "mmfe/linalg.hpp"
#include "mmfe/random.hpp"

namespace mmfe {

namespace {

std::string time_pair(TimeIndex target, TimeIndex reveal) {
  return "eps_" + std::to_string(target) + "(" + std::to_string(reveal) + ")";
}

void check_dim(const MmfeModel& model, Eigen::Index size, const char* what) {
  if (size != model.dim()) {
    throw ShapeError(std::string(what) + " has dimension " + std::to_string(size) + ", model has " +
                     std::to_string(model.dim()));
  }
}

void check_array(const MmfeModel& model, const EpsilonArray& eps) {
  if (eps.dim() != model.dim() || eps.trunc_lag() != model.trunc_lag()) {
    throw ShapeError("epsilon array shape does not match the model");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// DisturbanceSchedule

int DisturbanceSchedule::default_trunc_lag(double gamma) {
  if (!(gamma > 0.0)) return 1;
  const double lag = std::ceil(std::log(1e-12) / (2.0 * std::log(gamma)));
  return std::max(1, static_cast<int>(lag));
}

DisturbanceSchedule DisturbanceSchedule::with_default_lag(double sigma2, double gamma, double mean_z) {
  return DisturbanceSchedule{sigma2, gamma, mean_z, default_trunc_lag(gamma)};
}

void DisturbanceSchedule::validate() const {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw ParameterError("sigma2 must be finite and >= 0");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ParameterError("gamma must lie in [0, 1)");
  if (!std::isfinite(mean_z)) throw ParameterError("mean_z must be finite");
  if (trunc_lag < 1) throw ParameterError("trunc_lag must be >= 1");
}

double DisturbanceSchedule::lag_variance(std::int64_t lag) const {
  if (lag < 0 || lag > trunc_lag) return 0.0;
  return sigma2 * std::pow(gamma, 2.0 * static_cast<double>(lag));
}

double DisturbanceSchedule::lag_variance_sum(std::int64_t first, std::int64_t last) const {
  first = std::max<std::int64_t>(first, 0);
  last = std::min<std::int64_t>(last, trunc_lag);
  double s = 0.0;
  for (std::int64_t j = first; j <= last; ++j) s += lag_variance(j);
  return s;
}

// ---------------------------------------------------------------------------
// MmfeModel

MmfeModel::MmfeModel(Eigen::MatrixXd g, std::vector<DisturbanceSchedule> schedules)
    : g_(std::move(g)), schedules_(std::move(schedules)) {
  if (g_.rows() == 0 || g_.rows() != g_.cols()) throw ShapeError("G must be a non-empty square matrix");
  if (static_cast<Eigen::Index>(schedules_.size()) != g_.rows()) {
    throw ShapeError("one disturbance schedule per weather coordinate is required");
  }
  trunc_lag_ = schedules_.front().trunc_lag;
  for (const auto& s : schedules_) {
    s.validate();
    if (s.trunc_lag != trunc_lag_) throw ParameterError("all coordinates must share one trunc_lag");
  }
  if (!(spectral_radius(g_) < 1.0)) throw ParameterError("spectral radius of G must be < 1");

  mean_z_.resize(dim());
  for (int c = 0; c < dim(); ++c) mean_z_(c) = schedules_[c].mean_z;
  const Eigen::MatrixXd i_minus_g = Eigen::MatrixXd::Identity(dim(), dim()) - g_;
  mean_w_ = i_minus_g.partialPivLu().solve(mean_z_);
}

MmfeModel MmfeModel::scalar(double g, const DisturbanceSchedule& schedule) {
  return MmfeModel(Eigen::MatrixXd::Constant(1, 1, g), {schedule});
}

Eigen::VectorXd MmfeModel::lag_variances(std::int64_t lag) const {
  Eigen::VectorXd v(dim());
  for (int c = 0; c < dim(); ++c) v(c) = schedules_[c].lag_variance(lag);
  return v;
}

Eigen::VectorXd MmfeModel::lag_variance_sums(std::int64_t first, std::int64_t last) const {
  Eigen::VectorXd v(dim());
  for (int c = 0; c < dim(); ++c) v(c) = schedules_[c].lag_variance_sum(first, last);
  return v;
}

// ---------------------------------------------------------------------------
// EpsilonArray

EpsilonArray::EpsilonArray(int dim, int trunc_lag, TimeWindow window, std::uint64_t seed)
    : dim_(dim), trunc_lag_(trunc_lag), window_(window), seed_(seed) {
  if (dim < 1) throw ShapeError("epsilon array dimension must be >= 1");
  if (trunc_lag < 1) throw ParameterError("trunc_lag must be >= 1");
  if (window.last_target < window.first_target) throw ParameterError("empty epsilon array window");
  const auto targets = static_cast<std::size_t>(window.last_target - window.first_target + 1);
  values_.assign(targets * static_cast<std::size_t>(trunc_lag + 1) * static_cast<std::size_t>(dim), 0.0);
  zero_ = Eigen::VectorXd::Zero(dim);
}

bool EpsilonArray::covers(TimeIndex target, TimeIndex reveal) const {
  if (reveal > target) return false;
  if (target - reveal > trunc_lag_) return true;
  if (target < window_.first_target || target > window_.last_target) return false;
  return !window_.last_reveal || reveal <= *window_.last_reveal;
}

std::size_t EpsilonArray::offset(TimeIndex target, TimeIndex reveal) const {
  const auto row = static_cast<std::size_t>(target - window_.first_target);
  const auto lag = static_cast<std::size_t>(target - reveal);
  return (row * static_cast<std::size_t>(trunc_lag_ + 1) + lag) * static_cast<std::size_t>(dim_);
}

void EpsilonArray::throw_missing(TimeIndex target, TimeIndex reveal) const {
  if (reveal > target) {
    throw InvalidHorizonError(time_pair(target, reveal) + " has reveal time after its target time");
  }
  throw IncompleteArrayError(time_pair(target, reveal) + " lies outside the epsilon array window");
}

EpsilonArray::ConstEntry EpsilonArray::at(TimeIndex target, TimeIndex reveal) const {
  if (!covers(target, reveal)) throw_missing(target, reveal);
  if (target - reveal > trunc_lag_) return ConstEntry(zero_.data(), dim_);
  return ConstEntry(values_.data() + offset(target, reveal), dim_);
}

void EpsilonArray::set(TimeIndex target, TimeIndex reveal, const Eigen::Ref<const Eigen::VectorXd>& value) {
  if (value.size() != dim_) throw ShapeError("epsilon entry has the wrong dimension");
  if (!covers(target, reveal) || target - reveal > trunc_lag_) throw_missing(target, reveal);
  Eigen::Map<Eigen::VectorXd>(values_.data() + offset(target, reveal), dim_) = value;
}

void EpsilonArray::set(TimeIndex target, TimeIndex reveal, int coord, double value) {
  if (coord < 0 || coord >= dim_) throw ShapeError("epsilon coordinate out of range");
  if (!covers(target, reveal) || target - reveal > trunc_lag_) throw_missing(target, reveal);
  values_[offset(target, reveal) + static_cast<std::size_t>(coord)] = value;
}

Eigen::VectorXd EpsilonArray::reveal_sum(TimeIndex target, TimeIndex first_reveal, TimeIndex last_reveal) const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(dim_);
  // Entries beyond the truncation lag are zero and need no window coverage.
  first_reveal = std::max(first_reveal, target - trunc_lag_);
  for (TimeIndex r = first_reveal; r <= last_reveal; ++r) s += at(target, r);
  return s;
}

// ---------------------------------------------------------------------------
// Sampling

double epsilon_draw(const MmfeModel& model, std::uint64_t seed, TimeIndex target, TimeIndex reveal, int coord) {
  const double var = model.schedule(coord).lag_variance(target - reveal);
  if (var == 0.0) return 0.0;
  const std::uint64_t key = hash_words({seed, static_cast<std::uint64_t>(target),
                                        static_cast<std::uint64_t>(reveal), static_cast<std::uint64_t>(coord)});
  return std::sqrt(var) * standard_normal_at(key);
}

EpsilonArray sample_epsilon_array(const MmfeModel& model, const TimeWindow& window, std::uint64_t seed) {
  EpsilonArray eps(model.dim(), model.trunc_lag(), window, seed);
  const int lag_max = model.trunc_lag();
  for (TimeIndex n = window.first_target; n <= window.last_target; ++n) {
    for (int lag = 0; lag <= lag_max; ++lag) {
      const TimeIndex k = n - lag;
      if (window.last_reveal && k > *window.last_reveal) continue;
      for (int c = 0; c < model.dim(); ++c) eps.set(n, k, c, epsilon_draw(model, seed, n, k, c));
    }
  }
  return eps;
}

// ---------------------------------------------------------------------------
// Forecasts

Eigen::VectorXd forecast(const MmfeModel& model, const EpsilonArray& eps, const Eigen::Ref<const Eigen::VectorXd>& w_k,
                         TimeIndex k, TimeIndex n) {
  if (n < k) throw InvalidHorizonError("forecast target time precedes the information time");
  check_dim(model, w_k.size(), "w_k");
  check_array(model, eps);
  if (n == k) return w_k;
  // F_{m|k} - E W = G (F_{m-1|k} - E W) + sum_{r<=k} eps_m(r), started at F_{k|k} = W_k.
  Eigen::VectorXd acc = w_k - model.mean_w();
  for (TimeIndex m = k + 1; m <= n; ++m) {
    acc = model.g() * acc + eps.reveal_sum(m, m - model.trunc_lag(), k);
  }
  return model.mean_w() + acc;
}

Eigen::VectorXd martingale_difference(const MmfeModel& model, const EpsilonArray& eps, TimeIndex n, TimeIndex k) {
  if (k > n) throw InvalidHorizonError("martingale difference needs reveal time <= target time");
  check_array(model, eps);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(model.dim());
  for (TimeIndex m = k; m <= n; ++m) acc = model.g() * acc + eps.at(m, k);
  return acc;
}

Eigen::VectorXd realized_weather(const MmfeModel& model, const EpsilonArray& eps,
                                 const Eigen::Ref<const Eigen::VectorXd>& w_start, TimeIndex start, TimeIndex n) {
  if (n < start) throw InvalidHorizonError("realized weather requested before the start time");
  check_dim(model, w_start.size(), "w_start");
  check_array(model, eps);
  Eigen::VectorXd acc = w_start - model.mean_w();
  for (TimeIndex m = start + 1; m <= n; ++m) {
    acc = model.g() * acc + eps.reveal_sum(m, m - model.trunc_lag(), m);
  }
  return model.mean_w() + acc;
}

ForecastVector forecast_vector(const MmfeModel& model, const EpsilonArray& eps,
                               const Eigen::Ref<const Eigen::VectorXd>& w_n, TimeIndex n, int r) {
  if (r < 1) throw ShapeError("forecast horizon r must be >= 1");
  check_dim(model, w_n.size(), "w_n");
  check_array(model, eps);
  ForecastVector out{n, {}};
  out.values.reserve(static_cast<std::size_t>(r));
  Eigen::VectorXd acc = w_n - model.mean_w();
  for (int j = 1; j <= r; ++j) {
    const TimeIndex m = n + j;
    acc = model.g() * acc + eps.reveal_sum(m, m - model.trunc_lag(), n);
    out.values.push_back(model.mean_w() + acc);
  }
  return out;
}

FreshNoise fresh_noise_from_array(const MmfeModel& model, const EpsilonArray& eps, TimeIndex n, int r) {
  if (r < 1) throw ShapeError("forecast horizon r must be >= 1");
  check_array(model, eps);
  FreshNoise fresh;
  for (int i = 0; i <= r; ++i) fresh.reveal.emplace_back(eps.at(n + 1 + i, n + 1));
  const TimeIndex target = n + 1 + r;
  fresh.aggregate = eps.reveal_sum(target, target - model.trunc_lag(), n);
  return fresh;
}

RollResult roll_forecast_vector(const MmfeModel& model, const ForecastVector& fvec, const FreshNoise& fresh) {
  const int r = fvec.horizon();
  if (r < 1) throw ShapeError("forecast vector is empty");
  if (static_cast<int>(fresh.reveal.size()) != r + 1) {
    throw ShapeError("fresh noise must supply r + 1 revealed entries for a horizon-" + std::to_string(r) +
                     " forecast vector");
  }
  for (const auto& v : fvec.values) check_dim(model, v.size(), "forecast entry");
  for (const auto& e : fresh.reveal) check_dim(model, e.size(), "fresh noise entry");
  check_dim(model, fresh.aggregate.size(), "fresh noise aggregate");

  const Eigen::MatrixXd& g = model.g();
  RollResult out;
  out.next.base_time = fvec.base_time + 1;
  out.next.values.resize(static_cast<std::size_t>(r));
  out.w_next = fvec.values[0] + fresh.reveal[0];
  // h_j = sum_{i<=j} G^i eps_{n+1+j-i}(n+1), the revision of F_{n+1+j}.
  Eigen::VectorXd h = fresh.reveal[0];
  for (int j = 1; j < r; ++j) {
    h = g * h + fresh.reveal[j];
    out.next.values[j - 1] = fvec.values[j] + h;
  }
  h = g * h + fresh.reveal[r];
  out.next.values[r - 1] = g * fvec.values[r - 1] + model.mean_z() + fresh.aggregate + h;
  return out;
}

double roll_forecast_scalar(double g, double mean_z, std::span<double> forecasts, std::span<const double> reveal,
                            double aggregate) {
  const std::size_t r = forecasts.size();
  if (r == 0 || reveal.size() != r + 1) throw ShapeError("scalar roll needs r >= 1 and r + 1 revealed entries");
  const double w_next = forecasts[0] + reveal[0];
  double h = reveal[0];
  for (std::size_t j = 1; j < r; ++j) {
    h = g * h + reveal[j];
    forecasts[j - 1] = forecasts[j] + h;
  }
  h = g * h + reveal[r];
  forecasts[r - 1] = g * forecasts[r - 1] + mean_z + aggregate + h;
  return w_next;
}

// ---------------------------------------------------------------------------
// Conditional dynamics

Eigen::VectorXd conditional_weather_step(const MmfeModel& model, const Eigen::Ref<const Eigen::VectorXd>& w_cur,
                                         const Eigen::Ref<const Eigen::VectorXd>& f_next_given_k,
                                         const Eigen::Ref<const Eigen::VectorXd>& f_cur_given_k,
                                         std::span<const Eigen::VectorXd> post_k_noise) {
  check_dim(model, w_cur.size(), "w_cur");
  check_dim(model, f_next_given_k.size(), "F_{n+1|k}");
  check_dim(model, f_cur_given_k.size(), "F_{n|k}");
  Eigen::VectorXd z = f_next_given_k - model.g() * f_cur_given_k;
  for (const auto& e : post_k_noise) {
    check_dim(model, e.size(), "post-k noise entry");
    z += e;
  }
  return model.g() * w_cur + z;
}

Eigen::VectorXd conditional_noise_variance(const MmfeModel& model, TimeIndex n, TimeIndex k) {
  if (n < k) throw InvalidHorizonError("conditional step requires n >= k");
  return model.lag_variance_sums(0, n - k);
}

Eigen::VectorXd g0_aggregate(const MmfeModel& model, const EpsilonArray& frozen, TimeIndex n, int r) {
  if (n < 0 || r < 1) throw InvalidHorizonError("g0 aggregate needs n >= 0 and r >= 1");
  check_array(model, frozen);
  const TimeIndex target = n + 1 + r;
  return frozen.reveal_sum(target, target - model.trunc_lag(), 0);
}

FreshNoise conditional_fresh_noise_from_array(const MmfeModel& model, const EpsilonArray& eps, TimeIndex n, int r) {
  if (n < 0 || r < 1) throw InvalidHorizonError("conditional roll needs n >= 0 and r >= 1");
  check_array(model, eps);
  FreshNoise fresh;
  for (int i = 0; i <= r; ++i) fresh.reveal.emplace_back(eps.at(n + 1 + i, n + 1));
  const TimeIndex target = n + 1 + r;
  fresh.aggregate = eps.reveal_sum(target, std::max<TimeIndex>(1, target - model.trunc_lag()), n);
  return fresh;
}

RollResult conditional_forecast_roll(const MmfeModel& model, const ForecastVector& fvec,
                                     const Eigen::Ref<const Eigen::VectorXd>& g0_agg, const FreshNoise& fresh) {
  check_dim(model, g0_agg.size(), "g0 aggregate");
  check_dim(model, fresh.aggregate.size(), "fresh noise aggregate");
  FreshNoise combined{fresh.reveal, g0_agg + fresh.aggregate};
  return roll_forecast_vector(model, fvec, combined);
}

std::vector<Eigen::MatrixXd> roll_increment_covariances(const MmfeModel& model, int r,
                                                        std::optional<TimeIndex> conditional_step) {
  if (r < 1) throw ShapeError("forecast horizon r must be >= 1");
  if (conditional_step && *conditional_step < 0) throw InvalidHorizonError("conditional step must be >= 0");
  std::vector<Eigen::MatrixXd> cov;
  cov.reserve(static_cast<std::size_t>(r) + 1);
  Eigen::MatrixXd c = model.lag_variances(0).asDiagonal();
  cov.push_back(c);
  for (int j = 1; j <= r; ++j) {
    c = model.g() * c * model.g().transpose();
    c.diagonal() += model.lag_variances(j);
    cov.push_back(c);
  }
  const TimeIndex last = conditional_step ? r + *conditional_step : model.trunc_lag();
  cov.back().diagonal() += model.lag_variance_sums(r + 1, last);
  return cov;
}

// ---------------------------------------------------------------------------
// Export

void write_path_csv(std::ostream& out, std::span<const PathRecord> path) {
  if (path.empty()) return;
  const int r = path.front().forecasts.horizon();
  const auto d = path.front().w.size();
  auto column = [&](const std::string& base, Eigen::Index c) {
    return d == 1 ? base : base + "[" + std::to_string(c) + "]";
  };
  out << 'n';
  for (Eigen::Index c = 0; c < d; ++c) out << ',' << column("W_n", c);
  for (int j = 1; j <= r; ++j) {
    for (Eigen::Index c = 0; c < d; ++c) out << ',' << column("F_{n+" + std::to_string(j) + "|n}", c);
  }
  out << '\n';
  char buf[32];
  for (const auto& rec : path) {
    if (rec.w.size() != d || rec.forecasts.horizon() != r) throw ShapeError("ragged path records");
    out << rec.n;
    for (Eigen::Index c = 0; c < d; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", rec.w(c));
      out << ',' << buf;
    }
    for (const auto& f : rec.forecasts.values) {
      for (Eigen::Index c = 0; c < d; ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", f(c));
        out << ',' << buf;
      }
    }
    out << '\n';
  }
}

}  // namespace mmfe
