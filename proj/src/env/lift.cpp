#include "env/lift.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace dish::env {

namespace {
// Per-column scales of the expanded core state
// (x, y, sin h, cos h, v, sin phi, cos phi).
constexpr double kAngScale = 0.9;
constexpr double kSpeedScale = 0.7;
}  // namespace

ObservationLift::ObservationLift(int obs_dim, std::uint64_t lift_seed,
                                 double pos_scale, double v_max)
    : v_max_(v_max) {
  if (obs_dim < 8 || obs_dim % 2 != 0)
    throw std::invalid_argument("ObservationLift: obs_dim must be even, >= 8");
  const int n_rows = obs_dim / 2;
  num::RngStream rng(lift_seed);

  const std::array<double, kCoreDim> col_scale = {
      pos_scale, pos_scale, kAngScale, kAngScale,
      kSpeedScale, kAngScale, kAngScale};

  rows_.reserve(n_rows);
  const int n_pos_rows = n_rows / 4;  // rows touching only (x, y)
  for (int r = 0; r < n_rows; ++r) {
    Row row;
    if (r < n_pos_rows) {
      row.cols = {0, 1};
    } else {
      const int a = static_cast<int>(rng.next_u64() % kCoreDim);
      int b = static_cast<int>(rng.next_u64() % (kCoreDim - 1));
      if (b >= a) ++b;
      row.cols = {a, b};
    }
    row.weights = {rng.normal() * col_scale[row.cols[0]],
                   rng.normal() * col_scale[row.cols[1]]};
    row.phase = rng.uniform() * 2.0 * std::numbers::pi;
    rows_.push_back(row);
  }

  fit_readout(lift_seed ^ 0x5bd1e995u);
}

std::array<double, ObservationLift::kCoreDim> ObservationLift::expand(
    const CoreState& s) {
  return {s.x,
          s.y,
          std::sin(s.heading),
          std::cos(s.heading),
          s.speed,
          std::sin(s.gait_phase),
          std::cos(s.gait_phase)};
}

void ObservationLift::observe_into(const CoreState& s,
                                   std::vector<double>& out) const {
  const auto c = expand(s);
  const int n_rows = static_cast<int>(rows_.size());
  out.resize(2 * n_rows);
  for (int r = 0; r < n_rows; ++r) {
    const Row& row = rows_[r];
    const double t = row.weights[0] * c[row.cols[0]] +
                     row.weights[1] * c[row.cols[1]] + row.phase;
    out[r] = std::sin(t);
    out[n_rows + r] = std::cos(t);
  }
}

Observation ObservationLift::observe(const CoreState& s) const {
  Observation o;
  observe_into(s, o.features);
  return o;
}

void ObservationLift::fit_readout(std::uint64_t seed) {
  // Ridge regression from features to (sin h, cos h, v) over a workspace
  // sample. The lift is known, so the readout is calibrated once and the
  // fit is deterministic per lift seed.
  const int n = 4096;
  const int d = obs_dim();
  num::RngStream rng(seed);
  Eigen::MatrixXd X(n, d + 1);
  Eigen::MatrixXd Y(n, 3);
  std::vector<double> feat;
  for (int i = 0; i < n; ++i) {
    CoreState s;
    s.x = (rng.uniform() * 2.0 - 1.0) * 15.0;
    s.y = (rng.uniform() * 2.0 - 1.0) * 15.0;
    s.heading = (rng.uniform() * 2.0 - 1.0) * std::numbers::pi;
    s.speed = rng.uniform() * v_max_;
    s.gait_phase = (rng.uniform() * 2.0 - 1.0) * std::numbers::pi;
    observe_into(s, feat);
    for (int j = 0; j < d; ++j) X(i, j) = feat[j];
    X(i, d) = 1.0;
    Y(i, 0) = std::sin(s.heading);
    Y(i, 1) = std::cos(s.heading);
    Y(i, 2) = s.speed;
  }
  Eigen::MatrixXd gram = X.transpose() * X;
  gram.diagonal().array() += 1e-6 * n;
  const Eigen::MatrixXd W = gram.ldlt().solve(X.transpose() * Y);
  for (int t = 0; t < 3; ++t) {
    readout_[t].resize(d + 1);
    for (int j = 0; j <= d; ++j) readout_[t][j] = W(j, t);
  }
}

std::array<double, 3> ObservationLift::read_motion_raw(
    std::span<const double> f) const {
  if (static_cast<int>(f.size()) != obs_dim())
    throw std::invalid_argument("read_motion_raw: feature length mismatch");
  std::array<double, 3> out{};
  for (int t = 0; t < 3; ++t) {
    double acc = readout_[t][f.size()];
    for (std::size_t j = 0; j < f.size(); ++j) acc += readout_[t][j] * f[j];
    out[t] = acc;
  }
  return out;
}

std::array<double, 2> ObservationLift::read_heading_speed(
    std::span<const double> f) const {
  const auto raw = read_motion_raw(f);
  const double heading = std::atan2(raw[0], raw[1]);
  const double speed = std::clamp(raw[2], 0.0, v_max_);
  return {heading, speed};
}

}  // namespace dish::env
