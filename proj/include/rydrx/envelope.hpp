#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rydrx/errors.hpp"

namespace rydrx {

// Dimensionless drive envelope: piecewise-linear in time with values in [0, 1].
// Between adjacent nodes the value is affine; before the first node and after
// the last it holds constant. Two nodes sharing a time encode a jump; the
// envelope is right-continuous there.
class Envelope {
 public:
  struct Node {
    double time = 0.0;
    double value = 0.0;
  };

  Envelope() { nodes_.push_back({0.0, 1.0}); }

  static Envelope constant(double value) {
    Envelope e;
    e.nodes_.front().value = value;
    e.check();
    return e;
  }

  static Envelope from_nodes(std::vector<Node> nodes) {
    if (nodes.empty()) throw ConfigError("envelope needs at least one node");
    Envelope e;
    e.nodes_ = std::move(nodes);
    e.check();
    return e;
  }

  // Unit-height pulse switching instantaneously at t_on and t_off.
  static Envelope rectangle(double t_on, double t_off, double high = 1.0,
                            double low = 0.0) {
    if (!(t_off > t_on)) throw ConfigError("envelope rectangle needs t_off > t_on");
    return from_nodes({{t_on, low}, {t_on, high}, {t_off, high}, {t_off, low}});
  }

  // Pulse with linear turn-on/turn-off ramps of duration `rise`.
  static Envelope ramped_rectangle(double t_on, double t_off, double rise,
                                   double high = 1.0, double low = 0.0) {
    if (!(rise > 0.0)) throw ConfigError("envelope ramp duration must be > 0");
    if (!(t_off > t_on + rise))
      throw ConfigError("envelope ramps overlap: need t_off > t_on + rise");
    return from_nodes({{t_on, low},
                       {t_on + rise, high},
                       {t_off, high},
                       {t_off + rise, low}});
  }

  double operator()(double t) const {
    if (t <= nodes_.front().time) {
      // Right-continuous: exactly at a jump time, take the post-jump value.
      if (t == nodes_.front().time) return value_after(0);
      return nodes_.front().value;
    }
    if (t >= nodes_.back().time) return nodes_.back().value;
    auto it = std::upper_bound(
        nodes_.begin(), nodes_.end(), t,
        [](double tv, const Node& n) { return tv < n.time; });
    std::size_t hi = static_cast<std::size_t>(it - nodes_.begin());
    std::size_t lo = hi - 1;
    if (nodes_[lo].time == t) return value_after(lo);
    double dt = nodes_[hi].time - nodes_[lo].time;
    double f = (t - nodes_[lo].time) / dt;
    return nodes_[lo].value + f * (nodes_[hi].value - nodes_[lo].value);
  }

  // Distinct node times (jump and slope-change locations), ascending.
  std::vector<double> breakpoints() const {
    std::vector<double> ts;
    for (const Node& n : nodes_) {
      if (ts.empty() || ts.back() != n.time) ts.push_back(n.time);
    }
    return ts;
  }

  // True when the envelope takes a single value throughout (t0, t1). The
  // envelope is affine between nodes, so it suffices that the value at t0+,
  // the left limit at t1, and every interior node agree.
  bool is_constant_on(double t0, double t1) const {
    double v0 = (*this)(t0);
    for (const Node& n : nodes_) {
      if (n.time > t0 && n.time < t1 && n.value != v0) return false;
    }
    return value_before(t1) == v0;
  }

  const std::vector<Node>& nodes() const { return nodes_; }

  // Value just before time t (left limit). At a jump this is the pre-jump
  // value, i.e. the first node carrying that time.
  double left_limit(double t) const { return value_before(t); }

 private:
  double value_before(double t) const {
    if (t <= nodes_.front().time) return nodes_.front().value;
    if (t > nodes_.back().time) return nodes_.back().value;
    auto it = std::lower_bound(
        nodes_.begin(), nodes_.end(), t,
        [](const Node& n, double tv) { return n.time < tv; });
    std::size_t hi = static_cast<std::size_t>(it - nodes_.begin());
    if (nodes_[hi].time == t) return nodes_[hi].value;
    return interp(hi - 1, hi, t);
  }

  double interp(std::size_t lo, std::size_t hi, double t) const {
    double dt = nodes_[hi].time - nodes_[lo].time;
    if (dt == 0.0) return nodes_[lo].value;
    double f = (t - nodes_[lo].time) / dt;
    return nodes_[lo].value + f * (nodes_[hi].value - nodes_[lo].value);
  }

  double value_after(std::size_t i) const {
    // Last node sharing this time wins.
    while (i + 1 < nodes_.size() && nodes_[i + 1].time == nodes_[i].time) ++i;
    return nodes_[i].value;
  }

  void check() const {
    int same_time = 1;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      if (!std::isfinite(n.time) || !std::isfinite(n.value))
        throw ConfigError("envelope node not finite");
      if (n.value < 0.0 || n.value > 1.0)
        throw ConfigError("envelope value " + std::to_string(n.value) +
                          " outside [0, 1]");
      if (i > 0) {
        if (n.time < nodes_[i - 1].time)
          throw ConfigError("envelope nodes must be in time order");
        same_time = (n.time == nodes_[i - 1].time) ? same_time + 1 : 1;
        if (same_time > 2)
          throw ConfigError("more than two envelope nodes share one time");
      }
    }
  }

  std::vector<Node> nodes_;
};

}  // namespace rydrx
