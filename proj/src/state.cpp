#include "zzct/state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace zzct {

const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::Initial: return "init";
    case EventKind::FlipX: return "flip_x";
    case EventKind::FlipBeta: return "flip_beta";
    case EventKind::HitBetaOne: return "hit_beta1";
    case EventKind::ExitBetaOne: return "exit_beta1";
    case EventKind::ReflectBetaZero: return "reflect_beta0";
    case EventKind::ReflectBetaOne: return "reflect_beta1";
    case EventKind::Stick: return "stick";
    case EventKind::Unstick: return "unstick";
    case EventKind::Final: return "end";
  }
  return "unknown";
}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Tempering: return "tempering";
    case Mode::Target: return "target";
    case Mode::Untempered: return "untempered";
  }
  return "unknown";
}

bool ExtendedState::any_stuck() const {
  return std::any_of(stuck.begin(), stuck.end(),
                     [](std::uint8_t s) { return s != 0; });
}

ExtendedState flow(const ExtendedState& s, double h) {
  if (!(h >= 0.0)) throw std::invalid_argument("flow: negative duration");
  ExtendedState out = s;
  for (Eigen::Index i = 0; i < s.dim(); ++i) {
    if (!s.is_stuck(i)) out.x[i] = s.x[i] + s.v[i] * h;
  }
  if (s.mode == Mode::Tempering && s.v_beta != 0.0) {
    const double b = s.beta + s.v_beta * h;
    if (b < -1e-9 || b > 1.0 + 1e-9)
      throw std::domain_error("flow: step crosses a beta boundary");
    out.beta = std::clamp(b, 0.0, 1.0);
  }
  return out;
}

std::vector<ExtendedState> discretize(const Skeleton& sk, double dt,
                                      double burnin) {
  if (!(dt > 0.0)) throw std::invalid_argument("discretize: dt must be > 0");
  if (sk.events.size() < 2)
    throw std::invalid_argument("discretize: skeleton has no segments");
  const double t_end = sk.events.back().t;
  if (!(burnin >= 0.0) || burnin >= t_end)
    throw std::invalid_argument("discretize: burnin outside the path");
  std::vector<ExtendedState> out;
  std::size_t seg = 0;
  const double eps = 1e-12 * (1.0 + t_end);
  for (std::uint64_t k = 0;; ++k) {
    const double t = burnin + dt * static_cast<double>(k);
    if (t > t_end + eps) break;
    const double tc = std::min(t, t_end);
    while (seg + 2 < sk.events.size() && sk.events[seg + 1].t <= tc) ++seg;
    const SkeletonEvent& ev = sk.events[seg];
    out.push_back(flow(ev.state, std::max(0.0, tc - ev.t)));
  }
  return out;
}

}  // namespace zzct
