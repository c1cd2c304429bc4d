#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace zzct {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Which density the sampler currently follows along the inverse
// temperature coordinate.
enum class Mode : std::uint8_t {
  Tempering,   // beta in [0,1), blended density, beta moves
  Target,      // at the point mass beta = 1, target density, beta frozen
  Untempered,  // plain sampler, no temperature coordinate at all
};

enum class EventKind : std::uint8_t {
  Initial,          // first skeleton entry, records the starting point
  FlipX,            // velocity flip of one position coordinate
  FlipBeta,         // velocity flip of the temperature coordinate
  HitBetaOne,       // reached beta = 1 and froze at the point mass
  ExitBetaOne,      // left the point mass, moving back into (0,1)
  ReflectBetaZero,  // bounced off beta = 0
  ReflectBetaOne,   // bounced off beta = 1 (point mass disabled, alpha = 0)
  Stick,            // a coordinate hit zero and froze
  Unstick,          // a frozen coordinate resumed moving
  Final,            // last skeleton entry at the horizon
};

const char* event_kind_name(EventKind k);
const char* mode_name(Mode m);

// Position/velocity pair extended with the inverse temperature coordinate.
// Velocities stay in {-1,+1}; a stuck coordinate keeps its last velocity
// but the flow does not apply it. Untempered states pin beta at 1.
struct ExtendedState {
  Vec x;
  Vec v;
  double beta = 1.0;
  double v_beta = 0.0;  // in {-1,0,+1}; 0 exactly in Target/Untempered mode
  Mode mode = Mode::Untempered;
  std::vector<std::uint8_t> stuck;  // per coordinate, 1 while frozen at zero

  ExtendedState() = default;
  ExtendedState(Vec x0, Vec v0, double b, double vb, Mode m)
      : x(std::move(x0)), v(std::move(v0)), beta(b), v_beta(vb), mode(m),
        stuck(static_cast<std::size_t>(x.size()), 0) {}

  Eigen::Index dim() const { return x.size(); }
  bool is_stuck(Eigen::Index i) const {
    return !stuck.empty() && stuck[static_cast<std::size_t>(i)] != 0;
  }
  bool any_stuck() const;
};

struct SkeletonEvent {
  double t = 0.0;
  EventKind kind = EventKind::Initial;
  int index = -1;  // flipped / stuck / unstuck coordinate, -1 otherwise
  ExtendedState state;  // state immediately after the event
};

// Ordered event record; between consecutive events every moving coordinate
// travels with its recorded velocity. proposal_count counts simulated
// candidate event times, accepted_count the ones kept after thinning.
struct Skeleton {
  std::vector<SkeletonEvent> events;
  double total_time = 0.0;
  std::uint64_t proposal_count = 0;
  std::uint64_t accepted_count = 0;
};

// Advance the deterministic flow by h: moving coordinates translate, stuck
// ones stay, beta moves with v_beta. Throws if beta would leave [0,1] by
// more than a rounding margin; the caller splits paths at boundary hits.
ExtendedState flow(const ExtendedState& s, double h);

// States at times burnin, burnin+dt, ... up to total_time.
std::vector<ExtendedState> discretize(const Skeleton& sk, double dt,
                                      double burnin);

}  // namespace zzct
