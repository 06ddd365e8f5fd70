#ifndef DK_ENSEMBLE_HPP
#define DK_ENSEMBLE_HPP

// Seeded collections of simulated trajectories. Replica r draws from the
// stream (params.seed, r), so the ensemble content is independent of
// execution order and of how many replicas are requested.

#include <vector>

#include "dk/particle_system.hpp"

namespace dk {

struct PathEnsemble {
  ModelParams params;
  int save_stride = 1;
  std::vector<TrajectoryRecord> replicas;

  int count() const { return static_cast<int>(replicas.size()); }

  int completed_count() const {
    int c = 0;
    for (const auto& r : replicas) c += r.completed ? 1 : 0;
    return c;
  }

  std::vector<CollisionEvent> collisions() const {
    std::vector<CollisionEvent> out;
    for (const auto& r : replicas) {
      if (r.collision) out.push_back(*r.collision);
    }
    return out;
  }
};

inline PathEnsemble run_ensemble(const ModelParams& params, int replicas,
                                 int save_stride = 1) {
  if (replicas < 1) throw std::domain_error("run_ensemble: replicas >= 1");
  PathEnsemble e;
  e.params = params;
  e.save_stride = save_stride;
  e.replicas.reserve(replicas);
  for (int r = 0; r < replicas; ++r) {
    e.replicas.push_back(simulate(params, static_cast<std::uint64_t>(r), save_stride));
  }
  return e;
}

}  // namespace dk

#endif  // DK_ENSEMBLE_HPP
