#include "distillplan/pfg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "distillplan/errors.hpp"

namespace distill {

namespace {

double normalize_field(double v, double lo, double hi) {
  if (hi <= lo) return 0.5;
  return (v - lo) / (hi - lo);
}

std::vector<ObjectiveVector> objectives_for(
    std::span<const ServerSpec> servers, const HardwareBounds& hw) {
  std::vector<ObjectiveVector> out;
  out.reserve(servers.size());
  for (const auto& s : servers) out.push_back(objective_vector(s, hw));
  return out;
}

std::vector<GridCoord> coords_for(std::span<const ObjectiveVector> objectives,
                                  const ObjectiveBounds& bounds, int k) {
  std::vector<GridCoord> out;
  out.reserve(objectives.size());
  for (const auto& v : objectives) out.push_back(grid_coord(v, bounds, k));
  return out;
}

// Per-slice minima for one objective; slice key is the coordinate pair on
// the other two objectives. All ties are kept.
void collect_axis_minima(std::span<const ServerSpec> servers,
                         const std::vector<GridCoord>& coords, int axis,
                         std::set<std::string>& members) {
  const int a = (axis + 1) % 3;
  const int b = (axis + 2) % 3;
  std::map<std::pair<int, int>, int> slice_min;
  for (const auto& c : coords) {
    const auto key = std::make_pair(c.coords[a], c.coords[b]);
    auto [it, inserted] = slice_min.try_emplace(key, c.coords[axis]);
    if (!inserted) it->second = std::min(it->second, c.coords[axis]);
  }
  for (std::size_t i = 0; i < servers.size(); ++i) {
    const auto& c = coords[i];
    const auto key = std::make_pair(c.coords[a], c.coords[b]);
    if (c.coords[axis] == slice_min.at(key)) members.insert(servers[i].id);
  }
}

bool dominates(const ObjectiveVector& x, const ObjectiveVector& y) {
  bool strictly_better = false;
  for (std::size_t i = 0; i < 3; ++i) {
    if (x[i] > y[i]) return false;
    if (x[i] < y[i]) strictly_better = true;
  }
  return strictly_better;
}

}  // namespace

HardwareBounds HardwareBounds::from_fleet(std::span<const ServerSpec> fleet) {
  HardwareBounds b;
  if (fleet.empty()) return b;
  b.vram_lo = b.vram_hi = fleet[0].vram_gb;
  b.tflops_lo = b.tflops_hi = fleet[0].fp16_tflops;
  b.bw_lo = b.bw_hi = fleet[0].mem_bw_gbps;
  for (const auto& s : fleet) {
    b.vram_lo = std::min(b.vram_lo, s.vram_gb);
    b.vram_hi = std::max(b.vram_hi, s.vram_gb);
    b.tflops_lo = std::min(b.tflops_lo, s.fp16_tflops);
    b.tflops_hi = std::max(b.tflops_hi, s.fp16_tflops);
    b.bw_lo = std::min(b.bw_lo, s.mem_bw_gbps);
    b.bw_hi = std::max(b.bw_hi, s.mem_bw_gbps);
  }
  return b;
}

double hardware_score(const ServerSpec& s, const HardwareBounds& bounds) {
  const double vram = normalize_field(s.vram_gb, bounds.vram_lo, bounds.vram_hi);
  const double tflops =
      normalize_field(s.fp16_tflops, bounds.tflops_lo, bounds.tflops_hi);
  const double bw = normalize_field(s.mem_bw_gbps, bounds.bw_lo, bounds.bw_hi);
  return (vram + tflops + bw) / 3.0;
}

bool feasible(const ServerSpec& s, const std::optional<HardwareFloor>& floor) {
  if (!floor) return true;
  return s.gpu_count >= floor->gpu_count && s.vram_gb >= floor->vram_gb &&
         s.fp16_tflops >= floor->fp16_tflops &&
         s.mem_bw_gbps >= floor->mem_bw_gbps;
}

int compute_K(std::span<const ServerSpec> feasible_servers,
              double cost_window_usd) {
  if (feasible_servers.empty())
    throw InfeasibleError("server_selection", "no feasible server");
  double lo = feasible_servers[0].hourly_cost_usd;
  double hi = lo;
  for (const auto& s : feasible_servers) {
    lo = std::min(lo, s.hourly_cost_usd);
    hi = std::max(hi, s.hourly_cost_usd);
  }
  const double spread = std::abs(hi - lo);
  const int k = static_cast<int>(std::ceil(spread / cost_window_usd));
  return std::clamp(k, 1, 64);
}

ObjectiveVector objective_vector(const ServerSpec& s,
                                 const HardwareBounds& hw_bounds) {
  return ObjectiveVector{-hardware_score(s, hw_bounds), s.hourly_cost_usd,
                         s.rtt_ms};
}

ObjectiveBounds objective_bounds(std::span<const ObjectiveVector> objectives) {
  ObjectiveBounds b;
  if (objectives.empty()) return b;
  for (std::size_t i = 0; i < 3; ++i) b.lo[i] = b.hi[i] = objectives[0][i];
  for (const auto& v : objectives) {
    for (std::size_t i = 0; i < 3; ++i) {
      b.lo[i] = std::min(b.lo[i], v[i]);
      b.hi[i] = std::max(b.hi[i], v[i]);
    }
  }
  return b;
}

GridCoord grid_coord(const ObjectiveVector& v, const ObjectiveBounds& bounds,
                     int k) {
  GridCoord c;
  for (std::size_t i = 0; i < 3; ++i) {
    const double lo = bounds.lo[i];
    const double hi = bounds.hi[i];
    if (hi <= lo) {
      c.coords[i] = 1;
      continue;
    }
    const double frac = (v[i] - lo) / (hi - lo);
    const int raw = static_cast<int>(std::floor(k * frac)) + 1;
    c.coords[i] = std::clamp(raw, 1, k);
  }
  return c;
}

std::set<std::string> build_pfg(std::span<const ServerSpec> feasible_servers,
                                int k) {
  std::set<std::string> members;
  if (feasible_servers.empty()) return members;
  const HardwareBounds hw = HardwareBounds::from_fleet(feasible_servers);
  const auto objectives = objectives_for(feasible_servers, hw);
  const ObjectiveBounds bounds = objective_bounds(objectives);
  const auto coords = coords_for(objectives, bounds, k);
  for (int axis = 0; axis < 3; ++axis)
    collect_axis_minima(feasible_servers, coords, axis, members);
  return members;
}

double ideal_distance(const ObjectiveVector& v, const ObjectiveBounds& bounds) {
  double d2 = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double delta = normalize_field(v[i], bounds.lo[i], bounds.hi[i]) -
                         normalize_field(bounds.lo[i], bounds.lo[i], bounds.hi[i]);
    d2 += delta * delta;
  }
  return std::sqrt(d2);
}

std::set<std::string> pareto_oracle(
    std::span<const ServerSpec> feasible_servers) {
  const HardwareBounds hw = HardwareBounds::from_fleet(feasible_servers);
  const auto objectives = objectives_for(feasible_servers, hw);
  std::set<std::string> front;
  for (std::size_t i = 0; i < feasible_servers.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < feasible_servers.size() && !dominated; ++j) {
      if (i != j && dominates(objectives[j], objectives[i])) dominated = true;
    }
    if (!dominated) front.insert(feasible_servers[i].id);
  }
  return front;
}

PfgResult select_server(std::span<const ServerSpec> fleet,
                        const PlanRequest& request) {
  std::vector<ServerSpec> pool;
  pool.reserve(fleet.size());
  for (const auto& s : fleet) {
    if (feasible(s, request.hardware_floor)) pool.push_back(s);
  }
  if (pool.empty())
    throw InfeasibleError("server_selection",
                          "no server satisfies the hardware floor");

  const HardwareBounds hw = HardwareBounds::from_fleet(pool);
  const auto objectives = objectives_for(pool, hw);
  const ObjectiveBounds bounds = objective_bounds(objectives);
  const int k = compute_K(pool, request.cost_window_usd);
  const auto coords = coords_for(objectives, bounds, k);

  std::set<std::string> members;
  for (int axis = 0; axis < 3; ++axis)
    collect_axis_minima(pool, coords, axis, members);

  int lowest_cost_coord = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (members.count(pool[i].id))
      lowest_cost_coord = std::min(lowest_cost_coord, coords[i].coords[1]);
  }

  const std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t best = npos;
  double best_dist = 0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!members.count(pool[i].id)) continue;
    if (coords[i].coords[1] != lowest_cost_coord) continue;
    const double dist = ideal_distance(objectives[i], bounds);
    if (best == npos || dist < best_dist ||
        (dist == best_dist && pool[i].id < pool[best].id)) {
      best = i;
      best_dist = dist;
    }
  }

  PfgResult result;
  result.chosen = pool[best];
  result.pfg_members = std::move(members);
  result.chosen_cell = coords[best];
  result.ideal_point =
      ObjectiveVector{bounds.lo[0], bounds.lo[1], bounds.lo[2]};
  result.grid_intervals = k;
  return result;
}

}  // namespace distill
