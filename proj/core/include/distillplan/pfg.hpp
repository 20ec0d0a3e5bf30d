#pragma once

#include <array>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "distillplan/types.hpp"

// Server selection via a Pareto front grid: each minimized objective axis
// is cut into K intervals, and for every objective the grid keeps, per
// slice of the other two coordinates, all servers attaining the minimal
// coordinate on that objective. The union over objectives approximates
// the Pareto front. The final pick is the member with the lowest cost
// coordinate that sits closest to the ideal point.

namespace distill {

// Objectives, all minimized: negated hardware score, hourly cost in USD,
// round-trip latency in ms.
struct ObjectiveVector {
  double neg_hardware = 0;
  double cost = 0;
  double latency = 0;

  bool operator==(const ObjectiveVector&) const = default;
  double operator[](std::size_t i) const {
    return i == 0 ? neg_hardware : i == 1 ? cost : latency;
  }
};

// 1-based interval index per objective, each within [1, K].
struct GridCoord {
  std::array<int, 3> coords{1, 1, 1};

  bool operator==(const GridCoord&) const = default;
};

struct ObjectiveBounds {
  std::array<double, 3> lo{0, 0, 0};
  std::array<double, 3> hi{0, 0, 0};
};

// Fleet-level extrema of the three raw hardware fields entering the
// hardware score.
struct HardwareBounds {
  double vram_lo = 0, vram_hi = 0;
  double tflops_lo = 0, tflops_hi = 0;
  double bw_lo = 0, bw_hi = 0;

  static HardwareBounds from_fleet(std::span<const ServerSpec> fleet);
};

struct PfgResult {
  ServerSpec chosen;
  std::set<std::string> pfg_members;  // ids, ascending
  GridCoord chosen_cell;
  ObjectiveVector ideal_point;        // component-wise minima, raw units
  int grid_intervals = 1;             // K

  bool operator==(const PfgResult&) const = default;
};

// Mean of the min-max-normalized vram, fp16 throughput, and memory
// bandwidth over the feasible fleet; a field with zero spread contributes
// 0.5. Result lies in [0, 1].
double hardware_score(const ServerSpec& s, const HardwareBounds& bounds);

// True when every hardware field of the server meets the floor
// (inclusive). A missing floor admits everything.
bool feasible(const ServerSpec& s, const std::optional<HardwareFloor>& floor);

// Interval count from the feasible hourly cost spread and the requested
// window width: ceil(spread / window), clamped to [1, 64].
int compute_K(std::span<const ServerSpec> feasible_servers,
              double cost_window_usd);

ObjectiveVector objective_vector(const ServerSpec& s,
                                 const HardwareBounds& hw_bounds);

ObjectiveBounds objective_bounds(std::span<const ObjectiveVector> objectives);

// floor(K * (v - min) / (max - min)) + 1 per objective, clamped to [1, K].
// A degenerate axis maps everything to interval 1.
GridCoord grid_coord(const ObjectiveVector& v, const ObjectiveBounds& bounds,
                     int k);

// Ids of the per-slice per-objective minima, union over objectives.
std::set<std::string> build_pfg(std::span<const ServerSpec> feasible_servers,
                                int k);

// Euclidean distance to the ideal point on min-max-normalized objectives.
// A degenerate axis contributes nothing.
double ideal_distance(const ObjectiveVector& v, const ObjectiveBounds& bounds);

// Exact non-dominated set on the raw objective vectors, O(n^2). Kept
// deliberately independent of the grid construction so the two can be
// cross-checked against each other.
std::set<std::string> pareto_oracle(
    std::span<const ServerSpec> feasible_servers);

// Full selection: feasibility filter, grid construction, lowest cost
// coordinate, then smallest normalized Euclidean distance to the ideal
// point, ties broken by ascending id. Throws InfeasibleError when no
// server passes the floor.
PfgResult select_server(std::span<const ServerSpec> fleet,
                        const PlanRequest& request);

}  // namespace distill
