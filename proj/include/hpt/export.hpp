#pragma once

#include <string>
#include <vector>

#include "hpt/trainer.hpp"

namespace hpt {

struct CurvePoint {
  long step = 0;
  double mean = 0, lo = 0, hi = 0;  // across runs at this step
};

// Reads one numeric field per update from a run's metrics.jsonl.
std::vector<std::pair<long, double>> load_metric_series(const std::string& run_dir,
                                                        const std::string& field);

// ema = 1 leaves the series untouched; otherwise y_t = ema*x_t + (1-ema)*y_{t-1}.
void ema_smooth(std::vector<std::pair<long, double>>& series, double ema);

// Smooths each run's series, then takes mean/min/max across runs at every
// update index (series are truncated to the shortest run).
std::vector<CurvePoint> aggregate_curves(const std::vector<std::string>& run_dirs,
                                         const std::string& field, double ema);

void write_curves_csv(const std::string& path, const std::vector<CurvePoint>& pts);

// One row per step of every trajectory: traj,t,x,y,gx,gy,r.
void write_trajectories_csv(const std::string& path, const std::vector<Trajectory>& trajs);

void write_spread_csv(const std::string& path, const SpreadStats& st);

}  // namespace hpt
