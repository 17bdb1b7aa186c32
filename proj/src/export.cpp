#include "hpt/export.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>

#include <json.hpp>

namespace hpt {

std::vector<std::pair<long, double>> load_metric_series(const std::string& run_dir,
                                                        const std::string& field) {
  const std::filesystem::path path = std::filesystem::path(run_dir) / "metrics.jsonl";
  std::ifstream in(path);
  require(bool(in), "export: cannot open " + path.string());
  std::vector<std::pair<long, double>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json row = nlohmann::json::parse(line);
    out.emplace_back(row.at("step").get<long>(), row.at(field).get<double>());
  }
  require(!out.empty(), "export: " + path.string() + " has no rows");
  return out;
}

void ema_smooth(std::vector<std::pair<long, double>>& series, double ema) {
  require(ema > 0.0 && ema <= 1.0, "export: ema coefficient must lie in (0, 1]");
  if (ema == 1.0 || series.empty()) return;
  double y = series[0].second;
  for (auto& [step, x] : series) {
    y = ema * x + (1.0 - ema) * y;
    x = y;
  }
}

std::vector<CurvePoint> aggregate_curves(const std::vector<std::string>& run_dirs,
                                         const std::string& field, double ema) {
  require(!run_dirs.empty(), "export: no runs given");
  std::vector<std::vector<std::pair<long, double>>> all;
  size_t shortest = SIZE_MAX;
  for (const std::string& dir : run_dirs) {
    all.push_back(load_metric_series(dir, field));
    ema_smooth(all.back(), ema);
    shortest = std::min(shortest, all.back().size());
  }
  std::vector<CurvePoint> pts(shortest);
  for (size_t t = 0; t < shortest; ++t) {
    CurvePoint& p = pts[t];
    p.step = all[0][t].first;
    p.lo = p.hi = all[0][t].second;
    double sum = 0;
    for (const auto& series : all) {
      const double v = series[t].second;
      sum += v;
      p.lo = std::min(p.lo, v);
      p.hi = std::max(p.hi, v);
    }
    p.mean = sum / static_cast<double>(all.size());
  }
  return pts;
}

void write_curves_csv(const std::string& path, const std::vector<CurvePoint>& pts) {
  std::ofstream csv(path);
  require(bool(csv), "export: cannot write " + path);
  csv << "step,mean,min,max\n" << std::setprecision(17);
  for (const CurvePoint& p : pts)
    csv << p.step << ',' << p.mean << ',' << p.lo << ',' << p.hi << '\n';
}

void write_trajectories_csv(const std::string& path, const std::vector<Trajectory>& trajs) {
  std::ofstream csv(path);
  require(bool(csv), "export: cannot write " + path);
  csv << "traj,t,x,y,gx,gy,r\n" << std::setprecision(17);
  for (size_t n = 0; n < trajs.size(); ++n) {
    const Trajectory& tr = trajs[n];
    for (size_t t = 0; t < tr.x.size(); ++t)
      csv << n << ',' << t << ',' << tr.x[t] << ',' << tr.y[t] << ',' << tr.gx[t] << ','
          << tr.gy[t] << ',' << tr.r[t] << '\n';
  }
}

void write_spread_csv(const std::string& path, const SpreadStats& st) {
  std::ofstream csv(path);
  require(bool(csv), "export: cannot write " + path);
  csv << "bearing_spread,mean_distance,product\n"
      << std::setprecision(17) << st.bearing_spread << ',' << st.mean_distance << ','
      << st.product << '\n';
}

}  // namespace hpt
