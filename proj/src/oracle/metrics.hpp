#pragma once

#include <array>
#include <string>
#include <vector>

namespace dish::oracle {

/// One ablation-table row. RMS entries are per-tick root-mean-square
/// horizontal distances in metres (trajectories truncated to the common
/// length). A fallen/crashed run reports ref_true and plan_true as "F".
struct MetricsRow {
  std::string model_name;
  std::string task_name;
  double ref_true = 0.0;
  double plan_ref = 0.0;
  double plan_true = 0.0;
  bool fell = false;
};

/// sqrt(mean_k |a_k - b_k|^2) over the common prefix. Throws when either
/// input is empty.
double rms_xy(const std::vector<std::array<double, 2>>& a,
              const std::vector<std::array<double, 2>>& b);

MetricsRow rms_metrics(const std::string& model_name,
                       const std::string& task_name,
                       const std::vector<std::array<double, 2>>& reference,
                       const std::vector<std::array<double, 2>>& planned,
                       const std::vector<std::array<double, 2>>& executed,
                       bool fell);

/// CSV schema: model,task,ref_true,plan_ref,plan_true,fell.
void write_metrics_csv(const std::vector<MetricsRow>& rows,
                       const std::string& path);

}  // namespace dish::oracle
