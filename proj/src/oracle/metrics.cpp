#include "oracle/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "io/csv.hpp"

namespace dish::oracle {

double rms_xy(const std::vector<std::array<double, 2>>& a,
              const std::vector<std::array<double, 2>>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n == 0) throw std::invalid_argument("rms_xy: empty trajectory");
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = a[k][0] - b[k][0];
    const double dy = a[k][1] - b[k][1];
    acc += dx * dx + dy * dy;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

MetricsRow rms_metrics(const std::string& model_name,
                       const std::string& task_name,
                       const std::vector<std::array<double, 2>>& reference,
                       const std::vector<std::array<double, 2>>& planned,
                       const std::vector<std::array<double, 2>>& executed,
                       bool fell) {
  MetricsRow row;
  row.model_name = model_name;
  row.task_name = task_name;
  row.fell = fell;
  row.ref_true = rms_xy(reference, executed);
  row.plan_ref = rms_xy(planned, reference);
  row.plan_true = rms_xy(planned, executed);
  return row;
}

void write_metrics_csv(const std::vector<MetricsRow>& rows,
                       const std::string& path) {
  io::CsvWriter csv(path,
                    {"model", "task", "ref_true", "plan_ref", "plan_true", "fell"});
  for (const auto& r : rows) {
    csv.row({r.model_name, r.task_name,
             r.fell ? "F" : io::fmt_double(r.ref_true),
             io::fmt_double(r.plan_ref),
             r.fell ? "F" : io::fmt_double(r.plan_true),
             r.fell ? "1" : "0"});
  }
}

}  // namespace dish::oracle
