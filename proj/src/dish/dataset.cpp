#include "dish/dataset.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "io/csv.hpp"

namespace dish::loop {

namespace {

struct TickStream {
  std::vector<std::vector<double>> obs;
  std::vector<std::vector<double>> h;
  std::vector<std::vector<double>> a;
};

ModelDataset window_streams(const std::vector<TickStream>& streams, int W,
                            int K, int stride) {
  ModelDataset ds;
  for (const auto& st : streams) {
    const int T = static_cast<int>(st.obs.size());
    if (T < K) continue;
    const int D = static_cast<int>(st.obs.front().size());
    const int dh = st.h.empty() ? 1 : static_cast<int>(st.h.front().size());
    for (int t0 = 0; t0 + K <= T; t0 += stride) {
      model::SequenceData seq;
      seq.window.assign(static_cast<std::size_t>(W) * D, 0.0);
      for (int w = 0; w < W; ++w) {
        const int src = t0 - (W - 1 - w);
        if (src < 0) continue;  // zero-padded at episode start
        std::copy(st.obs[src].begin(), st.obs[src].end(),
                  seq.window.begin() + static_cast<std::size_t>(w) * D);
      }
      seq.s.resize(static_cast<std::size_t>(K) * D);
      seq.h.assign(static_cast<std::size_t>(K) * dh, 0.0);
      for (int k = 0; k < K; ++k) {
        std::copy(st.obs[t0 + k].begin(), st.obs[t0 + k].end(),
                  seq.s.begin() + static_cast<std::size_t>(k) * D);
        if (t0 + k < static_cast<int>(st.h.size()) && !st.h[t0 + k].empty())
          std::copy(st.h[t0 + k].begin(), st.h[t0 + k].end(),
                    seq.h.begin() + static_cast<std::size_t>(k) * dh);
      }
      ds.sequences.push_back(std::move(seq));

      if (!st.a.empty() && !st.a[t0].empty()) {
        baselines::BaselineRollout ro;
        ro.K = K;
        const int ad = static_cast<int>(st.a[t0].size());
        ro.s = ds.sequences.back().s;
        ro.h = ds.sequences.back().h;
        ro.a.assign(static_cast<std::size_t>(K) * ad, 0.0);
        for (int k = 0; k < K; ++k)
          if (t0 + k < static_cast<int>(st.a.size()) && !st.a[t0 + k].empty())
            std::copy(st.a[t0 + k].begin(), st.a[t0 + k].end(),
                      ro.a.begin() + static_cast<std::size_t>(k) * ad);
        ds.baseline_windows.push_back(std::move(ro));
      }
    }
  }
  return ds;
}

}  // namespace

ModelDataset build_model_dataset(const std::vector<EpisodeResult>& episodes,
                                 int W, int K, int stride) {
  std::vector<TickStream> streams;
  for (const auto& ep : episodes) {
    TickStream st;
    // Tick t carries the command driving t -> t+1; the final tick's command
    // slot repeats the last one (unused by transitions).
    for (const auto& tl : ep.ticks) {
      st.obs.push_back(tl.obs);
      st.h.push_back(tl.h);
      st.a.push_back(tl.a_first);
    }
    if (!st.h.empty() && st.h.front().empty() && st.h.size() > 1)
      st.h.front() = st.h[1];
    streams.push_back(std::move(st));
  }
  return window_streams(streams, W, K, stride);
}

void save_dataset_csv(const std::vector<EpisodeResult>& episodes,
                      const std::string& path) {
  if (episodes.empty()) throw std::invalid_argument("save_dataset: no episodes");
  const int D = static_cast<int>(episodes.front().ticks.front().obs.size());
  int dh = 1;
  for (const auto& tl : episodes.front().ticks)
    if (!tl.h.empty()) dh = static_cast<int>(tl.h.size());

  std::vector<std::string> header{"episode", "k"};
  for (int i = 0; i < D; ++i) header.push_back("s_" + std::to_string(i));
  for (int i = 0; i < dh; ++i) header.push_back("h_" + std::to_string(i));
  io::CsvWriter csv(path, header);
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const auto& ticks = episodes[e].ticks;
    for (std::size_t k = 0; k < ticks.size(); ++k) {
      std::vector<std::string> row{std::to_string(e), std::to_string(k)};
      for (double v : ticks[k].obs) row.push_back(io::fmt_double(v));
      if (ticks[k].h.empty()) {
        const auto& fallback =
            (k + 1 < ticks.size() && !ticks[k + 1].h.empty()) ? ticks[k + 1].h
                                                              : std::vector<double>(dh, 0.0);
        for (double v : fallback) row.push_back(io::fmt_double(v));
      } else {
        for (double v : ticks[k].h) row.push_back(io::fmt_double(v));
      }
      csv.row(row);
    }
  }
}

ModelDataset load_dataset_csv(const std::string& path, int W, int K, int stride,
                              int obs_dim, int d_h) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("load_dataset: empty file " + path);

  std::vector<TickStream> streams;
  long long cur_episode = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (static_cast<int>(vals.size()) != 2 + obs_dim + d_h)
      throw std::runtime_error("load_dataset: bad column count in " + path);
    const long long episode = static_cast<long long>(vals[0]);
    if (episode != cur_episode) {
      streams.emplace_back();
      cur_episode = episode;
    }
    streams.back().obs.emplace_back(vals.begin() + 2,
                                    vals.begin() + 2 + obs_dim);
    streams.back().h.emplace_back(vals.begin() + 2 + obs_dim, vals.end());
  }
  return window_streams(streams, W, K, stride);
}

}  // namespace dish::loop
