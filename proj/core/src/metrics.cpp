// Copyright 2026 The tile360 Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tile360/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tile360 {

double mse_to_psnr(double mse) {
  if (!(mse > 0.0)) throw std::domain_error("mse_to_psnr: distortion must be positive");
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double weighted_psnr(std::span<const double> distortions, std::span<const double> priorities) {
  if (distortions.size() != priorities.size()) {
    throw std::invalid_argument("weighted_psnr: size mismatch");
  }
  double sum = 0.0;
  for (std::size_t n = 0; n < distortions.size(); ++n) {
    if (priorities[n] == 0.0) continue;
    sum += priorities[n] * mse_to_psnr(distortions[n]);
  }
  return sum;
}

FovStats fov_stats(std::span<const double> fov_distortions, std::optional<double> previous_average_db) {
  if (fov_distortions.empty()) throw std::invalid_argument("fov_stats: FoV has no tiles");
  const auto m = static_cast<double>(fov_distortions.size());
  FovStats s;
  for (const double d : fov_distortions) s.average_db += mse_to_psnr(d);
  s.average_db /= m;
  double var = 0.0;
  for (const double d : fov_distortions) {
    const double e = mse_to_psnr(d) - s.average_db;
    var += e * e;
  }
  s.stddev_db = std::sqrt(var / m);
  s.temporal_diff_db = previous_average_db ? std::abs(*previous_average_db - s.average_db) : 0.0;
  return s;
}

void validate(const QoeParams& params) {
  if (!(params.gamma >= 0.0) || !(params.delta >= 0.0) || !(params.eta >= 0.0) ||
      !(params.b_ref_s >= 0.0)) {
    throw std::invalid_argument("QoE parameters must be non-negative");
  }
}

double qoe(std::span<const MetricsRecord> records, const QoeParams& params) {
  if (records.empty()) throw std::invalid_argument("qoe: no segments");
  double quality = 0.0;
  double switches = 0.0;
  double stalls = 0.0;
  double low_buffer = 0.0;
  for (std::size_t l = 0; l < records.size(); ++l) {
    quality += records[l].fov_avg_psnr_db;
    stalls += records[l].stall_s;
    if (l + 1 < records.size()) {
      switches += std::abs(records[l + 1].fov_avg_psnr_db - records[l].fov_avg_psnr_db);
      const double gap = std::max(0.0, params.b_ref_s - records[l + 1].buffer_s);
      low_buffer += gap * gap;
    }
  }
  return quality - params.gamma * switches - params.delta * stalls - params.eta * low_buffer;
}

}  // namespace tile360
