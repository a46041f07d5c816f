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

#pragma once

#include <optional>
#include <span>

namespace tile360 {

/// MSE charged to a displayed tile that was never downloaded (~13.4 dB).
inline constexpr double kDefaultMissingDistortion = 3000.0;

/// 10 log10(255^2 / mse). Throws std::domain_error for mse <= 0.
double mse_to_psnr(double mse);

/// sum_n p_n * PSNR(D_n). Sizes must match.
double weighted_psnr(std::span<const double> distortions, std::span<const double> priorities);

struct FovStats {
  double average_db = 0.0;
  double stddev_db = 0.0;        // population standard deviation
  double temporal_diff_db = 0.0; // |previous average - average|
};

/// Without a previous average the temporal difference is zero.
FovStats fov_stats(std::span<const double> fov_distortions, std::optional<double> previous_average_db);

/// One row of per-segment evaluation output.
struct MetricsRecord {
  int segment = 0;
  int predicted_pattern = 0;
  int display_pattern = 0;
  bool switched = false;
  double requested_kbps = 0.0;
  double actual_kbps = 0.0;
  double fov_actual_kbps = 0.0;
  double weighted_psnr_db = 0.0;
  double fov_avg_psnr_db = 0.0;
  double fov_psnr_std_db = 0.0;
  double fov_psnr_temporal_diff_db = 0.0;
  double f_value = 0.0;
  double buffer_s = 0.0;    // after the segment arrived
  double stall_s = 0.0;
  double download_s = 0.0;
  /// F of the coarse start and of the refined choice on the predicted FoV
  /// (only for the two-stage method).
  std::optional<double> fine_f_start;
  std::optional<double> fine_f_result;
};

struct QoeParams {
  double gamma = 6.0;    // quality switch weight
  double delta = 500.0;  // rebuffering weight, per second
  double eta = 0.1;      // low-buffer weight
  double b_ref_s = 15.0;
};

void validate(const QoeParams& params);

/// sum q_l - gamma sum |q_{l+1} - q_l| - delta sum stall_l
///   - eta sum_{l=1}^{L-1} max(0, b_ref - b_{l+1})^2
/// with q_l = FoV average PSNR and b_l the buffer after segment l arrived.
/// stall_l = max(0, t_download,l - buffer when the request was issued).
double qoe(std::span<const MetricsRecord> records, const QoeParams& params);

}  // namespace tile360
