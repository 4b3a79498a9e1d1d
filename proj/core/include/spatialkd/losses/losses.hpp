// Copyright 2026 The spatialkd Authors
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

#ifndef SPATIALKD_LOSSES_LOSSES_HPP_
#define SPATIALKD_LOSSES_LOSSES_HPP_

#include <string>

#include "spatialkd/model/magnitude_net.hpp"
#include "spatialkd/nn/ops.hpp"

namespace spatialkd::losses {

enum class MagnitudeLoss {
  kL2Norm,  // Euclidean norm of the difference over all valid bins
  kMse,     // mean squared difference over valid bins
};

enum class KdForm {
  kLiteral,   // || (S_L - O_L) + (S_R - O_R) ||_1
  kSeparate,  // || S_L - O_L ||_1 + || S_R - O_R ||_1
};

std::string to_string(MagnitudeLoss m);
MagnitudeLoss magnitude_loss_from_string(const std::string& s);
std::string to_string(KdForm f);
KdForm kd_form_from_string(const std::string& s);

struct LossWeights {
  double alpha = 1.0;   // phase-alignment weight in the reconstruction loss
  double beta = 0.1;    // distillation weight in the total loss
  double kd_eps = 1e-8; // floor on the bad-student distance
  MagnitudeLoss magnitude = MagnitudeLoss::kL2Norm;
  KdForm kd_form = KdForm::kLiteral;

  // Throws UsageError unless alpha, beta >= 0, kd_eps > 0, all finite.
  void validate() const;
};

// Magnitude term alone, per item, averaged over the batch. mag_est and
// mag_gt are [B, 1, T, F]; only frames t < lengths[b] count.
nn::Tensor magnitude_loss(const nn::Tensor& mag_est, const nn::Tensor& mag_gt,
                          MagnitudeLoss kind = MagnitudeLoss::kL2Norm,
                          nn::Lengths lengths = {});

// Per item b:
//   ||M_est - M||  -  alpha / (T_b F) * sum_{t,f} M(t,f) <P_est(t,f), P(t,f)>
// averaged over the batch. Phases are [B, 2, T, F] unit pairs.
nn::Tensor reconstruction_loss(const nn::Tensor& mag_est, const nn::Tensor& mag_gt,
                               const nn::Tensor& phase_est,
                               const nn::Tensor& phase_gt, double alpha,
                               MagnitudeLoss kind = MagnitudeLoss::kL2Norm,
                               nn::Lengths lengths = {});

// Sum over encoder stages of the L1 feature distance between `student` and
// `other` taps, per item, averaged over the batch. Gradients reach whichever
// side requires grad; frozen models pass constant taps.
nn::Tensor kd_loss(const model::EncoderTaps& student,
                   const model::EncoderTaps& other, KdForm form = KdForm::kLiteral,
                   nn::Lengths lengths = {});

// l_ts / max(l_bs, kd_eps). Throws DataError on a negative input.
nn::Tensor kd_total(const nn::Tensor& l_ts, const nn::Tensor& l_bs, double kd_eps);

// l_rl + beta * l_kd_total.
nn::Tensor total_loss(const nn::Tensor& l_rl, const nn::Tensor& l_kd_total,
                      double beta);

}  // namespace spatialkd::losses

#endif  // SPATIALKD_LOSSES_LOSSES_HPP_
