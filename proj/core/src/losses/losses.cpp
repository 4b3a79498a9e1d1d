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

#include "spatialkd/losses/losses.hpp"

#include <cmath>

#include <fmt/format.h>

#include "spatialkd/error.hpp"

namespace spatialkd::losses {

using nn::Tensor;

std::string to_string(MagnitudeLoss m) {
  return m == MagnitudeLoss::kL2Norm ? "l2_norm" : "mse";
}

MagnitudeLoss magnitude_loss_from_string(const std::string& s) {
  if (s == "l2_norm") return MagnitudeLoss::kL2Norm;
  if (s == "mse") return MagnitudeLoss::kMse;
  throw UsageError(fmt::format("unknown mag_loss '{}' (expected l2_norm or mse)", s));
}

std::string to_string(KdForm f) {
  return f == KdForm::kLiteral ? "literal" : "separate";
}

KdForm kd_form_from_string(const std::string& s) {
  if (s == "literal") return KdForm::kLiteral;
  if (s == "separate") return KdForm::kSeparate;
  throw UsageError(fmt::format("unknown kd_form '{}' (expected literal or separate)", s));
}

void LossWeights::validate() const {
  if (!std::isfinite(alpha) || alpha < 0.0)
    throw UsageError(fmt::format("loss: alpha must be finite and >= 0, got {}", alpha));
  if (!std::isfinite(beta) || beta < 0.0)
    throw UsageError(fmt::format("loss: beta must be finite and >= 0, got {}", beta));
  if (!std::isfinite(kd_eps) || kd_eps <= 0.0)
    throw UsageError(fmt::format("loss: kd_eps must be finite and > 0, got {}", kd_eps));
}

namespace {

void require_finite(const Tensor& t, const char* what) {
  for (double v : t.data())
    if (!std::isfinite(v))
      throw NumericError(fmt::format("reconstruction_loss: non-finite value in {}", what));
}

void require_shape(const Tensor& t, const nn::Shape& shape, const char* what) {
  if (t.shape() != shape)
    throw ShapeError(fmt::format("loss: {} has shape {}, expected {}", what,
                                 nn::shape_string(t.shape()), nn::shape_string(shape)));
}

// 1 / (valid_frames_b * F) per item.
Tensor inverse_counts(std::size_t batch, std::size_t frames, std::size_t bins,
                      nn::Lengths lengths) {
  std::vector<double> v(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t t = lengths.empty() ? frames : lengths[b];
    if (t == 0) throw ShapeError("loss: item with zero valid frames");
    v[b] = 1.0 / static_cast<double>(t * bins);
  }
  return Tensor({batch}, std::move(v));
}

// Per-item magnitude term, [B].
Tensor magnitude_items(const Tensor& mag_est, const Tensor& mag_gt,
                       MagnitudeLoss kind, nn::Lengths lengths) {
  if (mag_est.rank() != 4 || mag_est.dim(1) != 1)
    throw ShapeError(fmt::format("loss: magnitude must be [B, 1, T, F], got {}",
                                 nn::shape_string(mag_est.shape())));
  require_shape(mag_gt, mag_est.shape(), "ground-truth magnitude");
  const Tensor sq = nn::sum_per_item(
      nn::square(nn::mask_time(nn::sub(mag_est, mag_gt), lengths)));
  if (kind == MagnitudeLoss::kL2Norm) return nn::sqrt(sq);
  return nn::mul(sq, inverse_counts(mag_est.dim(0), mag_est.dim(2),
                                    mag_est.dim(3), lengths));
}

}  // namespace

Tensor magnitude_loss(const Tensor& mag_est, const Tensor& mag_gt,
                      MagnitudeLoss kind, nn::Lengths lengths) {
  return nn::mean(magnitude_items(mag_est, mag_gt, kind, lengths));
}

Tensor reconstruction_loss(const Tensor& mag_est, const Tensor& mag_gt,
                           const Tensor& phase_est, const Tensor& phase_gt,
                           double alpha, MagnitudeLoss kind, nn::Lengths lengths) {
  require_finite(mag_est, "estimated magnitude");
  require_finite(mag_gt, "ground-truth magnitude");
  require_finite(phase_est, "estimated phase");
  require_finite(phase_gt, "ground-truth phase");
  Tensor mag_term = magnitude_items(mag_est, mag_gt, kind, lengths);
  nn::Shape phase_shape = mag_est.shape();
  phase_shape[1] = 2;
  require_shape(phase_est, phase_shape, "estimated phase");
  require_shape(phase_gt, phase_shape, "ground-truth phase");

  const Tensor cosine = nn::sum_channels(nn::mul(phase_est, phase_gt));
  const Tensor weighted =
      nn::sum_per_item(nn::mask_time(nn::mul(mag_gt, cosine), lengths));
  const Tensor phase_term = nn::scale(
      nn::mul(weighted, inverse_counts(mag_est.dim(0), mag_est.dim(2),
                                       mag_est.dim(3), lengths)),
      alpha);
  return nn::mean(nn::sub(mag_term, phase_term));
}

Tensor kd_loss(const model::EncoderTaps& student, const model::EncoderTaps& other,
               KdForm form, nn::Lengths lengths) {
  model::check_tap_shapes(student, other);
  if (student.left.empty()) throw ShapeError("kd_loss: no encoder taps");
  Tensor total;
  for (std::size_t i = 0; i < student.left.size(); ++i) {
    const Tensor dl = nn::sub(student.left[i], other.left[i]);
    const Tensor dr = nn::sub(student.right[i], other.right[i]);
    Tensor stage;
    if (form == KdForm::kLiteral) {
      stage = nn::sum_per_item(nn::abs(nn::mask_time(nn::add(dl, dr), lengths)));
    } else {
      stage = nn::add(nn::sum_per_item(nn::abs(nn::mask_time(dl, lengths))),
                      nn::sum_per_item(nn::abs(nn::mask_time(dr, lengths))));
    }
    total = i == 0 ? stage : nn::add(total, stage);
  }
  return nn::mean(total);
}

Tensor kd_total(const Tensor& l_ts, const Tensor& l_bs, double kd_eps) {
  if (l_ts.numel() != 1 || l_bs.numel() != 1)
    throw ShapeError("kd_total: inputs must be scalars");
  if (!(kd_eps > 0.0)) throw UsageError("kd_total: kd_eps must be > 0");
  if (l_ts.item() < 0.0 || l_bs.item() < 0.0)
    throw DataError(fmt::format(
        "kd_total: distillation distances cannot be negative (l_ts={}, l_bs={})",
        l_ts.item(), l_bs.item()));
  return nn::div(l_ts, nn::clamp_min(l_bs, kd_eps));
}

Tensor total_loss(const Tensor& l_rl, const Tensor& l_kd_total, double beta) {
  return nn::add(l_rl, nn::scale(l_kd_total, beta));
}

}  // namespace spatialkd::losses
