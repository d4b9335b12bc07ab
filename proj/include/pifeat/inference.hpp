#pragma once

// Forward-only evaluation of the three supported architectures. Archives are
// immutable after load and shareable across threads; every call owns its
// scratch buffers.

#include <span>
#include <vector>

#include "pifeat/dataset.hpp"
#include "pifeat/tensor.hpp"
#include "pifeat/weight_archive.hpp"

namespace pifeat::nn {

struct LstmDirectionWeights {
  const Tensor* w_ih = nullptr;  // [4H x D], gate rows ordered i, f, g, o
  const Tensor* w_hh = nullptr;  // [4H x H]
  const Tensor* bias = nullptr;  // [4H]
};

struct LstmLayerWeights {
  LstmDirectionWeights forward;
  LstmDirectionWeights backward;  // unused when bidirectional == false
  bool bidirectional = true;
};

/// Standard LSTM recursion with zero initial hidden/cell state; forward and
/// reversed passes concatenated per timestep. Input [T x D] -> [T x 2H]
/// (or [T x H] unidirectional).
Tensor lstm_forward(const Tensor& input, const LstmLayerWeights& weights);

/// Direct valid-padding convolution. input [H x W x C], kernel
/// [kh x kw x C x Cout], bias [Cout] -> [H' x W' x Cout].
Tensor conv2d_forward(const Tensor& input, const Tensor& kernel, const Tensor& bias,
                      int stride = 1);

Tensor relu(Tensor t);

/// y = W x + b with weight [out x in]; accepts [in] or [T x in] inputs.
Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias);

struct ModelOutput {
  Architecture architecture = Architecture::kBaselineSe3;
  // baseline_se3: one tangent per timestep
  std::vector<lie::Se3Tangent> se3_steps;
  // ionet_polar / embedded_cnn
  data::PolarOdometry polar;

  bool is_polar() const { return architecture != Architecture::kBaselineSe3; }
};

/// Dispatch one input window (Tensor [T x D]) through the archive's
/// architecture. Input shape is checked against the archive metadata
/// (ArchitectureMismatch on disagreement).
ModelOutput run_model(const ModelSpec& spec, const WeightArchive& archive,
                      const Tensor& input);
ModelOutput run_model(const WeightArchive& archive, const Tensor& input);

/// Pack feature rows into the [T x D] input tensor (64 -> 32 bit).
Tensor pack_features(std::span<const preint::FeatureVector> features);
Tensor pack_raw(std::span<const ImuSample> samples);
Tensor pack_averaged(std::span<const preint::AveragedSample> averaged);

}  // namespace pifeat::nn
