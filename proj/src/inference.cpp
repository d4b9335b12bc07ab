#include "pifeat/inference.hpp"

#include <cmath>
#include <string>

namespace pifeat::nn {

namespace {

float sigmoidf(float x) { return 1.0f / (1.0f + std::exp(-x)); }

void require(bool ok, const std::string& message) {
  if (!ok) {
    throw ShapeMismatch(message);
  }
}

// One direction of the LSTM recursion. Writes hidden states into
// out[t, offset .. offset+H) walking t forward or in reverse.
void lstm_direction(const Tensor& input, const LstmDirectionWeights& w, bool reverse,
                    std::size_t offset, Tensor& out) {
  const std::size_t steps = input.dim(0);
  const std::size_t in_dim = input.dim(1);
  const std::size_t gates = w.w_ih->dim(0);  // 4H
  const std::size_t hidden = gates / 4;

  std::vector<float> h(hidden, 0.0f);
  std::vector<float> c(hidden, 0.0f);
  std::vector<float> pre(gates, 0.0f);

  for (std::size_t step = 0; step < steps; ++step) {
    const std::size_t t = reverse ? steps - 1 - step : step;
    for (std::size_t j = 0; j < gates; ++j) {
      float acc = w.bias->data[j];
      const float* wi = &w.w_ih->data[j * in_dim];
      for (std::size_t d = 0; d < in_dim; ++d) {
        acc += wi[d] * input.at2(t, d);
      }
      const float* wh = &w.w_hh->data[j * hidden];
      for (std::size_t k = 0; k < hidden; ++k) {
        acc += wh[k] * h[k];
      }
      pre[j] = acc;
    }
    for (std::size_t k = 0; k < hidden; ++k) {
      const float gate_i = sigmoidf(pre[k]);
      const float gate_f = sigmoidf(pre[hidden + k]);
      const float gate_g = std::tanh(pre[2 * hidden + k]);
      const float gate_o = sigmoidf(pre[3 * hidden + k]);
      c[k] = gate_f * c[k] + gate_i * gate_g;
      h[k] = gate_o * std::tanh(c[k]);
      out.at2(t, offset + k) = h[k];
    }
  }
}

void check_lstm_weights(const LstmDirectionWeights& w, std::size_t in_dim, const char* name) {
  require(w.w_ih != nullptr && w.w_hh != nullptr && w.bias != nullptr,
          std::string(name) + ": missing weight tensors");
  require(w.w_ih->rank() == 2 && w.w_hh->rank() == 2 && w.bias->rank() == 1,
          std::string(name) + ": weight tensors have wrong rank");
  const std::size_t gates = w.w_ih->dim(0);
  require(gates % 4 == 0, std::string(name) + ": gate dimension must be a multiple of 4");
  const std::size_t hidden = gates / 4;
  require(w.w_ih->dim(1) == in_dim, std::string(name) + ": w_ih input dim " +
                                        std::to_string(w.w_ih->dim(1)) + " != " +
                                        std::to_string(in_dim));
  require(w.w_hh->dim(0) == gates && w.w_hh->dim(1) == hidden,
          std::string(name) + ": w_hh shape mismatch");
  require(w.bias->dim(0) == gates, std::string(name) + ": bias shape mismatch");
}

LstmLayerWeights layer_weights(const WeightArchive& archive, const std::string& prefix) {
  LstmLayerWeights w;
  w.forward = {&archive.tensor(prefix + ".fwd.w_ih"), &archive.tensor(prefix + ".fwd.w_hh"),
               &archive.tensor(prefix + ".fwd.bias")};
  w.backward = {&archive.tensor(prefix + ".bwd.w_ih"), &archive.tensor(prefix + ".bwd.w_hh"),
                &archive.tensor(prefix + ".bwd.bias")};
  w.bidirectional = true;
  return w;
}

}  // namespace

Tensor lstm_forward(const Tensor& input, const LstmLayerWeights& weights) {
  require(input.rank() == 2, "lstm_forward expects a [T x D] input, got " +
                                 input.shape_string());
  const std::size_t in_dim = input.dim(1);
  check_lstm_weights(weights.forward, in_dim, "lstm forward direction");
  const std::size_t hidden = weights.forward.w_ih->dim(0) / 4;
  if (weights.bidirectional) {
    check_lstm_weights(weights.backward, in_dim, "lstm backward direction");
    require(weights.backward.w_ih->dim(0) / 4 == hidden,
            "lstm directions disagree on hidden size");
  }

  Tensor out = Tensor::zeros({input.dim(0), weights.bidirectional ? 2 * hidden : hidden});
  lstm_direction(input, weights.forward, /*reverse=*/false, 0, out);
  if (weights.bidirectional) {
    lstm_direction(input, weights.backward, /*reverse=*/true, hidden, out);
  }
  debug_check_finite(out, "lstm_forward");
  return out;
}

Tensor conv2d_forward(const Tensor& input, const Tensor& kernel, const Tensor& bias,
                      int stride) {
  require(stride >= 1, "conv2d stride must be >= 1");
  require(input.rank() == 3, "conv2d expects [H x W x C] input, got " + input.shape_string());
  require(kernel.rank() == 4, "conv2d expects [kh x kw x C x Cout] kernel, got " +
                                  kernel.shape_string());
  const std::size_t kh = kernel.dim(0);
  const std::size_t kw = kernel.dim(1);
  require(kernel.dim(2) == input.dim(2), "kernel channel count " +
                                             std::to_string(kernel.dim(2)) +
                                             " != input channels " +
                                             std::to_string(input.dim(2)));
  const std::size_t channels_out = kernel.dim(3);
  require(bias.rank() == 1 && bias.dim(0) == channels_out, "conv2d bias shape mismatch");
  require(input.dim(0) >= kh && input.dim(1) >= kw, "input smaller than kernel");

  const auto s = static_cast<std::size_t>(stride);
  const std::size_t out_h = (input.dim(0) - kh) / s + 1;
  const std::size_t out_w = (input.dim(1) - kw) / s + 1;
  const std::size_t channels_in = input.dim(2);

  Tensor out = Tensor::zeros({out_h, out_w, channels_out});
  for (std::size_t oy = 0; oy < out_h; ++oy) {
    for (std::size_t ox = 0; ox < out_w; ++ox) {
      for (std::size_t oc = 0; oc < channels_out; ++oc) {
        float acc = bias.data[oc];
        for (std::size_t ky = 0; ky < kh; ++ky) {
          for (std::size_t kx = 0; kx < kw; ++kx) {
            for (std::size_t ic = 0; ic < channels_in; ++ic) {
              acc += input.at3(oy * s + ky, ox * s + kx, ic) *
                     kernel.data[((ky * kw + kx) * channels_in + ic) * channels_out + oc];
            }
          }
        }
        out.at3(oy, ox, oc) = acc;
      }
    }
  }
  debug_check_finite(out, "conv2d_forward");
  return out;
}

Tensor relu(Tensor t) {
  for (float& v : t.data) {
    v = v > 0.0f ? v : 0.0f;
  }
  return t;
}

Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  require(weight.rank() == 2, "linear weight must be [out x in]");
  const std::size_t out_dim = weight.dim(0);
  const std::size_t in_dim = weight.dim(1);
  require(bias.rank() == 1 && bias.dim(0) == out_dim, "linear bias shape mismatch");

  const bool batched = input.rank() == 2;
  const std::size_t rows = batched ? input.dim(0) : 1;
  const std::size_t cols = batched ? input.dim(1) : input.dim(0);
  require(cols == in_dim, "linear input dim " + std::to_string(cols) + " != weight in dim " +
                              std::to_string(in_dim));

  Tensor out = batched ? Tensor::zeros({rows, out_dim}) : Tensor::zeros({out_dim});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t o = 0; o < out_dim; ++o) {
      float acc = bias.data[o];
      const float* w = &weight.data[o * in_dim];
      const float* x = &input.data[r * cols];
      for (std::size_t i = 0; i < in_dim; ++i) {
        acc += w[i] * x[i];
      }
      out.data[r * out_dim + o] = acc;
    }
  }
  debug_check_finite(out, "linear");
  return out;
}

ModelOutput run_model(const ModelSpec& spec, const WeightArchive& archive,
                      const Tensor& input) {
  if (input.rank() != 2 ||
      input.dim(0) != static_cast<std::size_t>(spec.sequence_length) ||
      input.dim(1) != static_cast<std::size_t>(spec.input_dim)) {
    throw ArchitectureMismatch(
        "input " + input.shape_string() + " does not match " + to_string(spec.architecture) +
        " expecting [" + std::to_string(spec.sequence_length) + "x" +
        std::to_string(spec.input_dim) + "]");
  }

  ModelOutput out;
  out.architecture = spec.architecture;
  switch (spec.architecture) {
    case Architecture::kBaselineSe3: {
      const Tensor h1 = lstm_forward(input, layer_weights(archive, "lstm1"));
      const Tensor h2 = lstm_forward(h1, layer_weights(archive, "lstm2"));
      const Tensor y = linear(h2, archive.tensor("head.weight"), archive.tensor("head.bias"));
      out.se3_steps.reserve(y.dim(0));
      for (std::size_t t = 0; t < y.dim(0); ++t) {
        lie::Se3Tangent xi;
        for (int i = 0; i < 6; ++i) {
          xi[i] = static_cast<double>(y.at2(t, static_cast<std::size_t>(i)));
        }
        out.se3_steps.push_back(xi);
      }
      break;
    }
    case Architecture::kIonetPolar: {
      const Tensor h1 = lstm_forward(input, layer_weights(archive, "lstm1"));
      const Tensor h2 = lstm_forward(h1, layer_weights(archive, "lstm2"));
      // predictions come from the last timestep's feature row
      Tensor last = Tensor::zeros({h2.dim(1)});
      for (std::size_t i = 0; i < h2.dim(1); ++i) {
        last.data[i] = h2.at2(h2.dim(0) - 1, i);
      }
      const Tensor y = linear(last, archive.tensor("head.weight"), archive.tensor("head.bias"));
      out.polar.delta_l = static_cast<double>(y.data[0]);
      out.polar.delta_phi = static_cast<double>(y.data[1]);
      break;
    }
    case Architecture::kEmbeddedCnn: {
      Tensor map = Tensor::zeros({input.dim(0), input.dim(1), 1});
      map.data = input.data;
      const Tensor c1 = relu(conv2d_forward(map, archive.tensor("conv1.kernel"),
                                            archive.tensor("conv1.bias")));
      const Tensor c2 = relu(conv2d_forward(c1, archive.tensor("conv2.kernel"),
                                            archive.tensor("conv2.bias")));
      Tensor flat = Tensor::zeros({c2.size()});
      flat.data = c2.data;
      const Tensor y = linear(flat, archive.tensor("head.weight"), archive.tensor("head.bias"));
      out.polar.delta_l = static_cast<double>(y.data[0]);
      out.polar.delta_phi = static_cast<double>(y.data[1]);
      break;
    }
  }
  return out;
}

ModelOutput run_model(const WeightArchive& archive, const Tensor& input) {
  return run_model(make_model_spec(archive.metadata), archive, input);
}

Tensor pack_features(std::span<const preint::FeatureVector> features) {
  Tensor t = Tensor::zeros({features.size(), 9});
  for (std::size_t i = 0; i < features.size(); ++i) {
    for (std::size_t j = 0; j < 9; ++j) {
      t.at2(i, j) = static_cast<float>(features[i][static_cast<Eigen::Index>(j)]);
    }
  }
  return t;
}

Tensor pack_raw(std::span<const ImuSample> samples) {
  Tensor t = Tensor::zeros({samples.size(), 6});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (int j = 0; j < 3; ++j) {
      t.at2(i, static_cast<std::size_t>(j)) = static_cast<float>(samples[i].gyro[j]);
      t.at2(i, static_cast<std::size_t>(3 + j)) = static_cast<float>(samples[i].accel[j]);
    }
  }
  return t;
}

Tensor pack_averaged(std::span<const preint::AveragedSample> averaged) {
  Tensor t = Tensor::zeros({averaged.size(), 6});
  for (std::size_t i = 0; i < averaged.size(); ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      t.at2(i, j) = static_cast<float>(averaged[i][static_cast<Eigen::Index>(j)]);
    }
  }
  return t;
}

}  // namespace pifeat::nn
