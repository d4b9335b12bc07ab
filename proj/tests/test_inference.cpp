#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "pifeat/inference.hpp"
#include "pifeat/weight_archive.hpp"
#include "support/reference_nn.hpp"
#include "support/temp_dir.hpp"

using namespace pifeat;
using namespace pifeat::nn;
using pifeat::testing::RefLstmWeights;
using pifeat::testing::TempDir;

namespace {

std::mt19937_64 rng(2024);

Tensor random_tensor(std::vector<std::size_t> shape, float scale = 0.5f) {
  std::uniform_real_distribution<float> u(-scale, scale);
  Tensor t = Tensor::zeros(std::move(shape));
  for (float& v : t.data) {
    v = u(rng);
  }
  return t;
}

RefLstmWeights as_ref(const Tensor& w_ih, const Tensor& w_hh, const Tensor& bias) {
  return RefLstmWeights{w_ih.data, w_hh.data, bias.data};
}

WeightArchive random_archive(const ArchiveMetadata& metadata, float scale = 0.3f) {
  WeightArchive archive = zero_archive(metadata);
  for (auto& [name, tensor] : archive.tensors) {
    tensor = random_tensor(tensor.shape, scale);
  }
  return archive;
}

}  // namespace

TEST_CASE("all-zero lstm weights give all-zero output") {
  const Tensor input = random_tensor({5, 3});
  const Tensor w_ih = Tensor::zeros({8, 3});
  const Tensor w_hh = Tensor::zeros({8, 2});
  const Tensor bias = Tensor::zeros({8});
  LstmLayerWeights weights;
  weights.forward = {&w_ih, &w_hh, &bias};
  weights.backward = {&w_ih, &w_hh, &bias};
  const Tensor out = lstm_forward(input, weights);
  CHECK(out.shape == std::vector<std::size_t>{5, 4});
  for (float v : out.data) {
    CHECK(v == 0.0f);
  }
}

TEST_CASE("single-unit lstm cell matches a scalar hand oracle") {
  // T = 1, D = 1, H = 1, all weights 1, input 1
  Tensor input = Tensor::zeros({1, 1});
  input.data[0] = 1.0f;
  Tensor w_ih({4, 1}, {1, 1, 1, 1});
  Tensor w_hh({4, 1}, {1, 1, 1, 1});
  Tensor bias({4}, {0, 0, 0, 0});
  LstmLayerWeights weights;
  weights.forward = {&w_ih, &w_hh, &bias};
  weights.bidirectional = false;

  const Tensor out = lstm_forward(input, weights);

  const float sig = 1.0f / (1.0f + std::exp(-1.0f));
  const float c1 = sig * std::tanh(1.0f);        // f*c0 = 0, i*g
  const float h1 = sig * std::tanh(c1);          // o * tanh(c)
  CHECK(out.data[0] == doctest::Approx(h1).epsilon(1e-6));
}

TEST_CASE("lstm matches the naive reference on a small case") {
  const Tensor input = random_tensor({3, 2});
  const Tensor w_ih_f = random_tensor({8, 2});
  const Tensor w_hh_f = random_tensor({8, 2});
  const Tensor bias_f = random_tensor({8});
  const Tensor w_ih_b = random_tensor({8, 2});
  const Tensor w_hh_b = random_tensor({8, 2});
  const Tensor bias_b = random_tensor({8});

  LstmLayerWeights weights;
  weights.forward = {&w_ih_f, &w_hh_f, &bias_f};
  weights.backward = {&w_ih_b, &w_hh_b, &bias_b};
  const Tensor out = lstm_forward(input, weights);

  const auto ref = pifeat::testing::ref_lstm_bidirectional(
      input.data, 3, 2, as_ref(w_ih_f, w_hh_f, bias_f), as_ref(w_ih_b, w_hh_b, bias_b), 2);
  REQUIRE(out.data.size() == ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    CHECK(out.data[i] == doctest::Approx(ref[i]).epsilon(1e-5));
  }
}

TEST_CASE("lstm oracle equivalence over randomized shapes") {
  std::uniform_int_distribution<std::size_t> dim(1, 9);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t steps = dim(rng);
    const std::size_t in_dim = dim(rng);
    const std::size_t hidden = dim(rng);
    const Tensor input = random_tensor({steps, in_dim}, 1.0f);
    const Tensor w_ih_f = random_tensor({4 * hidden, in_dim});
    const Tensor w_hh_f = random_tensor({4 * hidden, hidden});
    const Tensor bias_f = random_tensor({4 * hidden});
    const Tensor w_ih_b = random_tensor({4 * hidden, in_dim});
    const Tensor w_hh_b = random_tensor({4 * hidden, hidden});
    const Tensor bias_b = random_tensor({4 * hidden});
    LstmLayerWeights weights;
    weights.forward = {&w_ih_f, &w_hh_f, &bias_f};
    weights.backward = {&w_ih_b, &w_hh_b, &bias_b};
    const Tensor out = lstm_forward(input, weights);
    const auto ref = pifeat::testing::ref_lstm_bidirectional(
        input.data, steps, in_dim, as_ref(w_ih_f, w_hh_f, bias_f),
        as_ref(w_ih_b, w_hh_b, bias_b), hidden);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      CHECK(std::abs(out.data[i] - ref[i]) < 1e-5f);
    }
  }
}

TEST_CASE("lstm shape mismatch") {
  const Tensor input = random_tensor({3, 5});
  const Tensor w_ih = random_tensor({8, 2});  // expects D = 2, input has 5
  const Tensor w_hh = random_tensor({8, 2});
  const Tensor bias = random_tensor({8});
  LstmLayerWeights weights;
  weights.forward = {&w_ih, &w_hh, &bias};
  weights.backward = {&w_ih, &w_hh, &bias};
  CHECK_THROWS_AS(lstm_forward(input, weights), ShapeMismatch);
}

TEST_CASE("conv identity 1x1 kernel passes input through post-relu") {
  const Tensor input = random_tensor({4, 5, 1}, 2.0f);
  Tensor kernel({1, 1, 1, 1}, {1.0f});
  Tensor bias({1}, {0.0f});
  const Tensor out = relu(conv2d_forward(input, kernel, bias));
  REQUIRE(out.shape == input.shape);
  for (std::size_t i = 0; i < input.data.size(); ++i) {
    CHECK(out.data[i] == std::max(0.0f, input.data[i]));
  }
}

TEST_CASE("all-ones 3x3 kernel on all-ones 5x5 input counts to nine") {
  Tensor input({5, 5, 1}, std::vector<float>(25, 1.0f));
  Tensor kernel({3, 3, 1, 1}, std::vector<float>(9, 1.0f));
  Tensor bias({1}, {0.0f});
  const Tensor out = conv2d_forward(input, kernel, bias);
  CHECK(out.shape == std::vector<std::size_t>{3, 3, 1});
  for (float v : out.data) {
    CHECK(v == 9.0f);
  }
}

TEST_CASE("conv oracle equivalence over randomized shapes") {
  std::uniform_int_distribution<std::size_t> kdim(1, 3);
  std::uniform_int_distribution<std::size_t> chan(1, 4);
  std::uniform_int_distribution<std::size_t> extra(0, 5);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t kh = kdim(rng);
    const std::size_t kw = kdim(rng);
    const std::size_t cin = chan(rng);
    const std::size_t cout = chan(rng);
    const std::size_t h = kh + extra(rng);
    const std::size_t w = kw + extra(rng);
    const Tensor input = random_tensor({h, w, cin}, 1.0f);
    const Tensor kernel = random_tensor({kh, kw, cin, cout});
    const Tensor bias = random_tensor({cout});
    const Tensor out = conv2d_forward(input, kernel, bias);
    const auto ref = pifeat::testing::ref_conv2d_valid(input.data, h, w, cin, kernel.data, kh,
                                                       kw, cout, bias.data);
    REQUIRE(out.data.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      CHECK(std::abs(out.data[i] - ref[i]) < 1e-5f);
    }
  }
}

TEST_CASE("conv rejects inconsistent shapes") {
  const Tensor input = random_tensor({4, 4, 2});
  const Tensor kernel = random_tensor({3, 3, 3, 1});  // channel mismatch
  const Tensor bias = random_tensor({1});
  CHECK_THROWS_AS(conv2d_forward(input, kernel, bias), ShapeMismatch);
}

TEST_CASE("zero-weight archives produce zero outputs") {
  ArchiveMetadata meta;
  meta.architecture = Architecture::kBaselineSe3;
  meta.input_kind = data::InputKind::kPreintegrated;
  meta.window = 200;
  meta.integration_factor = 10;
  const WeightArchive archive = zero_archive(meta);
  const Tensor input = random_tensor({20, 9}, 1.0f);
  const ModelOutput out = run_model(archive, input);
  REQUIRE(out.se3_steps.size() == 20);
  for (const auto& xi : out.se3_steps) {
    CHECK(xi.norm() == 0.0);
  }

  ArchiveMetadata cnn_meta = meta;
  cnn_meta.architecture = Architecture::kEmbeddedCnn;
  const ModelOutput cnn_out = run_model(zero_archive(cnn_meta), input);
  CHECK(cnn_out.polar.delta_l == 0.0);
  CHECK(cnn_out.polar.delta_phi == 0.0);
}

TEST_CASE("architecture mismatch: wrong input shape for the archive") {
  ArchiveMetadata meta;
  meta.architecture = Architecture::kIonetPolar;
  meta.input_kind = data::InputKind::kRaw;
  meta.window = 200;
  meta.integration_factor = 10;
  const WeightArchive archive = zero_archive(meta);  // expects 200 x 6
  const Tensor input = random_tensor({20, 9});
  CHECK_THROWS_AS(run_model(archive, input), ArchitectureMismatch);
}

TEST_CASE("run_model matches a reference composition for the embedded cnn") {
  ArchiveMetadata meta;
  meta.architecture = Architecture::kEmbeddedCnn;
  meta.input_kind = data::InputKind::kPreintegrated;
  meta.window = 200;
  meta.integration_factor = 10;
  const WeightArchive archive = random_archive(meta);
  const Tensor input = random_tensor({20, 9}, 1.0f);

  const ModelOutput out = run_model(archive, input);

  using namespace pifeat::testing;
  const auto c1 = ref_relu(ref_conv2d_valid(input.data, 20, 9, 1,
                                            archive.tensor("conv1.kernel").data, 3, 3, 16,
                                            archive.tensor("conv1.bias").data));
  const auto c2 = ref_relu(ref_conv2d_valid(c1, 18, 7, 16, archive.tensor("conv2.kernel").data,
                                            1, 1, 4, archive.tensor("conv2.bias").data));
  const auto y = ref_linear(c2, c2.size(), archive.tensor("head.weight").data, 2,
                            archive.tensor("head.bias").data);
  CHECK(static_cast<float>(out.polar.delta_l) == y[0]);
  CHECK(static_cast<float>(out.polar.delta_phi) == y[1]);
}

TEST_CASE("archive io round trip is exact") {
  TempDir tmp;
  ArchiveMetadata meta;
  meta.architecture = Architecture::kEmbeddedCnn;
  meta.input_kind = data::InputKind::kPreintegrated;
  meta.window = 200;
  meta.integration_factor = 10;
  meta.notes["activation"] = "relu";
  const WeightArchive archive = random_archive(meta);

  const auto path = tmp.file("weights.piwa");
  save_archive(archive, path);
  const WeightArchive loaded = load_archive(path);

  CHECK(loaded.metadata.architecture == meta.architecture);
  CHECK(loaded.metadata.input_kind == meta.input_kind);
  CHECK(loaded.metadata.window == meta.window);
  CHECK(loaded.metadata.notes.at("activation") == "relu");
  REQUIRE(loaded.tensors.size() == archive.tensors.size());
  for (const auto& [name, tensor] : archive.tensors) {
    const Tensor& other = loaded.tensor(name);
    REQUIRE(other.shape == tensor.shape);
    for (std::size_t i = 0; i < tensor.data.size(); ++i) {
      CHECK(other.data[i] == tensor.data[i]);  // bit-exact
    }
  }
}

TEST_CASE("archive loading rejects corrupted files") {
  TempDir tmp;
  const std::filesystem::path good(std::filesystem::path(PIFEAT_FIXTURES_DIR) /
                                   "golden_embedded_cnn.piwa");
  std::ifstream in(good, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  REQUIRE(bytes.size() > 100);

  const auto write_bytes = [&](const std::string& name, const std::string& content) {
    const auto p = tmp.file(name);
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p;
  };

  CHECK_THROWS_AS(load_archive(write_bytes("magic.piwa", "NOPE" + bytes.substr(4))),
                  ParseError);
  CHECK_THROWS_AS(load_archive(write_bytes("trunc.piwa", bytes.substr(0, bytes.size() - 7))),
                  ParseError);
  CHECK_THROWS_AS(load_archive(tmp.file("absent.piwa")), IoError);

  // baseline parameter count sanity: the 32/128 stack on 9-d features
  ArchiveMetadata meta;
  meta.architecture = Architecture::kBaselineSe3;
  meta.input_kind = data::InputKind::kPreintegrated;
  meta.window = 200;
  meta.integration_factor = 10;
  std::size_t params = 0;
  for (const auto& [name, shape] : required_tensors(make_model_spec(meta))) {
    params += shape_product(shape);
  }
  CHECK(params == 209926);
}

TEST_CASE("archive validation") {
  ArchiveMetadata meta;
  meta.architecture = Architecture::kBaselineSe3;
  meta.input_kind = data::InputKind::kPreintegrated;
  meta.window = 200;
  meta.integration_factor = 10;
  WeightArchive archive = zero_archive(meta);

  WeightArchive missing = archive;
  missing.tensors.erase("head.bias");
  CHECK_THROWS_AS(validate_archive(missing), ArchitectureMismatch);

  WeightArchive extra = archive;
  extra.tensors.emplace("rogue", Tensor::zeros({1}));
  CHECK_THROWS_AS(validate_archive(extra), ArchitectureMismatch);

  WeightArchive wrong = archive;
  wrong.tensors.at("head.bias") = Tensor::zeros({7});
  CHECK_THROWS_AS(validate_archive(wrong), ShapeMismatch);
}

TEST_CASE("golden fixture is reproduced bit-exactly") {
  const std::filesystem::path dir(PIFEAT_FIXTURES_DIR);
  const WeightArchive archive = load_archive(dir / "golden_embedded_cnn.piwa");

  // input and expected output are raw little-endian float32
  const auto read_floats = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::vector<float> values;
    float v = 0.0f;
    while (in.read(reinterpret_cast<char*>(&v), sizeof(v))) {
      values.push_back(v);
    }
    return values;
  };
  const std::vector<float> input_values = read_floats(dir / "golden_input.f32");
  const std::vector<float> expected = read_floats(dir / "golden_output.f32");
  REQUIRE(input_values.size() == 20 * 9);
  REQUIRE(expected.size() == 2);

  Tensor input({20, 9}, input_values);
  const ModelOutput out = run_model(archive, input);
  CHECK(static_cast<float>(out.polar.delta_l) == expected[0]);
  CHECK(static_cast<float>(out.polar.delta_phi) == expected[1]);
}

TEST_CASE("determinism across repeated runs") {
  ArchiveMetadata meta;
  meta.architecture = Architecture::kIonetPolar;
  meta.input_kind = data::InputKind::kPreintegrated;
  meta.window = 200;
  meta.integration_factor = 10;
  const WeightArchive archive = random_archive(meta);
  const Tensor input = random_tensor({20, 9}, 1.0f);
  const ModelOutput a = run_model(archive, input);
  const ModelOutput b = run_model(archive, input);
  CHECK(a.polar.delta_l == b.polar.delta_l);
  CHECK(a.polar.delta_phi == b.polar.delta_phi);
}

TEST_CASE("compressed input is faster than raw through the same architecture") {
  ArchiveMetadata pre_meta;
  pre_meta.architecture = Architecture::kBaselineSe3;
  pre_meta.input_kind = data::InputKind::kPreintegrated;
  pre_meta.window = 200;
  pre_meta.integration_factor = 10;
  const WeightArchive pre = random_archive(pre_meta);

  ArchiveMetadata raw_meta = pre_meta;
  raw_meta.input_kind = data::InputKind::kRaw;
  const WeightArchive raw = random_archive(raw_meta);

  const Tensor pre_input = random_tensor({20, 9}, 1.0f);
  const Tensor raw_input = random_tensor({200, 6}, 1.0f);

  using clock = std::chrono::steady_clock;
  const auto median_time = [](auto&& fn) {
    std::vector<double> us;
    fn();  // warm up
    for (int r = 0; r < 100; ++r) {
      const auto t0 = clock::now();
      fn();
      us.push_back(std::chrono::duration<double, std::micro>(clock::now() - t0).count());
    }
    std::sort(us.begin(), us.end());
    return us[us.size() / 2];
  };
  const double pre_us = median_time([&] { (void)run_model(pre, pre_input); });
  const double raw_us = median_time([&] { (void)run_model(raw, raw_input); });
  CHECK(pre_us < raw_us);
}
