#include "pifeat/weight_archive.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "pifeat/csv.hpp"

namespace pifeat::nn {

namespace {

constexpr char kMagic[4] = {'P', 'I', 'W', 'A'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff),
                         static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

std::uint32_t get_u32(std::istream& in, const std::string& context) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
    throw ParseError("truncated archive while reading " + context);
  }
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) |
         (static_cast<std::uint32_t>(bytes[3]) << 24);
}

void put_f32(std::ostream& out, float f) {
  put_u32(out, std::bit_cast<std::uint32_t>(f));
}

float get_f32(std::istream& in, const std::string& context) {
  return std::bit_cast<float>(get_u32(in, context));
}

}  // namespace

Architecture architecture_from_string(const std::string& s) {
  if (s == "baseline_se3") return Architecture::kBaselineSe3;
  if (s == "ionet_polar") return Architecture::kIonetPolar;
  if (s == "embedded_cnn") return Architecture::kEmbeddedCnn;
  throw ConfigError("unknown architecture '" + s + "'");
}

std::string to_string(Architecture a) {
  switch (a) {
    case Architecture::kBaselineSe3: return "baseline_se3";
    case Architecture::kIonetPolar: return "ionet_polar";
    case Architecture::kEmbeddedCnn: return "embedded_cnn";
  }
  return "?";
}

ModelSpec make_model_spec(Architecture architecture, data::InputKind input_kind,
                          int window, int integration_factor) {
  ModelSpec spec;
  spec.architecture = architecture;
  const bool compressed = input_kind != data::InputKind::kRaw;
  if (compressed) {
    if (integration_factor <= 0 || window % integration_factor != 0) {
      throw ConfigError("window must be divisible by the integration factor");
    }
    spec.sequence_length = window / integration_factor;
  } else {
    spec.sequence_length = window;
  }
  spec.input_dim = input_kind == data::InputKind::kPreintegrated ? 9 : 6;
  switch (architecture) {
    case Architecture::kBaselineSe3:
      spec.hidden1 = 32;
      spec.hidden2 = 128;
      spec.output_dim = 6;
      break;
    case Architecture::kIonetPolar:
      spec.hidden1 = 128;
      spec.hidden2 = 256;
      spec.output_dim = 2;
      break;
    case Architecture::kEmbeddedCnn:
      if (input_kind != data::InputKind::kPreintegrated) {
        throw ArchitectureMismatch("embedded_cnn consumes stacked preintegrated features only");
      }
      if (spec.sequence_length < spec.conv1_kernel) {
        throw ConfigError("embedded_cnn needs at least " + std::to_string(spec.conv1_kernel) +
                          " timesteps");
      }
      spec.output_dim = 2;
      break;
  }
  return spec;
}

ModelSpec make_model_spec(const ArchiveMetadata& metadata) {
  return make_model_spec(metadata.architecture, metadata.input_kind, metadata.window,
                         metadata.integration_factor);
}

std::vector<std::pair<std::string, std::vector<std::size_t>>> required_tensors(
    const ModelSpec& spec) {
  using Shapes = std::vector<std::pair<std::string, std::vector<std::size_t>>>;
  Shapes out;
  const auto u = [](int v) { return static_cast<std::size_t>(v); };
  if (spec.architecture == Architecture::kEmbeddedCnn) {
    const std::size_t kh = u(spec.conv1_kernel);
    // valid padding over a sequence_length x 9 x 1 map
    const std::size_t out_h = u(spec.sequence_length) - kh + 1;
    const std::size_t out_w = u(spec.input_dim) - kh + 1;
    const std::size_t flat = out_h * out_w * u(spec.conv2_channels);
    out = {
        {"conv1.kernel", {kh, kh, 1, u(spec.conv1_channels)}},
        {"conv1.bias", {u(spec.conv1_channels)}},
        {"conv2.kernel", {u(spec.conv2_kernel), u(spec.conv2_kernel), u(spec.conv1_channels),
                          u(spec.conv2_channels)}},
        {"conv2.bias", {u(spec.conv2_channels)}},
        {"head.weight", {u(spec.output_dim), flat}},
        {"head.bias", {u(spec.output_dim)}},
    };
    return out;
  }
  const std::size_t d = u(spec.input_dim);
  const std::size_t h1 = u(spec.hidden1);
  const std::size_t h2 = u(spec.hidden2);
  for (const char* dir : {"fwd", "bwd"}) {
    out.emplace_back("lstm1." + std::string(dir) + ".w_ih", std::vector<std::size_t>{4 * h1, d});
    out.emplace_back("lstm1." + std::string(dir) + ".w_hh", std::vector<std::size_t>{4 * h1, h1});
    out.emplace_back("lstm1." + std::string(dir) + ".bias", std::vector<std::size_t>{4 * h1});
  }
  for (const char* dir : {"fwd", "bwd"}) {
    out.emplace_back("lstm2." + std::string(dir) + ".w_ih",
                     std::vector<std::size_t>{4 * h2, 2 * h1});
    out.emplace_back("lstm2." + std::string(dir) + ".w_hh", std::vector<std::size_t>{4 * h2, h2});
    out.emplace_back("lstm2." + std::string(dir) + ".bias", std::vector<std::size_t>{4 * h2});
  }
  out.emplace_back("head.weight", std::vector<std::size_t>{u(spec.output_dim), 2 * h2});
  out.emplace_back("head.bias", std::vector<std::size_t>{u(spec.output_dim)});
  return out;
}

const Tensor& WeightArchive::tensor(const std::string& name) const {
  const auto it = tensors.find(name);
  if (it == tensors.end()) {
    throw ArchitectureMismatch("archive is missing tensor '" + name + "'");
  }
  return it->second;
}

void validate_archive(const WeightArchive& archive) {
  const ModelSpec spec = make_model_spec(archive.metadata);
  const auto required = required_tensors(spec);
  for (const auto& [name, shape] : required) {
    const auto it = archive.tensors.find(name);
    if (it == archive.tensors.end()) {
      throw ArchitectureMismatch("archive is missing tensor '" + name + "' required by " +
                                 to_string(spec.architecture));
    }
    if (it->second.shape != shape) {
      throw ShapeMismatch("tensor '" + name + "' has shape " + it->second.shape_string() +
                          ", expected " + Tensor::zeros(shape).shape_string());
    }
  }
  if (archive.tensors.size() != required.size()) {
    throw ArchitectureMismatch("archive carries tensors beyond the set required by " +
                               to_string(spec.architecture));
  }
}

WeightArchive load_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open archive " + path.string());
  }
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw ParseError(path.string() + ": missing PIWA magic");
  }
  const std::uint32_t version = get_u32(in, "version");
  if (version != kVersion) {
    throw ParseError(path.string() + ": unsupported archive version " + std::to_string(version));
  }
  const std::uint32_t json_len = get_u32(in, "metadata length");
  std::string json_text(json_len, '\0');
  if (!in.read(json_text.data(), json_len)) {
    throw ParseError(path.string() + ": truncated metadata");
  }

  WeightArchive archive;
  try {
    const nlohmann::json meta = nlohmann::json::parse(json_text);
    archive.metadata.architecture = architecture_from_string(meta.at("architecture"));
    archive.metadata.input_kind = data::input_kind_from_string(meta.at("input_kind"));
    archive.metadata.integration_factor = meta.at("integration_factor");
    archive.metadata.window = meta.at("window");
    if (meta.contains("notes")) {
      for (const auto& [key, value] : meta.at("notes").items()) {
        archive.metadata.notes[key] = value.get<std::string>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": bad metadata JSON: " + e.what());
  }

  while (true) {
    in.peek();
    if (in.eof()) {
      break;
    }
    const std::uint32_t name_len = get_u32(in, "tensor name length");
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) {
      throw ParseError(path.string() + ": truncated tensor name");
    }
    const std::uint32_t rank = get_u32(in, "tensor rank");
    std::vector<std::size_t> shape(rank);
    for (std::uint32_t i = 0; i < rank; ++i) {
      shape[i] = get_u32(in, "tensor dims");
    }
    const std::size_t count = shape_product(shape);
    std::vector<float> values(count);
    for (std::size_t i = 0; i < count; ++i) {
      values[i] = get_f32(in, "tensor data");
    }
    archive.tensors.emplace(std::move(name), Tensor(std::move(shape), std::move(values)));
  }

  validate_archive(archive);
  return archive;
}

void save_archive(const WeightArchive& archive, const std::filesystem::path& path) {
  validate_archive(archive);
  nlohmann::json meta;
  meta["architecture"] = to_string(archive.metadata.architecture);
  meta["input_kind"] = data::to_string(archive.metadata.input_kind);
  meta["integration_factor"] = archive.metadata.integration_factor;
  meta["window"] = archive.metadata.window;
  if (!archive.metadata.notes.empty()) {
    meta["notes"] = archive.metadata.notes;
  }
  const std::string json_text = meta.dump();

  csv::AtomicFileWriter writer(path);
  std::ostream& out = writer.stream();
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(json_text.size()));
  out.write(json_text.data(), static_cast<std::streamsize>(json_text.size()));
  for (const auto& [name, tensor] : archive.tensors) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(out, static_cast<std::uint32_t>(tensor.rank()));
    for (std::size_t d : tensor.shape) {
      put_u32(out, static_cast<std::uint32_t>(d));
    }
    for (float v : tensor.data) {
      put_f32(out, v);
    }
  }
  writer.commit();
}

WeightArchive zero_archive(const ArchiveMetadata& metadata) {
  WeightArchive archive;
  archive.metadata = metadata;
  for (const auto& [name, shape] : required_tensors(make_model_spec(metadata))) {
    archive.tensors.emplace(name, Tensor::zeros(shape));
  }
  return archive;
}

}  // namespace pifeat::nn
