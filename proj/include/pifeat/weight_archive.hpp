#pragma once

// PIWA weight container: magic "PIWA", u32 version, length-prefixed JSON
// metadata, then raw little-endian tensor records. The byte layout is pinned
// in docs/formats.md so external trainers can export archives directly.

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pifeat/dataset.hpp"
#include "pifeat/tensor.hpp"

namespace pifeat::nn {

enum class Architecture { kBaselineSe3, kIonetPolar, kEmbeddedCnn };

Architecture architecture_from_string(const std::string& s);
std::string to_string(Architecture a);

struct ArchiveMetadata {
  Architecture architecture = Architecture::kBaselineSe3;
  data::InputKind input_kind = data::InputKind::kPreintegrated;
  int integration_factor = 10;
  int window = 200;
  // Free-form declarations (activation choices, head conventions, ...).
  std::map<std::string, std::string> notes;
};

/// Layer dimensioning for one architecture/input pairing.
struct ModelSpec {
  Architecture architecture = Architecture::kBaselineSe3;
  int sequence_length = 0;  // timesteps after any temporal compression
  int input_dim = 0;        // 9 preintegrated, 6 raw/averaged
  int hidden1 = 0;          // recurrent architectures
  int hidden2 = 0;
  int conv1_kernel = 3;     // embedded CNN
  int conv1_channels = 16;
  int conv2_kernel = 1;
  int conv2_channels = 4;
  int output_dim = 0;       // 6 se(3) or 2 polar
};

ModelSpec make_model_spec(Architecture architecture, data::InputKind input_kind,
                          int window, int integration_factor);
ModelSpec make_model_spec(const ArchiveMetadata& metadata);

/// Exact tensor set (name -> shape) an archive must carry for a spec.
std::vector<std::pair<std::string, std::vector<std::size_t>>> required_tensors(
    const ModelSpec& spec);

struct WeightArchive {
  ArchiveMetadata metadata;
  std::map<std::string, Tensor> tensors;

  const Tensor& tensor(const std::string& name) const;
};

/// Throws ArchitectureMismatch for a missing/extra tensor, ShapeMismatch for
/// a wrong shape.
void validate_archive(const WeightArchive& archive);

WeightArchive load_archive(const std::filesystem::path& path);
void save_archive(const WeightArchive& archive, const std::filesystem::path& path);

/// All-zero tensors for the spec (useful as a smoke-test archive).
WeightArchive zero_archive(const ArchiveMetadata& metadata);

}  // namespace pifeat::nn
