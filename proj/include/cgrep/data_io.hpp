#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cgrep/curve.hpp"

namespace cgrep::io {

struct Dims {
  std::size_t nx = 0, ny = 0, nz = 0;

  std::size_t size() const { return nx * ny * nz; }
  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const {
    return x + nx * (y + ny * z);
  }
  bool operator==(const Dims&) const = default;
};

/// Scalar intensity volume stored x-fastest (NIfTI order), spacing in mm.
class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(Dims dims, std::array<double, 3> spacing, std::vector<double> data);

  const Dims& dims() const { return dims_; }
  const std::array<double, 3>& spacing() const { return spacing_; }
  std::span<const double> data() const { return data_; }

  double at(std::size_t x, std::size_t y, std::size_t z) const {
    return data_[dims_.index(x, y, z)];
  }
  double voxel_volume() const { return spacing_[0] * spacing_[1] * spacing_[2]; }

  bool operator==(const VoxelGrid&) const = default;

 private:
  Dims dims_;
  std::array<double, 3> spacing_{1.0, 1.0, 1.0};
  std::vector<double> data_;
};

/// Region labels used by the segmentation masks.
enum class Label : std::uint8_t {
  kBackground = 0,
  kEdema = 1,
  kEnhancing = 2,
  kNecrosis = 3,
  kBrain = 4,
};
inline constexpr std::uint8_t kMaxLabel = 4;

class RegionMask {
 public:
  RegionMask() = default;
  RegionMask(Dims dims, std::vector<std::uint8_t> labels);

  const Dims& dims() const { return dims_; }
  std::span<const std::uint8_t> labels() const { return labels_; }
  std::uint8_t at(std::size_t x, std::size_t y, std::size_t z) const {
    return labels_[dims_.index(x, y, z)];
  }

  bool operator==(const RegionMask&) const = default;

 private:
  Dims dims_;
  std::vector<std::uint8_t> labels_;
};

/// Loads NIfTI-1 (.nii, little-endian, uint8/int16/float32) or RAW3D
/// (`stem.json` sidecar + `stem.raw` payload; either path may be given).
VoxelGrid load_volume(const std::filesystem::path& path);
RegionMask load_mask(const std::filesystem::path& path, const VoxelGrid& grid);
/// Loads a mask without an alignment check.
RegionMask load_mask(const std::filesystem::path& path);

/// .nii writes float32 NIfTI-1; .json/.raw writes RAW3D float64 (exact).
void write_volume(const VoxelGrid& grid, const std::filesystem::path& path);
void write_mask(const RegionMask& mask, const std::array<double, 3>& spacing,
                const std::filesystem::path& path);

inline constexpr const char* kReservedColumns[] = {
    "patient_id", "time_days", "event", "rep_label", "mgmt_status", "idh_status"};

/// Patients x named numeric features. Missing numeric cells are NaN.
struct FeatureTable {
  std::vector<std::string> patient_ids;
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> columns;  // columns[j][i], aligned with names

  std::optional<std::vector<double>> time_days;
  std::optional<std::vector<double>> event;
  std::optional<std::vector<double>> rep_label;
  std::optional<std::vector<std::string>> mgmt_status;
  std::optional<std::vector<std::string>> idh_status;

  std::size_t rows() const { return patient_ids.size(); }
  std::optional<std::size_t> find(const std::string& name) const;
  const std::vector<double>& column(const std::string& name) const;
  void add_column(std::string name, std::vector<double> values);

  /// Throws InputError when an invariant is violated.
  void validate() const;
  bool operator==(const FeatureTable&) const;
};

FeatureTable load_feature_table(const std::filesystem::path& path);
FeatureTable parse_feature_table(const std::string& text);
void write_feature_table(const FeatureTable& table, const std::filesystem::path& path);
std::string format_feature_table(const FeatureTable& table);

/// Shortest text that reads back to the same double; empty for NaN.
std::string format_real(double value);
/// Parses a real; empty text yields NaN. Throws InputError on garbage.
double parse_real(const std::string& text);

void write_curve_csv(const StepSurvivalCurve& curve, const std::filesystem::path& path);
StepSurvivalCurve load_curve_csv(const std::filesystem::path& path);

/// Writes text atomically enough for our purposes: whole file, binary mode.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Run configuration; flat key=value file, keys mirror the field names.
struct StudyConfig {
  std::uint64_t seed = 42;
  int iterations = 1000;
  int folds = 5;
  int levels = 32;
  std::vector<int> distances{1, 2, 3};
  double f1_threshold_rep = 0.6;
  double f1_threshold_survival = 0.7;
  std::vector<double> alpha_grid{0, 0.25, 0.5, 1, 2, 3, 4, 6, 8, 10, 12, 14, 16, 18};
  int permutations = 1000;
  int majority_sample = 20;
  double p_threshold = 0.05;
  int fractal_window = 11;
  std::vector<int> fractal_scales{1, 2, 4};
  std::string features_path;
  std::string output_dir = "out";

  void validate() const;
};

StudyConfig load_config(const std::filesystem::path& path);
StudyConfig parse_config(const std::string& text, StudyConfig base = {});

}  // namespace cgrep::io
