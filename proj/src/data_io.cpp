#include "cgrep/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "cgrep/common.hpp"

namespace cgrep {

double StepSurvivalCurve::at(double t) const {
  double s = 1.0;
  for (const auto& p : points) {
    if (p.time > t) break;
    s = p.survival;
  }
  return s;
}

double StepSurvivalCurve::max_time() const {
  return points.empty() ? 0.0 : points.back().time;
}

std::size_t StepSurvivalCurve::censor_mark_count() const {
  return static_cast<std::size_t>(std::count_if(
      points.begin(), points.end(), [](const CurvePoint& p) { return p.censor_mark; }));
}

}  // namespace cgrep

namespace cgrep::io {

namespace fs = std::filesystem;

VoxelGrid::VoxelGrid(Dims dims, std::array<double, 3> spacing, std::vector<double> data)
    : dims_(dims), spacing_(spacing), data_(std::move(data)) {
  if (dims_.nx == 0 || dims_.ny == 0 || dims_.nz == 0) {
    throw InputError("voxel grid dims must be positive");
  }
  for (double s : spacing_) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InputError("voxel spacing must be positive");
  }
  if (data_.size() != dims_.size()) {
    throw InputError("voxel grid payload has " + std::to_string(data_.size()) +
                     " values, dims imply " + std::to_string(dims_.size()));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw InputError("voxel grid contains non-finite intensity");
  }
}

RegionMask::RegionMask(Dims dims, std::vector<std::uint8_t> labels)
    : dims_(dims), labels_(std::move(labels)) {
  if (dims_.nx == 0 || dims_.ny == 0 || dims_.nz == 0) {
    throw InputError("mask dims must be positive");
  }
  if (labels_.size() != dims_.size()) {
    throw InputError("mask payload size does not match dims");
  }
  for (auto l : labels_) {
    if (l > kMaxLabel) {
      throw InputError("unknown label " + std::to_string(l) + " in mask");
    }
  }
}

namespace {

enum class DType { kUint8, kInt16, kFloat32, kFloat64 };

std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::kUint8: return 1;
    case DType::kInt16: return 2;
    case DType::kFloat32: return 4;
    case DType::kFloat64: return 8;
  }
  return 0;
}

DType parse_dtype(const std::string& s) {
  if (s == "uint8") return DType::kUint8;
  if (s == "int16") return DType::kInt16;
  if (s == "float32") return DType::kFloat32;
  if (s == "float64") return DType::kFloat64;
  throw InputError("unsupported RAW3D dtype '" + s + "'");
}

std::vector<double> decode_payload(const char* bytes, std::size_t count, DType type) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    switch (type) {
      case DType::kUint8: out[i] = static_cast<unsigned char>(bytes[i]); break;
      case DType::kInt16: {
        std::int16_t v;
        std::memcpy(&v, bytes + 2 * i, 2);
        out[i] = v;
        break;
      }
      case DType::kFloat32: {
        float v;
        std::memcpy(&v, bytes + 4 * i, 4);
        out[i] = v;
        break;
      }
      case DType::kFloat64: {
        double v;
        std::memcpy(&v, bytes + 8 * i, 8);
        out[i] = v;
        break;
      }
    }
  }
  return out;
}

std::string read_binary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RawVolume {
  Dims dims;
  std::array<double, 3> spacing{1, 1, 1};
  std::vector<double> values;
};

bool is_raw3d(const fs::path& path) {
  const auto ext = path.extension().string();
  return ext == ".json" || ext == ".raw";
}

RawVolume read_raw3d(const fs::path& path) {
  fs::path sidecar = path, payload = path;
  sidecar.replace_extension(".json");
  payload.replace_extension(".raw");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_text(sidecar));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("invalid RAW3D sidecar " + sidecar.string() + ": " + e.what());
  }
  RawVolume vol;
  try {
    const auto dims = meta.at("dims").get<std::vector<long long>>();
    if (dims.size() != 3) throw InputError("RAW3D dims must have 3 entries");
    for (auto d : dims) {
      if (d <= 0) throw InputError("RAW3D dims must be positive");
    }
    vol.dims = {static_cast<std::size_t>(dims[0]), static_cast<std::size_t>(dims[1]),
                static_cast<std::size_t>(dims[2])};
    if (meta.contains("spacing")) {
      const auto sp = meta.at("spacing").get<std::vector<double>>();
      if (sp.size() != 3) throw InputError("RAW3D spacing must have 3 entries");
      vol.spacing = {sp[0], sp[1], sp[2]};
    }
    const DType type = parse_dtype(meta.at("dtype").get<std::string>());
    const std::string bytes = read_binary(payload);
    const std::size_t expected = vol.dims.size() * dtype_size(type);
    if (bytes.size() != expected) {
      throw InputError("RAW3D payload " + payload.string() + " has " +
                       std::to_string(bytes.size()) + " bytes, dims imply " +
                       std::to_string(expected));
    }
    vol.values = decode_payload(bytes.data(), vol.dims.size(), type);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("invalid RAW3D sidecar " + sidecar.string() + ": " + e.what());
  }
  return vol;
}

template <typename T>
T read_le(const std::string& buf, std::size_t offset) {
  T v;
  std::memcpy(&v, buf.data() + offset, sizeof(T));
  return v;
}

template <typename T>
void put_le(std::string& buf, std::size_t offset, T v) {
  std::memcpy(buf.data() + offset, &v, sizeof(T));
}

constexpr std::size_t kNiftiHeaderSize = 348;
constexpr std::size_t kNiftiDataOffset = 352;

RawVolume read_nifti(const fs::path& path) {
  const std::string buf = read_binary(path);
  if (buf.size() < kNiftiHeaderSize) throw InputError("truncated NIfTI header in " + path.string());
  const auto sizeof_hdr = read_le<std::int32_t>(buf, 0);
  if (sizeof_hdr != 348) {
    throw InputError("unsupported NIfTI file (not little-endian NIfTI-1): " + path.string());
  }
  if (std::memcmp(buf.data() + 344, "n+1", 4) != 0) {
    throw InputError("only single-file NIfTI-1 (.nii) is supported: " + path.string());
  }
  std::array<std::int16_t, 8> dim{};
  for (int i = 0; i < 8; ++i) dim[i] = read_le<std::int16_t>(buf, 40 + 2 * i);
  if (dim[0] < 3 || dim[0] > 4 || (dim[0] == 4 && dim[4] != 1)) {
    throw InputError("only 3D NIfTI volumes are supported");
  }
  RawVolume vol;
  for (int i = 1; i <= 3; ++i) {
    if (dim[i] <= 0) throw InputError("NIfTI dims must be positive");
  }
  vol.dims = {static_cast<std::size_t>(dim[1]), static_cast<std::size_t>(dim[2]),
              static_cast<std::size_t>(dim[3])};
  for (int i = 0; i < 3; ++i) {
    const float p = read_le<float>(buf, 76 + 4 * (i + 1));
    vol.spacing[i] = p > 0.0f ? p : 1.0;
  }
  const auto datatype = read_le<std::int16_t>(buf, 70);
  DType type;
  switch (datatype) {
    case 2: type = DType::kUint8; break;
    case 4: type = DType::kInt16; break;
    case 16: type = DType::kFloat32; break;
    default:
      throw InputError("unsupported NIfTI datatype code " + std::to_string(datatype) +
                       " (uint8, int16, float32 only)");
  }
  const auto vox_offset = static_cast<std::size_t>(read_le<float>(buf, 108));
  const std::size_t offset = std::max(vox_offset, kNiftiDataOffset);
  const std::size_t expected = vol.dims.size() * dtype_size(type);
  if (buf.size() < offset || buf.size() - offset != expected) {
    throw InputError("NIfTI payload size does not match header dims in " + path.string());
  }
  vol.values = decode_payload(buf.data() + offset, vol.dims.size(), type);
  const float slope = read_le<float>(buf, 112);
  const float inter = read_le<float>(buf, 116);
  if (slope != 0.0f && std::isfinite(slope) && std::isfinite(inter) &&
      (slope != 1.0f || inter != 0.0f)) {
    for (auto& v : vol.values) v = v * slope + inter;
  }
  return vol;
}

RawVolume read_any(const fs::path& path) {
  if (is_raw3d(path)) return read_raw3d(path);
  if (path.extension() == ".nii") return read_nifti(path);
  throw InputError("unsupported volume format: " + path.string() +
                   " (expected .nii or RAW3D .json/.raw)");
}

void write_raw3d(const Dims& dims, const std::array<double, 3>& spacing,
                 const std::string& dtype, const std::string& payload, const fs::path& path) {
  fs::path sidecar = path, data = path;
  sidecar.replace_extension(".json");
  data.replace_extension(".raw");
  nlohmann::ordered_json meta;
  meta["dims"] = {dims.nx, dims.ny, dims.nz};
  meta["spacing"] = {spacing[0], spacing[1], spacing[2]};
  meta["dtype"] = dtype;
  write_text(sidecar, meta.dump(2) + "\n");
  write_text(data, payload);
}

void write_nifti(const Dims& dims, const std::array<double, 3>& spacing, std::int16_t datatype,
                 std::int16_t bitpix, const std::string& payload, const fs::path& path) {
  std::string buf(kNiftiDataOffset, '\0');
  put_le<std::int32_t>(buf, 0, 348);
  const std::array<std::int16_t, 8> dim{3, static_cast<std::int16_t>(dims.nx),
                                        static_cast<std::int16_t>(dims.ny),
                                        static_cast<std::int16_t>(dims.nz), 1, 1, 1, 1};
  for (int i = 0; i < 8; ++i) put_le<std::int16_t>(buf, 40 + 2 * i, dim[i]);
  put_le<std::int16_t>(buf, 70, datatype);
  put_le<std::int16_t>(buf, 72, bitpix);
  put_le<float>(buf, 76, 1.0f);
  for (int i = 0; i < 3; ++i) put_le<float>(buf, 80 + 4 * i, static_cast<float>(spacing[i]));
  put_le<float>(buf, 108, static_cast<float>(kNiftiDataOffset));
  put_le<float>(buf, 112, 1.0f);
  buf[123] = 2;  // xyzt_units: mm
  std::memcpy(buf.data() + 344, "n+1", 4);
  write_text(path, buf + payload);
}

}  // namespace

VoxelGrid load_volume(const fs::path& path) {
  RawVolume vol = read_any(path);
  return VoxelGrid(vol.dims, vol.spacing, std::move(vol.values));
}

RegionMask load_mask(const fs::path& path) {
  RawVolume vol = read_any(path);
  std::vector<std::uint8_t> labels(vol.values.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double v = vol.values[i];
    if (v != std::floor(v) || v < 0) throw InputError("mask contains non-integer label");
    if (v > kMaxLabel) {
      throw InputError("unknown label " + format_real(v) + " in mask " + path.string());
    }
    labels[i] = static_cast<std::uint8_t>(v);
  }
  return RegionMask(vol.dims, std::move(labels));
}

RegionMask load_mask(const fs::path& path, const VoxelGrid& grid) {
  RegionMask mask = load_mask(path);
  if (!(mask.dims() == grid.dims())) {
    const auto& m = mask.dims();
    const auto& g = grid.dims();
    throw InputError("mask dims " + std::to_string(m.nx) + "x" + std::to_string(m.ny) + "x" +
                     std::to_string(m.nz) + " do not align with volume dims " +
                     std::to_string(g.nx) + "x" + std::to_string(g.ny) + "x" +
                     std::to_string(g.nz));
  }
  return mask;
}

void write_volume(const VoxelGrid& grid, const fs::path& path) {
  const auto values = grid.data();
  if (is_raw3d(path)) {
    std::string payload(values.size() * 8, '\0');
    std::memcpy(payload.data(), values.data(), payload.size());
    write_raw3d(grid.dims(), grid.spacing(), "float64", payload, path);
  } else if (path.extension() == ".nii") {
    std::string payload(values.size() * 4, '\0');
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto f = static_cast<float>(values[i]);
      std::memcpy(payload.data() + 4 * i, &f, 4);
    }
    write_nifti(grid.dims(), grid.spacing(), 16, 32, payload, path);
  } else {
    throw InputError("unsupported output volume format: " + path.string());
  }
}

void write_mask(const RegionMask& mask, const std::array<double, 3>& spacing,
                const fs::path& path) {
  const auto labels = mask.labels();
  std::string payload(labels.begin(), labels.end());
  if (is_raw3d(path)) {
    write_raw3d(mask.dims(), spacing, "uint8", payload, path);
  } else if (path.extension() == ".nii") {
    write_nifti(mask.dims(), spacing, 2, 8, payload, path);
  } else {
    throw InputError("unsupported output mask format: " + path.string());
  }
}

// ---------------------------------------------------------------------------
// Text helpers

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw InputError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) { return read_binary(path); }

std::string format_real(double value) {
  if (std::isnan(value)) return "";
  if (value == 0.0) return "0";  // folds -0 into 0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

double parse_real(const std::string& text) {
  std::size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  if (b == e) return std::nan("");
  double v = 0.0;
  const char* first = text.data() + b;
  const char* last = text.data() + e;
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw InputError("non-numeric value '" + text.substr(b, e - b) + "'");
  }
  return v;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) lines.push_back(std::move(cur));
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

bool nan_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) != std::isnan(b[i])) return false;
    if (!std::isnan(a[i]) && a[i] != b[i]) return false;
  }
  return true;
}

bool nan_equal(const std::optional<std::vector<double>>& a,
               const std::optional<std::vector<double>>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || nan_equal(*a, *b);
}

}  // namespace

std::optional<std::size_t> FeatureTable::find(const std::string& name) const {
  for (std::size_t j = 0; j < feature_names.size(); ++j) {
    if (feature_names[j] == name) return j;
  }
  return std::nullopt;
}

const std::vector<double>& FeatureTable::column(const std::string& name) const {
  if (auto j = find(name)) return columns[*j];
  throw InputError("missing feature column '" + name + "'");
}

void FeatureTable::add_column(std::string name, std::vector<double> values) {
  if (find(name)) throw InputError("duplicate feature name '" + name + "'");
  if (values.size() != rows()) throw InputError("column '" + name + "' has wrong length");
  feature_names.push_back(std::move(name));
  columns.push_back(std::move(values));
}

void FeatureTable::validate() const {
  const std::size_t n = rows();
  std::unordered_set<std::string> ids;
  for (const auto& id : patient_ids) {
    if (id.empty()) throw InputError("empty patient_id");
    if (!ids.insert(id).second) throw InputError("duplicate patient_id '" + id + "'");
  }
  if (feature_names.size() != columns.size()) throw InputError("feature name/column mismatch");
  std::unordered_set<std::string> names;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (!names.insert(feature_names[j]).second) {
      throw InputError("duplicate feature name '" + feature_names[j] + "'");
    }
    if (columns[j].size() != n) throw InputError("ragged column '" + feature_names[j] + "'");
    for (double v : columns[j]) {
      if (std::isinf(v)) throw InputError("non-finite value in '" + feature_names[j] + "'");
    }
  }
  auto check_binary = [&](const std::optional<std::vector<double>>& col, const char* name) {
    if (!col) return;
    if (col->size() != n) throw InputError(std::string("ragged column '") + name + "'");
    for (double v : *col) {
      if (!std::isnan(v) && v != 0.0 && v != 1.0) {
        throw InputError(std::string("column '") + name + "' must be 0/1, found " +
                         format_real(v));
      }
    }
  };
  check_binary(event, "event");
  check_binary(rep_label, "rep_label");
  if (time_days) {
    if (time_days->size() != n) throw InputError("ragged column 'time_days'");
    for (double v : *time_days) {
      if (!std::isnan(v) && !(v > 0.0 && std::isfinite(v))) {
        throw InputError("time_days must be positive, found " + format_real(v));
      }
    }
  }
  for (const auto* col : {&mgmt_status, &idh_status}) {
    if (*col && (*col)->size() != n) throw InputError("ragged molecular column");
  }
}

bool FeatureTable::operator==(const FeatureTable& o) const {
  if (patient_ids != o.patient_ids || feature_names != o.feature_names) return false;
  if (columns.size() != o.columns.size()) return false;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (!nan_equal(columns[j], o.columns[j])) return false;
  }
  return nan_equal(time_days, o.time_days) && nan_equal(event, o.event) &&
         nan_equal(rep_label, o.rep_label) && mgmt_status == o.mgmt_status &&
         idh_status == o.idh_status;
}

FeatureTable parse_feature_table(const std::string& text) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw InputError("feature table is empty");
  const auto header = split_csv_line(lines[0]);
  std::optional<std::size_t> id_col;
  std::set<std::string> seen;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!seen.insert(header[c]).second) {
      throw InputError("duplicate column '" + header[c] + "'");
    }
    if (header[c] == "patient_id") id_col = c;
  }
  if (!id_col) throw InputError("feature table lacks a patient_id column");

  FeatureTable table;
  std::vector<std::vector<std::string>> cells(header.size());
  for (std::size_t r = 1; r < lines.size(); ++r) {
    auto row = split_csv_line(lines[r]);
    if (row.size() != header.size()) {
      throw InputError("ragged row " + std::to_string(r + 1) + ": " +
                       std::to_string(row.size()) + " cells, header has " +
                       std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < row.size(); ++c) cells[c].push_back(std::move(row[c]));
  }
  table.patient_ids = cells[*id_col];
  auto numeric = [&](std::size_t c) {
    std::vector<double> out;
    out.reserve(cells[c].size());
    for (std::size_t r = 0; r < cells[c].size(); ++r) {
      try {
        out.push_back(parse_real(cells[c][r]));
      } catch (const InputError& e) {
        throw InputError(std::string(e.what()) + " in column '" + header[c] + "' row " +
                         std::to_string(r + 2));
      }
    }
    return out;
  };
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto& name = header[c];
    if (c == *id_col) continue;
    if (name == "time_days") {
      table.time_days = numeric(c);
    } else if (name == "event") {
      table.event = numeric(c);
    } else if (name == "rep_label") {
      table.rep_label = numeric(c);
    } else if (name == "mgmt_status") {
      table.mgmt_status = cells[c];
    } else if (name == "idh_status") {
      table.idh_status = cells[c];
    } else {
      table.feature_names.push_back(name);
      table.columns.push_back(numeric(c));
    }
  }
  table.validate();
  return table;
}

FeatureTable load_feature_table(const fs::path& path) {
  return parse_feature_table(read_text(path));
}

std::string format_feature_table(const FeatureTable& table) {
  table.validate();
  std::string out = "patient_id";
  auto add_header = [&](bool present, const char* name) {
    if (present) out += std::string(",") + name;
  };
  add_header(table.time_days.has_value(), "time_days");
  add_header(table.event.has_value(), "event");
  add_header(table.rep_label.has_value(), "rep_label");
  add_header(table.mgmt_status.has_value(), "mgmt_status");
  add_header(table.idh_status.has_value(), "idh_status");
  for (const auto& name : table.feature_names) out += "," + quote_if_needed(name);
  out += '\n';
  for (std::size_t i = 0; i < table.rows(); ++i) {
    out += quote_if_needed(table.patient_ids[i]);
    if (table.time_days) out += "," + format_real((*table.time_days)[i]);
    if (table.event) out += "," + format_real((*table.event)[i]);
    if (table.rep_label) out += "," + format_real((*table.rep_label)[i]);
    if (table.mgmt_status) out += "," + quote_if_needed((*table.mgmt_status)[i]);
    if (table.idh_status) out += "," + quote_if_needed((*table.idh_status)[i]);
    for (const auto& col : table.columns) out += "," + format_real(col[i]);
    out += '\n';
  }
  return out;
}

void write_feature_table(const FeatureTable& table, const fs::path& path) {
  write_text(path, format_feature_table(table));
}

void write_curve_csv(const StepSurvivalCurve& curve, const fs::path& path) {
  std::string out = "time,survival,n_at_risk,is_censor_mark\n";
  for (const auto& p : curve.points) {
    out += format_real(p.time) + "," + format_real(p.survival) + "," +
           std::to_string(p.n_at_risk) + "," + (p.censor_mark ? "1" : "0") + "\n";
  }
  write_text(path, out);
}

StepSurvivalCurve load_curve_csv(const fs::path& path) {
  const auto lines = split_lines(read_text(path));
  if (lines.empty() || lines[0] != "time,survival,n_at_risk,is_censor_mark") {
    throw InputError("curve file lacks the expected header: " + path.string());
  }
  StepSurvivalCurve curve;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split_csv_line(lines[r]);
    if (cells.size() != 4) throw InputError("ragged curve row " + std::to_string(r + 1));
    CurvePoint p;
    p.time = parse_real(cells[0]);
    p.survival = parse_real(cells[1]);
    p.n_at_risk = static_cast<int>(parse_real(cells[2]));
    p.censor_mark = parse_real(cells[3]) != 0.0;
    if (!curve.points.empty() && p.time < curve.points.back().time) {
      throw InputError("curve rows must be sorted by time");
    }
    curve.points.push_back(p);
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Config

void StudyConfig::validate() const {
  if (iterations < 1) throw ParameterError("iterations must be >= 1");
  if (folds < 2) throw ParameterError("folds must be >= 2");
  if (levels < 2) throw ParameterError("levels must be >= 2");
  if (permutations < 1) throw ParameterError("permutations must be >= 1");
  if (alpha_grid.empty()) throw ParameterError("alpha grid must be non-empty");
  for (double a : alpha_grid) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw ParameterError("alpha values must be >= 0");
  }
  if (distances.empty()) throw ParameterError("distances must be non-empty");
  for (int d : distances) {
    if (d < 1) throw ParameterError("distances must be >= 1");
  }
  if (majority_sample < 0) throw ParameterError("majority_sample must be >= 0");
  if (fractal_window < 5 || fractal_window % 2 == 0) {
    throw ParameterError("fractal_window must be odd and >= 5");
  }
  if (fractal_scales.size() < 3) throw ParameterError("at least 3 fractal scales required");
}

namespace {

template <typename T>
std::vector<T> parse_list(const std::string& value) {
  std::vector<T> out;
  std::string item;
  std::istringstream ss(value);
  while (std::getline(ss, item, ',')) {
    const double v = parse_real(item);
    if (std::isnan(v)) continue;
    out.push_back(static_cast<T>(v));
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

StudyConfig parse_config(const std::string& text, StudyConfig cfg) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(lineno) + " lacks '='");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto as_int = [&] { return static_cast<int>(parse_real(value)); };
    if (key == "seed") {
      cfg.seed = std::stoull(value);
    } else if (key == "iterations") {
      cfg.iterations = as_int();
    } else if (key == "folds") {
      cfg.folds = as_int();
    } else if (key == "levels") {
      cfg.levels = as_int();
    } else if (key == "distances") {
      cfg.distances = parse_list<int>(value);
    } else if (key == "f1_threshold_rep") {
      cfg.f1_threshold_rep = parse_real(value);
    } else if (key == "f1_threshold_survival") {
      cfg.f1_threshold_survival = parse_real(value);
    } else if (key == "alpha_grid") {
      cfg.alpha_grid = parse_list<double>(value);
    } else if (key == "permutations") {
      cfg.permutations = as_int();
    } else if (key == "majority_sample") {
      cfg.majority_sample = as_int();
    } else if (key == "p_threshold") {
      cfg.p_threshold = parse_real(value);
    } else if (key == "fractal_window") {
      cfg.fractal_window = as_int();
    } else if (key == "fractal_scales") {
      cfg.fractal_scales = parse_list<int>(value);
    } else if (key == "features_path") {
      cfg.features_path = value;
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else {
      throw InputError("unknown config key '" + key + "' on line " + std::to_string(lineno));
    }
  }
  cfg.validate();
  return cfg;
}

StudyConfig load_config(const fs::path& path) { return parse_config(read_text(path)); }

}  // namespace cgrep::io
