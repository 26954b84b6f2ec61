#include "samix/mapfile.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace samix {

namespace {

void put_u16(std::ostream& os, uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  os.write(b, 2);
}

void put_u32(std::ostream& os, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

void put_f64(std::ostream& os, const double* data, size_t n) {
  // Host is little-endian on every supported platform.
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

uint16_t get_u16(std::istream& is) {
  unsigned char b[2];
  is.read(reinterpret_cast<char*>(b), 2);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void get_f64(std::istream& is, double* data, size_t n) {
  is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

void write_metadata(std::ostream& os, const std::vector<std::pair<std::string, std::string>>& meta) {
  for (const auto& [k, v] : meta) os << k << '=' << v << '\n';
}

std::vector<std::pair<std::string, std::string>> read_metadata(std::istream& is) {
  std::vector<std::pair<std::string, std::string>> meta;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("map file: malformed metadata line '" + line + "'");
    meta.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return meta;
}

}  // namespace

std::string MapFile::meta(const std::string& key, const std::string& fallback) const {
  for (const auto& [k, v] : metadata)
    if (k == key) return v;
  return fallback;
}

void write_map_file(const std::string& path, const MapFile& file) {
  if (file.payload.size() != static_cast<size_t>(file.height) * file.width)
    throw DataError("map file: payload length does not match dimensions");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("map file: cannot open for writing: " + path);
  os.write("SAMX", 4);
  put_u16(os, file.version);
  os.put(static_cast<char>(file.kind));
  put_u32(os, file.height);
  put_u32(os, file.width);
  put_f64(os, file.payload.data(), file.payload.size());
  write_metadata(os, file.metadata);
  if (!os) throw DataError("map file: write failed: " + path);
}

MapFile read_map_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("map file: cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "SAMX", 4) != 0)
    throw DataError("map file: bad magic in " + path);
  MapFile file;
  file.version = get_u16(is);
  if (file.version != 1) throw DataError("map file: unsupported version in " + path);
  int kind = is.get();
  if (kind != 0 && kind != 1) throw DataError("map file: unknown kind tag in " + path);
  file.kind = static_cast<MapFile::Kind>(kind);
  file.height = get_u32(is);
  file.width = get_u32(is);
  file.payload.resize(static_cast<size_t>(file.height) * file.width);
  get_f64(is, file.payload.data(), file.payload.size());
  if (!is) throw DataError("map file: truncated payload in " + path);
  file.metadata = read_metadata(is);
  return file;
}

MapFile to_map_file(const DistanceMap& map) {
  MapFile file;
  file.kind = MapFile::Kind::Distance;
  file.height = static_cast<uint32_t>(map.height);
  file.width = static_cast<uint32_t>(map.width);
  file.payload = map.values;
  file.metadata = {{"source", map.source_id},
                   {"target", map.target_id},
                   {"source_samples", std::to_string(map.source_count)},
                   {"target_samples", std::to_string(map.target_count)}};
  return file;
}

MapFile to_map_file(const SensitivityMap& map) {
  MapFile file;
  file.kind = MapFile::Kind::Sensitivity;
  file.height = static_cast<uint32_t>(map.height);
  file.width = static_cast<uint32_t>(map.width);
  file.payload = map.values;
  std::ostringstream clean;
  clean.precision(17);
  clean << map.clean_error;
  file.metadata = {{"oracle", map.oracle_id},
                   {"dataset_size", std::to_string(map.dataset_size)},
                   {"seed", std::to_string(map.seed)},
                   {"clean_error", clean.str()}};
  return file;
}

DistanceMap distance_from_map_file(const MapFile& file) {
  if (file.kind != MapFile::Kind::Distance) throw DataError("expected a distance map file");
  DistanceMap map;
  map.height = static_cast<int>(file.height);
  map.width = static_cast<int>(file.width);
  map.values = file.payload;
  map.source_id = file.meta("source");
  map.target_id = file.meta("target");
  map.source_count = std::stoi(file.meta("source_samples", "0"));
  map.target_count = std::stoi(file.meta("target_samples", "0"));
  return map;
}

SensitivityMap sensitivity_from_map_file(const MapFile& file) {
  if (file.kind != MapFile::Kind::Sensitivity) throw DataError("expected a sensitivity map file");
  SensitivityMap map;
  map.height = static_cast<int>(file.height);
  map.width = static_cast<int>(file.width);
  map.values = file.payload;
  map.oracle_id = file.meta("oracle");
  map.dataset_size = std::stoi(file.meta("dataset_size", "0"));
  map.seed = std::stoull(file.meta("seed", "0"));
  map.clean_error = std::stod(file.meta("clean_error", "0"));
  return map;
}

void save_model(const std::string& path, const ToyModel& model,
                const std::vector<std::pair<std::string, std::string>>& metadata) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("checkpoint: cannot open for writing: " + path);
  os.write("SAMM", 4);
  put_u16(os, 1);
  os.put(model.use_pool ? 1 : 0);
  put_u32(os, static_cast<uint32_t>(model.input_h));
  put_u32(os, static_cast<uint32_t>(model.input_w));
  put_u32(os, static_cast<uint32_t>(model.input_c));
  put_u32(os, static_cast<uint32_t>(model.hidden));
  put_u32(os, static_cast<uint32_t>(model.classes));
  put_f64(os, model.w1.data(), model.w1.size());
  put_f64(os, model.b1.data(), model.b1.size());
  put_f64(os, model.w2.data(), model.w2.size());
  put_f64(os, model.b2.data(), model.b2.size());
  write_metadata(os, metadata);
  if (!os) throw DataError("checkpoint: write failed: " + path);
}

ToyModel load_model(const std::string& path,
                    std::vector<std::pair<std::string, std::string>>* metadata) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("checkpoint: cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "SAMM", 4) != 0) throw DataError("checkpoint: bad magic in " + path);
  if (get_u16(is) != 1) throw DataError("checkpoint: unsupported version in " + path);
  ToyModel model;
  model.use_pool = is.get() != 0;
  model.input_h = static_cast<int>(get_u32(is));
  model.input_w = static_cast<int>(get_u32(is));
  model.input_c = static_cast<int>(get_u32(is));
  model.hidden = static_cast<int>(get_u32(is));
  model.classes = static_cast<int>(get_u32(is));
  const int d = model.input_dim();
  model.w1.resize(static_cast<size_t>(model.hidden) * d);
  model.b1.resize(model.hidden);
  model.w2.resize(static_cast<size_t>(model.classes) * model.hidden);
  model.b2.resize(model.classes);
  get_f64(is, model.w1.data(), model.w1.size());
  get_f64(is, model.b1.data(), model.b1.size());
  get_f64(is, model.w2.data(), model.w2.size());
  get_f64(is, model.b2.data(), model.b2.size());
  if (!is) throw DataError("checkpoint: truncated parameters in " + path);
  if (metadata) *metadata = read_metadata(is);
  return model;
}

}  // namespace samix
