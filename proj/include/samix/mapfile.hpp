#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "samix/dodiss.hpp"
#include "samix/model.hpp"
#include "samix/wasserstein.hpp"

namespace samix {

// Binary container for D_W and M_S maps: "SAMX", version u16, kind u8,
// h u32, w u32, h*w little-endian f64 (centered, row-major), then UTF-8
// key=value metadata lines.
struct MapFile {
  enum class Kind : uint8_t { Distance = 0, Sensitivity = 1 };

  uint16_t version = 1;
  Kind kind = Kind::Distance;
  uint32_t height = 0;
  uint32_t width = 0;
  std::vector<double> payload;
  std::vector<std::pair<std::string, std::string>> metadata;

  std::string meta(const std::string& key, const std::string& fallback = "") const;
};

void write_map_file(const std::string& path, const MapFile& file);
MapFile read_map_file(const std::string& path);

MapFile to_map_file(const DistanceMap& map);
MapFile to_map_file(const SensitivityMap& map);
DistanceMap distance_from_map_file(const MapFile& file);
SensitivityMap sensitivity_from_map_file(const MapFile& file);

// Sibling checkpoint format: "SAMM", version u16, pool flag u8, dims u32x5,
// then w1,b1,w2,b2 as little-endian f64, then metadata lines.
void save_model(const std::string& path, const ToyModel& model,
                const std::vector<std::pair<std::string, std::string>>& metadata = {});
ToyModel load_model(const std::string& path,
                    std::vector<std::pair<std::string, std::string>>* metadata = nullptr);

}  // namespace samix
