#pragma once

#include <string>
#include <vector>

namespace samix {

// 8-bit grayscale heatmap, min -> 0 and max -> 255; constant maps render as
// uniform mid-gray. A sidecar <out>.range.txt records the scaling used.
void export_heatmap(const std::vector<double>& values, int height, int width,
                    const std::string& out_path);

}  // namespace samix
