#include "samix/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "samix/image.hpp"
#include "samix/png_io.hpp"

namespace samix {

void export_heatmap(const std::vector<double>& values, int height, int width,
                    const std::string& out_path) {
  if (values.size() != static_cast<size_t>(height) * width)
    throw DataError("export_heatmap: payload length does not match dimensions");
  for (double v : values)
    if (!std::isfinite(v)) throw DataError("export_heatmap: non-finite payload value");

  const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
  const double mn = *mn_it, mx = *mx_it;

  Image img(height, width, 1);
  if (mx > mn) {
    for (size_t k = 0; k < values.size(); ++k) img.data[k] = (values[k] - mn) / (mx - mn);
  } else {
    std::fill(img.data.begin(), img.data.end(), 128.0 / 255.0);
  }
  write_png(out_path, img);

  std::ofstream side(out_path + ".range.txt");
  if (!side) throw DataError("export_heatmap: cannot write sidecar for " + out_path);
  side.precision(17);
  side << "min=" << mn << "\nmax=" << mx << "\n";
}

}  // namespace samix
