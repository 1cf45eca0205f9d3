#include "microscore/render.hpp"

#include <algorithm>
#include <cmath>

#include "microscore/image_io.hpp"

namespace microscore {

namespace {

// viridis anchors at t = 0, 1/7, ..., 1
constexpr double kAnchors[8][3] = {
    {0.267004, 0.004874, 0.329415}, {0.275191, 0.194905, 0.496005},
    {0.212395, 0.359683, 0.551710}, {0.153364, 0.497000, 0.557724},
    {0.122312, 0.633153, 0.530398}, {0.288921, 0.758394, 0.428426},
    {0.626579, 0.854645, 0.223353}, {0.993248, 0.906157, 0.143936}};

}  // namespace

std::array<std::uint8_t, 3> colormap(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * 7.0;
  const int lo = std::min(static_cast<int>(pos), 6);
  const double frac = pos - lo;
  std::array<std::uint8_t, 3> out{};
  for (int ch = 0; ch < 3; ++ch) {
    const double v = kAnchors[lo][ch] * (1.0 - frac) + kAnchors[lo + 1][ch] * frac;
    out[static_cast<std::size_t>(ch)] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return out;
}

void write_heatmap_png(const std::string& path, const Eigen::MatrixXd& values, double vmin,
                       double vmax) {
  const int rows = static_cast<int>(values.rows());
  const int cols = static_cast<int>(values.cols());
  const double span = vmax > vmin ? vmax - vmin : 1.0;
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(rows) * cols * 3);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const auto px = colormap((values(r, c) - vmin) / span);
      const std::size_t i = 3 * (static_cast<std::size_t>(r) * cols + c);
      rgb[i] = px[0];
      rgb[i + 1] = px[1];
      rgb[i + 2] = px[2];
    }
  }
  write_png_rgb8(path, rows, cols, rgb);
}

std::array<std::uint8_t, 3> label_color(int label) {
  static constexpr std::array<std::array<std::uint8_t, 3>, 10> kPalette = {{
      {230, 25, 75},   {60, 180, 75},   {255, 225, 25}, {0, 130, 200},  {245, 130, 48},
      {145, 30, 180},  {70, 240, 240},  {240, 50, 230}, {210, 245, 60}, {128, 128, 128},
  }};
  return kPalette[static_cast<std::size_t>(label) % kPalette.size()];
}

void write_label_png(const std::string& path, const Eigen::MatrixXi& labels, int k) {
  std::vector<std::array<std::uint8_t, 3>> palette;
  for (int j = 0; j < std::max(k, 1); ++j) palette.push_back(label_color(j));
  write_png_indexed(path, labels, palette);
}

void write_overlay_png(const std::string& path, const Eigen::MatrixXd& background,
                       const Eigen::MatrixXi& labels) {
  const int rows = static_cast<int>(labels.rows());
  const int cols = static_cast<int>(labels.cols());
  const double lo = background.minCoeff();
  const double hi = background.maxCoeff();
  const double span = hi > lo ? hi - lo : 1.0;
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(rows) * cols * 3);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double g = (background(r, c) - lo) / span * 255.0;
      const auto lc = label_color(labels(r, c));
      const std::size_t i = 3 * (static_cast<std::size_t>(r) * cols + c);
      for (int ch = 0; ch < 3; ++ch)
        rgb[i + static_cast<std::size_t>(ch)] = static_cast<std::uint8_t>(
            std::lround(0.6 * g + 0.4 * lc[static_cast<std::size_t>(ch)]));
    }
  }
  write_png_rgb8(path, rows, cols, rgb);
}

}  // namespace microscore
