#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace microscore {

// Perceptually-ordered colormap (viridis anchor interpolation), t in [0,1].
std::array<std::uint8_t, 3> colormap(double t);

// Heatmap PNG of a statistic grid with an explicit shared (vmin, vmax)
// scale so every heatmap of one statistic in a run uses the same colors.
void write_heatmap_png(const std::string& path, const Eigen::MatrixXd& values, double vmin,
                       double vmax);

// Fixed qualitative palette for phase labels.
std::array<std::uint8_t, 3> label_color(int label);

// Label map as an indexed PNG.
void write_label_png(const std::string& path, const Eigen::MatrixXi& labels, int k);

// Blends label colors onto a grayscale background at fixed 40% opacity.
// `background` is min-max scaled to luminance.
void write_overlay_png(const std::string& path, const Eigen::MatrixXd& background,
                       const Eigen::MatrixXi& labels);

}  // namespace microscore
