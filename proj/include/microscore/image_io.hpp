#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "microscore/micrograph.hpp"

namespace microscore {

enum class ImageFormat { autodetect, png, pgm };

// Decodes an 8- or 16-bit grayscale PNG or PGM into raw intensities.
// Throws std::runtime_error for unreadable files and std::invalid_argument
// for non-grayscale or zero-area images.
Micrograph load_micrograph(const std::string& path, ImageFormat format = ImageFormat::autodetect);

// 16-bit grayscale PNG; values min-max scaled to the full range. Returns
// the (lo, hi) range used so callers can record it in sidecar metadata.
std::pair<double, double> write_png_gray16(const std::string& path, const Eigen::MatrixXd& values);

// 8-bit RGB PNG from interleaved rows (3*cols bytes per row).
void write_png_rgb8(const std::string& path, int rows, int cols,
                    const std::vector<std::uint8_t>& rgb);

// Indexed PNG with an explicit palette; `labels` are palette indices.
void write_png_indexed(const std::string& path, const Eigen::MatrixXi& labels,
                       const std::vector<std::array<std::uint8_t, 3>>& palette);

// Binary (P5) PGM, 8- or 16-bit from the raw integer values given.
void write_pgm(const std::string& path, const Eigen::MatrixXd& values, int max_value = 255);

}  // namespace microscore
