#include "microscore/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace microscore {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Micrograph load_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("cannot read file: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png init failed");
  }
  std::vector<png_bytep> row_ptrs;
  std::vector<png_byte> data;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("unreadable file: " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);

  if (width == 0 || height == 0) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::invalid_argument("zero-area image: " + path);
  }
  if (color != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::invalid_argument("non-grayscale image: " + path);
  }
  if (depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
    depth = 8;
  }
  png_read_update_info(png, info);

  const std::size_t rowbytes = png_get_rowbytes(png, info);
  data.resize(rowbytes * height);
  row_ptrs.resize(height);
  for (png_uint_32 r = 0; r < height; ++r) row_ptrs[r] = data.data() + r * rowbytes;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Micrograph m;
  m.id = path;
  m.pixels.resize(height, width);
  if (depth == 16) {
    // PNG stores 16-bit samples big-endian
    for (png_uint_32 r = 0; r < height; ++r) {
      const png_byte* row = data.data() + r * rowbytes;
      for (png_uint_32 c = 0; c < width; ++c)
        m.pixels(r, c) = static_cast<double>((row[2 * c] << 8) | row[2 * c + 1]);
    }
  } else {
    for (png_uint_32 r = 0; r < height; ++r) {
      const png_byte* row = data.data() + r * rowbytes;
      for (png_uint_32 c = 0; c < width; ++c) m.pixels(r, c) = static_cast<double>(row[c]);
    }
  }
  return m;
}

Micrograph load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P2") throw std::invalid_argument("non-grayscale image: " + path);

  auto next_token = [&in, &path]() -> long {
    // skip whitespace and '#' comment lines between header tokens
    while (true) {
      int ch = in.peek();
      if (ch == '#') {
        std::string line;
        std::getline(in, line);
      } else if (std::isspace(ch)) {
        in.get();
      } else {
        break;
      }
    }
    long v = -1;
    in >> v;
    if (!in) throw std::runtime_error("unreadable file: " + path);
    return v;
  };

  const long width = next_token();
  const long height = next_token();
  const long maxval = next_token();
  if (width <= 0 || height <= 0) throw std::invalid_argument("zero-area image: " + path);
  if (maxval <= 0 || maxval > 65535) throw std::runtime_error("unreadable file: " + path);

  Micrograph m;
  m.id = path;
  m.pixels.resize(height, width);
  if (magic == "P2") {
    for (long r = 0; r < height; ++r)
      for (long c = 0; c < width; ++c) m.pixels(r, c) = static_cast<double>(next_token());
    return m;
  }
  in.get();  // single whitespace after maxval
  const bool wide = maxval > 255;
  std::vector<unsigned char> buf(static_cast<std::size_t>(width) * (wide ? 2 : 1));
  for (long r = 0; r < height; ++r) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) throw std::runtime_error("unreadable file: " + path);
    for (long c = 0; c < width; ++c)
      m.pixels(r, c) = wide ? static_cast<double>((buf[2 * c] << 8) | buf[2 * c + 1])
                            : static_cast<double>(buf[c]);
  }
  return m;
}

}  // namespace

Micrograph load_micrograph(const std::string& path, ImageFormat format) {
  if (format == ImageFormat::autodetect) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw std::runtime_error("cannot read file: " + path);
    unsigned char sig[2] = {0, 0};
    probe.read(reinterpret_cast<char*>(sig), 2);
    format = (sig[0] == 0x89 && sig[1] == 'P') ? ImageFormat::png : ImageFormat::pgm;
  }
  Micrograph m = format == ImageFormat::png ? load_png(path) : load_pgm(path);
  if (m.pixels.size() == 0) throw std::invalid_argument("zero-area image: " + path);
  m.standardized = false;
  return m;
}

namespace {

void write_png(const std::string& path, int rows, int cols, int color_type, int depth,
               const std::vector<png_bytep>& row_ptrs,
               const std::vector<std::array<std::uint8_t, 3>>* palette) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("cannot open for writing: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png init failed");
  }
  std::vector<png_color> pal;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("png write failed: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(cols), static_cast<png_uint_32>(rows), depth,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  if (palette) {
    pal.resize(palette->size());
    for (std::size_t i = 0; i < palette->size(); ++i)
      pal[i] = {(*palette)[i][0], (*palette)[i][1], (*palette)[i][2]};
    png_set_PLTE(png, info, pal.data(), static_cast<int>(pal.size()));
  }
  png_write_info(png, info);
  png_write_image(png, const_cast<png_bytep*>(row_ptrs.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

std::pair<double, double> write_png_gray16(const std::string& path, const Eigen::MatrixXd& values) {
  const int rows = static_cast<int>(values.rows());
  const int cols = static_cast<int>(values.cols());
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  const double span = hi > lo ? hi - lo : 1.0;
  std::vector<png_byte> data(static_cast<std::size_t>(rows) * cols * 2);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double t = (values(r, c) - lo) / span;
      const auto v = static_cast<std::uint16_t>(std::lround(t * 65535.0));
      data[2 * (static_cast<std::size_t>(r) * cols + c)] = static_cast<png_byte>(v >> 8);
      data[2 * (static_cast<std::size_t>(r) * cols + c) + 1] = static_cast<png_byte>(v & 0xff);
    }
  }
  std::vector<png_bytep> rp(rows);
  for (int r = 0; r < rows; ++r) rp[r] = data.data() + static_cast<std::size_t>(r) * cols * 2;
  write_png(path, rows, cols, PNG_COLOR_TYPE_GRAY, 16, rp, nullptr);
  return {lo, hi};
}

void write_png_rgb8(const std::string& path, int rows, int cols,
                    const std::vector<std::uint8_t>& rgb) {
  if (rgb.size() != static_cast<std::size_t>(rows) * cols * 3)
    throw std::invalid_argument("rgb buffer size mismatch");
  std::vector<png_bytep> rp(rows);
  for (int r = 0; r < rows; ++r)
    rp[r] = const_cast<png_bytep>(rgb.data() + static_cast<std::size_t>(r) * cols * 3);
  write_png(path, rows, cols, PNG_COLOR_TYPE_RGB, 8, rp, nullptr);
}

void write_png_indexed(const std::string& path, const Eigen::MatrixXi& labels,
                       const std::vector<std::array<std::uint8_t, 3>>& palette) {
  const int rows = static_cast<int>(labels.rows());
  const int cols = static_cast<int>(labels.cols());
  std::vector<png_byte> data(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      data[static_cast<std::size_t>(r) * cols + c] = static_cast<png_byte>(labels(r, c));
  std::vector<png_bytep> rp(rows);
  for (int r = 0; r < rows; ++r) rp[r] = data.data() + static_cast<std::size_t>(r) * cols;
  write_png(path, rows, cols, PNG_COLOR_TYPE_PALETTE, 8, rp, &palette);
}

void write_pgm(const std::string& path, const Eigen::MatrixXd& values, int max_value) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const bool wide = max_value > 255;
  out << "P5\n" << values.cols() << " " << values.rows() << "\n" << max_value << "\n";
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const long v = std::lround(std::clamp(values(r, c), 0.0, static_cast<double>(max_value)));
      if (wide) {
        out.put(static_cast<char>((v >> 8) & 0xff));
        out.put(static_cast<char>(v & 0xff));
      } else {
        out.put(static_cast<char>(v & 0xff));
      }
    }
  }
}

}  // namespace microscore
