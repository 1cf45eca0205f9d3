#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "microscore/image_io.hpp"
#include "microscore/micrograph.hpp"

using namespace microscore;

namespace {

Micrograph make(const Eigen::MatrixXd& px, bool standardized = false) {
  Micrograph m;
  m.pixels = px;
  m.id = "test";
  m.standardized = standardized;
  return m;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("standardize: symmetric three-value case") {
  Eigen::MatrixXd px(1, 3);
  px << 0, 2, 4;
  Micrograph out = standardize(make(px));
  CHECK(out.standardized);
  CHECK(out.pixels(0, 0) == doctest::Approx(-1.22474).epsilon(1e-4));
  CHECK(out.pixels(0, 1) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(out.pixels(0, 2) == doctest::Approx(1.22474).epsilon(1e-4));
  // population convention: divisor N
  const double sd = std::sqrt(out.pixels.array().square().mean());
  CHECK(sd == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("standardize: idempotent and affine invariant") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd px(9, 13);
  for (Eigen::Index i = 0; i < px.size(); ++i) px.data()[i] = 10.0 + 3.0 * nd(gen);

  Micrograph once = standardize(make(px));
  Micrograph twice = standardize(once);
  CHECK((twice.pixels - once.pixels).cwiseAbs().maxCoeff() < 1e-9);

  Micrograph affine = standardize(make(2.5 * px.array() + 17.0));
  CHECK((affine.pixels - once.pixels).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("standardize: constant image fails") {
  Eigen::MatrixXd px = Eigen::MatrixXd::Constant(4, 4, 5.0);
  CHECK_THROWS_WITH_AS(standardize(make(px)), doctest::Contains("zero variance"),
                       std::invalid_argument);
}

TEST_CASE("extract_dataset: 3x3 single interior pixel, row-major window") {
  Eigen::MatrixXd px(3, 3);
  px << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  Micrograph m = make(px, true);
  NeighborhoodSpec spec{WindowShape::non_causal, 1};
  PixelDataset d = extract_dataset(m, spec);
  REQUIRE(d.size() == 1);
  CHECK(d.y(0) == 5);
  CHECK(d.row(0) == 1);
  CHECK(d.col(0) == 1);
  Eigen::VectorXd expect(8);
  expect << 1, 2, 3, 4, 6, 7, 8, 9;
  CHECK((d.x.row(0).transpose() - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("extract_dataset: record counts and errors") {
  Eigen::MatrixXd px = Eigen::MatrixXd::Random(5, 5);
  PixelDataset d = extract_dataset(make(px, true), {WindowShape::non_causal, 1});
  CHECK(d.size() == 9);

  CHECK_THROWS_WITH_AS(extract_dataset(make(Eigen::MatrixXd::Random(3, 3), true),
                                       {WindowShape::non_causal, 2}),
                       doctest::Contains("too small"), std::invalid_argument);
  CHECK_THROWS_AS(extract_dataset(make(px, false), {WindowShape::non_causal, 1}),
                  std::invalid_argument);
}

TEST_CASE("extract_dataset: causal window keeps raster-preceding pixels") {
  Eigen::MatrixXd px(3, 3);
  px << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  NeighborhoodSpec spec{WindowShape::causal, 1};
  CHECK(spec.neighbor_count() == 4);
  PixelDataset d = extract_dataset(make(px, true), spec);
  Eigen::VectorXd expect(4);
  expect << 1, 2, 3, 4;  // row above plus the left neighbor
  CHECK((d.x.row(0).transpose() - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("extract_dataset round-trip property: window slice matches source") {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 4; ++trial) {
    const int rows = 7 + static_cast<int>(gen() % 10);
    const int cols = 7 + static_cast<int>(gen() % 10);
    const int ls = 1 + static_cast<int>(gen() % 3);
    if (rows <= 2 * ls || cols <= 2 * ls) continue;
    Eigen::MatrixXd px(rows, cols);
    for (Eigen::Index i = 0; i < px.size(); ++i) px.data()[i] = nd(gen);
    Micrograph m = make(px, true);
    NeighborhoodSpec spec{WindowShape::non_causal, ls};
    PixelDataset d = extract_dataset(m, spec);
    CHECK(d.size() == static_cast<Eigen::Index>(rows - 2 * ls) * (cols - 2 * ls));
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      CHECK(d.y(i) == px(d.row(i), d.col(i)));
      Eigen::Index j = 0;
      for (int dr = -ls; dr <= ls; ++dr)
        for (int dc = -ls; dc <= ls; ++dc) {
          if (dr == 0 && dc == 0) continue;
          CHECK(d.x(i, j) == px(d.row(i) + dr, d.col(i) + dc));
          ++j;
        }
    }
  }
}

TEST_CASE("split_reference: by-image counts") {
  std::vector<Micrograph> ms;
  for (int i = 0; i < 5; ++i) {
    Micrograph m = standardize(make(Eigen::MatrixXd::Random(5, 5)));
    m.id = "img" + std::to_string(i);
    ms.push_back(m);
  }
  PixelDataset d = extract_dataset(ms, {WindowShape::non_causal, 1});
  auto [train, cl] = split_reference(d, 0.2, SplitGranularity::by_image);
  CHECK(train.size() == 4 * 9);
  CHECK(cl.size() == 9);
  CHECK(train.size() + cl.size() == d.size());
}

TEST_CASE("split_reference: empty side fails") {
  Eigen::MatrixXd px = Eigen::MatrixXd::Random(3, 4);
  PixelDataset d = extract_dataset(standardize(make(px)), {WindowShape::non_causal, 1});
  REQUIRE(d.size() == 2);
  CHECK_THROWS_WITH_AS(split_reference(d, 0.999, SplitGranularity::by_pixel_block),
                       doctest::Contains("empty side"), std::invalid_argument);
}

TEST_CASE("split_reference: by-pixel-block is a disjoint partition") {
  Eigen::MatrixXd px = Eigen::MatrixXd::Random(12, 9);
  PixelDataset d = extract_dataset(standardize(make(px)), {WindowShape::non_causal, 1});
  auto [train, cl] = split_reference(d, 0.3, SplitGranularity::by_pixel_block);
  CHECK(train.size() + cl.size() == d.size());
  // contiguous bands: every train row index lies above every CL row index
  CHECK(train.row.maxCoeff() < cl.row.minCoeff());
}

TEST_CASE("pgm round trip preserves 8-bit and 16-bit intensities") {
  Eigen::MatrixXd px(2, 2);
  px << 0, 255, 255, 0;
  const auto p8 = temp_file("microscore_t8.pgm");
  write_pgm(p8.string(), px, 255);
  Micrograph m8 = load_micrograph(p8.string());
  CHECK((m8.pixels - px).cwiseAbs().maxCoeff() == 0.0);
  CHECK_FALSE(m8.standardized);

  Eigen::MatrixXd wide(1, 3);
  wide << 0, 300, 65535;
  const auto p16 = temp_file("microscore_t16.pgm");
  write_pgm(p16.string(), wide, 65535);
  Micrograph m16 = load_micrograph(p16.string());
  CHECK((m16.pixels - wide).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(p8);
  std::filesystem::remove(p16);
}

TEST_CASE("png 16-bit write/read round trip") {
  Eigen::MatrixXd px(3, 2);
  px << 0, 1, 2, 3, 4, 65535.0 / 13000.0;
  const auto path = temp_file("microscore_t.png");
  write_png_gray16(path.string(), px);
  Micrograph m = load_micrograph(path.string());
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 2);
  // scaling maps min->0 and max->65535
  CHECK(m.pixels.minCoeff() == 0.0);
  CHECK(m.pixels.maxCoeff() == 65535.0);
  std::filesystem::remove(path);
}

TEST_CASE("load_micrograph: errors") {
  CHECK_THROWS_AS(load_micrograph("/nonexistent/nope.png"), std::runtime_error);

  // a tiny RGB PNG must be rejected as non-grayscale
  const auto path = temp_file("microscore_rgb.png");
  write_png_rgb8(path.string(), 1, 1, {10, 20, 30});
  CHECK_THROWS_WITH_AS(load_micrograph(path.string()), doctest::Contains("non-grayscale"),
                       std::invalid_argument);
  std::filesystem::remove(path);
}

TEST_CASE("dataset csv export") {
  Eigen::MatrixXd px(3, 3);
  px << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  PixelDataset d = extract_dataset(make(px, true), {WindowShape::non_causal, 1});
  const auto path = temp_file("microscore_ds.csv");
  write_dataset_csv(d, path.string());
  std::ifstream in(path);
  std::string header, line;
  std::getline(in, header);
  CHECK(header.substr(0, 5) == "r,c,y");
  std::getline(in, line);
  CHECK(line.substr(0, 6) == "1,1,5,");
  std::filesystem::remove(path);
}
