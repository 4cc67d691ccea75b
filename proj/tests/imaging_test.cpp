// Copyright (c) 2026 The bofscan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <string>

#include "bofscan/imaging.hpp"
#include "bofscan/synth.hpp"
#include "test_util.hpp"

namespace bofscan {
namespace {

using testing::image;
using testing::random_image;
using testing::TempDir;

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double direct_sum(const GrayImage& img, int x0, int y0, int x1, int y1) {
  double s = 0.0;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) s += img.at(x, y);
  return s;
}

TEST(IntegralImage, TwoByTwo) {
  const IntegralImage ii = integral_image(image({{1, 2}, {3, 4}}));
  EXPECT_EQ(ii.at(0, 0), 1.0);
  EXPECT_EQ(ii.at(1, 0), 3.0);
  EXPECT_EQ(ii.at(0, 1), 4.0);
  EXPECT_EQ(ii.at(1, 1), 10.0);
  EXPECT_EQ(ii.at(-1, 1), 0.0);
}

TEST(IntegralImage, ZeroImage) {
  const IntegralImage ii = integral_image(GrayImage(5, 4));
  for (double s : ii.sums) EXPECT_EQ(s, 0.0);
}

TEST(IntegralImage, RowOfOnesIsPrefixSum) {
  const IntegralImage ii = integral_image(GrayImage(9, 1, 1.0));
  for (int x = 0; x < 9; ++x) EXPECT_EQ(ii.at(x, 0), x + 1.0);
}

TEST(BoxSum, Examples) {
  const IntegralImage ii = integral_image(image({{1, 2}, {3, 4}}));
  EXPECT_EQ(box_sum(ii, 0, 0, 1, 1), 10.0);
  EXPECT_EQ(box_sum(ii, 1, 1, 1, 1), 4.0);
  EXPECT_EQ(box_sum(ii, 0, 1, 1, 1), 7.0);
  const IntegralImage zero = integral_image(GrayImage(6, 6));
  EXPECT_EQ(box_sum(zero, 1, 2, 4, 5), 0.0);
}

TEST(BoxSum, RejectsBadRectangles) {
  const IntegralImage ii = integral_image(GrayImage(4, 4, 0.5));
  EXPECT_THROW(box_sum(ii, -1, 0, 2, 2), DataError);
  EXPECT_THROW(box_sum(ii, 0, 0, 4, 2), DataError);
  EXPECT_THROW(box_sum(ii, 2, 0, 1, 2), DataError);
}

TEST(BoxSum, MatchesDirectSumOnRandomRectangles) {
  const GrayImage img = random_image(57, 43, 2024);
  const IntegralImage ii = integral_image(img);
  Rng rng(7);
  for (int t = 0; t < 1000; ++t) {
    int x0 = static_cast<int>(rng.below(img.width)), x1 = static_cast<int>(rng.below(img.width));
    int y0 = static_cast<int>(rng.below(img.height)), y1 = static_cast<int>(rng.below(img.height));
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    ASSERT_NEAR(box_sum(ii, x0, y0, x1, y1), direct_sum(img, x0, y0, x1, y1), 1e-9)
        << "rect " << x0 << "," << y0 << " " << x1 << "," << y1;
  }
}

TEST(Pgm, LoadsScaledBytes) {
  TempDir dir("pgm_load");
  write_bytes(dir / "a.pgm", std::string("P5\n2 2\n255\n") + std::string("\x00\xff\xff\x00", 4));
  const GrayImage img = load_pgm(dir / "a.pgm");
  EXPECT_EQ(img, image({{0, 1}, {1, 0}}));
}

TEST(Pgm, HeaderCommentsAreSkipped) {
  TempDir dir("pgm_comment");
  write_bytes(dir / "c.pgm", std::string("P5 # made by hand\n1 1\n# max\n255\n") + std::string(1, '\x80'));
  EXPECT_DOUBLE_EQ(load_pgm(dir / "c.pgm").at(0, 0), 128.0 / 255.0);
}

TEST(Pgm, SixteenBitSamples) {
  TempDir dir("pgm16");
  write_bytes(dir / "w.pgm", std::string("P5\n2 1\n65535\n") + std::string("\xff\xff\x00\x00", 4));
  const GrayImage img = load_pgm(dir / "w.pgm");
  EXPECT_EQ(img.at(0, 0), 1.0);
  EXPECT_EQ(img.at(1, 0), 0.0);
}

PgmError::Kind load_error_kind(const std::filesystem::path& p) {
  try {
    load_pgm(p);
  } catch (const PgmError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected a PgmError for " << p;
  return PgmError::Kind::Unwritable;
}

TEST(Pgm, Errors) {
  TempDir dir("pgm_err");
  write_bytes(dir / "short.pgm", std::string("P5\n4 4\n255\n") + std::string(8, '\x10'));
  write_bytes(dir / "p2.pgm", "P2\n1 1\n255\n0\n");
  write_bytes(dir / "neg.pgm", "P5\n-1 1\n255\n");
  EXPECT_EQ(load_error_kind(dir / "short.pgm"), PgmError::Kind::TruncatedData);
  EXPECT_EQ(load_error_kind(dir / "p2.pgm"), PgmError::Kind::MalformedHeader);
  EXPECT_EQ(load_error_kind(dir / "neg.pgm"), PgmError::Kind::MalformedHeader);
  EXPECT_EQ(load_error_kind(dir / "missing.pgm"), PgmError::Kind::MissingFile);
}

TEST(Pgm, SaveWritesExactBytes) {
  TempDir dir("pgm_save");
  save_pgm(image({{0, 1}, {1, 0}}), dir / "a.pgm");
  EXPECT_EQ(read_bytes(dir / "a.pgm"), std::string("P5\n2 2\n255\n") + std::string("\x00\xff\xff\x00", 4));

  save_pgm(GrayImage(1, 1), dir / "one.pgm");
  EXPECT_EQ(read_bytes(dir / "one.pgm"), std::string("P5\n1 1\n255\n") + std::string(1, '\0'));
}

TEST(Pgm, HalfGrayRoundsUp) {
  TempDir dir("pgm_half");
  save_pgm(GrayImage(3, 2, 0.5), dir / "h.pgm");
  const std::string bytes = read_bytes(dir / "h.pgm");
  const std::string raster = bytes.substr(bytes.size() - 6);
  for (char c : raster) EXPECT_EQ(static_cast<unsigned char>(c), 128);
}

TEST(Pgm, UnwritablePath) {
  TempDir dir("pgm_unwritable");
  try {
    save_pgm(GrayImage(1, 1), dir / "no_such_dir" / "x.pgm");
    FAIL() << "expected PgmError";
  } catch (const PgmError& e) {
    EXPECT_EQ(e.kind(), PgmError::Kind::Unwritable);
  }
}

TEST(Pgm, RoundTripIsIdentityOnQuantizedImages) {
  TempDir dir("pgm_rt");
  GrayImage img = random_image(31, 17, 5);
  for (double& p : img.pixels) p = quantize8(p) / 255.0;
  save_pgm(img, dir / "r.pgm");
  EXPECT_EQ(load_pgm(dir / "r.pgm"), img);
}

TEST(ExtractStrip, CenteredColumns) {
  GrayImage scan(768, 496);
  for (int y = 0; y < scan.height; ++y)
    for (int x = 0; x < scan.width; ++x) scan.at(x, y) = x / 767.0;
  const GrayImage strip = extract_strip(scan, 400, 30);
  EXPECT_EQ(strip.width, 30);
  EXPECT_EQ(strip.height, 496);
  EXPECT_EQ(strip.at(0, 0), scan.at(385, 0));
  EXPECT_EQ(strip.at(29, 495), scan.at(414, 495));
}

TEST(ExtractStrip, OutOfBounds) {
  const GrayImage scan(768, 496);
  EXPECT_THROW(extract_strip(scan, 5, 30), DataError);
  EXPECT_THROW(extract_strip(scan, 760, 30), DataError);
  EXPECT_THROW(extract_strip(scan, 100, 0), DataError);
}

TEST(ExtractStrip, WidthOneIsTheColumn) {
  const GrayImage scan = random_image(40, 12, 3);
  const GrayImage strip = extract_strip(scan, 17, 1);
  ASSERT_EQ(strip.width, 1);
  for (int y = 0; y < scan.height; ++y) EXPECT_EQ(strip.at(0, y), scan.at(17, y));
}

TEST(CropToBand, CentersOnMass) {
  GrayImage strip(30, 496);
  for (int y = 200; y <= 250; ++y)
    for (int x = 0; x < 30; ++x) strip.at(x, y) = 1.0;
  const GrayImage band = crop_to_band(strip, 170);
  ASSERT_EQ(band.height, 170);
  // Centroid 225 gives rows 140..309; the lit rows start 60 rows in.
  EXPECT_EQ(band.at(0, 59), 0.0);
  EXPECT_EQ(band.at(0, 60), 1.0);
  EXPECT_EQ(band.at(0, 110), 1.0);
  EXPECT_EQ(band.at(0, 111), 0.0);
}

TEST(CropToBand, UniformStripRoundsCentroidUp) {
  // Rows 163 and 332 are tagged with the same row mass, so the centroid stays 247.5.
  GrayImage tagged(4, 496, 0.5);
  tagged.at(0, 163) = 0.75;
  tagged.at(1, 163) = 0.25;
  tagged.at(0, 332) = 0.75;
  tagged.at(1, 332) = 0.25;
  const GrayImage band = crop_to_band(tagged, 170);
  EXPECT_EQ(band.at(0, 0), 0.75);
  EXPECT_EQ(band.at(0, 169), 0.75);
  EXPECT_EQ(band.at(0, 1), 0.5);
}

TEST(CropToBand, ExactHeightIsUnchanged) {
  const GrayImage strip = random_image(30, 170, 8);
  EXPECT_EQ(crop_to_band(strip, 170), strip);
}

TEST(CropToBand, ClampsAtTheEdges) {
  GrayImage strip(2, 300);
  strip.at(0, 0) = 1.0;
  const GrayImage band = crop_to_band(strip, 170);
  EXPECT_EQ(band.at(0, 0), 1.0);
}

TEST(CropToBand, ShortStripIsAnError) { EXPECT_THROW(crop_to_band(GrayImage(30, 100), 170), DataError); }

TEST(CropToBand, ZeroMassUsesGeometricMiddle) {
  const GrayImage band = crop_to_band(GrayImage(3, 496), 170);
  EXPECT_EQ(band.height, 170);
}

TEST(RoiExtraction, BandKeepsMostOfTheRetina) {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const auto [scan, ann] = synth_bscan(seed, 2, 768, 496);
    for (int cx : {100, 384, 650}) {
      const GrayImage strip = extract_strip(scan, cx, 30);
      const GrayImage band = crop_to_band(strip, 170);
      EXPECT_EQ(band.width, 30);
      EXPECT_EQ(band.height, 170);
      EXPECT_GE(band.total(), 0.9 * strip.total()) << "seed " << seed << " column " << cx;
    }
  }
}

TEST(PadReplicate, CopiesEdges) {
  const GrayImage img = image({{0.1, 0.2}, {0.3, 0.4}});
  const GrayImage p = pad_replicate(img, 2);
  EXPECT_EQ(p.width, 6);
  EXPECT_EQ(p.height, 6);
  EXPECT_EQ(p.at(0, 0), 0.1);
  EXPECT_EQ(p.at(5, 0), 0.2);
  EXPECT_EQ(p.at(0, 5), 0.3);
  EXPECT_EQ(p.at(5, 5), 0.4);
  EXPECT_EQ(p.at(2, 2), 0.1);
}

}  // namespace
}  // namespace bofscan
