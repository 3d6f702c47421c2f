#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "usdbf/errors.hpp"
#include "usdbf/subsample.hpp"
#include "usdbf/util/rng.hpp"

using namespace usdbf;

namespace {

int plane_count(const SamplingMask& m, int n) {
  int count = 0;
  for (int j = 0; j < m.rx_channels; ++j)
    if (m.keep(n, j)) ++count;
  return count;
}

}  // namespace

TEST_CASE("full-rate mask keeps everything") {
  const auto m = make_mask(SamplingScheme::kVariable, 64, 64, 10, 1);
  for (int n = 0; n < 10; ++n) CHECK(plane_count(m, n) == 64);
}

TEST_CASE("mask keeps exactly n_keep channels and the center pair") {
  for (int n_keep : {4, 8, 16, 24, 32, 64}) {
    const auto m = make_mask(SamplingScheme::kVariable, n_keep, 64, 32, 99);
    for (int n = 0; n < 32; ++n) {
      CHECK(plane_count(m, n) == n_keep);
      CHECK(m.keep(n, 31));
      CHECK(m.keep(n, 32));
    }
  }
}

TEST_CASE("mask generation is deterministic") {
  const auto a = make_mask(SamplingScheme::kVariable, 16, 64, 20, 7);
  const auto b = make_mask(SamplingScheme::kVariable, 16, 64, 20, 7);
  CHECK(a.rows == b.rows);
  const auto c = make_mask(SamplingScheme::kVariable, 16, 64, 20, 8);
  CHECK(a.rows != c.rows);
}

TEST_CASE("fixed scheme repeats one pattern over depth") {
  const auto m = make_mask(SamplingScheme::kFixed, 8, 64, 50, 3);
  for (int n = 1; n < 50; ++n)
    for (int j = 0; j < 64; ++j) CHECK(m.keep(n, j) == m.keep(0, j));
}

TEST_CASE("variable scheme draws independent planes") {
  const auto m = make_mask(SamplingScheme::kVariable, 8, 64, 50, 3);
  int differing = 0;
  for (int n = 1; n < 50; ++n)
    for (int j = 0; j < 64; ++j)
      if (m.keep(n, j) != m.keep(0, j)) {
        ++differing;
        break;
      }
  CHECK(differing > 40);  // overwhelmingly likely for independent draws
}

TEST_CASE("mask bounds are enforced") {
  CHECK_THROWS_AS(make_mask(SamplingScheme::kVariable, 1, 64, 8, 1),
                  ConfigError);
  CHECK_THROWS_AS(make_mask(SamplingScheme::kVariable, 65, 64, 8, 1),
                  ConfigError);
}

TEST_CASE("apply_mask zero-fills and is idempotent") {
  TimeAlignedCube cube(2, 64, 16);
  std::fill(cube.data.begin(), cube.data.end(), 1.0f);
  const auto m = make_mask(SamplingScheme::kVariable, 8, 64, 16, 5);
  const auto masked = apply_mask(cube, m);
  for (int l = 0; l < 2; ++l)
    for (int n = 0; n < 16; ++n) {
      double sum = 0.0;
      for (int j = 0; j < 64; ++j) {
        const float v = masked.at(l, j, n);
        CHECK((v == 0.0f || v == 1.0f));
        if (!m.keep(n, j)) CHECK(v == 0.0f);
        sum += v;
      }
      CHECK(sum == doctest::Approx(8.0));
    }
  const auto twice = apply_mask(masked, m);
  CHECK(twice.data == masked.data);
}

TEST_CASE("center-only mask sums to two per plane on a cube of ones") {
  TimeAlignedCube cube(3, 64, 8);
  std::fill(cube.data.begin(), cube.data.end(), 1.0f);
  const auto m = make_mask(SamplingScheme::kFixed, 2, 64, 8, 1);
  const auto masked = apply_mask(cube, m);
  for (int l = 0; l < 3; ++l)
    for (int n = 0; n < 8; ++n) {
      double sum = 0.0;
      for (int j = 0; j < 64; ++j) sum += masked.at(l, j, n);
      CHECK(sum == doctest::Approx(2.0));
    }
}

TEST_CASE("all-true mask is the identity") {
  TimeAlignedCube cube(2, 8, 8);
  Rng rng(2);
  for (auto& x : cube.data) x = static_cast<float>(rng.normal());
  const auto m = make_mask(SamplingScheme::kVariable, 8, 8, 8, 1);
  const auto masked = apply_mask(cube, m);
  CHECK(masked.data == cube.data);
}

TEST_CASE("mask text format is one line of 0/1 per depth plane") {
  const auto m = make_mask(SamplingScheme::kVariable, 4, 16, 6, 11);
  const auto path =
      (std::filesystem::temp_directory_path() / "usdbf_mask.txt").string();
  write_mask_text(m, path);
  std::ifstream is(path);
  std::string line;
  int rows = 0;
  while (std::getline(is, line)) {
    REQUIRE(line.size() == 16);
    for (int j = 0; j < 16; ++j)
      CHECK(line[static_cast<std::size_t>(j)] == (m.keep(rows, j) ? '1' : '0'));
    ++rows;
  }
  CHECK(rows == 6);
  std::filesystem::remove(path);
}

TEST_CASE("apply_mask validates dimensions") {
  TimeAlignedCube cube(1, 8, 8);
  const auto m = make_mask(SamplingScheme::kVariable, 4, 8, 9, 1);
  CHECK_THROWS_AS(apply_mask(cube, m), DimensionError);
}
