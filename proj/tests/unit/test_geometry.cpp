// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

#include "editaudit/geometry/ops.hpp"
#include "test_support.hpp"

using namespace editaudit;
using namespace editaudit::geometry;

namespace {

BinaryMask random_mask(std::mt19937& rng, int w, int h, double density) {
  BinaryMask m(w, h);
  std::bernoulli_distribution on(density);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (on(rng)) m.set(x, y);
  return m;
}

// Union-find over 8-neighbours; independent of the BFS in bboxes_from_mask.
std::vector<BoundingBox> components_by_union_find(const BinaryMask& m) {
  const int w = m.width(), h = m.height();
  std::vector<int> parent(static_cast<std::size_t>(w) * h);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
    return a;
  };
  auto unite = [&](int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!m.at(x, y)) continue;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx >= 0 && ny >= 0 && nx < w && ny < h && m.at(nx, ny)) unite(y * w + x, ny * w + nx);
        }
    }
  std::map<int, BoundingBox> boxes;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!m.at(x, y)) continue;
      auto [it, fresh] = boxes.try_emplace(find(y * w + x), BoundingBox{x, y, 1, 1});
      auto& b = it->second;
      const int x0 = std::min(b.x, x), y0 = std::min(b.y, y);
      const int x1 = std::max(b.right(), x + 1), y1 = std::max(b.bottom(), y + 1);
      b = {x0, y0, x1 - x0, y1 - y0};
    }
  std::vector<BoundingBox> out;
  for (const auto& [root, b] : boxes) out.push_back(b);
  return out;
}

bool box_less(const BoundingBox& a, const BoundingBox& b) {
  return std::tie(a.x, a.y, a.w, a.h) < std::tie(b.x, b.y, b.w, b.h);
}

}  // namespace

TEST_CASE("bboxes_from_mask basic shapes") {
  BinaryMask empty(40, 30);
  CHECK(bboxes_from_mask(empty).empty());

  BinaryMask one(64, 64);
  one.fill({10, 10, 20, 30});
  REQUIRE(bboxes_from_mask(one) == std::vector<BoundingBox>{{10, 10, 20, 30}});

  BinaryMask two(64, 64);
  two.fill({1, 1, 4, 4});
  two.fill({30, 30, 10, 8});
  const auto boxes = bboxes_from_mask(two);
  REQUIRE(boxes.size() == 2);
  CHECK(boxes[0] == BoundingBox{30, 30, 10, 8});
  CHECK(boxes[1] == BoundingBox{1, 1, 4, 4});
}

TEST_CASE("diagonal pixels are one component") {
  BinaryMask m(5, 5);
  m.set(0, 0);
  m.set(1, 1);
  m.set(2, 2);
  CHECK(bboxes_from_mask(m) == std::vector<BoundingBox>{{0, 0, 3, 3}});
}

TEST_CASE("bboxes_from_mask agrees with union-find on random masks") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 24), h = 1 + static_cast<int>(rng() % 24);
    const auto m = random_mask(rng, w, h, 0.05 + 0.3 * (trial % 4) / 3.0);
    auto got = bboxes_from_mask(m);
    for (std::size_t i = 1; i < got.size(); ++i) REQUIRE(got[i - 1].area() >= got[i].area());
    auto want = components_by_union_find(m);
    std::sort(got.begin(), got.end(), box_less);
    std::sort(want.begin(), want.end(), box_less);
    REQUIRE(got == want);
  }
}

TEST_CASE("intersection_ratio examples") {
  BinaryMask obj(200, 200), edit(200, 200);
  obj.fill({50, 50, 20, 20});
  edit.fill({0, 0, 200, 200});
  CHECK(intersection_ratio(obj, edit) == 1.0);

  BinaryMask far(200, 200);
  far.fill({150, 150, 10, 10});
  CHECK(intersection_ratio(obj, far) == 0.0);

  // 100x100 object; the edit region covers 30 of its columns.
  BinaryMask o(300, 300), e(300, 300);
  o.fill({100, 100, 100, 100});
  e.fill({170, 0, 130, 300});
  std::size_t inside = 0, total = 0;
  for (int y = 0; y < 300; ++y)
    for (int x = 0; x < 300; ++x) {
      total += o.at(x, y);
      inside += o.at(x, y) && e.at(x, y);
    }
  CHECK(intersection_ratio(o, e) == Catch::Approx(static_cast<double>(inside) / static_cast<double>(total)));
  CHECK(intersection_ratio(o, e) == Catch::Approx(0.30));

  CHECK_THROWS_AS(intersection_ratio(BinaryMask(3, 3), BinaryMask(4, 3)), GeometryError);
  CHECK(intersection_ratio(BinaryMask(3, 3), BinaryMask(3, 3)) == 0.0);
}

TEST_CASE("intersection_ratio properties") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const int w = 2 + static_cast<int>(rng() % 30), h = 2 + static_cast<int>(rng() % 30);
    auto obj = random_mask(rng, w, h, 0.3);
    if (obj.empty()) obj.set(0, 0);
    REQUIRE(intersection_ratio(obj, obj) == 1.0);

    auto edit = random_mask(rng, w, h, 0.2);
    double prev = intersection_ratio(obj, edit);
    for (int k = 0; k < 10; ++k) {
      edit.set(static_cast<int>(rng() % static_cast<unsigned>(w)), static_cast<int>(rng() % static_cast<unsigned>(h)));
      const double next = intersection_ratio(obj, edit);
      REQUIRE(next >= prev);
      prev = next;
    }
  }
}

TEST_CASE("bbox_intersects examples and properties") {
  CHECK(bbox_intersects({3, 3, 5, 5}, {3, 3, 5, 5}));
  CHECK(bbox_intersects({0, 0, 10, 10}, {9, 9, 5, 5}));
  CHECK_FALSE(bbox_intersects({0, 0, 10, 10}, {10, 0, 5, 5}));
  CHECK_FALSE(bbox_intersects({0, 0, 10, 10}, {20, 20, 5, 5}));

  std::mt19937 rng(9);
  for (int trial = 0; trial < 500; ++trial) {
    const int w = 20, h = 20;
    auto a = random_mask(rng, w, h, 0.04);
    auto b = random_mask(rng, w, h, 0.04);
    const auto ba = a.foreground_box(), bb = b.foreground_box();
    if (!ba || !bb) continue;
    REQUIRE(bbox_intersects(*ba, *bb) == bbox_intersects(*bb, *ba));
    if (overlap_count(a, b) > 0) REQUIRE(bbox_intersects(*ba, *bb));
    if (!bbox_intersects(*ba, *bb)) REQUIRE(overlap_count(a, b) == 0);
  }
}

TEST_CASE("zoom_crops padding rule") {
  const auto small = zoom_crops({1000, 1000}, {500, 500, 10, 10});
  CHECK(small.tight == BoundingBox{500, 500, 10, 10});
  CHECK(small.padded.w == 150);
  CHECK(small.padded.h == 150);
  CHECK(small.full == BoundingBox{0, 0, 1000, 1000});

  const auto big = zoom_crops({1000, 1000}, {300, 300, 400, 400});
  CHECK(big.padded == BoundingBox{100, 100, 800, 800});

  CHECK_THROWS_AS(zoom_crops({100, 100}, {90, 90, 20, 20}), GeometryError);
  CHECK_THROWS_AS(zoom_crops({100, 100}, {10, 10, 0, 5}), GeometryError);
}

TEST_CASE("zoom_crops clamps near corners") {
  // Requested window is centred on the box; the result is its intersection
  // with the image, computed here pixel by pixel.
  for (const BoundingBox box : {BoundingBox{0, 0, 10, 10}, BoundingBox{995, 990, 5, 10}, BoundingBox{2, 980, 30, 20}}) {
    const auto c = zoom_crops({1000, 1000}, box);
    const int tw = std::max(2 * box.w, 150), th = std::max(2 * box.h, 150);
    const int rx = box.x - (tw - box.w) / 2, ry = box.y - (th - box.h) / 2;
    int x0 = 1000, y0 = 1000, x1 = -1, y1 = -1;
    for (int y = ry; y < ry + th; ++y)
      for (int x = rx; x < rx + tw; ++x)
        if (x >= 0 && y >= 0 && x < 1000 && y < 1000) {
          x0 = std::min(x0, x);
          y0 = std::min(y0, y);
          x1 = std::max(x1, x);
          y1 = std::max(y1, y);
        }
    CHECK(c.padded == BoundingBox{x0, y0, x1 - x0 + 1, y1 - y0 + 1});
    CHECK(c.padded.area() <= static_cast<long long>(tw) * th);
  }
}

TEST_CASE("zoom_crops containment chain on random boxes") {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const int W = 1 + static_cast<int>(rng() % 1500), H = 1 + static_cast<int>(rng() % 1500);
    const int w = 1 + static_cast<int>(rng() % static_cast<unsigned>(W));
    const int h = 1 + static_cast<int>(rng() % static_cast<unsigned>(H));
    const int x = static_cast<int>(rng() % static_cast<unsigned>(W - w + 1));
    const int y = static_cast<int>(rng() % static_cast<unsigned>(H - h + 1));
    const auto c = zoom_crops({W, H}, {x, y, w, h});
    REQUIRE(c.padded.contains(c.tight));
    REQUIRE(c.full.contains(c.padded));
  }
}

TEST_CASE("resample_mask") {
  std::mt19937 rng(2);
  const auto m = random_mask(rng, 17, 9, 0.5);
  CHECK(resample_mask(m, {17, 9}) == m);

  BinaryMask checker(2, 2, {1, 0, 0, 1});
  const auto up = resample_mask(checker, {4, 4});
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) CHECK(up.at(x, y) == checker.at(x / 2, y / 2));
}

TEST_CASE("downsampling keeps intersection ratios of smooth shapes close") {
  auto ellipse = [](int w, int h, double cx, double cy, double rx, double ry) {
    BinaryMask m(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
        if (dx * dx + dy * dy <= 1.0) m.set(x, y);
      }
    return m;
  };
  for (int k = 0; k < 5; ++k) {
    const auto obj = ellipse(400, 300, 150 + 10 * k, 150, 80, 60);
    const auto edit = ellipse(400, 300, 230, 140 + 5 * k, 70, 90);
    const double full = intersection_ratio(obj, edit);
    const double small = intersection_ratio(resample_mask(obj, {100, 75}), resample_mask(edit, {100, 75}));
    CHECK(std::abs(full - small) <= 0.03);
  }
}

TEST_CASE("scale_box keeps covered pixels covered") {
  const auto b = scale_box({3, 5, 7, 2}, {64, 48}, {128, 96});
  CHECK(b == BoundingBox{6, 10, 14, 4});
  CHECK(scale_box({3, 5, 7, 3}, {64, 48}, {32, 24}) == BoundingBox{1, 2, 4, 2});
  CHECK(scale_box({3, 5, 1, 1}, {64, 48}, {8, 6}) == BoundingBox{0, 0, 1, 1});
}

TEST_CASE("run-length round trip") {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = random_mask(rng, 1 + static_cast<int>(rng() % 20), 1 + static_cast<int>(rng() % 20), 0.4);
    const auto counts = encode_rle(m);
    REQUIRE(decode_rle(counts, m.width(), m.height()) == m);
  }
  const std::vector<long long> too_long{3, 10};
  CHECK_THROWS_AS(decode_rle(too_long, 3, 3), GeometryError);
  const std::vector<long long> negative{-1, 10};
  CHECK_THROWS_AS(decode_rle(negative, 3, 3), GeometryError);
  const std::vector<long long> short_runs{2, 2};
  CHECK_THROWS_AS(decode_rle(short_runs, 3, 3), GeometryError);
}

TEST_CASE("mask files round trip") {
  testing::TempDir dir;
  BinaryMask m(13, 7);
  m.fill({2, 1, 5, 4});
  write_mask(m, dir / "m.png");
  CHECK(read_mask(dir / "m.png") == m);
}
