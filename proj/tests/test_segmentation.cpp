#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "artreg/segmentation.hpp"
#include "artreg/sim.hpp"

using namespace artreg;

namespace {

// Flat square patch of side `side` centered at `center`, normal +z.
PointCloud flat_patch(const Eigen::Vector3d& center, double side, double spacing,
                      const Eigen::Vector3d& color) {
  PointCloud cloud;
  const int n = static_cast<int>(side / spacing);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      cloud.points.push_back(center + Eigen::Vector3d(-side / 2 + i * spacing,
                                                      -side / 2 + j * spacing, 0.0));
      cloud.colors.push_back(color);
      cloud.normals.push_back(Eigen::Vector3d::UnitZ());
    }
  return cloud;
}

// Connected components over the radius graph, ignoring normals and colors;
// the oracle for segment membership of well-separated patches.
std::vector<int> union_find_components(const PointCloud& cloud, double radius) {
  const int n = static_cast<int>(cloud.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if ((cloud.points[i] - cloud.points[j]).norm() <= radius) parent[find(i)] = find(j);
  std::vector<int> root(n);
  for (int i = 0; i < n; ++i) root[i] = find(i);
  return root;
}

}  // namespace

TEST_CASE("ransac_plane on an exact plane") {
  PointCloud cloud;
  Rng rng(5);
  for (int i = 0; i < 200; ++i)
    cloud.points.emplace_back(rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3), 0.05);

  const auto [plane, mask] = ransac_plane(cloud, 0.005, 100, 3);
  CHECK(plane.normal.isApprox(Eigen::Vector3d::UnitZ(), 1e-9));
  CHECK(plane.d == doctest::Approx(-0.05).epsilon(1e-9));
  CHECK(std::count(mask.begin(), mask.end(), true) == 200);
  CHECK(std::abs(plane.normal.norm() - 1.0) < 1e-9);
}

TEST_CASE("ransac_plane separates plane inliers from raised outliers") {
  PointCloud cloud;
  Rng rng(6);
  for (int i = 0; i < 180; ++i)
    cloud.points.emplace_back(rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3),
                              rng.uniform(-0.002, 0.002));
  for (int i = 0; i < 20; ++i)
    cloud.points.emplace_back(rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3),
                              rng.uniform(0.11, 0.3));

  const auto [plane, mask] = ransac_plane(cloud, 0.005, 200, 11);
  for (int i = 0; i < 180; ++i) CHECK(mask[i]);
  for (int i = 180; i < 200; ++i) CHECK_FALSE(mask[i]);
}

TEST_CASE("ransac_plane through exactly three points") {
  PointCloud cloud;
  cloud.points = {{0, 0, 0}, {1, 0, 0}, {0, 1, 1}};
  const auto [plane, mask] = ransac_plane(cloud, 1e-6, 50, 0);
  for (const auto& p : cloud.points) CHECK(plane.distance(p) < 1e-9);
  CHECK(std::count(mask.begin(), mask.end(), true) == 3);

  PointCloud collinear;
  collinear.points = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
  CHECK_THROWS_AS(ransac_plane(collinear, 0.01, 50, 0), DegenerateCloud);
}

TEST_CASE("ransac_plane is deterministic under a fixed seed") {
  PointCloud cloud;
  Rng rng(8);
  for (int i = 0; i < 300; ++i)
    cloud.points.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1),
                              rng.uniform(-0.01, 0.01));
  const auto [p1, m1] = ransac_plane(cloud, 0.004, 150, 77);
  const auto [p2, m2] = ransac_plane(cloud, 0.004, 150, 77);
  CHECK(p1.normal == p2.normal);
  CHECK(p1.d == p2.d);
  CHECK(m1 == m2);
}

TEST_CASE("remove_outliers drops an isolated point and keeps the grid") {
  PointCloud cloud;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) cloud.points.emplace_back(i * 0.01, j * 0.01, 0.0);
  cloud.points.emplace_back(1.0, 1.0, 0.0);  // a meter away

  const PointCloud cleaned = remove_outliers(cloud, 8, 1.0);
  CHECK(cleaned.size() == 100);
  for (const auto& p : cleaned.points) CHECK(p.x() < 0.5);
}

TEST_CASE("remove_outliers keeps a uniformly sampled surface intact") {
  // A closed box surface has no free boundary, so no point stands out.
  const PointCloud cloud =
      sample_box(Eigen::Vector3d(0.1, 0.06, 0.04), 0.008, Eigen::Vector3d(1, 0, 0));
  CHECK(remove_outliers(cloud, 8, 1.5).size() == cloud.size());
}

TEST_CASE("remove_outliers is independent of point order") {
  PointCloud cloud;
  Rng rng(15);
  for (int i = 0; i < 150; ++i)
    cloud.points.emplace_back(rng.uniform(0, 0.1), rng.uniform(0, 0.1), 0.0);
  cloud.points.emplace_back(2.0, 2.0, 0.0);
  cloud.points.emplace_back(-1.5, 0.5, 1.0);

  const PointCloud cleaned = remove_outliers(cloud, 10, 1.2);

  PointCloud reversed;
  reversed.points.assign(cloud.points.rbegin(), cloud.points.rend());
  const PointCloud cleaned_rev = remove_outliers(reversed, 10, 1.2);

  auto sorted_points = [](PointCloud c) {
    std::sort(c.points.begin(), c.points.end(),
              [](const auto& a, const auto& b) {
                return std::lexicographical_compare(a.data(), a.data() + 3, b.data(),
                                                    b.data() + 3);
              });
    return c.points;
  };
  CHECK(sorted_points(cleaned) == sorted_points(cleaned_rev));
}

TEST_CASE("cull_tool_points membership") {
  PointCloud cloud;
  for (int i = 0; i < 20; ++i) cloud.points.emplace_back(-0.1 + i * 0.01, 0.0, 0.0);

  OrientedBox tool;
  tool.center = Eigen::Vector3d(0.05, 0, 0);
  tool.extents = Eigen::Vector3d(0.049, 0.02, 0.02);

  // Far-away tool: nothing culled.
  OrientedBox far_tool = tool;
  far_tool.center = Eigen::Vector3d(5, 5, 5);
  CHECK(cull_tool_points(cloud, far_tool, 0.0).size() == cloud.size());

  // Points inside x in [0.001, 0.099] are removed (margin zero): the nine
  // grid points 0.01 .. 0.09 go, eleven stay.
  const PointCloud culled = cull_tool_points(cloud, tool, 0.0);
  for (const auto& p : culled.points) CHECK((p.x() < 0.001 || p.x() > 0.099));
  CHECK(culled.size() == 11);

  // Cloud fully inside the inflated box.
  OrientedBox big;
  big.center = Eigen::Vector3d::Zero();
  big.extents = Eigen::Vector3d(1, 1, 1);
  CHECK(cull_tool_points(cloud, big, 0.1).empty());
}

TEST_CASE("region_grow separates distant patches like the union-find oracle") {
  PointCloud cloud = flat_patch({0, 0, 0}, 0.08, 0.005, {1, 0, 0});
  cloud.append(flat_patch({0.5, 0, 0}, 0.08, 0.005, {0, 0, 1}));

  const SegmentSet set = region_grow(cloud, 8 * kPi / 180, 0.15, 0.015, 30);
  CHECK(set.segments.size() == 2);

  const auto roots = union_find_components(cloud, 0.015);
  // Same partition: points share a segment exactly when they share a root.
  for (std::size_t i = 0; i < cloud.size(); i += 17)
    for (std::size_t j = 0; j < cloud.size(); j += 23)
      CHECK((set.labels[i] == set.labels[j]) == (roots[i] == roots[j]));
}

TEST_CASE("region_grow single patch is one segment") {
  const PointCloud cloud = flat_patch({0, 0, 0}, 0.1, 0.005, {0.5, 0.5, 0.5});
  const SegmentSet set = region_grow(cloud, 8 * kPi / 180, 0.15, 0.015, 30);
  CHECK(set.segments.size() == 1);
  CHECK(set.segments[0].size() == cloud.size());
  for (int label : set.labels) CHECK(label == 0);
}

TEST_CASE("region_grow color threshold splits or merges touching patches") {
  // Two coplanar patches sharing an edge, same normals, different colors.
  PointCloud cloud = flat_patch({0, 0, 0}, 0.08, 0.005, {1, 0, 0});
  cloud.append(flat_patch({0.085, 0, 0}, 0.08, 0.005, {0, 0, 1}));

  const SegmentSet split = region_grow(cloud, 8 * kPi / 180, 0.2, 0.015, 30);
  CHECK(split.segments.size() == 2);

  const SegmentSet merged = region_grow(cloud, 8 * kPi / 180, 2.0, 0.015, 30);
  CHECK(merged.segments.size() == 1);
}

TEST_CASE("region_grow discards undersized regions") {
  PointCloud cloud = flat_patch({0, 0, 0}, 0.08, 0.005, {1, 0, 0});
  const std::size_t main_size = cloud.size();
  PointCloud crumb = flat_patch({0.4, 0, 0}, 0.01, 0.005, {0, 1, 0});
  cloud.append(crumb);

  const SegmentSet set = region_grow(cloud, 8 * kPi / 180, 0.15, 0.015, 30);
  CHECK(set.segments.size() == 1);
  for (std::size_t i = main_size; i < cloud.size(); ++i)
    CHECK(set.labels[i] == SegmentSet::kDiscarded);
}

TEST_CASE("segment_scene full pipeline on a synthetic tabletop") {
  // Table plane with one box on it; expect exactly the box segment.
  KinematicScene scene = builtin_scene("single-box");
  const DepthSample sample = depth_sample(scene, CameraModel::top_down());

  SegmentationConfig config;
  config.seed = 9;
  const SegmentSet set = segment_scene(sample.cloud, config);

  REQUIRE(set.segments.size() == 1);
  // The segment is made of box points (label 0 in the sample).
  std::size_t correct = 0, total = 0;
  for (std::size_t i = 0; i < sample.cloud.size(); ++i) {
    if (set.labels[i] < 0) continue;
    ++total;
    if (sample.labels[i] == 0) ++correct;
  }
  CHECK(total > 100);
  CHECK(static_cast<double>(correct) / total > 0.97);

  // Segments never invent points: every segment point is an input point.
  CHECK(set.labels.size() == sample.cloud.size());
  std::size_t in_segments = 0;
  for (const auto& seg : set.segments) in_segments += seg.size();
  CHECK(in_segments == total);
}

TEST_CASE("segment_scene on an empty workspace yields no segments") {
  KinematicScene scene;
  scene.with_table = true;  // nothing but the table
  const DepthSample sample = depth_sample(scene, CameraModel::top_down());
  SegmentationConfig config;
  config.seed = 10;
  const SegmentSet set = segment_scene(sample.cloud, config);
  CHECK(set.segments.empty());
}

TEST_CASE("segment_scene separates two boxes") {
  KinematicScene scene = builtin_scene("pair-rigid-0");
  const DepthSample sample = depth_sample(scene, CameraModel::top_down());
  SegmentationConfig config;
  config.seed = 11;
  const SegmentSet set = segment_scene(sample.cloud, config);
  CHECK(set.segments.size() == 2);
}
