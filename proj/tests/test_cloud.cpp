#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "artreg/cloud.hpp"
#include "artreg/kdtree.hpp"
#include "artreg/sim.hpp"

using namespace artreg;

namespace {

PointCloud random_cloud(Rng& rng, int n, double half_extent = 1.0) {
  PointCloud cloud;
  for (int i = 0; i < n; ++i)
    cloud.points.emplace_back(rng.uniform(-half_extent, half_extent),
                              rng.uniform(-half_extent, half_extent),
                              rng.uniform(-half_extent, half_extent));
  return cloud;
}

int brute_force_nearest(const Eigen::Vector3d& q, const PointCloud& cloud) {
  int best = -1;
  double best_d2 = 0.0;
  for (int i = 0; i < static_cast<int>(cloud.size()); ++i) {
    const double d2 = (cloud.points[i] - q).squaredNorm();
    if (best < 0 || d2 < best_d2) {
      best = i;
      best_d2 = d2;
    }
  }
  return best;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("nearest neighbor basics and tie rule") {
  PointCloud cloud;
  cloud.points = {{0, 0, 0}, {1, 0, 0}};
  auto [idx, dist] = nearest_neighbor(Eigen::Vector3d(0.4, 0, 0), cloud);
  CHECK(idx == 0);
  CHECK(dist == doctest::Approx(0.4));

  // Exactly equidistant: lowest index wins.
  auto [tie_idx, tie_dist] = nearest_neighbor(Eigen::Vector3d(0.5, 0, 0), cloud);
  CHECK(tie_idx == 0);

  // A cloud point queries back to itself.
  auto [self_idx, self_dist] = nearest_neighbor(cloud.points[1], cloud);
  CHECK(self_idx == 1);
  CHECK(self_dist == doctest::Approx(0.0));

  CHECK_THROWS_AS(nearest_neighbor(Eigen::Vector3d::Zero(), PointCloud{}), EmptyCloud);
}

TEST_CASE("kd-tree equals the exhaustive scan on 1000 points x 100 queries") {
  Rng rng(101);
  const PointCloud cloud = random_cloud(rng, 1000);
  KdTree tree(cloud.points);
  for (int q = 0; q < 100; ++q) {
    const Eigen::Vector3d query(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2),
                                rng.uniform(-1.2, 1.2));
    CHECK(tree.nearest(query).index == brute_force_nearest(query, cloud));
  }
}

TEST_CASE("kd-tree radius search equals the brute force set") {
  Rng rng(102);
  const PointCloud cloud = random_cloud(rng, 500);
  KdTree tree(cloud.points);
  for (int q = 0; q < 20; ++q) {
    const Eigen::Vector3d query(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const double radius = rng.uniform(0.05, 0.5);
    const auto got = tree.radius_search(query, radius);
    std::vector<int> expected;
    for (int i = 0; i < static_cast<int>(cloud.size()); ++i)
      if ((cloud.points[i] - query).norm() <= radius) expected.push_back(i);
    CHECK(got == expected);
  }
}

TEST_CASE("compute_obb recovers an axis-aligned box") {
  // 0.10 x 0.04 x 0.01 m box sampled densely on its surface.
  const PointCloud cloud =
      sample_box(Eigen::Vector3d(0.10, 0.04, 0.01), 0.004, Eigen::Vector3d(1, 0, 0));
  const OrientedBox box = compute_obb(cloud);

  CHECK(std::abs(box.axes[0].dot(Eigen::Vector3d::UnitX())) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(box.axes[1].dot(Eigen::Vector3d::UnitY())) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(box.axes[2].dot(Eigen::Vector3d::UnitZ())) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(box.extents[0] == doctest::Approx(0.05).epsilon(0.01));
  CHECK(box.extents[1] == doctest::Approx(0.02).epsilon(0.01));
  CHECK(box.extents[2] == doctest::Approx(0.005).epsilon(0.01));
  CHECK(box.center.norm() < 1e-9);

  // Orthonormal axes, extents sorted.
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j)
      CHECK(box.axes[i].dot(box.axes[j]) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-6));
  CHECK(box.extents[0] >= box.extents[1]);
  CHECK(box.extents[1] >= box.extents[2]);
}

TEST_CASE("compute_obb equivariance under rigid transforms") {
  const PointCloud cloud =
      sample_box(Eigen::Vector3d(0.10, 0.04, 0.01), 0.004, Eigen::Vector3d(1, 0, 0));
  Rng rng(7);
  const Pose p = exp_se3(Twist(0.7 * rng.unit_vector(), Eigen::Vector3d(0.2, -0.1, 0.3)));

  const OrientedBox base = compute_obb(cloud);
  const OrientedBox moved = compute_obb(transform_cloud(cloud, p));

  CHECK(moved.center.isApprox(apply(p, base.center), 1e-9));
  for (int i = 0; i < 3; ++i) {
    // Up to the documented sign convention.
    CHECK(std::abs(moved.axes[i].dot(p.rotation * base.axes[i])) ==
          doctest::Approx(1.0).epsilon(1e-6));
    CHECK(moved.extents[i] == doctest::Approx(base.extents[i]).epsilon(1e-9));
  }
}

TEST_CASE("compute_obb degenerate inputs") {
  PointCloud single;
  single.points = {{0.1, 0.2, 0.3}};
  const OrientedBox box = compute_obb(single);
  CHECK(box.center.isApprox(Eigen::Vector3d(0.1, 0.2, 0.3)));
  CHECK(box.extents.norm() == doctest::Approx(0.0));

  CHECK_THROWS_AS(compute_obb(PointCloud{}), DegenerateCloud);
}

TEST_CASE("transform, centroid, subsample") {
  PointCloud cloud;
  cloud.points = {{0, 0, 0}, {2, 0, 0}};
  CHECK(centroid(cloud).isApprox(Eigen::Vector3d(1, 0, 0)));

  const PointCloud same = transform_cloud(cloud, Pose::identity());
  CHECK(same.points[1].isApprox(cloud.points[1]));

  Rng rng(4);
  const PointCloud big = random_cloud(rng, 200);
  const PointCloud a = subsample(big, 50, 99);
  const PointCloud b = subsample(big, 50, 99);
  REQUIRE(a.size() == 50);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.points[i] == b.points[i]);

  const PointCloud c = subsample(big, 50, 100);
  bool any_different = false;
  for (std::size_t i = 0; i < a.size(); ++i) any_different |= a.points[i] != c.points[i];
  CHECK(any_different);

  CHECK(subsample(big, 500, 1).size() == big.size());
  CHECK_THROWS_AS(centroid(PointCloud{}), EmptyCloud);
}

TEST_CASE("transform rotates normals") {
  PointCloud cloud;
  cloud.points = {{0, 0, 0}};
  cloud.normals = {Eigen::Vector3d::UnitZ()};
  const Pose roll = exp_se3(Twist(Eigen::Vector3d(kPi / 2, 0, 0), Eigen::Vector3d::Zero()));
  const PointCloud out = transform_cloud(cloud, roll);
  CHECK(out.normals[0].isApprox(-Eigen::Vector3d::UnitY(), 1e-12));
}

TEST_CASE("PLY roundtrip preserves positions, colors, normals") {
  PointCloud cloud;
  cloud.points = {{0.1, 0.2, 0.3}, {-1.5, 0.25, 2.0}, {0, 0, 0}};
  cloud.colors = {{1.0, 0.0, 0.5}, {0.0, 1.0, 0.25}, {0.2, 0.2, 0.2}};
  cloud.normals = {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}};

  const std::string path = temp_path("artreg_roundtrip.ply");
  save_ply(path, cloud);
  const PointCloud back = load_ply(path);

  REQUIRE(back.size() == 3);
  REQUIRE(back.has_colors());
  REQUIRE(back.has_normals());
  for (int i = 0; i < 3; ++i) {
    CHECK((back.points[i] - cloud.points[i]).norm() < 1e-6);
    // Colors quantized to 8 bits on disk.
    CHECK((back.colors[i] - cloud.colors[i]).cwiseAbs().maxCoeff() < 1.0 / 255.0);
    CHECK((back.normals[i] - cloud.normals[i]).norm() < 1e-6);
  }
  std::remove(path.c_str());
}

TEST_CASE("PLY color bytes map to the unit interval") {
  const std::string path = temp_path("artreg_colors.ply");
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs(
        "ply\nformat ascii 1.0\nelement vertex 2\n"
        "property float x\nproperty float y\nproperty float z\n"
        "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        "end_header\n0 0 0 255 0 128\n1 0 0 0 255 64\n",
        f);
    std::fclose(f);
  }
  const PointCloud cloud = load_ply(path);
  REQUIRE(cloud.has_colors());
  CHECK(cloud.colors[0].x() == doctest::Approx(1.0));
  CHECK(cloud.colors[0].y() == doctest::Approx(0.0));
  CHECK(cloud.colors[0].z() == doctest::Approx(128.0 / 255.0));
  CHECK(cloud.colors[1].y() == doctest::Approx(1.0));
  std::remove(path.c_str());
}

TEST_CASE("PLY parse errors carry line numbers") {
  const std::string path = temp_path("artreg_bad.ply");
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("ply\nformat ascii 2.0\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_ply(path), ParseError);
  try {
    load_ply(path);
  } catch (const ParseError& e) {
    CHECK(e.line_number == 2);
  }

  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs(
        "ply\nformat ascii 1.0\nelement vertex 1\n"
        "property float x\nproperty float y\nproperty float z\n"
        "property float intensity\nend_header\n0 0 0 1\n",
        f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_ply(path), UnsupportedProperty);
  std::remove(path.c_str());
}
