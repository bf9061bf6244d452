#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "stokesrobin/export.hpp"
#include "stokesrobin/mesh.hpp"

using namespace stokesrobin;

namespace {
Mesh coarse() { return build_annulus({0.5, 1.0, 0.1}); }
}

TEST_CASE("annulus topology and invariants") {
  Mesh mesh = coarse();
  mesh.check_invariants();
  CHECK(mesh.euler_characteristic() == 0);
  CHECK(mesh.vertex_count() > 0);
  for (const auto& be : mesh.boundary_edges) {
    CHECK(std::abs(be.normal.norm() - 1.0) < 1e-12);
    CHECK(std::abs(be.tangent.norm() - 1.0) < 1e-12);
    CHECK(std::abs(be.normal.dot(be.tangent)) < 1e-12);
  }
}

TEST_CASE("precondition violations rejected") {
  CHECK_THROWS_AS(build_annulus({1.0, 0.9, 0.05}), MeshError);
  // h too large for the annular gap
  CHECK_THROWS_AS(build_annulus({0.5, 1.0, 0.4}), MeshError);
}

TEST_CASE("gamma0 perimeter follows the inscribed polygon formula") {
  // [DERIVED] inscribed polygon of n sides in a circle of radius R0 has
  // perimeter 2 n R0 sin(pi/n)
  for (double h : {0.1, 0.05}) {
    Mesh mesh = build_annulus({0.5, 1.0, h});
    int n = 0;
    for (const auto& be : mesh.boundary_edges)
      if (be.tag == BoundaryTag::Gamma0) ++n;
    double expected = 2.0 * n * 0.5 * std::sin(M_PI / n);
    CHECK(mesh.boundary_length(BoundaryTag::Gamma0) ==
          doctest::Approx(expected).epsilon(1e-12));
    double rel = std::abs(expected - 2.0 * M_PI * 0.5) / (2.0 * M_PI * 0.5);
    CHECK(rel < h * h / (0.5 * 0.5));
  }
}

TEST_CASE("refinement quadruples triangles and preserves topology") {
  Mesh mesh = coarse();
  Mesh fine = refine(mesh);
  fine.check_invariants();
  CHECK(fine.triangle_count() == 4 * mesh.triangle_count());
  CHECK(fine.euler_characteristic() == 0);

  auto count_gamma0_vertices = [](const Mesh& m) {
    std::vector<char> seen(m.vertex_count(), 0);
    int c = 0;
    for (const auto& be : m.boundary_edges) {
      if (be.tag != BoundaryTag::Gamma0) continue;
      for (int v : {be.v0, be.v1})
        if (!seen[v]) {
          seen[v] = 1;
          ++c;
        }
    }
    return c;
  };
  Mesh finer = refine(fine);
  CHECK(count_gamma0_vertices(finer) == 4 * count_gamma0_vertices(mesh));
}

TEST_CASE("total area converges to the annulus area at O(h^2)") {
  double exact = M_PI * (1.0 - 0.25);
  Mesh mesh = coarse();
  double e0 = std::abs(mesh.total_area() - exact);
  Mesh fine = refine(mesh);
  double e1 = std::abs(fine.total_area() - exact);
  CHECK(e1 < e0 / 3.0);  // ~4x for O(h^2)
  CHECK(e1 < 1e-2);
}

TEST_CASE("boundary normals are radial up to polygonal deviation") {
  Mesh mesh = coarse();
  double h = 0.1;
  for (const auto& be : mesh.boundary_edges) {
    Vec2 mid = 0.5 * (mesh.vertices[be.v0] + mesh.vertices[be.v1]);
    Vec2 er = mid.normalized();
    Vec2 expected = (be.tag == BoundaryTag::GammaE) ? er : Vec2(-er);
    CHECK((be.normal - expected).norm() < h);
  }
}

TEST_CASE("quadrature rules integrate low-order polynomials exactly") {
  const auto& tq = triangle_quadrature();
  double wsum = 0.0, quartic = 0.0;
  for (size_t i = 0; i < tq.bary.size(); ++i) {
    wsum += tq.weights[i];
    // integrate lambda_0^4 over the reference triangle (area-normalized 1/15)
    quartic += tq.weights[i] * std::pow(tq.bary[i][0], 4);
  }
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(quartic == doctest::Approx(1.0 / 15.0).epsilon(1e-13));

  const auto& eq = edge_quadrature();
  double esum = 0.0, quart = 0.0;
  for (int i = 0; i < 3; ++i) {
    esum += eq.weights[i];
    quart += eq.weights[i] * std::pow(eq.points[i], 4);
  }
  CHECK(esum == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(quart == doctest::Approx(2.0 / 5.0).epsilon(1e-13));
}

TEST_CASE("vtk export carries boundary tags") {
  namespace fs = std::filesystem;
  Mesh mesh = coarse();
  fs::path path = fs::temp_directory_path() / "stokesrobin_mesh_test.vtk";
  write_mesh_vtk(mesh, path.string());
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("# vtk DataFile Version 2.0") == 0);
  CHECK(text.find("boundary_tag") != std::string::npos);
  CHECK(text.find("CELL_TYPES") != std::string::npos);
  fs::remove(path);
}
