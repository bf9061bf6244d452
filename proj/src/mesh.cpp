#include "stokesrobin/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace stokesrobin {

namespace {

constexpr double kPi = std::numbers::pi;

void build_edge_tables(Mesh& m) {
  m.edges.clear();
  m.tri_edges.assign(m.triangles.size(), {-1, -1, -1});
  std::map<std::pair<int, int>, int> edge_of;
  // count of adjacent triangles per edge, to find boundary edges
  std::vector<int> adjacency;
  std::vector<int> first_tri;
  std::vector<bool> forward_in_first;  // orientation of the edge in its first triangle
  for (int t = 0; t < m.triangle_count(); ++t) {
    for (int e = 0; e < 3; ++e) {
      int a = m.triangles[t][e];
      int b = m.triangles[t][(e + 1) % 3];
      auto key = std::minmax(a, b);
      auto it = edge_of.find(key);
      int id;
      if (it == edge_of.end()) {
        id = static_cast<int>(m.edges.size());
        edge_of.emplace(key, id);
        m.edges.push_back({key.first, key.second});
        adjacency.push_back(0);
        first_tri.push_back(t);
        forward_in_first.push_back(a < b);
      } else {
        id = it->second;
      }
      ++adjacency[id];
      m.tri_edges[t][e] = id;
    }
  }
  m.boundary_edges.clear();
  for (int id = 0; id < m.edge_count(); ++id) {
    if (adjacency[id] != 1) continue;
    BoundaryEdge be;
    be.edge = id;
    be.tri = first_tri[id];
    // orient so the adjacent triangle (domain) is on the left
    if (forward_in_first[id]) {
      be.v0 = m.edges[id][0];
      be.v1 = m.edges[id][1];
    } else {
      be.v0 = m.edges[id][1];
      be.v1 = m.edges[id][0];
    }
    Vec2 d = m.vertices[be.v1] - m.vertices[be.v0];
    be.length = d.norm();
    be.tangent = d / be.length;
    be.normal = Vec2(be.tangent.y(), -be.tangent.x());
    Vec2 mid = 0.5 * (m.vertices[be.v0] + m.vertices[be.v1]);
    double r = mid.norm();
    double inner_gap = std::abs(r - m.inner_radius);
    double outer_gap = std::abs(r - m.outer_radius);
    be.tag = (outer_gap < inner_gap) ? BoundaryTag::GammaE : BoundaryTag::Gamma0;
    m.boundary_edges.push_back(be);
  }
}

}  // namespace

const TriangleQuadrature& triangle_quadrature() {
  // Dunavant degree-4 rule, 6 points.
  static const TriangleQuadrature q = [] {
    TriangleQuadrature r;
    const double a1 = 0.108103018168070, b1 = 0.445948490915965;
    const double a2 = 0.816847572980459, b2 = 0.091576213509771;
    const double w1 = 0.223381589678011, w2 = 0.109951743655322;
    r.bary = {{{a1, b1, b1}, {b1, a1, b1}, {b1, b1, a1},
               {a2, b2, b2}, {b2, a2, b2}, {b2, b2, a2}}};
    r.weights = {w1, w1, w1, w2, w2, w2};
    return r;
  }();
  return q;
}

const EdgeQuadrature& edge_quadrature() {
  static const EdgeQuadrature q = [] {
    EdgeQuadrature r;
    const double s = std::sqrt(3.0 / 5.0);
    r.points = {-s, 0.0, s};
    r.weights = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    return r;
  }();
  return q;
}

void AnnulusSpec::validate() const {
  if (!(inner_radius > 0.0)) throw MeshError("inner radius must be positive");
  if (!(outer_radius > inner_radius))
    throw MeshError("outer radius must exceed inner radius");
  if (!(target_edge_length > 0.0))
    throw MeshError("target edge length must be positive");
  if (!(target_edge_length < 0.5 * (outer_radius - inner_radius)))
    throw MeshError("target edge length too large to resolve the annular gap");
}

double Mesh::triangle_area(int t) const {
  const auto& tri = triangles[t];
  Vec2 a = vertices[tri[0]], b = vertices[tri[1]], c = vertices[tri[2]];
  return 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
}

Vec2 Mesh::barycentric_to_point(int t, const std::array<double, 3>& b) const {
  const auto& tri = triangles[t];
  return b[0] * vertices[tri[0]] + b[1] * vertices[tri[1]] + b[2] * vertices[tri[2]];
}

int Mesh::euler_characteristic() const {
  return vertex_count() - edge_count() + triangle_count();
}

double Mesh::total_area() const {
  double s = 0.0;
  for (int t = 0; t < triangle_count(); ++t) s += triangle_area(t);
  return s;
}

double Mesh::boundary_length(BoundaryTag tag) const {
  double s = 0.0;
  for (const auto& be : boundary_edges)
    if (be.tag == tag) s += be.length;
  return s;
}

int Mesh::local_edge_index(const BoundaryEdge& be) const {
  for (int e = 0; e < 3; ++e)
    if (tri_edges[be.tri][e] == be.edge) return e;
  throw MeshError("boundary edge not found in its adjacent triangle");
}

void Mesh::check_invariants() const {
  for (int t = 0; t < triangle_count(); ++t)
    if (!(triangle_area(t) > 0.0))
      throw MeshError("non-positive triangle area at triangle " + std::to_string(t));
  if (euler_characteristic() != 0)
    throw MeshError("Euler characteristic is not 0");
  const double tol = 1e-12 * outer_radius;
  for (const auto& be : boundary_edges) {
    double target = (be.tag == BoundaryTag::GammaE) ? outer_radius : inner_radius;
    for (int v : {be.v0, be.v1}) {
      if (std::abs(vertices[v].norm() - target) > tol)
        throw MeshError("boundary vertex off its circle");
    }
    if (std::abs(be.normal.dot(be.tangent)) > 1e-14 ||
        std::abs(be.normal.norm() - 1.0) > 1e-14 ||
        std::abs(be.tangent.norm() - 1.0) > 1e-14)
      throw MeshError("boundary frame not orthonormal");
  }
}

Mesh build_annulus(const AnnulusSpec& spec) {
  spec.validate();
  const double R0 = spec.inner_radius, R1 = spec.outer_radius, h = spec.target_edge_length;
  const int nr = std::max(2, static_cast<int>(std::lround((R1 - R0) / h)));
  const int ns = std::max(8, static_cast<int>(std::ceil(2.0 * kPi * R1 / h)));

  Mesh m;
  m.inner_radius = R0;
  m.outer_radius = R1;
  m.vertices.reserve(static_cast<size_t>(nr + 1) * ns);
  for (int i = 0; i <= nr; ++i) {
    double r = (i == 0) ? R0 : (i == nr ? R1 : R0 + (R1 - R0) * i / nr);
    for (int j = 0; j < ns; ++j) {
      double th = 2.0 * kPi * j / ns;
      m.vertices.emplace_back(r * std::cos(th), r * std::sin(th));
    }
  }
  auto vid = [ns](int i, int j) { return i * ns + ((j % ns + ns) % ns); };
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < ns; ++j) {
      int v00 = vid(i, j), v10 = vid(i + 1, j);
      int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      m.triangles.push_back({v00, v10, v11});
      m.triangles.push_back({v00, v11, v01});
    }
  }
  build_edge_tables(m);
  m.check_invariants();
  return m;
}

Mesh refine(const Mesh& mesh) {
  Mesh m;
  m.inner_radius = mesh.inner_radius;
  m.outer_radius = mesh.outer_radius;
  m.vertices = mesh.vertices;

  // one new vertex per edge; boundary midpoints snap back to their circle
  std::vector<int> mid(mesh.edge_count(), -1);
  for (int e = 0; e < mesh.edge_count(); ++e) {
    Vec2 p = 0.5 * (mesh.vertices[mesh.edges[e][0]] + mesh.vertices[mesh.edges[e][1]]);
    mid[e] = static_cast<int>(m.vertices.size());
    m.vertices.push_back(p);
  }
  for (const auto& be : mesh.boundary_edges) {
    double target = (be.tag == BoundaryTag::GammaE) ? mesh.outer_radius : mesh.inner_radius;
    Vec2& p = m.vertices[mid[be.edge]];
    p *= target / p.norm();
  }
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    int m01 = mid[mesh.tri_edges[t][0]];
    int m12 = mid[mesh.tri_edges[t][1]];
    int m20 = mid[mesh.tri_edges[t][2]];
    m.triangles.push_back({tri[0], m01, m20});
    m.triangles.push_back({m01, tri[1], m12});
    m.triangles.push_back({m20, m12, tri[2]});
    m.triangles.push_back({m01, m12, m20});
  }
  build_edge_tables(m);
  m.check_invariants();
  return m;
}

}  // namespace stokesrobin
