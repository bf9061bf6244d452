#include "stokesrobin/export.hpp"

#include <cstdio>
#include <fstream>

namespace stokesrobin {

namespace {

void write_vtk_header(std::ofstream& out, const Mesh& mesh,
                      const std::string& comment) {
  out << "# vtk DataFile Version 2.0\n";
  out << (comment.empty() ? "stokesrobin mesh" : comment) << "\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.vertex_count() << " double\n";
  char buf[120];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "%.12e %.12e 0.0\n", v.x(), v.y());
    out << buf;
  }
  out << "CELLS " << mesh.triangle_count() << " " << 4 * mesh.triangle_count()
      << "\n";
  for (const auto& t : mesh.triangles)
    out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << mesh.triangle_count() << "\n";
  for (int t = 0; t < mesh.triangle_count(); ++t) out << "5\n";
}

std::vector<int> boundary_tag_cell_data(const Mesh& mesh) {
  std::vector<int> tag(mesh.triangle_count(), 0);
  for (const auto& be : mesh.boundary_edges)
    tag[be.tri] = (be.tag == BoundaryTag::GammaE) ? 1 : 2;
  return tag;
}

}  // namespace

void write_mesh_vtk(const Mesh& mesh, const std::string& path,
                    const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot open " + path);
  write_vtk_header(out, mesh, header_comment);
  out << "CELL_DATA " << mesh.triangle_count() << "\n";
  out << "SCALARS boundary_tag int 1\nLOOKUP_TABLE default\n";
  for (int t : boundary_tag_cell_data(mesh)) out << t << "\n";
}

void write_solution_vtk(const DiscreteField& u, const DiscreteField& p,
                        const std::string& path,
                        const std::string& header_comment) {
  const Mesh& mesh = u.space->mesh();
  std::ofstream out(path);
  if (!out) throw MeshError("cannot open " + path);
  write_vtk_header(out, mesh, header_comment);
  out << "CELL_DATA " << mesh.triangle_count() << "\n";
  out << "SCALARS boundary_tag int 1\nLOOKUP_TABLE default\n";
  for (int t : boundary_tag_cell_data(mesh)) out << t << "\n";
  out << "POINT_DATA " << mesh.vertex_count() << "\n";
  out << "VECTORS velocity double\n";
  char buf[120];
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    std::snprintf(buf, sizeof(buf), "%.12e %.12e 0.0\n", u.coefficients[2 * v],
                  u.coefficients[2 * v + 1]);
    out << buf;
  }
  out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    std::snprintf(buf, sizeof(buf), "%.12e\n", p.coefficients[v]);
    out << buf;
  }
}

void write_eigenvalue_csv(const EigenSystem& es, const std::string& path,
                          const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw SolverError("cannot open " + path);
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "l,lambda\n";
  char buf[64];
  for (int l = 0; l < es.count(); ++l) {
    std::snprintf(buf, sizeof(buf), "%d,%.12e\n", l + 1, es.eigenvalues[l]);
    out << buf;
  }
}

void write_csv(const std::string& path, const std::string& header_comment,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw SolverError("cannot open " + path);
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  for (size_t c = 0; c < columns.size(); ++c)
    out << columns[c] << (c + 1 < columns.size() ? "," : "\n");
  char buf[48];
  for (const auto& row : rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.12e", row[c]);
      out << buf << (c + 1 < row.size() ? "," : "\n");
    }
  }
}

}  // namespace stokesrobin
