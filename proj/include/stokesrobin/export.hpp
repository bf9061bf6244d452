#pragma once

#include "stokesrobin/spectral.hpp"

namespace stokesrobin {

/// Legacy ASCII VTK 2.0 unstructured grid with cell data "boundary_tag"
/// (GammaE=1, Gamma0=2 on triangles touching that part, 0 elsewhere).
void write_mesh_vtk(const Mesh& mesh, const std::string& path,
                    const std::string& header_comment = "");

/// Mesh plus point data "velocity" (3-component, z=0) and "pressure"
/// (vertex values of the P1 field; P2 midside values are dropped).
void write_solution_vtk(const DiscreteField& u, const DiscreteField& p,
                        const std::string& path,
                        const std::string& header_comment = "");

void write_eigenvalue_csv(const EigenSystem& es, const std::string& path,
                          const std::string& header_comment = "");

/// Generic small-table CSV: one header row, '.' decimals, LF endings.
void write_csv(const std::string& path, const std::string& header_comment,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

}  // namespace stokesrobin
