#pragma once

#include "p1dgp2/dynamics.hpp"

#include <filesystem>
#include <string>

namespace p1dgp2 {

// Legacy ASCII VTK unstructured grid with quadratic cells (types 21/22/24).
// Points are the h DOFs (vertices, then edge midpoints), h is point data and
// the cell mean of the discontinuous velocity is cell data.
void write_vtk(const std::filesystem::path& path, const Mesh& mesh, const DofMap& dofs, const FieldState& state,
               const std::string& title = "p1dgp2 field");

// Exploded linear cells (one copy of each vertex per cell) so that the
// discontinuous velocity is represented exactly as point data; h is sampled
// at the cell vertices.
void write_vtk_exploded(const std::filesystem::path& path, const Mesh& mesh, const DofMap& dofs,
                        const FieldState& state, const std::string& title = "p1dgp2 field (exploded)");

} // namespace p1dgp2
