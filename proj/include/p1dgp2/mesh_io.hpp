#pragma once

#include "p1dgp2/mesh.hpp"

#include <filesystem>
#include <optional>

namespace p1dgp2 {

// Triangle .node/.ele with an optional .edge or .poly boundary file.
//
// Indices may be 0- or 1-based; the base is taken from the first .node row
// and applied to every file. Facet-file rows that are not on the boundary
// (Triangle's -e output lists interior edges too) are skipped; boundary
// facets missing from the file are added with marker 1.
Mesh read_triangle_mesh(const std::filesystem::path& node_path, const std::filesystem::path& ele_path,
                        const std::optional<std::filesystem::path>& edge_path = std::nullopt);

// TetGen .node/.ele with an optional .face file; same conventions as above.
Mesh read_tetgen_mesh(const std::filesystem::path& node_path, const std::filesystem::path& ele_path,
                      const std::optional<std::filesystem::path>& face_path = std::nullopt);

// Loads `<stem>.node` + `<stem>.ele` (+ `.edge`/`.poly` or `.face` when present).
// `path` may be the stem or any of the files; the dimension is read from the .node header.
Mesh load_mesh(const std::filesystem::path& path);

// Writes `<stem>.node`, `<stem>.ele` and `<stem>.edge` (2D) or `<stem>.face` (3D), 1-based.
void write_triangle_mesh(const Mesh& mesh, const std::filesystem::path& stem);
void write_tetgen_mesh(const Mesh& mesh, const std::filesystem::path& stem);

} // namespace p1dgp2
