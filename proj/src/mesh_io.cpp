#include "p1dgp2/mesh_io.hpp"

#include "p1dgp2/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace p1dgp2 {

namespace {

struct Row {
    int line;
    std::vector<std::string> tokens;
};

class TableFile {
public:
    explicit TableFile(const fs::path& path) : name_(path.string())
    {
        std::ifstream in(path);
        if (!in) {
            throw ParseError(name_, 0, "cannot open file");
        }
        std::string text;
        int line_no = 0;
        while (std::getline(in, text)) {
            ++line_no;
            if (const auto hash = text.find('#'); hash != std::string::npos) {
                text.erase(hash);
            }
            std::istringstream ss(text);
            Row row{line_no, {}};
            for (std::string tok; ss >> tok;) {
                row.tokens.push_back(tok);
            }
            if (!row.tokens.empty()) {
                rows_.push_back(std::move(row));
            }
        }
        if (rows_.empty()) {
            throw ParseError(name_, line_no, "missing header line");
        }
    }

    const std::string& name() const { return name_; }
    const Row& header() const { return rows_.front(); }
    std::size_t n_body_rows() const { return rows_.size() - 1; }
    const Row& body(std::size_t i) const { return rows_.at(i + 1); }

    long to_int(const Row& row, std::size_t col, const char* what) const
    {
        const std::string& tok = token(row, col, what);
        long value = 0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
        if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
            throw ParseError(name_, row.line, std::string("expected integer ") + what + ", got '" + tok + "'");
        }
        return value;
    }

    double to_double(const Row& row, std::size_t col, const char* what) const
    {
        const std::string& tok = token(row, col, what);
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used == tok.size()) {
                return v;
            }
        } catch (const std::exception&) {
        }
        throw ParseError(name_, row.line, std::string("expected number ") + what + ", got '" + tok + "'");
    }

    [[noreturn]] void fail(const Row& row, const std::string& msg) const { throw ParseError(name_, row.line, msg); }

private:
    const std::string& token(const Row& row, std::size_t col, const char* what) const
    {
        if (col >= row.tokens.size()) {
            throw ParseError(name_, row.line, std::string("missing ") + what);
        }
        return row.tokens[col];
    }

    std::string name_;
    std::vector<Row> rows_;
};

struct NodeTable {
    std::vector<double> coords;
    int base = 0;
    std::map<long, int> index;   // file index -> 0-based position
};

NodeTable read_nodes(const fs::path& path, int dim)
{
    TableFile file(path);
    const Row& h = file.header();
    const long count = file.to_int(h, 0, "node count");
    const long file_dim = file.to_int(h, 1, "dimension");
    const long n_attr = h.tokens.size() > 2 ? file.to_int(h, 2, "attribute count") : 0;
    if (file_dim != dim) {
        file.fail(h, "inconsistent dimension: expected " + std::to_string(dim) + ", header says "
                         + std::to_string(file_dim));
    }
    if (count < 1 || n_attr < 0) {
        file.fail(h, "malformed header");
    }
    if (file.n_body_rows() < static_cast<std::size_t>(count)) {
        file.fail(h, "header announces " + std::to_string(count) + " nodes, file has "
                         + std::to_string(file.n_body_rows()));
    }
    NodeTable t;
    for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) {
        const Row& r = file.body(i);
        const long idx = file.to_int(r, 0, "node index");
        if (i == 0) {
            if (idx != 0 && idx != 1) {
                file.fail(r, "first node index must be 0 or 1");
            }
            t.base = static_cast<int>(idx);
        }
        if (!t.index.emplace(idx, static_cast<int>(i)).second) {
            file.fail(r, "duplicate node index " + std::to_string(idx));
        }
        for (int k = 0; k < dim; ++k) {
            t.coords.push_back(file.to_double(r, static_cast<std::size_t>(1 + k), "coordinate"));
        }
    }
    return t;
}

int resolve(const TableFile& file, const Row& row, const NodeTable& nodes, long idx)
{
    const auto it = nodes.index.find(idx);
    if (it == nodes.index.end()) {
        file.fail(row, "node index " + std::to_string(idx) + " out of range");
    }
    return it->second;
}

std::vector<int> read_cells(const fs::path& path, int dim, const NodeTable& nodes)
{
    TableFile file(path);
    const Row& h = file.header();
    const long count = file.to_int(h, 0, "element count");
    const long per = file.to_int(h, 1, "nodes per element");
    if (count < 1 || per < dim + 1) {
        file.fail(h, "malformed header");
    }
    if (file.n_body_rows() < static_cast<std::size_t>(count)) {
        file.fail(h, "header announces " + std::to_string(count) + " elements, file has "
                         + std::to_string(file.n_body_rows()));
    }
    std::vector<int> cells;
    for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) {
        const Row& r = file.body(i);
        for (int k = 0; k <= dim; ++k) {
            cells.push_back(resolve(file, r, nodes, file.to_int(r, static_cast<std::size_t>(1 + k), "vertex index")));
        }
    }
    return cells;
}

struct FacetTable {
    std::vector<int> facets;
    std::vector<int> markers;
};

// Reads a facet list. `.poly` files carry a (usually empty) node section first.
FacetTable read_facets(const fs::path& path, int dim, const NodeTable& nodes)
{
    TableFile file(path);
    std::size_t start = 0;
    const Row* header = &file.header();
    if (path.extension() == ".poly") {
        const long n_poly_nodes = file.to_int(*header, 0, "node count");
        if (n_poly_nodes != 0) {
            file.fail(*header, "only .poly files with an empty node section are supported");
        }
        if (file.n_body_rows() < 1) {
            file.fail(*header, "missing segment header");
        }
        header = &file.body(0);
        start = 1;
    }
    const long count = file.to_int(*header, 0, "facet count");
    const long has_marker = header->tokens.size() > 1 ? file.to_int(*header, 1, "marker flag") : 0;
    if (count < 0 || (has_marker != 0 && has_marker != 1)) {
        file.fail(*header, "malformed header");
    }
    if (file.n_body_rows() < start + static_cast<std::size_t>(count)) {
        file.fail(*header, "header announces " + std::to_string(count) + " facets");
    }
    FacetTable t;
    for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) {
        const Row& r = file.body(start + i);
        for (int k = 0; k < dim; ++k) {
            t.facets.push_back(resolve(file, r, nodes, file.to_int(r, static_cast<std::size_t>(1 + k), "vertex index")));
        }
        t.markers.push_back(has_marker ? static_cast<int>(file.to_int(r, static_cast<std::size_t>(1 + dim), "marker")) : 1);
    }
    return t;
}

Mesh assemble_mesh(int dim, NodeTable nodes, std::vector<int> cells, std::optional<FacetTable> facets)
{
    MeshData data;
    data.dim = dim;
    data.coords = nodes.coords;
    data.cells = cells;
    if (!facets) {
        return Mesh(std::move(data));
    }
    // Keep file facets that lie on the boundary; fill in any the file omits.
    Mesh derived(data);
    std::map<std::vector<int>, int> boundary;
    for (int f = 0; f < derived.n_facets(); ++f) {
        auto key = std::vector<int>(derived.facet(f).begin(), derived.facet(f).end());
        std::sort(key.begin(), key.end());
        boundary.emplace(std::move(key), f);
    }
    std::vector<bool> seen(static_cast<std::size_t>(derived.n_facets()), false);
    const auto nf = static_cast<std::size_t>(dim);
    for (std::size_t f = 0; f < facets->markers.size(); ++f) {
        std::vector<int> verts(facets->facets.begin() + static_cast<std::ptrdiff_t>(f * nf),
                               facets->facets.begin() + static_cast<std::ptrdiff_t>((f + 1) * nf));
        auto key = verts;
        std::sort(key.begin(), key.end());
        const auto it = boundary.find(key);
        if (it == boundary.end() || seen[static_cast<std::size_t>(it->second)]) {
            continue;
        }
        seen[static_cast<std::size_t>(it->second)] = true;
        data.facets.insert(data.facets.end(), verts.begin(), verts.end());
        data.facet_markers.push_back(facets->markers[f]);
    }
    for (int f = 0; f < derived.n_facets(); ++f) {
        if (!seen[static_cast<std::size_t>(f)]) {
            data.facets.insert(data.facets.end(), derived.facet(f).begin(), derived.facet(f).end());
            data.facet_markers.push_back(1);
        }
    }
    return Mesh(std::move(data));
}

Mesh read_mesh(int dim, const fs::path& node_path, const fs::path& ele_path,
               const std::optional<fs::path>& facet_path)
{
    NodeTable nodes = read_nodes(node_path, dim);
    std::vector<int> cells = read_cells(ele_path, dim, nodes);
    std::optional<FacetTable> facets;
    if (facet_path) {
        facets = read_facets(*facet_path, dim, nodes);
    }
    try {
        return assemble_mesh(dim, std::move(nodes), std::move(cells), std::move(facets));
    } catch (const ContractError& e) {
        throw ParseError(ele_path.string(), 0, e.what());
    }
}

void write_mesh(const Mesh& mesh, const fs::path& stem, const char* facet_ext)
{
    const int dim = mesh.dim();
    const auto open = [&](const char* ext) {
        fs::path p = stem;
        p += ext;
        std::ofstream out(p);
        if (!out) {
            throw ConfigError("cannot write " + p.string());
        }
        out << std::setprecision(17);
        return out;
    };
    {
        auto out = open(".node");
        out << mesh.n_vertices() << ' ' << dim << " 0 0\n";
        for (int v = 0; v < mesh.n_vertices(); ++v) {
            out << v + 1;
            for (double x : mesh.vertex(v)) {
                out << ' ' << x;
            }
            out << '\n';
        }
    }
    {
        auto out = open(".ele");
        out << mesh.n_cells() << ' ' << dim + 1 << " 0\n";
        for (int c = 0; c < mesh.n_cells(); ++c) {
            out << c + 1;
            for (int v : mesh.cell(c)) {
                out << ' ' << v + 1;
            }
            out << '\n';
        }
    }
    {
        auto out = open(facet_ext);
        out << mesh.n_facets() << " 1\n";
        for (int f = 0; f < mesh.n_facets(); ++f) {
            out << f + 1;
            for (int v : mesh.facet(f)) {
                out << ' ' << v + 1;
            }
            out << ' ' << mesh.facet_marker(f) << '\n';
        }
    }
}

fs::path with_ext(const fs::path& stem, const char* ext)
{
    fs::path p = stem;
    p += ext;
    return p;
}

} // namespace

Mesh read_triangle_mesh(const fs::path& node_path, const fs::path& ele_path,
                        const std::optional<fs::path>& edge_path)
{
    return read_mesh(2, node_path, ele_path, edge_path);
}

Mesh read_tetgen_mesh(const fs::path& node_path, const fs::path& ele_path,
                      const std::optional<fs::path>& face_path)
{
    return read_mesh(3, node_path, ele_path, face_path);
}

Mesh load_mesh(const fs::path& path)
{
    fs::path stem = path;
    const auto ext = path.extension();
    if (ext == ".node" || ext == ".ele" || ext == ".edge" || ext == ".face" || ext == ".poly") {
        stem.replace_extension();
    }
    const fs::path node = with_ext(stem, ".node");
    const fs::path ele = with_ext(stem, ".ele");
    TableFile header(node);
    const long dim = header.to_int(header.header(), 1, "dimension");
    std::optional<fs::path> facets;
    if (dim == 2) {
        for (const char* e : {".edge", ".poly"}) {
            if (fs::exists(with_ext(stem, e))) {
                facets = with_ext(stem, e);
                break;
            }
        }
        return read_triangle_mesh(node, ele, facets);
    }
    if (dim == 3) {
        if (fs::exists(with_ext(stem, ".face"))) {
            facets = with_ext(stem, ".face");
        }
        return read_tetgen_mesh(node, ele, facets);
    }
    header.fail(header.header(), "unsupported dimension " + std::to_string(dim));
}

void write_triangle_mesh(const Mesh& mesh, const fs::path& stem)
{
    if (mesh.dim() != 2) {
        throw ConfigError("write_triangle_mesh: mesh is not two-dimensional");
    }
    write_mesh(mesh, stem, ".edge");
}

void write_tetgen_mesh(const Mesh& mesh, const fs::path& stem)
{
    if (mesh.dim() != 3) {
        throw ConfigError("write_tetgen_mesh: mesh is not three-dimensional");
    }
    write_mesh(mesh, stem, ".face");
}

} // namespace p1dgp2
