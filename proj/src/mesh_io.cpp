#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "fvdd/error.hpp"
#include "fvdd/mesh.hpp"

namespace fvdd {

namespace {

std::string tag_token(const BoundaryTag& tag) {
  if (tag.is_dirichlet()) return "D" + std::to_string(tag.segment);
  return "N";
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-empty line with comments stripped, split on whitespace.
  std::istringstream next(const char* expecting) {
    std::string line;
    while (std::getline(in_, line)) {
      ++number_;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") != std::string::npos) return std::istringstream(line);
    }
    fail(std::string("unexpected end of file, expecting ") + expecting);
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(number_) + ": " + msg);
  }

  int line() const { return number_; }

 private:
  std::istream& in_;
  int number_ = 0;
};

}  // namespace

void write_mesh(const PrimalMesh& mesh, std::ostream& out) {
  out << "fvdd-mesh 1\n";
  out << mesh.num_vertices() << ' ' << mesh.num_cells() << ' ' << mesh.num_boundary_edges() << '\n';
  out << std::setprecision(17);
  for (const auto& v : mesh.vertices()) out << v.x() << ' ' << v.y() << '\n';
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const auto& cell = mesh.cells()[k];
    out << cell.size();
    for (int v : cell) out << ' ' << v;
    out << ' ' << mesh.centers()[k].x() << ' ' << mesh.centers()[k].y() << '\n';
  }
  for (int e : mesh.boundary_edges()) {
    const auto& edge = mesh.edges()[e];
    out << edge.vertices[0] << ' ' << edge.vertices[1] << ' ' << tag_token(edge.tag) << '\n';
  }
}

void save_mesh(const PrimalMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot open " + path.string() + " for writing");
  write_mesh(mesh, out);
}

PrimalMesh read_mesh(std::istream& in) {
  LineReader reader(in);
  {
    auto ls = reader.next("header");
    std::string magic;
    int version = 0;
    if (!(ls >> magic >> version) || magic != "fvdd-mesh") reader.fail("expected header 'fvdd-mesh 1'");
    if (version != 1) reader.fail("unsupported mesh format version " + std::to_string(version));
  }
  long nv = 0, nc = 0, nbe = 0;
  {
    auto ls = reader.next("counts");
    if (!(ls >> nv >> nc >> nbe) || nv < 3 || nc < 0 || nbe < 0) reader.fail("expected '<nv> <nc> <nbe>'");
    if (nc == 0) reader.fail("mesh has an empty cell list");
  }
  std::vector<Point> vertices(static_cast<std::size_t>(nv));
  for (auto& v : vertices) {
    auto ls = reader.next("vertex");
    if (!(ls >> v.x() >> v.y())) reader.fail("expected vertex coordinates 'x y'");
  }
  std::vector<std::vector<int>> cells(static_cast<std::size_t>(nc));
  std::vector<Point> centers;
  bool any_center = false, any_missing = false;
  for (auto& cell : cells) {
    auto ls = reader.next("cell");
    int k = 0;
    if (!(ls >> k) || k < 3) reader.fail("cell must start with a vertex count >= 3");
    std::set<int> seen;
    for (int j = 0; j < k; ++j) {
      int v = -1;
      if (!(ls >> v)) reader.fail("cell lists fewer vertices than declared");
      if (v < 0 || v >= nv) reader.fail("vertex index " + std::to_string(v) + " out of range");
      if (!seen.insert(v).second) reader.fail("duplicate vertex index " + std::to_string(v) + " in cell");
      cell.push_back(v);
    }
    Point c;
    if (ls >> c.x()) {
      if (!(ls >> c.y())) reader.fail("cell center needs two coordinates");
      any_center = true;
      centers.push_back(c);
    } else {
      any_missing = true;
    }
    std::string extra;
    if (ls.clear(), ls >> extra) reader.fail("trailing tokens on cell line");
  }
  if (any_center && any_missing) reader.fail("cell centers must be given for all cells or none");

  const int after_cells = reader.line();
  PrimalMesh mesh = [&] {
    try {
      return PrimalMesh::from_polygons(std::move(vertices), std::move(cells), std::move(centers));
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(after_cells) + ": " + e.what());
    }
  }();

  if (nbe != mesh.num_boundary_edges())
    reader.fail("declared " + std::to_string(nbe) + " boundary edges, mesh has " +
                std::to_string(mesh.num_boundary_edges()));
  std::vector<BoundaryTag> tags(mesh.boundary_edges().size());
  std::vector<bool> assigned(tags.size(), false);
  for (long i = 0; i < nbe; ++i) {
    auto ls = reader.next("boundary edge");
    int a = -1, b = -1;
    std::string token;
    if (!(ls >> a >> b >> token)) reader.fail("expected boundary edge 'v1 v2 tag'");
    BoundaryTag tag;
    if (token == "N") {
      tag = BoundaryTag::neumann();
    } else if (token.size() >= 2 && token[0] == 'D' && token.find_first_not_of("0123456789", 1) == std::string::npos) {
      tag = BoundaryTag::dirichlet(std::stoi(token.substr(1)));
    } else {
      reader.fail("unknown boundary tag '" + token + "'");
    }
    int slot = -1;
    for (std::size_t s = 0; s < mesh.boundary_edges().size(); ++s) {
      const auto& ev = mesh.edges()[mesh.boundary_edges()[s]].vertices;
      if ((ev[0] == a && ev[1] == b) || (ev[0] == b && ev[1] == a)) slot = static_cast<int>(s);
    }
    if (slot < 0) reader.fail("edge " + std::to_string(a) + "-" + std::to_string(b) + " is not a boundary edge");
    if (assigned[slot]) reader.fail("boundary edge listed twice");
    assigned[slot] = true;
    tags[slot] = tag;
  }
  return mesh.with_boundary_tags(tags);
}

PrimalMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  return read_mesh(in);
}

}  // namespace fvdd
