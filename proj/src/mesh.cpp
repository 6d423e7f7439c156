#include "plab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace plab {

const char* to_string(NodeClass c) {
  switch (c) {
    case NodeClass::Free: return "Free";
    case NodeClass::OuterBoundary: return "OuterBoundary";
    case NodeClass::Obstacle: return "Obstacle";
    case NodeClass::External: return "External";
  }
  return "?";
}

GridMesh::GridMesh(Point lo, Point hi, double h)
    : dim_(static_cast<int>(lo.size())), h_(h), lo_(std::move(lo)), hi_(std::move(hi)) {
  if (dim_ < 1 || dim_ > 6) throw InvalidInput("GridMesh: dimension must lie in [1, 6]");
  if (hi_.size() != dim_) throw InvalidInput("GridMesh: corner dimension mismatch");
  if (!(h_ > 0.0)) throw InvalidInput("GridMesh: spacing must be positive");
  nodes_per_axis_.resize(dim_);
  for (int i = 0; i < dim_; ++i) {
    const double edge = hi_[i] - lo_[i];
    if (!(edge > 0.0)) throw InvalidInput("GridMesh: hi must exceed lo componentwise");
    const double cells = edge / h_;
    const double rounded = std::round(cells);
    if (std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells)) {
      throw InvalidInput("GridMesh: spacing does not divide the box edge");
    }
    nodes_per_axis_[i] = static_cast<int>(rounded) + 1;
  }

  strides_.assign(dim_, 1);
  cell_strides_.assign(dim_, 1);
  for (int i = dim_ - 2; i >= 0; --i) {
    strides_[i] = strides_[i + 1] * nodes_per_axis_[i + 1];
    cell_strides_[i] = cell_strides_[i + 1] * (nodes_per_axis_[i + 1] - 1);
  }
  node_count_ = strides_[0] * nodes_per_axis_[0];
  cell_count_ = cell_strides_[0] * (nodes_per_axis_[0] - 1);

  double fact = 1.0;
  for (int i = 2; i <= dim_; ++i) fact *= i;
  simplex_volume_ = std::pow(h_, dim_) / fact;

  std::vector<int> perm(dim_);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    perms_.push_back(perm);
    std::vector<int> offsets(dim_ + 1, 0);
    for (int k = 0; k < dim_; ++k) offsets[k + 1] = offsets[k] + strides_[perm[k]];
    perm_offsets_.push_back(offsets);
  } while (std::next_permutation(perm.begin(), perm.end()));

  // Kuhn neighbours: nonzero 0/1 vectors and their negatives, plus self.
  for (int mask = 0; mask < (1 << dim_); ++mask) {
    for (int sign : {1, -1}) {
      if (mask == 0 && sign == -1) continue;
      std::vector<int> v(dim_, 0);
      for (int i = 0; i < dim_; ++i) v[i] = ((mask >> i) & 1) * sign;
      stencil_vectors_.push_back(v);
    }
  }
  auto linear = [&](const std::vector<int>& v) {
    int off = 0;
    for (int i = 0; i < dim_; ++i) off += v[i] * strides_[i];
    return off;
  };
  std::sort(stencil_vectors_.begin(), stencil_vectors_.end(),
            [&](const auto& a, const auto& b) { return linear(a) < linear(b); });
  for (const auto& v : stencil_vectors_) stencil_.push_back(linear(v));

  const int nv = dim_ + 1;
  pair_slots_.assign(perms_.size() * nv * nv, -1);
  for (std::size_t k = 0; k < perms_.size(); ++k) {
    std::vector<std::vector<int>> path(nv, std::vector<int>(dim_, 0));
    for (int j = 0; j < dim_; ++j) {
      path[j + 1] = path[j];
      path[j + 1][perms_[k][j]] += 1;
    }
    for (int a = 0; a < nv; ++a) {
      for (int b = 0; b < nv; ++b) {
        std::vector<int> d(dim_);
        for (int i = 0; i < dim_; ++i) d[i] = path[a][i] - path[b][i];
        const auto it = std::find(stencil_vectors_.begin(), stencil_vectors_.end(), d);
        pair_slots_[(k * nv + a) * nv + b] = static_cast<int>(it - stencil_vectors_.begin());
      }
    }
  }

  classes_.assign(node_count_, NodeClass::Free);
}

std::vector<int> GridMesh::lattice_index(int node) const {
  std::vector<int> idx(dim_);
  for (int i = 0; i < dim_; ++i) {
    idx[i] = node / strides_[i];
    node -= idx[i] * strides_[i];
  }
  return idx;
}

int GridMesh::node_id(const std::vector<int>& index) const {
  int id = 0;
  for (int i = 0; i < dim_; ++i) {
    if (index[i] < 0 || index[i] >= nodes_per_axis_[i]) return -1;
    id += index[i] * strides_[i];
  }
  return id;
}

Point GridMesh::node_point(int node) const {
  Point x(dim_);
  for (int i = 0; i < dim_; ++i) {
    const int k = node / strides_[i];
    node -= k * strides_[i];
    x[i] = lo_[i] + k * h_;
  }
  return x;
}

bool GridMesh::on_lattice_edge(int node) const {
  for (int i = 0; i < dim_; ++i) {
    const int k = node / strides_[i];
    node -= k * strides_[i];
    if (k == 0 || k == nodes_per_axis_[i] - 1) return true;
  }
  return false;
}

int GridMesh::cell_corner(int cell) const {
  int node = 0;
  for (int i = 0; i < dim_; ++i) {
    const int k = cell / cell_strides_[i];
    cell -= k * cell_strides_[i];
    node += k * strides_[i];
  }
  return node;
}

void GridMesh::simplex_vertices(std::int64_t sid, int* out) const {
  const int per = simplices_per_cell();
  const int corner = cell_corner(static_cast<int>(sid / per));
  const auto& offs = perm_offsets_[sid % per];
  for (int a = 0; a <= dim_; ++a) out[a] = corner + offs[a];
}

Point GridMesh::simplex_barycenter(std::int64_t sid) const {
  std::vector<int> v(dim_ + 1);
  simplex_vertices(sid, v.data());
  Point c = Point::Zero(dim_);
  for (int a : v) c += node_point(a);
  return c / (dim_ + 1);
}

int GridMesh::neighbour(int node, int slot) const {
  const auto& d = stencil_vectors_[slot];
  int rest = node;
  for (int i = 0; i < dim_; ++i) {
    const int k = rest / strides_[i];
    rest -= k * strides_[i];
    const int t = k + d[i];
    if (t < 0 || t >= nodes_per_axis_[i]) return -1;
  }
  return node + stencil_[slot];
}

int GridMesh::count(NodeClass c) const {
  return static_cast<int>(std::count(classes_.begin(), classes_.end(), c));
}

bool GridMesh::simplex_active(std::int64_t sid) const {
  int v[16];
  simplex_vertices(sid, v);
  for (int a = 0; a <= dim_; ++a) {
    if (classes_[v[a]] == NodeClass::External) return false;
  }
  return true;
}

GridMesh build_mesh(const BoundingBox& box, double h) { return GridMesh(box.lo, box.hi, h); }

GridMesh build_aligned_mesh(const BoundingBox& box, double h, const Point& anchor,
                            int pad_cells) {
  const int n = static_cast<int>(box.lo.size());
  Point lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    const double klo = std::floor((box.lo[i] - anchor[i]) / h + 1e-9) - pad_cells;
    const double khi = std::ceil((box.hi[i] - anchor[i]) / h - 1e-9) + pad_cells;
    lo[i] = anchor[i] + klo * h;
    hi[i] = anchor[i] + khi * h;
  }
  return GridMesh(lo, hi, h);
}

namespace {

bool boundary_closer_than(const Region& outside, const Point& x, double r) {
  try {
    return distance_to(outside, x) < r;
  } catch (const InvalidInput&) {
    // no distance for this domain shape: lattice-edge rule only
    return false;
  }
}

}  // namespace

GridMesh classify_nodes(const GridMesh& mesh, const Region& domain, const Region& obstacle,
                        std::optional<double> snap_tol) {
  if (domain.dim() != mesh.dim() || obstacle.dim() != mesh.dim()) {
    throw InvalidInput("classify_nodes: region dimension differs from mesh");
  }
  const double snap = snap_tol.value_or(0.5 * mesh.spacing());
  const int nn = mesh.node_count();
  const bool has_obstacle = !obstacle.is_empty();

  const Region outside = Region::complement(domain);
  const double h = mesh.spacing();
  std::vector<char> interior(nn, 0), layer(nn, 0), is_obstacle(nn, 0);
  for (int v = 0; v < nn; ++v) {
    const Point x = mesh.node_point(v);
    interior[v] = !mesh.on_lattice_edge(v) && contains(domain, x, 0.0);
    // interior nodes closer than h to the boundary carry the boundary data
    if (interior[v]) layer[v] = boundary_closer_than(outside, x, h * (1.0 - 1e-9));
    if (has_obstacle) is_obstacle[v] = within_distance(obstacle, x, snap);
  }

  GridMesh out = mesh;
  int obstacle_nodes = 0, obstacle_inside = 0;
  const int slots = static_cast<int>(mesh.stencil().size());
  for (int v = 0; v < nn; ++v) {
    NodeClass c;
    if (is_obstacle[v]) {
      c = NodeClass::Obstacle;
      ++obstacle_nodes;
      if (interior[v]) ++obstacle_inside;
    } else if (interior[v] && !layer[v]) {
      c = NodeClass::Free;
    } else if (layer[v]) {
      c = NodeClass::OuterBoundary;
    } else {
      c = NodeClass::External;
      for (int s = 0; s < slots; ++s) {
        const int w = mesh.neighbour(v, s);
        if (w >= 0 && interior[w] && !layer[w]) {
          c = NodeClass::OuterBoundary;
          break;
        }
      }
    }
    out.classes_[v] = c;
  }
  if (obstacle_nodes > 0 && obstacle_inside == 0) {
    throw InvalidInput("classify_nodes: obstacle lies entirely outside the domain");
  }
  out.obstacle_unresolved_ = has_obstacle && obstacle_nodes == 0;
  return out;
}

ScalarField::ScalarField(std::shared_ptr<const GridMesh> mesh, double fill)
    : mesh_(std::move(mesh)), values_(Eigen::VectorXd::Constant(mesh_->node_count(), fill)) {}

ScalarField ScalarField::sample(std::shared_ptr<const GridMesh> mesh,
                                const std::function<double(const Point&)>& f) {
  ScalarField out(mesh);
  for (int v = 0; v < mesh->node_count(); ++v) {
    if (mesh->node_class(v) != NodeClass::External) out[v] = f(mesh->node_point(v));
  }
  return out;
}

Vector p1_gradient(const GridMesh& mesh, const ScalarField& field, std::int64_t sid) {
  const int n = mesh.dim();
  int v[16];
  mesh.simplex_vertices(sid, v);
  const auto& path = mesh.simplex_path(sid);
  Vector g(n);
  for (int k = 0; k < n; ++k) g[path[k]] = (field[v[k + 1]] - field[v[k]]) / mesh.spacing();
  return g;
}

void write_field_dump(std::ostream& os, const ScalarField& field) {
  const auto& mesh = field.mesh();
  char buf[64];
  for (int v = 0; v < mesh.node_count(); ++v) {
    if (mesh.node_class(v) == NodeClass::External) continue;
    for (int k : mesh.lattice_index(v)) os << k << ' ';
    std::snprintf(buf, sizeof buf, "%.17g", field[v]);
    os << buf << '\n';
  }
}

}  // namespace plab
