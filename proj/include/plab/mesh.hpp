#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "plab/geometry.hpp"

namespace plab {

enum class NodeClass : std::uint8_t { Free, OuterBoundary, Obstacle, External };

const char* to_string(NodeClass c);

/// Uniform tensor grid over a box, subdivided into Kuhn simplices: every cell
/// splits into n! simplices, one per permutation of the axes, each running
/// from the cell corner along a monotone lattice path.
class GridMesh {
 public:
  /// Lattice over [lo, hi] with spacing h; every edge must be a multiple of h.
  GridMesh(Point lo, Point hi, double h);

  int dim() const { return dim_; }
  double spacing() const { return h_; }
  const Point& lo() const { return lo_; }
  const Point& hi() const { return hi_; }
  const std::vector<int>& nodes_per_axis() const { return nodes_per_axis_; }

  int node_count() const { return node_count_; }
  int cell_count() const { return cell_count_; }
  int simplices_per_cell() const { return static_cast<int>(perms_.size()); }
  std::int64_t simplex_count() const {
    return static_cast<std::int64_t>(cell_count_) * simplices_per_cell();
  }
  /// h^n / n!, shared by every simplex.
  double simplex_volume() const { return simplex_volume_; }

  int stride(int axis) const { return strides_[axis]; }
  std::vector<int> lattice_index(int node) const;
  int node_id(const std::vector<int>& index) const;
  Point node_point(int node) const;
  bool on_lattice_edge(int node) const;

  /// Corner node of a cell (cells are indexed lexicographically).
  int cell_corner(int cell) const;
  /// Vertex node ids of simplex `sid`, ordered along its lattice path.
  void simplex_vertices(std::int64_t sid, int* out) const;
  Point simplex_barycenter(std::int64_t sid) const;
  /// Axis permutation of a simplex's lattice path.
  const std::vector<int>& simplex_path(std::int64_t sid) const {
    return perms_[sid % simplices_per_cell()];
  }

  /// Linear offsets of all Kuhn neighbours of a node, including 0 (self),
  /// sorted increasingly. A neighbour exists only if it lies on the lattice.
  const std::vector<int>& stencil() const { return stencil_; }
  const std::vector<std::vector<int>>& stencil_vectors() const { return stencil_vectors_; }
  /// Stencil slot holding v_a - v_b for local vertices a, b of permutation k.
  int pair_slot(int perm, int a, int b) const {
    return pair_slots_[(perm * (dim_ + 1) + a) * (dim_ + 1) + b];
  }
  /// Node reached from `node` by stencil slot `slot`, or -1 off the lattice.
  int neighbour(int node, int slot) const;

  NodeClass node_class(int node) const { return classes_[node]; }
  const std::vector<NodeClass>& classes() const { return classes_; }
  int count(NodeClass c) const;
  /// Set when an obstacle was supplied but no node snapped to it.
  bool obstacle_unresolved() const { return obstacle_unresolved_; }

  /// True when every vertex of the simplex is a non-External node.
  bool simplex_active(std::int64_t sid) const;

 private:
  friend GridMesh classify_nodes(const GridMesh&, const Region&, const Region&,
                                 std::optional<double>);

  int dim_;
  double h_;
  Point lo_, hi_;
  std::vector<int> nodes_per_axis_;
  std::vector<int> strides_;
  std::vector<int> cell_strides_;
  int node_count_ = 0;
  int cell_count_ = 0;
  double simplex_volume_ = 0.0;
  std::vector<std::vector<int>> perms_;
  std::vector<std::vector<int>> perm_offsets_;
  std::vector<int> stencil_;
  std::vector<std::vector<int>> stencil_vectors_;
  std::vector<int> pair_slots_;
  std::vector<NodeClass> classes_;
  bool obstacle_unresolved_ = false;
};

/// Lattice over the box, with every node initially Free.
GridMesh build_mesh(const BoundingBox& box, double h);

/// Lattice of spacing h containing `box`, aligned so that `anchor` is a node,
/// padded by `pad_cells` cells on each side.
GridMesh build_aligned_mesh(const BoundingBox& box, double h, const Point& anchor,
                            int pad_cells = 2);

/// Partition nodes into Obstacle (within snapTol of the obstacle, default h/2),
/// OuterBoundary (interior but closer than h to the domain boundary, or
/// exterior and sharing a simplex with a Free node), Free (the remaining
/// interior nodes) and External. A node is interior when it lies in the closed
/// domain and off the lattice edge.
GridMesh classify_nodes(const GridMesh& mesh, const Region& domain, const Region& obstacle,
                        std::optional<double> snap_tol = std::nullopt);

/// Nodal values on a mesh; External entries are carried but never read.
class ScalarField {
 public:
  explicit ScalarField(std::shared_ptr<const GridMesh> mesh, double fill = 0.0);
  static ScalarField sample(std::shared_ptr<const GridMesh> mesh,
                            const std::function<double(const Point&)>& f);

  const GridMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const GridMesh>& mesh_ptr() const { return mesh_; }
  double operator[](int node) const { return values_[node]; }
  double& operator[](int node) { return values_[node]; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }

 private:
  std::shared_ptr<const GridMesh> mesh_;
  Eigen::VectorXd values_;
};

/// Constant gradient of the affine interpolant on a simplex.
Vector p1_gradient(const GridMesh& mesh, const ScalarField& field, std::int64_t sid);

/// One line per non-External node, "i1 ... in value", lexicographic order,
/// values printed with round-trip precision.
void write_field_dump(std::ostream& os, const ScalarField& field);

}  // namespace plab
