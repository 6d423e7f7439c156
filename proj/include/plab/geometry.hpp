#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace plab {

/// Thrown for inputs that violate an operation's preconditions.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Point = Eigen::VectorXd;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class Region;

struct Ball {
  Point center;
  double radius;
};

/// Codimension-c disk D(center, radius, c): the trailing c coordinates of
/// x - center vanish and the leading n - c have squared sum <= radius^2.
/// c == n degenerates to the single point {center}.
struct CodimDisk {
  Point center;
  double radius;
  int codim;
};

/// Solid cone {y in the leading (n - c)-subspace through the vertex :
/// y.axis >= |y| cos(halfAngle), |y| <= height}, with y = x - vertex.
struct TruncatedCone {
  Point vertex;
  Point axis;
  double half_angle;
  double height;
  int codim;
};

struct Box {
  Point lo;
  Point hi;
};

struct Complement {
  std::shared_ptr<const Region> inner;
};

struct Union {
  std::vector<Region> parts;
};

struct Intersection {
  std::vector<Region> parts;
};

/// Rigid placement of a region: x is in Placed iff rotation^T (x - offset)
/// is in the inner region.
struct Placed {
  std::shared_ptr<const Region> inner;
  Matrix rotation;
  Point offset;
};

/// Immutable declarative region of R^n with exact membership and distance
/// queries.
class Region {
 public:
  using Variant = std::variant<Ball, CodimDisk, TruncatedCone, Box, Complement,
                               Union, Intersection, Placed>;

  static Region ball(Point center, double radius);
  static Region codim_disk(Point center, double radius, int codim);
  static Region point(Point at);
  static Region cone(Point vertex, Point axis, double half_angle, double height,
                     int codim);
  static Region box(Point lo, Point hi);
  static Region complement(Region inner);
  static Region unite(std::vector<Region> parts, int dim);
  static Region intersect(std::vector<Region> parts);
  static Region placed(Region inner, Matrix rotation, Point offset);
  static Region empty(int dim) { return unite({}, dim); }

  int dim() const { return dim_; }
  /// Manifold dimension of the set (n - codim for disks and cones).
  int declared_dim() const { return declared_dim_; }
  int codim() const { return dim_ - declared_dim_; }
  bool is_empty() const;
  const Variant& variant() const { return *node_; }

 private:
  Region(Variant v, int dim, int declared_dim)
      : node_(std::make_shared<const Variant>(std::move(v))),
        dim_(dim),
        declared_dim_(declared_dim) {}

  std::shared_ptr<const Variant> node_;
  int dim_ = 0;
  int declared_dim_ = 0;
};

/// Closed-set membership. tol slackens the vanishing-coordinate tests of
/// measure-zero sets (codim > 0); full-dimensional tests are exact.
bool contains(const Region& region, const Point& x, double tol = 0.0);

/// Euclidean distance to the closed region. Supports primitives, unions,
/// placements and complements of bounded full-dimensional primitives.
double distance_to(const Region& region, const Point& x);

/// distance_to(region, x) <= radius, extended conservatively to
/// intersections (every part within radius).
bool within_distance(const Region& region, const Point& x, double radius);

struct BoundingBox {
  Point lo;
  Point hi;
};

/// Axis-aligned box containing the region; throws for unbounded regions.
BoundingBox bounding_box(const Region& region);

/// Contraction x -> (1 - lambda) center + lambda x.
struct Homothety {
  double lambda;
  Point center;

  Homothety(double lambda, Point center);
  Point apply(const Point& x) const;
  Point invert(const Point& y) const;
};

Point apply_homothety(const Homothety& h, const Point& x);

/// Image of a region under a homothety (primitives and boolean combinations).
Region apply_homothety(const Homothety& h, const Region& region);

/// Surface area of the unit (n-1)-sphere in R^n.
double unit_sphere_area(int n);

std::string describe(const Region& region);

}  // namespace plab
