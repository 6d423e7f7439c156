#include "plab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

namespace plab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_dim(const Point& x, int n, const char* what) {
  if (x.size() != n) {
    throw InvalidInput(std::string(what) + ": dimension mismatch (got " +
                       std::to_string(x.size()) + ", expected " +
                       std::to_string(n) + ")");
  }
}

// Split y = x - base into the leading (n - c) coordinates and the norm of the
// trailing c coordinates.
struct SubspaceSplit {
  Vector inplane;
  double normal_norm;
  double normal_max;
};

SubspaceSplit split(const Point& y, int codim) {
  const int m = static_cast<int>(y.size()) - codim;
  SubspaceSplit s;
  s.inplane = y.head(m);
  s.normal_norm = codim > 0 ? y.tail(codim).norm() : 0.0;
  s.normal_max = codim > 0 ? y.tail(codim).cwiseAbs().maxCoeff() : 0.0;
  return s;
}

// Distance from (s, q), q >= 0, to the planar sector {rho (cos phi, sin phi) :
// 0 <= rho <= height, 0 <= phi <= theta}.
double sector_distance(double s, double q, double theta, double height) {
  const double rho = std::hypot(s, q);
  const double phi = std::atan2(q, s);
  if (phi <= theta) return std::max(0.0, rho - height);
  const double c = std::cos(theta);
  const double sn = std::sin(theta);
  const double along = s * c + q * sn;
  if (along <= 0.0) return rho;
  if (along <= height) return std::abs(q * c - s * sn);
  return std::hypot(s - height * c, q - height * sn);
}

double cone_inplane_distance(const TruncatedCone& k, const Vector& y) {
  const int m = static_cast<int>(y.size());
  const Vector a = k.axis.head(m);
  const double s = y.dot(a);
  const double q = std::sqrt(std::max(0.0, y.squaredNorm() - s * s));
  return sector_distance(s, q, k.half_angle, k.height);
}

}  // namespace

Region Region::ball(Point center, double radius) {
  if (!(radius > 0.0)) throw InvalidInput("Ball: radius must be positive");
  const int n = static_cast<int>(center.size());
  if (n < 1) throw InvalidInput("Ball: empty center");
  return Region(Ball{std::move(center), radius}, n, n);
}

Region Region::codim_disk(Point center, double radius, int codim) {
  const int n = static_cast<int>(center.size());
  if (n < 1) throw InvalidInput("CodimDisk: empty center");
  if (codim < 0 || codim > n) {
    throw InvalidInput("CodimDisk: codimension must lie in [0, n]");
  }
  if (!(radius > 0.0) && codim < n) {
    throw InvalidInput("CodimDisk: radius must be positive");
  }
  return Region(CodimDisk{std::move(center), radius, codim}, n, n - codim);
}

Region Region::point(Point at) {
  const int n = static_cast<int>(at.size());
  return codim_disk(std::move(at), 1.0, n);
}

Region Region::cone(Point vertex, Point axis, double half_angle, double height,
                    int codim) {
  const int n = static_cast<int>(vertex.size());
  require_dim(axis, n, "TruncatedCone axis");
  if (codim < 0 || codim >= n) {
    throw InvalidInput("TruncatedCone: codimension must lie in [0, n)");
  }
  if (!(half_angle > 0.0 && half_angle < std::numbers::pi / 2)) {
    throw InvalidInput("TruncatedCone: half angle must lie in (0, pi/2)");
  }
  if (!(height > 0.0)) throw InvalidInput("TruncatedCone: height must be positive");
  if (codim > 0 && axis.tail(codim).cwiseAbs().maxCoeff() > 1e-12) {
    throw InvalidInput("TruncatedCone: axis must lie in the leading subspace");
  }
  const double len = axis.norm();
  if (std::abs(len - 1.0) > 1e-9) throw InvalidInput("TruncatedCone: axis must be a unit vector");
  return Region(TruncatedCone{std::move(vertex), axis / len, half_angle, height, codim},
                n, n - codim);
}

Region Region::box(Point lo, Point hi) {
  const int n = static_cast<int>(lo.size());
  require_dim(hi, n, "Box");
  if ((hi.array() < lo.array()).any()) throw InvalidInput("Box: hi < lo");
  return Region(Box{std::move(lo), std::move(hi)}, n, n);
}

Region Region::complement(Region inner) {
  const int n = inner.dim();
  return Region(Complement{std::make_shared<const Region>(std::move(inner))}, n, n);
}

Region Region::unite(std::vector<Region> parts, int dim) {
  int declared = -1;
  for (const auto& r : parts) {
    if (r.dim() != dim) throw InvalidInput("Union: parts of different dimension");
    declared = std::max(declared, r.declared_dim());
  }
  return Region(Union{std::move(parts)}, dim, std::max(declared, 0));
}

Region Region::intersect(std::vector<Region> parts) {
  if (parts.empty()) throw InvalidInput("Intersection: no parts");
  const int n = parts.front().dim();
  int declared = n;
  for (const auto& r : parts) {
    if (r.dim() != n) throw InvalidInput("Intersection: parts of different dimension");
    declared = std::min(declared, r.declared_dim());
  }
  return Region(Intersection{std::move(parts)}, n, declared);
}

Region Region::placed(Region inner, Matrix rotation, Point offset) {
  const int n = inner.dim();
  require_dim(offset, n, "Placed offset");
  if (rotation.rows() != n || rotation.cols() != n) {
    throw InvalidInput("Placed: rotation has wrong shape");
  }
  if ((rotation.transpose() * rotation - Matrix::Identity(n, n)).norm() > 1e-9) {
    throw InvalidInput("Placed: rotation is not orthogonal");
  }
  const int declared = inner.declared_dim();
  return Region(Placed{std::make_shared<const Region>(std::move(inner)),
                       std::move(rotation), std::move(offset)},
                n, declared);
}

bool Region::is_empty() const {
  if (const auto* u = std::get_if<Union>(node_.get())) {
    return std::all_of(u->parts.begin(), u->parts.end(),
                       [](const Region& r) { return r.is_empty(); });
  }
  return false;
}

bool contains(const Region& region, const Point& x, double tol) {
  require_dim(x, region.dim(), "contains");
  return std::visit(
      Overloaded{
          [&](const Ball& b) { return (x - b.center).norm() <= b.radius; },
          [&](const CodimDisk& d) {
            const auto s = split(x - d.center, d.codim);
            if (s.normal_max > tol) return false;
            return s.inplane.squaredNorm() <= d.radius * d.radius;
          },
          [&](const TruncatedCone& k) {
            const auto s = split(x - k.vertex, k.codim);
            if (s.normal_max > tol) return false;
            const double r = s.inplane.norm();
            if (r > k.height) return false;
            const double along = s.inplane.dot(k.axis.head(s.inplane.size()));
            return along >= r * std::cos(k.half_angle);
          },
          [&](const Box& b) {
            return (x.array() >= b.lo.array()).all() && (x.array() <= b.hi.array()).all();
          },
          [&](const Complement& c) { return !contains(*c.inner, x, tol); },
          [&](const Union& u) {
            return std::any_of(u.parts.begin(), u.parts.end(),
                               [&](const Region& r) { return contains(r, x, tol); });
          },
          [&](const Intersection& i) {
            return std::all_of(i.parts.begin(), i.parts.end(),
                               [&](const Region& r) { return contains(r, x, tol); });
          },
          [&](const Placed& p) {
            return contains(*p.inner, Point(p.rotation.transpose() * (x - p.offset)), tol);
          },
      },
      region.variant());
}

double distance_to(const Region& region, const Point& x) {
  require_dim(x, region.dim(), "distance_to");
  return std::visit(
      Overloaded{
          [&](const Ball& b) { return std::max(0.0, (x - b.center).norm() - b.radius); },
          [&](const CodimDisk& d) {
            const auto s = split(x - d.center, d.codim);
            const double radial =
                d.codim == region.dim() ? 0.0 : std::max(0.0, s.inplane.norm() - d.radius);
            return std::hypot(s.normal_norm, radial);
          },
          [&](const TruncatedCone& k) {
            const auto s = split(x - k.vertex, k.codim);
            return std::hypot(s.normal_norm, cone_inplane_distance(k, s.inplane));
          },
          [&](const Box& b) {
            const Vector below = (b.lo - x).cwiseMax(0.0);
            const Vector above = (x - b.hi).cwiseMax(0.0);
            return (below + above).norm();
          },
          [&](const Complement& c) -> double {
            const auto& in = c.inner->variant();
            if (const auto* b = std::get_if<Ball>(&in)) {
              return std::max(0.0, b->radius - (x - b->center).norm());
            }
            if (const auto* b = std::get_if<Box>(&in)) {
              const Vector depth = (x - b->lo).cwiseMin(b->hi - x);
              return std::max(0.0, depth.minCoeff());
            }
            if (c.inner->codim() > 0) return 0.0;  // closure is everything
            throw InvalidInput("distance_to: unsupported complement");
          },
          [&](const Union& u) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& r : u.parts) best = std::min(best, distance_to(r, x));
            return best;
          },
          [&](const Intersection&) -> double {
            throw InvalidInput("distance_to: intersections are not supported");
          },
          [&](const Placed& p) {
            return distance_to(*p.inner, Point(p.rotation.transpose() * (x - p.offset)));
          },
      },
      region.variant());
}

bool within_distance(const Region& region, const Point& x, double radius) {
  if (const auto* i = std::get_if<Intersection>(&region.variant())) {
    return std::all_of(i->parts.begin(), i->parts.end(),
                       [&](const Region& r) { return within_distance(r, x, radius); });
  }
  if (const auto* u = std::get_if<Union>(&region.variant())) {
    return std::any_of(u->parts.begin(), u->parts.end(),
                       [&](const Region& r) { return within_distance(r, x, radius); });
  }
  if (const auto* p = std::get_if<Placed>(&region.variant())) {
    return within_distance(*p->inner, Point(p->rotation.transpose() * (x - p->offset)), radius);
  }
  return distance_to(region, x) <= radius;
}

BoundingBox bounding_box(const Region& region) {
  const int n = region.dim();
  return std::visit(
      Overloaded{
          [&](const Ball& b) {
            return BoundingBox{(b.center.array() - b.radius).matrix(),
                               (b.center.array() + b.radius).matrix()};
          },
          [&](const CodimDisk& d) {
            Point lo = d.center, hi = d.center;
            const int m = n - d.codim;
            lo.head(m).array() -= d.radius;
            hi.head(m).array() += d.radius;
            return BoundingBox{lo, hi};
          },
          [&](const TruncatedCone& k) {
            Point lo = k.vertex, hi = k.vertex;
            const int m = n - k.codim;
            lo.head(m).array() -= k.height;
            hi.head(m).array() += k.height;
            return BoundingBox{lo, hi};
          },
          [&](const Box& b) { return BoundingBox{b.lo, b.hi}; },
          [&](const Complement&) -> BoundingBox {
            throw InvalidInput("bounding_box: complement is unbounded");
          },
          [&](const Union& u) -> BoundingBox {
            if (u.parts.empty()) throw InvalidInput("bounding_box: empty region");
            BoundingBox out = bounding_box(u.parts.front());
            for (const auto& r : u.parts) {
              const auto b = bounding_box(r);
              out.lo = out.lo.cwiseMin(b.lo);
              out.hi = out.hi.cwiseMax(b.hi);
            }
            return out;
          },
          [&](const Intersection& i) -> BoundingBox {
            std::optional<BoundingBox> out;
            for (const auto& r : i.parts) {
              try {
                const auto b = bounding_box(r);
                if (!out) {
                  out = b;
                } else {
                  out->lo = out->lo.cwiseMax(b.lo);
                  out->hi = out->hi.cwiseMin(b.hi);
                }
              } catch (const InvalidInput&) {
              }
            }
            if (!out) throw InvalidInput("bounding_box: unbounded intersection");
            out->hi = out->hi.cwiseMax(out->lo);
            return *out;
          },
          [&](const Placed& p) {
            // Transform the corners of the inner box.
            const auto b = bounding_box(*p.inner);
            BoundingBox out{Point::Constant(n, std::numeric_limits<double>::infinity()),
                            Point::Constant(n, -std::numeric_limits<double>::infinity())};
            for (long mask = 0; mask < (1L << n); ++mask) {
              Point corner(n);
              for (int i = 0; i < n; ++i) corner[i] = (mask >> i) & 1 ? b.hi[i] : b.lo[i];
              const Point y = p.rotation * corner + p.offset;
              out.lo = out.lo.cwiseMin(y);
              out.hi = out.hi.cwiseMax(y);
            }
            return out;
          },
      },
      region.variant());
}

Homothety::Homothety(double lambda_, Point center_)
    : lambda(lambda_), center(std::move(center_)) {
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw InvalidInput("Homothety: lambda must lie in (0, 1]");
  }
}

Point Homothety::apply(const Point& x) const {
  require_dim(x, static_cast<int>(center.size()), "Homothety");
  return (1.0 - lambda) * center + lambda * x;
}

Point Homothety::invert(const Point& y) const {
  require_dim(y, static_cast<int>(center.size()), "Homothety");
  return (y - (1.0 - lambda) * center) / lambda;
}

Point apply_homothety(const Homothety& h, const Point& x) { return h.apply(x); }

Region apply_homothety(const Homothety& h, const Region& region) {
  const double lam = h.lambda;
  return std::visit(
      Overloaded{
          [&](const Ball& b) { return Region::ball(h.apply(b.center), lam * b.radius); },
          [&](const CodimDisk& d) {
            return Region::codim_disk(h.apply(d.center), lam * d.radius, d.codim);
          },
          [&](const TruncatedCone& k) {
            return Region::cone(h.apply(k.vertex), k.axis, k.half_angle, lam * k.height,
                                k.codim);
          },
          [&](const Box& b) { return Region::box(h.apply(b.lo), h.apply(b.hi)); },
          [&](const Complement& c) { return Region::complement(apply_homothety(h, *c.inner)); },
          [&](const Union& u) {
            std::vector<Region> parts;
            for (const auto& r : u.parts) parts.push_back(apply_homothety(h, r));
            return Region::unite(std::move(parts), region.dim());
          },
          [&](const Intersection& i) {
            std::vector<Region> parts;
            for (const auto& r : i.parts) parts.push_back(apply_homothety(h, r));
            return Region::intersect(std::move(parts));
          },
          [&](const Placed& p) {
            const Homothety scale(lam, Point::Zero(region.dim()));
            return Region::placed(apply_homothety(scale, *p.inner), p.rotation,
                                  h.apply(p.offset));
          },
      },
      region.variant());
}

double unit_sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

std::string describe(const Region& region) {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const Ball& b) { os << "Ball(r=" << b.radius << ")"; },
                 [&](const CodimDisk& d) {
                   os << "CodimDisk(r=" << d.radius << ",c=" << d.codim << ")";
                 },
                 [&](const TruncatedCone& k) {
                   os << "TruncatedCone(theta=" << k.half_angle << ",H=" << k.height
                      << ",c=" << k.codim << ")";
                 },
                 [&](const Box&) { os << "Box"; },
                 [&](const Complement& c) { os << "Complement(" << describe(*c.inner) << ")"; },
                 [&](const Union& u) {
                   os << "Union(";
                   for (const auto& r : u.parts) os << describe(r) << ";";
                   os << ")";
                 },
                 [&](const Intersection& i) {
                   os << "Intersection(";
                   for (const auto& r : i.parts) os << describe(r) << ";";
                   os << ")";
                 },
                 [&](const Placed& p) { os << "Placed(" << describe(*p.inner) << ")"; },
             },
             region.variant());
  return os.str();
}

}  // namespace plab
