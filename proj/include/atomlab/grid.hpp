#pragma once

// Uniform periodic grids on the torus [0, period)^n, sampled fields, dyadic
// cube geometry and the basic numerical kernels built on them (quadrature,
// differentiation, off-grid evaluation).

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace atomlab {

using cplx = std::complex<double>;
using Point = std::array<double, 2>;       // second coordinate unused for n = 1
using MultiIndex = std::array<int, 2>;

inline constexpr int kMaxDepth1D = 14;
inline constexpr int kMaxDepth2D = 10;
inline constexpr int kMinDepth = 4;
inline constexpr double kMaxOverlap = 4.0;

class Grid {
 public:
  /// Throws BoundsError unless dim in {1,2} and 4 <= depth <= 14 (1D) / 10 (2D).
  Grid(int dim, int depth, double period = 1.0);

  int dim() const noexcept { return dim_; }
  int depth() const noexcept { return depth_; }
  double period() const noexcept { return period_; }
  std::size_t per_axis() const noexcept { return std::size_t{1} << depth_; }
  std::size_t size() const noexcept { return dim_ == 1 ? per_axis() : per_axis() * per_axis(); }
  double spacing() const noexcept { return period_ / static_cast<double>(per_axis()); }
  /// h^n, the quadrature weight of one node.
  double cell_volume() const noexcept;

  std::array<std::size_t, 2> axis_index(std::size_t flat) const noexcept;
  std::size_t flat(std::size_t i0, std::size_t i1 = 0) const noexcept;
  /// Flat index of the node (i0 + s0, i1 + s1) with periodic wrap.
  std::size_t shifted(std::size_t flat, long s0, long s1) const noexcept;
  Point node(std::size_t flat) const noexcept;

  bool operator==(const Grid&) const = default;

 private:
  int dim_;
  int depth_;
  double period_;
};

Grid make_grid(int n, int J, double period = 1.0);

/// Signed torus offset of d in [-period/2, period/2).
double wrap_offset(double d, double period);
/// Reduction of x into [0, period).
double wrap_coordinate(double x, double period);
/// Euclidean torus distance between two points.
double torus_distance(const Point& a, const Point& b, const Grid& grid);

/// Axis-parallel box on the torus given by its center and half side lengths.
/// Membership is half-open: -half_width <= wrap(x - center) < half_width.
struct TorusBox {
  Point center{0.0, 0.0};
  Point half_width{0.0, 0.0};

  bool contains(const Point& x, const Grid& grid) const;
};

struct SampledField {
  Grid grid;
  std::vector<cplx> values;
  std::optional<TorusBox> support_hint;

  explicit SampledField(Grid g);
  SampledField(Grid g, std::vector<cplx> v, std::optional<TorusBox> hint = std::nullopt);

  static SampledField from_function(const Grid& g, const std::function<cplx(const Point&)>& fn);

  std::size_t size() const noexcept { return values.size(); }
  double max_abs() const;
  /// True when every value outside support_hint is <= rel_tol * max|values|.
  bool respects_support_hint(double rel_tol = 1e-14) const;
};

SampledField operator+(const SampledField& a, const SampledField& b);
SampledField operator-(const SampledField& a, const SampledField& b);
SampledField operator*(cplx c, const SampledField& a);
SampledField pointwise_product(const SampledField& a, const SampledField& b);

/// Dyadic cube Q_{level,index} with enlargement factor `overlap`; index is
/// reduced modulo 2^level (torus convention).
struct DyadicCube {
  int level = 0;
  std::array<long, 2> index{0, 0};
  double overlap = 1.0;

  auto operator<=>(const DyadicCube&) const = default;
};

/// Validates overlap in [1, 4] and reduces the index.
DyadicCube make_cube(int level, std::array<long, 2> index, double overlap, int dim);

struct CubeGeometry {
  Point center;
  double side;                           // 2^-level * period
  TorusBox support_box;                  // overlap * Q, torus wrapped
  std::array<long, 2> first_node{0, 0};  // may be negative (wraps)
  std::array<std::size_t, 2> node_count{0, 1};
};

CubeGeometry cube_geometry(const DyadicCube& cube, const Grid& grid);

/// Lattice index of the half-open level-`level` cube containing x.
std::array<long, 2> containing_cube(const Point& x, int level, const Grid& grid);

cplx quadrature(const SampledField& f);

enum class DiffMethod { spectral, central };
inline constexpr int kMaxSpectralOrder = 6;
inline constexpr int kMaxCentralOrder = 4;

SampledField differentiate(const SampledField& f, MultiIndex alpha,
                           DiffMethod method = DiffMethod::spectral);

/// All multi-indices of total order `order` for dimension n (1D: {order}).
std::vector<MultiIndex> multi_indices(int n, int order);

enum class InterpMethod { trig, cubic };

/// Trigonometric interpolant; Nyquist modes are symmetrized so nodal values
/// are reproduced and real data stays real.
class TrigInterpolant {
 public:
  explicit TrigInterpolant(const SampledField& f);
  cplx operator()(const Point& x) const;
  const Grid& grid() const noexcept { return grid_; }

 private:
  void axis_factors(double x, std::vector<cplx>& out) const;
  Grid grid_;
  std::vector<cplx> coeffs_;
};

/// Periodic cubic spline (tensor product in 2D).
class CubicInterpolant {
 public:
  explicit CubicInterpolant(const SampledField& f);
  cplx operator()(const Point& x) const;

 private:
  Grid grid_;
  std::vector<cplx> values_;
  std::vector<cplx> second_;  // 1D: M_i; 2D: row-wise second derivatives along axis 1
};

std::vector<cplx> evaluate_offgrid(const SampledField& f, std::span<const Point> points,
                                   InterpMethod method = InterpMethod::trig);

}  // namespace atomlab
