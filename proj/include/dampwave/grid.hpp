#pragma once

// Cell-centered radial grid r_j = (j + 1/2) dr, j = 0..J-1, on [0, R], with
// finite-volume weights. Quadrature and the discrete Laplacian share these
// weights, so sum_j V_j u_j (L u)_j = -||grad u||^2 holds exactly.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace dampwave {

/// |S_{d-1}|, the surface area of the unit sphere in R^d.
inline double sphere_area(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

class RadialGrid {
 public:
  RadialGrid() = default;

  /// J cells of width dr in dimension d.
  RadialGrid(int d, double dr, std::size_t cells) : d_(d), dr_(dr), cells_(cells) {
    if (d < 1) throw std::invalid_argument("RadialGrid: dimension must be >= 1");
    if (!(dr > 0.0)) throw std::invalid_argument("RadialGrid: spacing must be positive");
    if (cells < 1) throw std::invalid_argument("RadialGrid: need at least one cell");
    build();
  }

  /// Smallest grid of spacing dr whose radius is at least R.
  static RadialGrid covering(int d, double dr, double R) {
    if (!(R > 0.0) || !(dr > 0.0)) throw std::invalid_argument("RadialGrid: R and dr must be positive");
    const auto cells = static_cast<std::size_t>(std::ceil(R / dr - 1e-9));
    return RadialGrid(d, dr, cells);
  }

  [[nodiscard]] int dimension() const { return d_; }
  [[nodiscard]] double spacing() const { return dr_; }
  [[nodiscard]] std::size_t size() const { return cells_; }
  [[nodiscard]] double radius() const { return dr_ * static_cast<double>(cells_); }
  [[nodiscard]] double center(std::size_t j) const { return (static_cast<double>(j) + 0.5) * dr_; }
  [[nodiscard]] double face(std::size_t j) const { return static_cast<double>(j) * dr_; }

  /// Cell volume |S| (r_{j+1/2}^d - r_{j-1/2}^d) / d.
  [[nodiscard]] std::span<const double> volumes() const { return volume_; }
  /// |S| r_{j+1/2}^{d-1}, for the outer face of cell j.
  [[nodiscard]] std::span<const double> outer_face_areas() const { return area_; }

  /// Coefficients of (L u)_j = up_j (u_{j+1} - u_j) - down_j (u_j - u_{j-1}).
  [[nodiscard]] std::span<const double> laplacian_up() const { return up_; }
  [[nodiscard]] std::span<const double> laplacian_down() const { return down_; }

  friend bool operator==(const RadialGrid& a, const RadialGrid& b) {
    return a.d_ == b.d_ && a.dr_ == b.dr_ && a.cells_ == b.cells_;
  }

 private:
  void build() {
    const double S = sphere_area(d_);
    volume_.resize(cells_);
    area_.resize(cells_);
    up_.resize(cells_);
    down_.resize(cells_);
    for (std::size_t j = 0; j < cells_; ++j) {
      const double ri = face(j);
      const double ro = face(j + 1);
      volume_[j] = S * (std::pow(ro, d_) - std::pow(ri, d_)) / d_;
      area_[j] = S * std::pow(ro, d_ - 1);
      const double inner_area = j == 0 ? 0.0 : S * std::pow(ri, d_ - 1);
      up_[j] = area_[j] / (dr_ * volume_[j]);
      down_[j] = inner_area / (dr_ * volume_[j]);
    }
  }

  int d_ = 1;
  double dr_ = 1.0;
  std::size_t cells_ = 0;
  std::vector<double> volume_, area_, up_, down_;
};

/// Radial state at time t: displacement u and velocity w = u_t at the nodes.
template <class Real = double>
struct BasicState {
  double t = 0.0;
  std::vector<Real> u;
  std::vector<Real> w;
};

using State = BasicState<double>;

/// Conservative radial Laplacian; homogeneous Neumann at the origin, ghost
/// value u_J = boundary at r = R.
template <class Real>
void radial_laplacian(const RadialGrid& g, std::span<const Real> u, std::span<Real> out, Real boundary = Real(0)) {
  const std::size_t J = g.size();
  if (u.size() != J || out.size() != J) throw std::invalid_argument("radial_laplacian: length mismatch");
  const auto up = g.laplacian_up();
  const auto dn = g.laplacian_down();
  for (std::size_t j = 0; j < J; ++j) {
    const Real right = j + 1 < J ? u[j + 1] : boundary;
    const Real left = j > 0 ? u[j - 1] : u[0];
    out[j] = Real(up[j]) * (right - u[j]) - Real(dn[j]) * (u[j] - left);
  }
}

inline std::vector<double> radial_laplacian(const RadialGrid& g, std::span<const double> u, double boundary = 0.0) {
  std::vector<double> out(u.size());
  radial_laplacian<double>(g, u, out, boundary);
  return out;
}

// --- quadrature ------------------------------------------------------------

/// int f dx by the cell-volume midpoint rule.
template <class Real>
double integrate(const RadialGrid& g, std::span<const Real> f) {
  const auto V = g.volumes();
  long double s = 0.0L;
  for (std::size_t j = 0; j < f.size(); ++j) s += static_cast<long double>(V[j]) * f[j];
  return static_cast<double>(s);
}

template <class Real>
double l2_norm_sq(const RadialGrid& g, std::span<const Real> u) {
  const auto V = g.volumes();
  long double s = 0.0L;
  for (std::size_t j = 0; j < u.size(); ++j) s += static_cast<long double>(V[j]) * u[j] * u[j];
  return static_cast<double>(s);
}

/// ||grad u||^2 from face differences, ghost u_J = boundary.
template <class Real>
double grad_norm_sq(const RadialGrid& g, std::span<const Real> u, double boundary = 0.0) {
  const auto A = g.outer_face_areas();
  const double dr = g.spacing();
  const std::size_t J = u.size();
  long double s = 0.0L;
  for (std::size_t j = 0; j < J; ++j) {
    const long double right = j + 1 < J ? static_cast<long double>(u[j + 1]) : boundary;
    const long double du = (right - u[j]) / dr;
    s += static_cast<long double>(A[j]) * dr * du * du;
  }
  return static_cast<double>(s);
}

/// ||u||_{L^q}.
template <class Real>
double lq_norm(const RadialGrid& g, std::span<const Real> u, double q) {
  const auto V = g.volumes();
  long double s = 0.0L;
  for (std::size_t j = 0; j < u.size(); ++j)
    s += static_cast<long double>(V[j]) * std::pow(std::abs(static_cast<long double>(u[j])), q);
  return static_cast<double>(std::pow(s, 1.0L / q));
}

template <class Real>
double sup_norm(std::span<const Real> u) {
  double m = 0.0;
  for (const auto& x : u) {
    const double a = std::abs(static_cast<double>(x));
    if (std::isnan(a)) return a;
    if (a > m) m = a;
  }
  return m;
}

}  // namespace dampwave
