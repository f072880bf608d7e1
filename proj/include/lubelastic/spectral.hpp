#pragma once

/**
 * @file spectral.hpp
 * @brief Periodic Fourier machinery on ω = (0,1)^{d-1} and Chebyshev machinery on (-1,0).
 *
 * Spectral coefficients are normalized so that f(x) = Σ_k ĉ_k exp(2πi k·x), i.e. the
 * forward transform divides by the number of nodes and ĉ_0 is the mean value.
 * 2D fields are stored with x1 as the fast index: values[i2 * n + i1].
 */

#include <array>
#include <complex>
#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace lubelastic {

using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;
/// Integer wavenumbers (k1, k2); k2 = 0 on 1D grids.
using Wavevector = std::array<int, 2>;

struct PeriodicGrid {
  int dim = 1;
  int n = 32;

  PeriodicGrid() = default;
  PeriodicGrid(int dim, int n);

  std::size_t size() const { return dim == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n; }
  double spacing() const { return 1.0 / n; }
  /// Signed wavenumber of FFT index i along one axis; the Nyquist index maps to -n/2.
  int wavenumber(int i) const { return i < n / 2 ? i : i - n; }
  bool is_nyquist(int i) const { return i == n / 2; }
  /// Wavevector of flat spectral index.
  Wavevector wavevector(std::size_t flat) const;
  /// Flat spectral index of a wavevector (|k_i| <= n/2).
  std::size_t index_of(const Wavevector& k) const;
  /// Node coordinates (x1, x2) of a flat nodal index.
  std::array<double, 2> coordinate(std::size_t flat) const;

  friend bool operator==(const PeriodicGrid&, const PeriodicGrid&) = default;
};

class PeriodicField {
 public:
  PeriodicField() = default;
  explicit PeriodicField(PeriodicGrid grid, double value = 0.0);
  PeriodicField(PeriodicGrid grid, std::vector<double> values);

  /// Samples f(x1, x2) at the grid nodes.
  static PeriodicField sample(PeriodicGrid grid, const std::function<double(double, double)>& f);

  const PeriodicGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  double min() const;
  double max() const;
  bool finite() const;

  PeriodicField& operator+=(const PeriodicField& o);
  PeriodicField& operator-=(const PeriodicField& o);
  PeriodicField& operator*=(double a);
  friend PeriodicField operator+(PeriodicField a, const PeriodicField& b) { return a += b; }
  friend PeriodicField operator-(PeriodicField a, const PeriodicField& b) { return a -= b; }
  friend PeriodicField operator*(double a, PeriodicField f) { return f *= a; }

 private:
  PeriodicGrid grid_;
  std::vector<double> values_;
};

Spectrum forward(const PeriodicField& f);
PeriodicField inverse(const PeriodicGrid& grid, const Spectrum& c);

/// ∂^order/∂x_axis^order; order in [1,6], axis 0 (x1) or 1 (x2). The Nyquist mode is
/// dropped for odd orders.
PeriodicField spectral_derivative(const PeriodicField& f, int order, int axis = 0);
/// Applies a Fourier multiplier s(K) with K = 2π k the physical wavevector.
PeriodicField apply_symbol(const PeriodicField& f,
                           const std::function<Complex(double, double)>& symbol);
PeriodicField laplacian(const PeriodicField& f);

double mean_value(const PeriodicField& f);
/// (∫_ω |f|²)^{1/2} by the nodal rule (equal to the spectral sum by Parseval).
double l2_norm(const PeriodicField& f);
double spectral_l2_norm(const PeriodicField& f);
/// ∫_ω f g.
double inner_product(const PeriodicField& f, const PeriodicField& g);

/// Nodal product with 3/2-rule zero padding.
PeriodicField dealiased_product(const PeriodicField& a, const PeriodicField& b);
/// Nodal evaluation of g(a(x)) · b(x) on the 3/2-padded grid, truncated back.
PeriodicField dealiased_product(const PeriodicField& a, const std::function<double(double)>& g,
                                const PeriodicField& b);

/// Spectral resampling to another resolution (truncation or zero padding).
PeriodicField resample(const PeriodicField& f, int n);

void write_csv(std::ostream& os, const PeriodicField& f, const char* name = "value");

/// Chebyshev–Gauss–Lobatto nodes on [-1,0] with Clenshaw–Curtis weights and the
/// associated polynomial operators (degree m-1 interpolant).
class VerticalNodes {
 public:
  explicit VerticalNodes(int m = 32);

  int size() const { return m_; }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  /// d/dy acting on nodal values.
  const Eigen::MatrixXd& differentiation() const { return diff_; }
  /// Row i integrates the interpolant over [-1, y_i].
  const Eigen::MatrixXd& cumulative_integration() const { return cumint_; }
  /// Evaluation matrix of the nodal interpolant at arbitrary points of [-1,0].
  Eigen::MatrixXd interpolation_to(std::span<const double> points) const;

  double integrate(std::span<const double> profile) const;

  friend bool operator==(const VerticalNodes& a, const VerticalNodes& b) { return a.m_ == b.m_; }

 private:
  int m_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> bary_;
  Eigen::MatrixXd diff_;
  Eigen::MatrixXd cumint_;
};

/// Gauss–Legendre rule with q points on [a,b].
struct GaussRule {
  std::vector<double> points;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int q, double a = -1.0, double b = 1.0);

/// Barycentric Lagrange interpolation from arbitrary distinct nodes.
Eigen::MatrixXd lagrange_interpolation(std::span<const double> nodes, std::span<const double> points);

/// ∫_{-1}^0 profile(y) weight(y) dy by the node quadrature; weight may be empty (≡ 1).
double vertical_integral(const VerticalNodes& vn, std::span<const double> profile,
                         const std::function<double(double)>& weight = {});

/// Fluid field on ω × (-1,0): one horizontal PeriodicField per vertical node.
/// Storage is level-major: values[j * grid.size() + h].
class ChannelField {
 public:
  ChannelField() = default;
  ChannelField(PeriodicGrid grid, std::shared_ptr<const VerticalNodes> vnodes, double value = 0.0);

  const PeriodicGrid& grid() const { return grid_; }
  const VerticalNodes& vnodes() const { return *vnodes_; }
  std::shared_ptr<const VerticalNodes> vnodes_ptr() const { return vnodes_; }
  int levels() const { return vnodes_ ? vnodes_->size() : 0; }

  double& at(int level, std::size_t h) { return values_[static_cast<std::size_t>(level) * grid_.size() + h]; }
  double at(int level, std::size_t h) const { return values_[static_cast<std::size_t>(level) * grid_.size() + h]; }
  PeriodicField level(int j) const;
  void set_level(int j, const PeriodicField& f);
  /// Vertical profile at horizontal node h.
  std::vector<double> profile(std::size_t h) const;
  void set_profile(std::size_t h, std::span<const double> p);

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  ChannelField& operator+=(const ChannelField& o);
  ChannelField& operator-=(const ChannelField& o);
  ChannelField& operator*=(double a);
  friend ChannelField operator-(ChannelField a, const ChannelField& b) { return a -= b; }
  friend ChannelField operator+(ChannelField a, const ChannelField& b) { return a += b; }
  friend ChannelField operator*(double a, ChannelField f) { return f *= a; }

  bool compatible(const ChannelField& o) const;
  double max_abs() const;

 private:
  PeriodicGrid grid_;
  std::shared_ptr<const VerticalNodes> vnodes_;
  std::vector<double> values_;
};

/// Horizontal field of ∫_{-1}^0 f(·,y) weight(y) dy.
PeriodicField vertical_integral(const ChannelField& f, const std::function<double(double)>& weight = {});
/// ∫_{-1}^{y} f(·,ξ) dξ at every node.
ChannelField cumulative_vertical_integral(const ChannelField& f);
ChannelField vertical_derivative(const ChannelField& f);
/// Horizontal spectral derivative applied level by level.
ChannelField horizontal_derivative(const ChannelField& f, int order, int axis);
/// ∫_ω ∫_{-1}^0 |f|² by the tensor quadrature.
double channel_l2_squared(const ChannelField& f);
/// Extends a horizontal field constantly in y.
ChannelField extend_vertically(const PeriodicField& f, std::shared_ptr<const VerticalNodes> vnodes);

void write_csv(std::ostream& os, const ChannelField& f, const char* name = "value");

}  // namespace lubelastic
