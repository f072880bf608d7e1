#include "lubelastic/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "lubelastic/errors.hpp"

namespace lubelastic {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// The FFTW planner is not reentrant; execution of an existing plan on new arrays is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int dim, int n, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(dim, n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const std::size_t total = dim == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p = dim == 1 ? fftw_plan_dft_1d(n, buf, buf, sign, flags)
                           : fftw_plan_dft_2d(n, n, buf, buf, sign, flags);
    fftw_free(buf);
    if (!p) throw Error("FFTW planning failed");
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

void execute(int dim, int n, int sign, std::vector<Complex>& data) {
  fftw_plan p = PlanCache::instance().get(dim, n, sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(p, ptr, ptr);
}

void require_same_grid(const PeriodicGrid& a, const PeriodicGrid& b) {
  if (!(a == b)) throw GridMismatch("periodic fields live on different grids");
}

// Maps a signed wavenumber on an n-grid to its FFT index.
std::size_t axis_index(int k, int n) { return static_cast<std::size_t>(k < 0 ? k + n : k); }

// Spectral interpolation between resolutions. The Nyquist mode of the coarser grid is
// split evenly between ±n/2 when padding and collects both when truncating.
Spectrum remap_spectrum(const PeriodicGrid& from, const Spectrum& c, int n_to) {
  const int n = from.n;
  PeriodicGrid to;
  to.dim = from.dim;
  to.n = n_to;
  Spectrum out(to.size(), Complex{});
  auto targets = [&](int k, std::vector<std::pair<int, double>>& t) {
    t.clear();
    if (n_to > n) {
      if (k == -n / 2) {
        t.emplace_back(-n / 2, 0.5);
        t.emplace_back(n / 2, 0.5);
      } else {
        t.emplace_back(k, 1.0);
      }
    } else {
      if (std::abs(k) < n_to / 2) {
        t.emplace_back(k, 1.0);
      } else if (std::abs(k) == n_to / 2) {
        t.emplace_back(-n_to / 2, 1.0);
      }
    }
  };
  std::vector<std::pair<int, double>> t1;
  std::vector<std::pair<int, double>> t2;
  for (std::size_t idx = 0; idx < c.size(); ++idx) {
    if (c[idx] == Complex{}) continue;
    const Wavevector k = from.wavevector(idx);
    targets(k[0], t1);
    if (from.dim == 1) {
      for (const auto& [a, wa] : t1) out[axis_index(a, n_to)] += wa * c[idx];
    } else {
      targets(k[1], t2);
      for (const auto& [a, wa] : t1) {
        for (const auto& [b, wb] : t2) {
          out[axis_index(b, n_to) * n_to + axis_index(a, n_to)] += wa * wb * c[idx];
        }
      }
    }
  }
  return out;
}

PeriodicGrid with_n(PeriodicGrid g, int n) {
  g.n = n;
  return g;
}

// Padded grid of the 3/2 rule; FFTW handles the non-power-of-two size.
int padded_size(int n) { return 3 * n / 2; }

std::vector<double> padded_values(const PeriodicField& f) {
  const auto& g = f.grid();
  const int np = padded_size(g.n);
  Spectrum c = remap_spectrum(g, forward(f), np);
  execute(g.dim, np, FFTW_BACKWARD, c);
  std::vector<double> v(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) v[i] = c[i].real();
  return v;
}

PeriodicField truncate_padded(const PeriodicGrid& g, const std::vector<double>& v) {
  const int np = padded_size(g.n);
  Spectrum c(v.begin(), v.end());
  execute(g.dim, np, FFTW_FORWARD, c);
  const double scale = 1.0 / static_cast<double>(c.size());
  for (auto& z : c) z *= scale;
  return inverse(g, remap_spectrum(with_n(g, np), c, g.n));
}

}  // namespace

PeriodicGrid::PeriodicGrid(int dim_, int n_) : dim(dim_), n(n_) {
  if (dim != 1 && dim != 2) throw InvalidParameter("grid dimension must be 1 or 2");
  if (n < 8 || (n & (n - 1)) != 0) throw InvalidParameter("grid size must be a power of two >= 8");
}

Wavevector PeriodicGrid::wavevector(std::size_t flat) const {
  const int i1 = static_cast<int>(flat % static_cast<std::size_t>(n));
  const int i2 = dim == 1 ? 0 : static_cast<int>(flat / static_cast<std::size_t>(n));
  return {wavenumber(i1), dim == 1 ? 0 : wavenumber(i2)};
}

std::size_t PeriodicGrid::index_of(const Wavevector& k) const {
  if (std::abs(k[0]) > n / 2 || std::abs(k[1]) > n / 2 || (dim == 1 && k[1] != 0)) {
    throw GridMismatch("wavevector outside the grid lattice");
  }
  auto wrap = [this](int kk) { return kk == n / 2 ? static_cast<std::size_t>(n / 2) : axis_index(kk, n); };
  return dim == 1 ? wrap(k[0]) : wrap(k[1]) * static_cast<std::size_t>(n) + wrap(k[0]);
}

std::array<double, 2> PeriodicGrid::coordinate(std::size_t flat) const {
  const auto un = static_cast<std::size_t>(n);
  const double h = spacing();
  if (dim == 1) return {static_cast<double>(flat) * h, 0.0};
  return {static_cast<double>(flat % un) * h, static_cast<double>(flat / un) * h};
}

PeriodicField::PeriodicField(PeriodicGrid grid, double value) : grid_(grid), values_(grid.size(), value) {}

PeriodicField::PeriodicField(PeriodicGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw GridMismatch("value count does not match grid");
}

PeriodicField PeriodicField::sample(PeriodicGrid grid, const std::function<double(double, double)>& f) {
  PeriodicField out(grid);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto x = grid.coordinate(i);
    out.values_[i] = f(x[0], x[1]);
  }
  return out;
}

double PeriodicField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double PeriodicField::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool PeriodicField::finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

PeriodicField& PeriodicField::operator+=(const PeriodicField& o) {
  require_same_grid(grid_, o.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

PeriodicField& PeriodicField::operator-=(const PeriodicField& o) {
  require_same_grid(grid_, o.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

PeriodicField& PeriodicField::operator*=(double a) {
  for (auto& v : values_) v *= a;
  return *this;
}

Spectrum forward(const PeriodicField& f) {
  const auto& g = f.grid();
  Spectrum c(f.values().begin(), f.values().end());
  execute(g.dim, g.n, FFTW_FORWARD, c);
  const double scale = 1.0 / static_cast<double>(c.size());
  for (auto& z : c) z *= scale;
  return c;
}

PeriodicField inverse(const PeriodicGrid& grid, const Spectrum& c) {
  if (c.size() != grid.size()) throw GridMismatch("spectrum size does not match grid");
  Spectrum work = c;
  execute(grid.dim, grid.n, FFTW_BACKWARD, work);
  std::vector<double> v(work.size());
  for (std::size_t i = 0; i < work.size(); ++i) v[i] = work[i].real();
  return PeriodicField(grid, std::move(v));
}

PeriodicField spectral_derivative(const PeriodicField& f, int order, int axis) {
  if (order < 1 || order > 6) throw InvalidParameter("derivative order must lie in [1,6]");
  const auto& g = f.grid();
  if (axis < 0 || axis >= g.dim) throw InvalidParameter("derivative axis out of range");
  Spectrum c = forward(f);
  for (std::size_t idx = 0; idx < c.size(); ++idx) {
    const int k = g.wavevector(idx)[axis];
    if (order % 2 == 1 && k == -g.n / 2) {
      c[idx] = 0.0;
      continue;
    }
    c[idx] *= std::pow(Complex(0.0, kTwoPi * k), order);
  }
  return inverse(g, c);
}

PeriodicField apply_symbol(const PeriodicField& f, const std::function<Complex(double, double)>& symbol) {
  const auto& g = f.grid();
  Spectrum c = forward(f);
  for (std::size_t idx = 0; idx < c.size(); ++idx) {
    const Wavevector k = g.wavevector(idx);
    c[idx] *= symbol(kTwoPi * k[0], kTwoPi * k[1]);
  }
  return inverse(g, c);
}

PeriodicField laplacian(const PeriodicField& f) {
  return apply_symbol(f, [](double K1, double K2) { return Complex(-(K1 * K1 + K2 * K2), 0.0); });
}

double mean_value(const PeriodicField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s / static_cast<double>(f.size());
}

double l2_norm(const PeriodicField& f) { return std::sqrt(inner_product(f, f)); }

double spectral_l2_norm(const PeriodicField& f) {
  double s = 0.0;
  for (const auto& z : forward(f)) s += std::norm(z);
  return std::sqrt(s);
}

double inner_product(const PeriodicField& f, const PeriodicField& g) {
  require_same_grid(f.grid(), g.grid());
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
  return s / static_cast<double>(f.size());
}

PeriodicField dealiased_product(const PeriodicField& a, const PeriodicField& b) {
  require_same_grid(a.grid(), b.grid());
  auto va = padded_values(a);
  const auto vb = padded_values(b);
  for (std::size_t i = 0; i < va.size(); ++i) va[i] *= vb[i];
  return truncate_padded(a.grid(), va);
}

PeriodicField dealiased_product(const PeriodicField& a, const std::function<double(double)>& g,
                                const PeriodicField& b) {
  require_same_grid(a.grid(), b.grid());
  auto va = padded_values(a);
  const auto vb = padded_values(b);
  for (std::size_t i = 0; i < va.size(); ++i) va[i] = g(va[i]) * vb[i];
  return truncate_padded(a.grid(), va);
}

PeriodicField resample(const PeriodicField& f, int n) {
  const PeriodicGrid target(f.grid().dim, n);
  if (n == f.grid().n) return f;
  return inverse(target, remap_spectrum(f.grid(), forward(f), n));
}

void write_csv(std::ostream& os, const PeriodicField& f, const char* name) {
  const auto& g = f.grid();
  os << std::setprecision(17);
  os << (g.dim == 1 ? "x1," : "x1,x2,") << name << '\n';
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto x = g.coordinate(i);
    os << x[0] << ',';
    if (g.dim == 2) os << x[1] << ',';
    os << f[i] << '\n';
  }
}

GaussRule gauss_legendre(int q, double a, double b) {
  if (q < 1) throw InvalidParameter("Gauss rule needs at least one point");
  // returns (P_q(x), P_q'(x))
  auto legendre = [q](double x) {
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= q; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    return std::pair{p1, q * (x * p1 - p0) / (x * x - 1.0)};
  };
  GaussRule r;
  r.points.resize(q);
  r.weights.resize(q);
  for (int i = 0; i < q; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.points[q - 1 - i] = 0.5 * (b - a) * x + 0.5 * (b + a);
    r.weights[q - 1 - i] = 0.5 * (b - a) * w;
  }
  return r;
}

namespace {

Eigen::MatrixXd barycentric_matrix(std::span<const double> nodes, std::span<const double> bary,
                                   std::span<const double> points) {
  const auto m = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(points.size()), m);
  for (std::size_t p = 0; p < points.size(); ++p) {
    const double x = points[p];
    bool hit = false;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (x == nodes[j]) {
        L(static_cast<Eigen::Index>(p), j) = 1.0;
        hit = true;
        break;
      }
    }
    if (hit) continue;
    double denom = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double t = bary[j] / (x - nodes[j]);
      L(static_cast<Eigen::Index>(p), j) = t;
      denom += t;
    }
    L.row(static_cast<Eigen::Index>(p)) /= denom;
  }
  return L;
}

}  // namespace

Eigen::MatrixXd lagrange_interpolation(std::span<const double> nodes, std::span<const double> points) {
  std::vector<double> bary(nodes.size(), 1.0);
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (k != j) bary[j] /= (nodes[j] - nodes[k]);
    }
  }
  return barycentric_matrix(nodes, bary, points);
}

VerticalNodes::VerticalNodes(int m) : m_(m) {
  if (m < 3) throw InvalidParameter("vertical node count must be at least 3");
  const int N = m - 1;
  nodes_.resize(m);
  weights_.assign(m, 0.0);
  bary_.resize(m);
  for (int j = 0; j < m; ++j) {
    // x_j = -cos(πj/N) in a form symmetric about the midpoint
    const double x = std::sin(std::numbers::pi * (2.0 * j - N) / (2.0 * N));
    nodes_[j] = 0.5 * (x - 1.0);
    bary_[j] = (j % 2 == 0 ? 1.0 : -1.0) * ((j == 0 || j == N) ? 0.5 : 1.0);
  }
  nodes_.front() = -1.0;
  nodes_.back() = 0.0;
  for (int j = 0; j < m; ++j) {
    const double theta = std::numbers::pi * j / N;
    double s = 1.0;
    for (int k = 1; k <= N / 2; ++k) {
      const double b = (2 * k == N) ? 1.0 : 2.0;
      s -= b / (4.0 * k * k - 1.0) * std::cos(2.0 * k * theta);
    }
    const double c = (j == 0 || j == N) ? 1.0 : 2.0;
    weights_[j] = 0.5 * c * s / N;
  }

  diff_ = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    double row = 0.0;
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      diff_(i, j) = (bary_[j] / bary_[i]) / (nodes_[i] - nodes_[j]);
      row += diff_(i, j);
    }
    diff_(i, i) = -row;
  }

  cumint_ = Eigen::MatrixXd::Zero(m, m);
  for (int i = 1; i < m; ++i) {
    const GaussRule g = gauss_legendre(m, -1.0, nodes_[i]);
    const Eigen::MatrixXd L = barycentric_matrix(nodes_, bary_, g.points);
    const Eigen::Map<const Eigen::VectorXd> w(g.weights.data(), m);
    cumint_.row(i) = w.transpose() * L;
  }
}

Eigen::MatrixXd VerticalNodes::interpolation_to(std::span<const double> points) const {
  return barycentric_matrix(nodes_, bary_, points);
}

double VerticalNodes::integrate(std::span<const double> profile) const {
  if (profile.size() != static_cast<std::size_t>(m_)) throw GridMismatch("profile length does not match node count");
  double s = 0.0;
  for (int j = 0; j < m_; ++j) s += weights_[j] * profile[j];
  return s;
}

double vertical_integral(const VerticalNodes& vn, std::span<const double> profile,
                         const std::function<double(double)>& weight) {
  if (!weight) return vn.integrate(profile);
  if (profile.size() != static_cast<std::size_t>(vn.size())) {
    throw GridMismatch("profile length does not match node count");
  }
  double s = 0.0;
  for (int j = 0; j < vn.size(); ++j) s += vn.weights()[j] * profile[j] * weight(vn.nodes()[j]);
  return s;
}

ChannelField::ChannelField(PeriodicGrid grid, std::shared_ptr<const VerticalNodes> vnodes, double value)
    : grid_(grid), vnodes_(std::move(vnodes)) {
  if (!vnodes_) throw InvalidParameter("channel field needs vertical nodes");
  values_.assign(grid_.size() * static_cast<std::size_t>(vnodes_->size()), value);
}

PeriodicField ChannelField::level(int j) const {
  const auto nh = grid_.size();
  const auto begin = values_.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(j) * nh);
  return PeriodicField(grid_, std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(nh)));
}

void ChannelField::set_level(int j, const PeriodicField& f) {
  require_same_grid(grid_, f.grid());
  std::copy(f.values().begin(), f.values().end(),
            values_.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(j) * grid_.size()));
}

std::vector<double> ChannelField::profile(std::size_t h) const {
  std::vector<double> p(static_cast<std::size_t>(levels()));
  for (int j = 0; j < levels(); ++j) p[j] = at(j, h);
  return p;
}

void ChannelField::set_profile(std::size_t h, std::span<const double> p) {
  if (p.size() != static_cast<std::size_t>(levels())) throw GridMismatch("profile length does not match node count");
  for (int j = 0; j < levels(); ++j) at(j, h) = p[j];
}

bool ChannelField::compatible(const ChannelField& o) const {
  return grid_ == o.grid_ && vnodes_ && o.vnodes_ && *vnodes_ == *o.vnodes_;
}

ChannelField& ChannelField::operator+=(const ChannelField& o) {
  if (!compatible(o)) throw GridMismatch("channel fields live on different grids");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

ChannelField& ChannelField::operator-=(const ChannelField& o) {
  if (!compatible(o)) throw GridMismatch("channel fields live on different grids");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

ChannelField& ChannelField::operator*=(double a) {
  for (auto& v : values_) v *= a;
  return *this;
}

double ChannelField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

namespace {

using ColMajor = Eigen::Map<const Eigen::MatrixXd>;
using ColMajorMut = Eigen::Map<Eigen::MatrixXd>;

}  // namespace

PeriodicField vertical_integral(const ChannelField& f, const std::function<double(double)>& weight) {
  const auto& vn = f.vnodes();
  PeriodicField out(f.grid());
  for (int j = 0; j < f.levels(); ++j) {
    const double w = vn.weights()[j] * (weight ? weight(vn.nodes()[j]) : 1.0);
    for (std::size_t h = 0; h < out.size(); ++h) out[h] += w * f.at(j, h);
  }
  return out;
}

ChannelField cumulative_vertical_integral(const ChannelField& f) {
  ChannelField out(f.grid(), f.vnodes_ptr());
  const auto nh = static_cast<Eigen::Index>(f.grid().size());
  const ColMajor in(f.values().data(), nh, f.levels());
  ColMajorMut res(out.values().data(), nh, f.levels());
  res.noalias() = in * f.vnodes().cumulative_integration().transpose();
  return out;
}

ChannelField vertical_derivative(const ChannelField& f) {
  ChannelField out(f.grid(), f.vnodes_ptr());
  const auto nh = static_cast<Eigen::Index>(f.grid().size());
  const ColMajor in(f.values().data(), nh, f.levels());
  ColMajorMut res(out.values().data(), nh, f.levels());
  res.noalias() = in * f.vnodes().differentiation().transpose();
  return out;
}

ChannelField horizontal_derivative(const ChannelField& f, int order, int axis) {
  ChannelField out(f.grid(), f.vnodes_ptr());
  for (int j = 0; j < f.levels(); ++j) out.set_level(j, spectral_derivative(f.level(j), order, axis));
  return out;
}

double channel_l2_squared(const ChannelField& f) {
  const auto& w = f.vnodes().weights();
  const auto nh = f.grid().size();
  double s = 0.0;
  for (int j = 0; j < f.levels(); ++j) {
    double lvl = 0.0;
    for (std::size_t h = 0; h < nh; ++h) lvl += f.at(j, h) * f.at(j, h);
    s += w[j] * lvl;
  }
  return s / static_cast<double>(nh);
}

ChannelField extend_vertically(const PeriodicField& f, std::shared_ptr<const VerticalNodes> vnodes) {
  ChannelField out(f.grid(), std::move(vnodes));
  for (int j = 0; j < out.levels(); ++j) out.set_level(j, f);
  return out;
}

void write_csv(std::ostream& os, const ChannelField& f, const char* name) {
  const auto& g = f.grid();
  os << std::setprecision(17);
  os << (g.dim == 1 ? "x1,y," : "x1,x2,y,") << name << '\n';
  for (int j = 0; j < f.levels(); ++j) {
    for (std::size_t h = 0; h < g.size(); ++h) {
      const auto x = g.coordinate(h);
      os << x[0] << ',';
      if (g.dim == 2) os << x[1] << ',';
      os << f.vnodes().nodes()[j] << ',' << f.at(j, h) << '\n';
    }
  }
}

}  // namespace lubelastic
