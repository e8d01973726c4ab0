#include "xsect/wavelet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "xsect/classify.hpp"
#include "xsect/error.hpp"

namespace xsect {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr long long kMaxEnumeration = 50'000'000;
constexpr long long kMaxDilationScan = 10'000;

using Json = nlohmann::json;

Json rows_json(const Matrix& m) { return m.rows(); }

double vertex_reach(const std::vector<RowVector>& vs) {
  double r = 0.0;
  for (const auto& v : vs) r = std::max(r, norm2(v));
  return r;
}

}  // namespace

Lattice::Lattice(Matrix basis) : basis_(std::move(basis)) {
  if (basis_.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty lattice basis");
  dual_ = inverse(basis_).transpose();
  dual_inverse_ = basis_.transpose();
}

Lattice Lattice::integer(std::size_t n) { return Lattice(Matrix::identity(n)); }

RowVector Lattice::dual_point(std::span<const long long> m) const {
  RowVector x(dim(), 0.0);
  for (std::size_t i = 0; i < dim(); ++i)
    for (std::size_t j = 0; j < dim(); ++j) x[j] += static_cast<double>(m[i]) * dual_(i, j);
  return x;
}

std::vector<long long> Lattice::cell_of(std::span<const double> xi) const {
  const RowVector u = xi * dual_inverse_;
  std::vector<long long> m(dim());
  for (std::size_t i = 0; i < dim(); ++i) m[i] = static_cast<long long>(std::floor(u[i]));
  return m;
}

RowVector Lattice::reduce(std::span<const double> xi) const {
  const RowVector p = dual_point(cell_of(xi));
  RowVector y(xi.begin(), xi.end());
  for (std::size_t i = 0; i < dim(); ++i) y[i] -= p[i];
  return y;
}

std::vector<RowVector> Lattice::fundamental_vertices() const {
  const std::size_t n = dim();
  std::vector<RowVector> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<long long> e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = (mask >> i) & 1u;
    out.push_back(dual_point(e));
  }
  return out;
}

double Lattice::fundamental_diameter() const {
  const auto vs = fundamental_vertices();
  double d = 0.0;
  for (const auto& a : vs)
    for (const auto& b : vs) {
      RowVector diff(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
      d = std::max(d, norm2(diff));
    }
  return d;
}

double Lattice::fundamental_reach() const { return vertex_reach(fundamental_vertices()); }

std::vector<Lattice::Point> Lattice::dual_points_near(std::span<const double> center, double radius) const {
  const std::size_t n = dim();
  const RowVector c = center * dual_inverse_;
  std::vector<long long> lo(n), hi(n);
  double total = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double col = 0.0;
    for (std::size_t j = 0; j < n; ++j) col += dual_inverse_(j, i) * dual_inverse_(j, i);
    const double b = radius * std::sqrt(col);
    lo[i] = static_cast<long long>(std::floor(c[i] - b));
    hi[i] = static_cast<long long>(std::ceil(c[i] + b));
    total *= static_cast<double>(hi[i] - lo[i] + 1);
  }
  if (total > static_cast<double>(kMaxEnumeration)) {
    throw Error(ErrorCode::SearchExhausted,
                "lattice enumeration of radius " + std::to_string(radius) + " is too large");
  }
  std::vector<Point> out;
  std::vector<long long> m = lo;
  const double r2 = radius * radius * (1.0 + 1e-12);
  while (true) {
    RowVector x = dual_point(m);
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) d2 += (x[i] - center[i]) * (x[i] - center[i]);
    if (d2 <= r2) out.push_back({m, std::move(x)});
    std::size_t i = 0;
    while (i < n && ++m[i] > hi[i]) {
      m[i] = lo[i];
      ++i;
    }
    if (i == n) break;
  }
  std::sort(out.begin(), out.end(), selector_less);
  return out;
}

bool selector_less(const Lattice::Point& a, const Lattice::Point& b) {
  const double na = dot(a.x, a.x), nb = dot(b.x, b.x);
  if (std::abs(na - nb) > 1e-12 * std::max(na, nb)) return na < nb;
  for (std::size_t i = 0; i < a.m.size(); ++i) {
    const auto ka = std::pair{std::llabs(a.m[i]), a.m[i] < 0};
    const auto kb = std::pair{std::llabs(b.m[i]), b.m[i] < 0};
    if (ka != kb) return ka < kb;
  }
  return false;
}

namespace {

class BoxUnion final : public Region {
 public:
  BoxUnion(std::size_t n, std::vector<Box> boxes) : n_(n), boxes_(std::move(boxes)) {}
  std::size_t dim() const override { return n_; }
  bool contains(std::span<const double> x) const override {
    for (const Box& b : boxes_) {
      bool in = true;
      for (std::size_t i = 0; i < n_ && in; ++i) in = x[i] >= b.lo[i] && x[i] < b.hi[i];
      if (in) return true;
    }
    return false;
  }
  double reach() const override {
    double r = 0.0;
    for (const Box& b : boxes_) {
      double s = 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        const double m = std::max(std::abs(b.lo[i]), std::abs(b.hi[i]));
        s += m * m;
      }
      r = std::max(r, std::sqrt(s));
    }
    return r;
  }
  Json to_json() const override {
    Json bs = Json::array();
    for (const Box& b : boxes_) bs.push_back({{"lo", b.lo}, {"hi", b.hi}});
    return {{"kind", "boxes"}, {"dim", n_}, {"boxes", bs}};
  }

 private:
  std::size_t n_;
  std::vector<Box> boxes_;
};

class Cell final : public Region {
 public:
  Cell(Lattice lattice, std::vector<long long> m) : lattice_(std::move(lattice)), m_(std::move(m)) {}
  std::size_t dim() const override { return lattice_.dim(); }
  bool contains(std::span<const double> x) const override { return lattice_.cell_of(x) == m_; }
  double reach() const override { return norm2(lattice_.dual_point(m_)) + lattice_.fundamental_reach(); }
  Json to_json() const override {
    return {{"kind", "cell"}, {"lattice", rows_json(lattice_.basis())}, {"m", m_}};
  }

 private:
  Lattice lattice_;
  std::vector<long long> m_;
};

enum class Op { Intersect, Subtract, Unite };

class Combination final : public Region {
 public:
  Combination(Op op, RegionPtr a, RegionPtr b) : op_(op), a_(std::move(a)), b_(std::move(b)) {
    if (a_->dim() != b_->dim()) throw Error(ErrorCode::InvalidArgument, "region dimensions differ");
  }
  std::size_t dim() const override { return a_->dim(); }
  bool contains(std::span<const double> x) const override {
    switch (op_) {
      case Op::Intersect: return a_->contains(x) && b_->contains(x);
      case Op::Subtract: return a_->contains(x) && !b_->contains(x);
      case Op::Unite: return a_->contains(x) || b_->contains(x);
    }
    return false;
  }
  double reach() const override {
    switch (op_) {
      case Op::Intersect: return std::min(a_->reach(), b_->reach());
      case Op::Subtract: return a_->reach();
      case Op::Unite: return std::max(a_->reach(), b_->reach());
    }
    return kInf;
  }
  Json to_json() const override {
    static const char* names[] = {"intersection", "difference", "union"};
    return {{"kind", names[static_cast<int>(op_)]}, {"a", a_->to_json()}, {"b", b_->to_json()}};
  }

 private:
  Op op_;
  RegionPtr a_, b_;
};

class Saturation final : public Region {
 public:
  Saturation(RegionPtr m, Lattice lattice, double radius)
      : m_(std::move(m)), lattice_(std::move(lattice)), radius_(radius) {}
  std::size_t dim() const override { return m_->dim(); }
  bool contains(std::span<const double> x) const override {
    // xi + gamma in M needs |xi + gamma| <= reach(M).
    const double r = std::min(m_->reach(), radius_);
    RowVector center(x.begin(), x.end()), y(x.size());
    for (auto& v : center) v = -v;
    for (const auto& p : lattice_.dual_points_near(center, r)) {
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + p.x[i];
      if (m_->contains(y)) return true;
    }
    return false;
  }
  double reach() const override { return kInf; }
  Json to_json() const override {
    return {{"kind", "saturation"}, {"lattice", rows_json(lattice_.basis())}, {"radius", radius_},
            {"of", m_->to_json()}};
  }

 private:
  RegionPtr m_;
  Lattice lattice_;
  double radius_;
};

class SectionRegion final : public Region {
 public:
  explicit SectionRegion(CrossSection s) : s_(std::move(s)) {}
  std::size_t dim() const override { return s_.dim(); }
  bool contains(std::span<const double> x) const override {
    try {
      return xsect::contains(s_, x);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ExceptionalPoint) return false;
      throw;
    }
  }
  double reach() const override { return kInf; }
  Json to_json() const override {
    return {{"kind", "section"}, {"section_kind", std::string(to_string(s_.kind))},
            {"mode", std::string(to_string(s_.mode()))}, {"action", rows_json(s_.action)}};
  }

 private:
  CrossSection s_;
};

class EmptyRegion final : public Region {
 public:
  explicit EmptyRegion(std::size_t n) : n_(n) {}
  std::size_t dim() const override { return n_; }
  bool contains(std::span<const double>) const override { return false; }
  double reach() const override { return 0.0; }
  Json to_json() const override { return {{"kind", "boxes"}, {"dim", n_}, {"boxes", Json::array()}}; }

 private:
  std::size_t n_;
};

}  // namespace

RegionPtr box_union(std::vector<Box> boxes) {
  if (boxes.empty()) throw Error(ErrorCode::InvalidArgument, "box union needs a box (use empty_region)");
  const std::size_t n = boxes.front().lo.size();
  for (const Box& b : boxes) {
    if (b.lo.size() != n || b.hi.size() != n) throw Error(ErrorCode::InvalidArgument, "box dimensions differ");
    for (std::size_t i = 0; i < n; ++i)
      if (!(b.lo[i] < b.hi[i])) throw Error(ErrorCode::InvalidArgument, "box with lo >= hi");
  }
  for (std::size_t a = 0; a < boxes.size(); ++a)
    for (std::size_t b = a + 1; b < boxes.size(); ++b) {
      bool apart = false;
      for (std::size_t i = 0; i < n && !apart; ++i)
        apart = boxes[a].hi[i] <= boxes[b].lo[i] || boxes[b].hi[i] <= boxes[a].lo[i];
      if (!apart) throw Error(ErrorCode::InvalidArgument, "boxes overlap");
    }
  return std::make_shared<BoxUnion>(n, std::move(boxes));
}

RegionPtr empty_region(std::size_t n) { return std::make_shared<EmptyRegion>(n); }
RegionPtr lattice_cell(const Lattice& lattice, std::vector<long long> m) {
  return std::make_shared<Cell>(lattice, std::move(m));
}
RegionPtr intersect(RegionPtr a, RegionPtr b) {
  return std::make_shared<Combination>(Op::Intersect, std::move(a), std::move(b));
}
RegionPtr subtract(RegionPtr a, RegionPtr b) {
  return std::make_shared<Combination>(Op::Subtract, std::move(a), std::move(b));
}
RegionPtr unite(RegionPtr a, RegionPtr b) {
  return std::make_shared<Combination>(Op::Unite, std::move(a), std::move(b));
}
RegionPtr saturate(RegionPtr m, const Lattice& lattice, double radius) {
  return std::make_shared<Saturation>(std::move(m), lattice, radius);
}
RegionPtr section_region(const CrossSection& s) { return std::make_shared<SectionRegion>(s); }

TranslationCount translation_count(const Region& k, const Lattice& lattice, std::span<const double> xi,
                                   double radius) {
  const double reach = k.reach();
  TranslationCount out;
  out.truncated = !(reach <= radius);
  RowVector center(xi.begin(), xi.end()), y(xi.size());
  for (auto& v : center) v = -v;
  for (const auto& p : lattice.dual_points_near(center, std::min(reach, radius))) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = xi[i] + p.x[i];
    if (k.contains(y)) ++out.count;
  }
  return out;
}

long long dilation_count(const Region& k, const Matrix& a, std::span<const double> xi, long long k_floor) {
  const Matrix ainv = inverse(a);
  const double reach = k.reach();
  const bool bounded = std::isfinite(reach);
  const double start = norm2(xi);
  const double low = 1e-6 * std::min(1.0, start), high = 1e6 * std::max(1.0, start);
  long long count = 0;
  auto scan = [&](const Matrix& m, long long first) {
    RowVector x(xi.begin(), xi.end());
    if (first != 0) x = x * m;
    double previous = start;
    for (long long j = first; j <= kMaxDilationScan; ++j) {
      const double r = norm2(x);
      if (!std::isfinite(r)) break;
      // Past the floor a bounded K is chased only while the orbit grows
      // towards it; an unbounded K while the orbit stays within a wide band
      // around |xi| (slow, e.g. shearing, orbits).
      if (j > k_floor && (bounded ? !(r > previous && r <= reach) : !(r >= low && r <= high))) break;
      if (k.contains(x)) ++count;
      previous = r;
      x = x * m;
    }
  };
  scan(a, 0);
  scan(ainv, 1);
  return count;
}

TranslationCount dimension_function(const Region& w, std::span<const double> xi, double radius) {
  return translation_count(w, Lattice::integer(w.dim()), xi, radius);
}

TilingReport is_multiwavelet_set(const Region& k, const Matrix& a, const Lattice& lattice,
                                 std::optional<long long> order, const WaveletCheckOptions& opts) {
  struct Outcome {
    RowVector point;
    TranslationCount translations;
    long long dilations = 0;
    std::string diagnostic;
  };
  const Sampler sampler = gaussian_sampler(k.dim());
  const auto outcomes = map_samples<Outcome>(
      opts.samples, opts.seed,
      [&](std::size_t, std::mt19937_64& rng) {
        Outcome o;
        o.point = sampler(rng);
        o.translations = translation_count(k, lattice, o.point, opts.radius);
        o.dilations = dilation_count(k, a, o.point, opts.k_floor);
        std::ostringstream d;
        const long long t = o.translations.count;
        if (order && (o.translations.truncated || t != *order)) {
          d << "translation count " << t << (o.translations.truncated ? " (truncated)" : "") << ", expected "
            << *order << "; ";
        } else if (!order && t < opts.min_translates) {
          d << "translation count " << t << " below " << opts.min_translates << "; ";
        }
        if (o.dilations != 1) d << "dilation count " << o.dilations;
        o.diagnostic = d.str();
        return o;
      },
      opts.exec);
  TilingReport r;
  r.check = "multiwavelet";
  r.samples = outcomes.size();
  r.seed = opts.seed;
  r.k_min = -opts.k_floor;
  r.k_max = opts.k_floor;
  r.window = opts.radius;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    r.histogram[o.translations.count] += 1;
    if (!o.diagnostic.empty()) r.failures.push_back({i, o.point, o.diagnostic});
    if (opts.keep_samples) {
      r.records.push_back({o.point, static_cast<double>(o.translations.count), static_cast<double>(o.dilations)});
    }
  }
  return r;
}

namespace {

class Selector final : public Region {
 public:
  Selector(RegionPtr k, Lattice lattice, double radius, bool complete)
      : k_(std::move(k)), lattice_(std::move(lattice)), radius_(radius), complete_(complete) {
    candidates_ = lattice_.dual_points_near(RowVector(lattice_.dim(), 0.0), radius_);
  }
  std::size_t dim() const override { return k_->dim(); }

  /// First candidate gamma with y + gamma in K, for y in Y.
  const Lattice::Point* first_hit(std::span<const double> y) const {
    RowVector z(y.size());
    for (const auto& p : candidates_) {
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = y[i] + p.x[i];
      if (k_->contains(z)) return &p;
    }
    return nullptr;
  }
  bool contains(std::span<const double> x) const override {
    if (!k_->contains(x)) return false;
    const auto* hit = first_hit(lattice_.reduce(x));
    return hit != nullptr && hit->m == lattice_.cell_of(x);
  }
  double reach() const override { return std::min(k_->reach(), radius_ + lattice_.fundamental_reach()); }
  bool complete() const { return complete_; }
  Json to_json() const override {
    return {{"kind", "selector"}, {"lattice", rows_json(lattice_.basis())}, {"radius", radius_},
            {"of", k_->to_json()}};
  }

 private:
  RegionPtr k_;
  Lattice lattice_;
  double radius_;
  bool complete_;
  std::vector<Lattice::Point> candidates_;
};

}  // namespace

RegionPtr coset_selector(RegionPtr k, const Lattice& lattice, const SelectorOptions& opts) {
  const double y_reach = lattice.fundamental_reach();
  const bool bounded = std::isfinite(k->reach());
  double radius = bounded ? k->reach() + y_reach : opts.radius;
  auto sel = std::make_shared<Selector>(k, lattice, radius, bounded);
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t s = 0; s < opts.check_samples; ++s) {
    std::vector<double> u(lattice.dim());
    for (auto& v : u) v = unit(rng);
    const RowVector y = u * lattice.dual();
    while (sel->first_hit(y) == nullptr) {
      if (bounded || radius >= opts.max_radius) {
        std::ostringstream os;
        os << "no dual translate of the point (";
        for (std::size_t i = 0; i < y.size(); ++i) os << (i ? ", " : "") << y[i];
        os << ") of Y lies in K within radius " << radius;
        throw Error(ErrorCode::SelectorMiss, os.str());
      }
      radius = std::min(2.0 * radius, opts.max_radius);
      sel = std::make_shared<Selector>(k, lattice, radius, false);
    }
  }
  return sel;
}

std::vector<RegionPtr> partition_multiwavelet_set(RegionPtr k, const Lattice& lattice, std::size_t order,
                                                  const SelectorOptions& opts) {
  std::vector<RegionPtr> pieces;
  RegionPtr rest = std::move(k);
  for (std::size_t i = 0; i < order; ++i) {
    SelectorOptions o = opts;
    o.seed = opts.seed + i;
    RegionPtr piece = coset_selector(rest, lattice, o);
    rest = subtract(rest, piece);
    pieces.push_back(std::move(piece));
  }
  return pieces;
}

std::vector<RegionPtr> partition_order_infinity(RegionPtr k, const Lattice& lattice, std::size_t pieces,
                                                const SelectorOptions& opts) {
  std::vector<Lattice::Point> order;
  for (double r = 1.0; order.size() < pieces; r *= 2.0)
    order = lattice.dual_points_near(RowVector(lattice.dim(), 0.0), r * (1.0 + lattice.fundamental_reach()));
  std::vector<RegionPtr> out;
  RegionPtr rest = std::move(k);
  for (std::size_t i = 0; i < pieces; ++i) {
    const RegionPtr v = intersect(lattice_cell(lattice, order[i].m), rest);
    SelectorOptions o = opts;
    o.seed = opts.seed + i;
    const RegionPtr u = coset_selector(rest, lattice, o);
    RegionPtr piece = unite(v, subtract(u, saturate(v, lattice)));
    rest = subtract(rest, piece);
    out.push_back(std::move(piece));
  }
  return out;
}

namespace {

double slab_edge(double upper, long long i) { return upper - (upper - 1.0) * std::ldexp(1.0, static_cast<int>(-i)); }

/// Radial coordinate of a representative in S.
double section_radial(const CrossSection& s, std::span<const double> y) {
  const std::size_t o = s.offset();
  if (s.kind == SectionKind::DiscreteReal) return std::abs(y[o]);
  const auto z = to_working(s, y);
  double phi = std::atan2(z[o + 1], z[o]);
  if (phi < 0) phi += kTwoPi;
  return std::hypot(z[o], z[o + 1]) * std::exp(-s.log_rate * phi / s.beta);
}

class SlabPieces final : public Region {
 public:
  SlabPieces(CrossSection base, std::vector<long long> powers, double extent)
      : base_(std::move(base)), powers_(std::move(powers)), extent_(extent) {}

  std::size_t dim() const override { return base_.dim(); }

  long long power(long long i) const {
    if (i >= 1 && static_cast<std::size_t>(i) <= powers_.size()) return powers_[i - 1];
    const double width = (base_.upper - 1.0) * std::ldexp(1.0, static_cast<int>(-i));
    const double k = std::floor((std::log(extent_) - std::log(width)) / base_.log_rate) + 1.0;
    return std::max(0LL, static_cast<long long>(k));
  }

  static long long slab_of(double upper, double s) {
    if (!(s >= 1.0 && s < upper)) return 0;
    long long i = static_cast<long long>(std::floor(-std::log2((upper - s) / (upper - 1.0)))) + 1;
    i = std::clamp(i, 1LL, 1000LL);
    while (i > 1 && s < slab_edge(upper, i - 1)) --i;
    while (i < 1000 && s >= slab_edge(upper, i)) ++i;
    return i;
  }

  bool contains(std::span<const double> x) const override {
    OrbitSolution sol;
    try {
      sol = solve_orbit(base_, x);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ExceptionalPoint || e.code() == ErrorCode::Overflow) return false;
      throw;
    }
    const long long i = slab_of(base_.upper, section_radial(base_, base_.form.to_jordan(sol.representative)));
    if (i == 0) return false;
    return sol.parameter == -base_.orientation * static_cast<double>(power(i));
  }
  double reach() const override { return kInf; }
  Json to_json() const override {
    return {{"kind", "slabs"}, {"section_kind", std::string(to_string(base_.kind))},
            {"action", rows_json(base_.action)}, {"powers", powers_}, {"extent", extent_}};
  }

 private:
  CrossSection base_;
  std::vector<long long> powers_;
  double extent_;
};

/// Bound on |x| for x with Jordan coordinates of norm at most 1.
double jordan_to_ambient_bound(const CrossSection& s) {
  double b = 0.0;
  RowVector e(s.dim(), 0.0);
  for (std::size_t i = 0; i < s.dim(); ++i) {
    e[i] = 1.0;
    b += norm2(s.form.from_jordan(e));
    e[i] = 0.0;
  }
  return b;
}

std::vector<RowVector> translated(const std::vector<RowVector>& vs, std::span<const double> g) {
  std::vector<RowVector> out = vs;
  for (auto& v : out)
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += g[i];
  return out;
}

/// closure(Y + gamma) inside the slab {lo <= |y_o| < hi} on one side.
bool real_slab_holds(const CrossSection& s, const std::vector<RowVector>& vs, double lo, double hi) {
  double mn = kInf, mx = -kInf;
  for (const auto& v : vs) {
    const double y = s.form.to_jordan(v)[s.offset()];
    mn = std::min(mn, y);
    mx = std::max(mx, y);
  }
  return (mn >= lo && mx < hi) || (mn > -hi && mx <= -lo);
}

/// closure(Y + gamma) inside the spiral piece with power k and radial
/// interval [lo, hi): a disk around the image in the working pair, bounded
/// in log-polar coordinates.
bool spiral_slab_holds(const CrossSection& s, const std::vector<RowVector>& vs, long long k, double lo,
                       double hi) {
  const std::size_t o = s.offset();
  std::vector<std::array<double, 2>> pts;
  double cx = 0.0, cy = 0.0;
  for (const auto& v : vs) {
    const auto z = to_working(s, s.form.to_jordan(v));
    pts.push_back({z[o], z[o + 1]});
    cx += z[o];
    cy += z[o + 1];
  }
  cx /= static_cast<double>(pts.size());
  cy /= static_cast<double>(pts.size());
  double delta = 0.0;
  for (const auto& p : pts) delta = std::max(delta, std::hypot(p[0] - cx, p[1] - cy));
  const double rc = std::hypot(cx, cy);
  if (!(delta < rc)) return false;
  double theta = std::atan2(cy, cx);
  if (theta < 0) theta += kTwoPi;
  const double spread = std::asin(delta / rc) / s.beta;
  const double kd = static_cast<double>(k);
  for (long long m = static_cast<long long>(std::floor((s.beta * (kd - 1.0) - theta) / kTwoPi));
       (theta + kTwoPi * static_cast<double>(m)) / s.beta <= kd + 2.0; ++m) {
    const double tau = (theta + kTwoPi * static_cast<double>(m)) / s.beta;
    if (tau - spread < kd || tau + spread >= kd + 1.0) continue;
    const double inner = (rc - delta) * std::exp(-s.log_rate * (tau + spread));
    const double outer = (rc + delta) * std::exp(-s.log_rate * (tau - spread));
    if (inner >= lo && outer < hi) return true;
  }
  return false;
}

/// Thickness of Y measured along the radial coordinate of S.
double radial_extent(const CrossSection& s, const std::vector<RowVector>& vs) {
  const std::size_t o = s.offset();
  if (s.kind == SectionKind::DiscreteReal) {
    double mn = kInf, mx = -kInf;
    for (const auto& v : vs) {
      const double y = s.form.to_jordan(v)[o];
      mn = std::min(mn, y);
      mx = std::max(mx, y);
    }
    return mx - mn;
  }
  double d = 0.0;
  for (const auto& a : vs)
    for (const auto& b : vs) {
      const auto za = to_working(s, s.form.to_jordan(a));
      const auto zb = to_working(s, s.form.to_jordan(b));
      d = std::max(d, std::hypot(za[o] - zb[o], za[o + 1] - zb[o + 1]));
    }
  return d;
}

/// Ambient centre of the piece with power k and radial interval [lo, hi).
RowVector piece_centre(const CrossSection& s, long long k, double lo, double hi) {
  const std::size_t o = s.offset();
  RowVector z(s.dim(), 0.0);
  if (s.kind == SectionKind::DiscreteReal) {
    z[o] = 0.5 * (lo + hi);
    return act(s, s.form.from_jordan(z), s.orientation * static_cast<double>(k));
  }
  const double r = 0.5 * (lo + hi) * std::exp(0.5 * s.log_rate);
  z[o] = r * std::cos(0.5 * s.beta);
  z[o + 1] = r * std::sin(0.5 * s.beta);
  return act(s, s.form.from_jordan(from_working(s, z)), s.orientation * static_cast<double>(k));
}

std::optional<PieceCertificate> certify_slab(const CrossSection& s, const Lattice& lattice,
                                             const std::vector<RowVector>& cell, long long i, long long k,
                                             double max_radius) {
  const double lo = slab_edge(s.upper, i - 1), hi = slab_edge(s.upper, i);
  const RowVector centre = piece_centre(s, k, lo, hi);
  const double scale = std::exp(s.log_rate * static_cast<double>(k));
  const double diam = lattice.fundamental_diameter();
  // A real slab is a strip: cells near its centre line are the only candidates
  // worth trying. A spiral piece is searched over its whole extent.
  const double span = s.kind == SectionKind::DiscreteReal ? 0.5 * (hi - lo) * scale
                                                           : hi * scale * std::exp(s.log_rate);
  const double bound = std::min(max_radius, span * jordan_to_ambient_bound(s) + 2.0 * diam);
  for (double r = 2.0 * diam;; r = std::min(2.0 * r, bound)) {
    for (const auto& p : lattice.dual_points_near(centre, r)) {
      const auto vs = translated(cell, p.x);
      const bool fits = s.kind == SectionKind::DiscreteReal ? real_slab_holds(s, vs, lo * scale, hi * scale)
                                                            : spiral_slab_holds(s, vs, k, lo, hi);
      if (fits) return PieceCertificate{i, k, p.m, p.x};
    }
    if (r >= bound) return std::nullopt;
  }
}

bool cone_holds(const CrossSection& s, const std::vector<RowVector>& vs) {
  const std::size_t o = s.offset();
  bool pos = true, neg = true;
  for (const auto& v : vs) {
    const auto y = s.form.to_jordan(v);
    const double a = y[o], b = y[o + 1];
    pos = pos && a > 0.0 && b >= 0.0 && b < a;
    neg = neg && a < 0.0 && b <= 0.0 && b > a;
  }
  return pos || neg;
}

}  // namespace

RegionPtr slab_region(const CrossSection& base, std::vector<long long> powers, double extent) {
  if (base.kind != SectionKind::DiscreteReal && base.kind != SectionKind::DiscreteSpiral)
    throw Error(ErrorCode::InvalidArgument, "slab pieces need a real or spiral discrete section");
  if (!(extent > 0.0)) throw Error(ErrorCode::InvalidArgument, "slab extent must be positive");
  return std::make_shared<SlabPieces>(base, std::move(powers), extent);
}

OrderInfinitySet build_order_infinity_set(const Matrix& a, const Lattice& lattice, std::size_t certify,
                                          double max_radius) {
  const std::size_t n = a.size();
  if (n > 3) throw Error(ErrorCode::DimensionTooHigh, "order-infinity construction needs n <= 3");
  if (lattice.dim() != n) throw Error(ErrorCode::InvalidArgument, "lattice and matrix dimensions differ");
  if (is_similar_to_unitary(a))
    throw Error(ErrorCode::NoWavelet, "A is similar to a unitary matrix: no multi-wavelet set of order infinity");
  OrderInfinitySet out;
  out.base = build_discrete_section(a);
  const auto cell = lattice.fundamental_vertices();
  const CrossSection& s = out.base;

  if (s.kind == SectionKind::DiscreteShear) {
    out.construction = 2;
    out.region = section_region(s);
    for (double r = 8.0;; r = std::min(2.0 * r, max_radius)) {
      out.certificates.clear();
      for (const auto& p : lattice.dual_points_near(RowVector(n, 0.0), r)) {
        if (cone_holds(s, translated(cell, p.x))) out.certificates.push_back({0, 0, p.m, p.x});
        if (out.certificates.size() >= certify) break;
      }
      out.search_radius = r;
      if (out.certificates.size() >= certify) return out;
      if (r >= max_radius) break;
    }
    std::ostringstream os;
    os << "found " << out.certificates.size() << " of " << certify << " cone cells within radius " << max_radius;
    throw Error(ErrorCode::SearchExhausted, os.str());
  }
  if (s.kind != SectionKind::DiscreteReal && s.kind != SectionKind::DiscreteSpiral)
    throw Error(ErrorCode::DimensionTooHigh, "section kind needs n >= 4");

  out.construction = 1;
  const double extent = radial_extent(s, cell);
  const SlabPieces rule(s, {}, extent);
  std::vector<long long> powers;
  for (std::size_t i = 1; i <= certify; ++i) {
    const long long first = rule.power(static_cast<long long>(i));
    std::optional<PieceCertificate> cert;
    for (long long k = first; k <= first + 64 && !cert; ++k)
      cert = certify_slab(s, lattice, cell, static_cast<long long>(i), k, max_radius);
    if (!cert) {
      std::ostringstream os;
      os << "no lattice cell fits slab piece " << i << " for powers " << first << ".." << first + 64;
      throw Error(ErrorCode::SearchExhausted, os.str());
    }
    powers.push_back(cert->power);
    out.search_radius = std::max(out.search_radius, norm2(cert->translate));
    out.certificates.push_back(std::move(*cert));
  }
  out.region = slab_region(s, std::move(powers), extent);
  return out;
}

}  // namespace xsect
