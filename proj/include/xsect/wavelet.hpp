#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "xsect/sections.hpp"
#include "xsect/shaping.hpp"
#include "xsect/verify.hpp"

namespace xsect {

/// Full-rank lattice Gamma = {m G : m in Z^n}, G's rows the generators, with
/// dual Gamma* = {m G^{-T}} and the half-open fundamental domain
/// Y = {u G^{-T} : u in [0, 1)^n} of the dual.
class Lattice {
 public:
  explicit Lattice(Matrix basis);
  static Lattice integer(std::size_t n);

  std::size_t dim() const { return basis_.size(); }
  const Matrix& basis() const { return basis_; }
  const Matrix& dual() const { return dual_; }

  RowVector dual_point(std::span<const long long> m) const;
  /// m with xi - m G* in Y.
  std::vector<long long> cell_of(std::span<const double> xi) const;
  /// xi - cell_of(xi) G*.
  RowVector reduce(std::span<const double> xi) const;

  std::vector<RowVector> fundamental_vertices() const;
  double fundamental_diameter() const;
  /// sup |y| over y in Y.
  double fundamental_reach() const;

  struct Point {
    std::vector<long long> m;
    RowVector x;
  };
  /// Dual points within `radius` of `center`, in selector order.
  std::vector<Point> dual_points_near(std::span<const double> center, double radius) const;

 private:
  Matrix basis_, dual_, dual_inverse_;
};

/// Selector order on the dual lattice: increasing norm, ties by the integer
/// coordinates compared as (|m_i|, m_i < 0), so 0, 1, -1, 2, -2, ... in 1D.
bool selector_less(const Lattice::Point& a, const Lattice::Point& b);

/// A subset of R^n known through a membership predicate.
class Region {
 public:
  virtual ~Region() = default;
  virtual std::size_t dim() const = 0;
  virtual bool contains(std::span<const double> x) const = 0;
  /// sup |x| over the set; infinity when unbounded.
  virtual double reach() const = 0;
  virtual nlohmann::json to_json() const = 0;
};
using RegionPtr = std::shared_ptr<const Region>;

/// Union of pairwise disjoint half-open boxes [lo, hi).
RegionPtr box_union(std::vector<Box> boxes);
RegionPtr empty_region(std::size_t n);
/// The cell Y + m G*.
RegionPtr lattice_cell(const Lattice& lattice, std::vector<long long> m);
RegionPtr intersect(RegionPtr a, RegionPtr b);
RegionPtr subtract(RegionPtr a, RegionPtr b);
RegionPtr unite(RegionPtr a, RegionPtr b);
/// M^t = union of the dual translates of M. Unbounded M is searched within `radius`.
RegionPtr saturate(RegionPtr m, const Lattice& lattice, double radius = 128.0);
/// A cross-section as a region; its null set is excluded.
RegionPtr section_region(const CrossSection& s);

struct TranslationCount {
  long long count = 0;
  bool truncated = false;  // K reaches beyond the search radius: count is a lower bound
};

/// #{gamma in Gamma* : xi + gamma in K}, searched over |xi + gamma| <= radius
/// (or the whole reach of a bounded K).
TranslationCount translation_count(const Region& k, const Lattice& lattice, std::span<const double> xi,
                                   double radius = 100.0);
/// #{j : xi A^j in K} over [-k_floor, k_floor], widened while xi A^j can still
/// reach a bounded K, or while |xi A^j| stays within 1e-6..1e6 times |xi|
/// for an unbounded one (at most 10^4 steps each way).
long long dilation_count(const Region& k, const Matrix& a, std::span<const double> xi,
                         long long k_floor = 40);
/// Integer-lattice translation count.
TranslationCount dimension_function(const Region& w, std::span<const double> xi, double radius = 100.0);

struct WaveletCheckOptions {
  std::size_t samples = 10'000;
  std::uint64_t seed = 0;
  double radius = 100.0;
  long long k_floor = 40;
  long long min_translates = 1;  // order infinity: required truncated count
  bool keep_samples = false;
  Execution exec = Execution::Parallel;
};

/// Sampled check of both tiling equations: translation count L (at least
/// min_translates when order is empty, meaning infinity) and dilation count 1.
TilingReport is_multiwavelet_set(const Region& k, const Matrix& a, const Lattice& lattice,
                                 std::optional<long long> order, const WaveletCheckOptions& opts);

struct SelectorOptions {
  double radius = 64.0;       // initial search radius for unbounded sets
  double max_radius = 1024.0;
  std::size_t check_samples = 256;
  std::uint64_t seed = 0;
};

/// U(K): each point xi + gamma of K whose gamma is the first dual point in
/// selector order with xi + gamma in K, xi in Y. Throws SelectorMiss when a
/// sampled xi in Y has no such gamma within max_radius.
RegionPtr coset_selector(RegionPtr k, const Lattice& lattice, const SelectorOptions& opts = {});

/// Partition of a multi-wavelet set of finite order into `order` pieces,
/// each with translation count 1.
std::vector<RegionPtr> partition_multiwavelet_set(RegionPtr k, const Lattice& lattice, std::size_t order,
                                                  const SelectorOptions& opts = {});
/// First `pieces` sets of the partition of an order-infinity set, using the
/// cells Y + gamma_i in selector order as the fundamental regions V_i.
std::vector<RegionPtr> partition_order_infinity(RegionPtr k, const Lattice& lattice, std::size_t pieces,
                                                const SelectorOptions& opts = {});

struct PieceCertificate {
  long long piece = 0;  // i, or 0 for cone translates
  long long power = 0;  // k_i
  std::vector<long long> lattice_coords;
  RowVector translate;  // gamma_i with Y + gamma_i inside the piece
};

struct OrderInfinitySet {
  RegionPtr region;
  int construction = 1;  // 1: slabs of an expanding block pushed out; 2: nilpotent cone
  CrossSection base;
  std::vector<PieceCertificate> certificates;
  double search_radius = 0.0;
};

/// Union over i >= 1 of the slab pieces {xi : xi A^{-k_i} in S, radial part of
/// the representative in [c_{i-1}, c_i)}, c_i = U - (U - 1) 2^{-i}, for an
/// expanding real or spiral discrete section S. Powers past `powers` follow
/// the smallest k with slab thickness above `extent`.
RegionPtr slab_region(const CrossSection& base, std::vector<long long> powers, double extent);

/// A multi-wavelet set of order infinity for (A, Gamma), with `certify`
/// lattice cells Y + gamma certified inside it. Needs n <= 3.
OrderInfinitySet build_order_infinity_set(const Matrix& a, const Lattice& lattice, std::size_t certify = 10,
                                          double max_radius = 4096.0);

}  // namespace xsect
