#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "xsect/parallel.hpp"
#include "xsect/sections.hpp"

namespace xsect {

enum class ShapeTarget { FiniteMeasure, Bounded };

/// Dyadic sup-norm shells on the Jordan coordinates outside the witness
/// block's leading pair: T_1 = [-1, 1)^d, T_k = [-2^{k-1}, 2^{k-1})^d minus
/// [-2^{k-2}, 2^{k-2})^d. With d = 0 there is a single piece.
struct ShellPartition {
  std::vector<std::size_t> coords;  // Jordan coordinates the shells live on

  std::size_t dim() const { return coords.size(); }
  /// Shell index (>= 1) of a point given in Jordan coordinates.
  int index_of(std::span<const double> y) const;
  /// Lebesgue measure of T_k in R^d.
  double measure(int k) const;
  /// Half-width of the box containing T_k.
  static double radius(int k) { return std::ldexp(1.0, k - 1); }
};

struct Box {
  RowVector lo, hi;
  double volume() const;
};

/// A finite-measure or bounded cross-section: the union of the pieces
/// S_k A^{n_k}, S_k = S intersected with the k-th shell.
struct ShapedSection {
  CrossSection base;
  ShellPartition shells;
  ShapeTarget target = ShapeTarget::FiniteMeasure;
  double delta = 1.0;  // |det A|
  std::vector<long long> shift_table;  // n_1 .. n_K precomputed at construction

  /// n_k.
  long long shift(int k) const;
  /// Weight d_k = 2^{-k} (1 when there is a single piece).
  double weight(int k) const;
  /// Ambient measure of S_k (an upper bound for the spiral case).
  double piece_measure(int k) const;
  /// Upper bound for the ambient Euclidean norm of points of S_k.
  double piece_radius(int k) const;
  /// Axis-aligned ambient box containing S_k A^{n_k}.
  Box shifted_piece_box(int k) const;
  int max_piece() const { return shells.dim() == 0 ? 1 : kMaxPiece; }

  static constexpr int kMaxPiece = 1000;
};

ShapedSection to_finite_measure(const CrossSection& s);
ShapedSection to_bounded(const CrossSection& s);

/// Piece index of a point of the base section.
int piece_of(const ShapedSection& s, std::span<const double> gamma);

bool shaped_contains(const ShapedSection& s, std::span<const double> gamma);
OrbitSolution shaped_solve_orbit(const ShapedSection& s, std::span<const double> gamma);

/// A point of S_k A^{n_k}.
RowVector sample_piece(const ShapedSection& s, int k, std::mt19937_64& rng);

struct MeasureEstimate {
  double estimate = 0.0;
  double bound = 0.0;  // 3 sigma
  std::size_t samples = 0;
};

/// Plain hit-or-miss estimate over a box.
MeasureEstimate estimate_measure(const std::function<bool(std::span<const double>)>& member,
                                 const Box& box, std::size_t samples, std::uint64_t seed,
                                 Execution exec = Execution::Parallel);

/// Estimate of m(S~): piece k is drawn with probability 2^{-k} and a point
/// uniformly from its box; hits are only counted for the piece they belong to.
MeasureEstimate estimate_measure(const ShapedSection& s, std::size_t samples, std::uint64_t seed,
                                 Execution exec = Execution::Parallel);

}  // namespace xsect
