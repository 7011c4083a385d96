// Space-filling curve approximation mapping [0,1] onto a hyperinterval.
//
// The curve is the N-dimensional Hilbert curve evaluated level by level
// (Butz's Gray-code construction in the transform/rotation form of
// C. Hamilton, "Compact Hilbert Indices", 2006). A level-m approximation
// partitions [0,1] into 2^{N m} equal subintervals; the subinterval with
// curve index k maps to the centre of the k-th level-m subcube of D.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace plt {

/// Position of a level-m cell along the curve, in [0, 2^{N m}).
struct CellIndex {
  std::uint64_t value = 0;
  friend bool operator==(CellIndex, CellIndex) = default;
};

/// Dimension, approximation depth and bounds of the search box D.
class CurveSpec {
 public:
  static constexpr int kMaxIndexBits = 62;

  CurveSpec(int dim, int depth, std::vector<double> lower, std::vector<double> upper)
      : dim_(dim), depth_(depth), lower_(std::move(lower)), upper_(std::move(upper)) {
    if (dim_ < 1) throw std::invalid_argument("curve: dimension must be >= 1");
    if (depth_ < 1) throw std::invalid_argument("curve: depth must be >= 1");
    if (dim_ > 31) throw std::invalid_argument("curve: dimension must be <= 31");
    if (depth_ > 31) throw std::invalid_argument("curve: depth must be <= 31");
    if (dim_ * depth_ > kMaxIndexBits) {
      throw std::invalid_argument("curve: dim*depth = " + std::to_string(dim_ * depth_) +
                                  " exceeds " + std::to_string(kMaxIndexBits) + " index bits");
    }
    if (lower_.size() != static_cast<std::size_t>(dim_) ||
        upper_.size() != static_cast<std::size_t>(dim_)) {
      throw std::invalid_argument("curve: bounds must have one entry per dimension");
    }
    for (int i = 0; i < dim_; ++i) {
      if (!(upper_[i] > lower_[i])) {
        throw std::invalid_argument("curve: upper bound must exceed lower bound on axis " +
                                    std::to_string(i));
      }
    }
  }

  /// Unit cube [0,1]^dim.
  static CurveSpec unit(int dim, int depth) {
    return {dim, depth, std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
  }

  int dim() const { return dim_; }
  int depth() const { return depth_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }

  std::uint64_t cell_count() const { return std::uint64_t{1} << (dim_ * depth_); }

  /// d = max_i (b_i - a_i).
  double max_side() const {
    double d = 0.0;
    for (int i = 0; i < dim_; ++i) d = std::max(d, upper_[i] - lower_[i]);
    return d;
  }

 private:
  int dim_;
  int depth_;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

namespace detail {

inline std::uint32_t low_mask(int bits) { return (std::uint32_t{1} << bits) - 1u; }

inline std::uint32_t rotl(std::uint32_t v, int shift, int bits) {
  shift %= bits;
  if (shift == 0) return v;
  return ((v << shift) | (v >> (bits - shift))) & low_mask(bits);
}

inline std::uint32_t rotr(std::uint32_t v, int shift, int bits) {
  shift %= bits;
  if (shift == 0) return v;
  return ((v >> shift) | (v << (bits - shift))) & low_mask(bits);
}

inline std::uint32_t gray(std::uint32_t v) { return v ^ (v >> 1); }

inline std::uint32_t gray_inverse(std::uint32_t g) {
  std::uint32_t v = g;
  for (std::uint32_t s = 1; s < 32; s <<= 1) v ^= v >> s;
  return v;
}

inline int trailing_ones(std::uint32_t v) {
  int n = 0;
  while (v & 1u) {
    v >>= 1;
    ++n;
  }
  return n;
}

// Entry corner of sub-hypercube w within the standard template.
inline std::uint32_t entry_corner(std::uint32_t w) {
  if (w == 0) return 0;
  return gray(2 * ((w - 1) / 2));
}

// Axis along which sub-hypercube w is traversed towards its exit.
inline int intra_direction(std::uint32_t w, int dim) {
  if (w == 0) return 0;
  if (w % 2 == 0) return trailing_ones(w - 1) % dim;
  return trailing_ones(w) % dim;
}

}  // namespace detail

/// Cell containing curve parameter x; x = 1 maps to the last cell.
inline CellIndex cell_of(double x, const CurveSpec& spec) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("curve: parameter " + std::to_string(x) + " outside [0,1]");
  }
  const std::uint64_t count = spec.cell_count();
  const auto k = static_cast<std::uint64_t>(std::ldexp(x, spec.dim() * spec.depth()));
  return {std::min(k, count - 1)};
}

/// Integer corner coordinates (each in [0, 2^m)) of the cell with curve index k.
inline std::vector<std::uint32_t> cell_coordinates(CellIndex k, const CurveSpec& spec) {
  const int n = spec.dim();
  const int m = spec.depth();
  if (k.value >= spec.cell_count()) throw std::out_of_range("curve: cell index out of range");

  std::vector<std::uint32_t> coords(n, 0);
  std::uint32_t e = 0;
  int d = 0;
  for (int level = m - 1; level >= 0; --level) {
    const auto w = static_cast<std::uint32_t>((k.value >> (level * n)) & detail::low_mask(n));
    const std::uint32_t l = detail::rotl(detail::gray(w), d + 1, n) ^ e;
    for (int j = 0; j < n; ++j) coords[j] |= ((l >> j) & 1u) << level;
    e ^= detail::rotl(detail::entry_corner(w), d + 1, n);
    d = (d + detail::intra_direction(w, n) + 1) % n;
  }
  return coords;
}

/// Curve index of the cell with the given integer corner coordinates.
inline CellIndex index_of_cell(const std::vector<std::uint32_t>& coords, const CurveSpec& spec) {
  const int n = spec.dim();
  const int m = spec.depth();
  if (coords.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("curve: coordinate count must equal dimension");
  }
  std::uint64_t h = 0;
  std::uint32_t e = 0;
  int d = 0;
  for (int level = m - 1; level >= 0; --level) {
    std::uint32_t l = 0;
    for (int j = 0; j < n; ++j) l |= ((coords[j] >> level) & 1u) << j;
    const std::uint32_t w = detail::gray_inverse(detail::rotr(l ^ e, d + 1, n));
    h = (h << n) | w;
    e ^= detail::rotl(detail::entry_corner(w), d + 1, n);
    d = (d + detail::intra_direction(w, n) + 1) % n;
  }
  return {h};
}

/// Centre of cell k inside the unit cube; every coordinate is an odd multiple of 2^{-(m+1)}.
inline std::vector<double> map_unit(CellIndex k, const CurveSpec& spec) {
  const auto coords = cell_coordinates(k, spec);
  std::vector<double> u(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    u[i] = std::ldexp(2.0 * coords[i] + 1.0, -(spec.depth() + 1));
  }
  return u;
}

/// y(x): image of curve parameter x in D.
inline std::vector<double> map_to_domain(double x, const CurveSpec& spec) {
  auto y = map_unit(cell_of(x, spec), spec);
  for (int i = 0; i < spec.dim(); ++i) {
    y[i] = spec.lower()[i] + (spec.upper()[i] - spec.lower()[i]) * y[i];
  }
  return y;
}

/// Curve parameter at the centre of the cell containing point y (one of its preimages).
inline double preimage_of(const std::vector<double>& y, const CurveSpec& spec) {
  if (y.size() != static_cast<std::size_t>(spec.dim())) {
    throw std::invalid_argument("curve: point dimension mismatch");
  }
  const auto side = std::uint32_t{1} << spec.depth();
  std::vector<std::uint32_t> coords(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double u = (y[i] - spec.lower()[i]) / (spec.upper()[i] - spec.lower()[i]);
    if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("curve: point outside D");
    coords[i] = std::min(static_cast<std::uint32_t>(u * side), side - 1);
  }
  const CellIndex k = index_of_cell(coords, spec);
  return (static_cast<double>(k.value) + 0.5) / static_cast<double>(spec.cell_count());
}

}  // namespace plt
