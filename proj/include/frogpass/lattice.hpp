// Copyright 2026 The frogpass Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Integer lattice geometry: points of Z^d, norms, neighbor sets, the
// signed-permutation group and the adapted linear maps built from it.

#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace frogpass {

inline constexpr int kMaxDim = 6;

/// A site of Z^d with 1 <= d <= kMaxDim. Coordinates are in lattice units.
class Point {
 public:
  Point() = default;
  explicit Point(int dim);
  Point(std::initializer_list<int64_t> coords);

  /// sign * e_axis, with axis 0-based.
  static Point unit(int dim, int axis, int sign = 1);

  int dim() const noexcept { return dim_; }
  int64_t operator[](int i) const noexcept { return c_[static_cast<size_t>(i)]; }
  void set(int i, int64_t v) noexcept { c_[static_cast<size_t>(i)] = static_cast<int32_t>(v); }

  Point& operator+=(const Point& o);
  Point& operator-=(const Point& o);
  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }
  friend Point operator*(int64_t s, Point a);

  friend bool operator==(const Point& a, const Point& b) noexcept;
  /// Lexicographic on coordinates (dimension compared first).
  friend std::strong_ordering operator<=>(const Point& a, const Point& b) noexcept;

  std::string str() const;

 private:
  std::array<int32_t, kMaxDim> c_{};
  uint8_t dim_ = 0;
};

struct PointHash {
  size_t operator()(const Point& p) const noexcept;
};

int64_t l1_norm(const Point& x);
int64_t linf_norm(const Point& x);
inline int64_t l1_dist(const Point& a, const Point& b) { return l1_norm(a - b); }
inline int64_t linf_dist(const Point& a, const Point& b) { return linf_norm(a - b); }

/// The 2d nearest neighbors in canonical order +e1, -e1, +e2, -e2, ...
/// Direction code c maps to axis c/2 with sign + for even c.
std::vector<Point> neighbors(const Point& x);
Point step(const Point& x, int direction_code);

/// l1-closest element of `set`; ties go to the lexicographically smallest point.
Point closest_in_set(const Point& x, std::span<const Point> set);

/// All offsets z with ||z||_1 == r, in lexicographic order.
std::vector<Point> l1_sphere(int dim, int64_t r);

/// Dense row-major indexing of the cube [-radius, radius]^d around `center`.
class CubeGrid {
 public:
  CubeGrid() = default;
  CubeGrid(int dim, int64_t radius, Point center);
  CubeGrid(int dim, int64_t radius) : CubeGrid(dim, radius, Point(dim)) {}

  int dim() const noexcept { return dim_; }
  int64_t radius() const noexcept { return radius_; }
  const Point& center() const noexcept { return center_; }
  size_t size() const noexcept { return size_; }
  bool contains(const Point& p) const noexcept;
  /// Caller guarantees contains(p).
  size_t index(const Point& p) const noexcept;
  Point point(size_t index) const;
  /// Index offset of one step in direction code c.
  std::ptrdiff_t stride(int direction_code) const noexcept { return strides_[static_cast<size_t>(direction_code)]; }

 private:
  int dim_ = 0;
  int64_t radius_ = 0;
  int64_t side_ = 1;
  Point center_;
  size_t size_ = 0;
  std::array<std::ptrdiff_t, 2 * kMaxDim> strides_{};
};

/// Psi_{sigma,eps}: output coordinate i is eps[i] * x[sigma[i]] (0-based).
class SignedPermutation {
 public:
  SignedPermutation() = default;
  SignedPermutation(std::vector<int> sigma, std::vector<int> eps);
  static SignedPermutation identity(int dim);
  /// Every element of O(Z^d), 2^d d! of them, in a fixed order starting at the identity.
  static std::vector<SignedPermutation> all(int dim);

  int dim() const noexcept { return dim_; }
  int sigma(int i) const noexcept { return sigma_[static_cast<size_t>(i)]; }
  int eps(int i) const noexcept { return eps_[static_cast<size_t>(i)]; }

  Point apply(const Point& x) const;
  /// (a * b)(x) = a(b(x)).
  friend SignedPermutation operator*(const SignedPermutation& a, const SignedPermutation& b);
  SignedPermutation inverse() const;
  friend bool operator==(const SignedPermutation&, const SignedPermutation&) = default;
  std::string str() const;

 private:
  std::array<int8_t, kMaxDim> sigma_{};
  std::array<int8_t, kMaxDim> eps_{};
  int dim_ = 0;
};

inline Point apply_signed_permutation(const SignedPermutation& g, const Point& x) { return g.apply(x); }

/// L_x(y) = sum_i y_i g_i(x) with g_1 the identity.
struct AdaptedBasis {
  std::vector<SignedPermutation> g;
  Point base_point;
  // quality = quality_num / quality_den, the smallest ratio
  // ||L_x(y)||_1 / (||x||_1 ||y||_1) over the probe set.
  int64_t quality_num = 0;
  int64_t quality_den = 1;
  double quality() const { return static_cast<double>(quality_num) / static_cast<double>(quality_den); }
};

Point apply_adapted_map(const AdaptedBasis& basis, const Point& y);

/// All y with 1 <= ||y||_1 <= max_l1.
std::vector<Point> default_probe_directions(int dim, int64_t max_l1 = 3);

/// Exhaustive search for the tuple (Id, g_2, ..., g_d) maximizing the worst
/// probe ratio. Requires x != 0 and d <= 4.
AdaptedBasis find_adapted_basis(const Point& x, std::span<const Point> probes);

}  // namespace frogpass
