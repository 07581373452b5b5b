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

#include "frogpass/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <unordered_set>

#include "frogpass/error.hpp"

namespace frogpass {

Point::Point(int dim) : dim_(static_cast<uint8_t>(dim)) {
  require(dim >= 1 && dim <= kMaxDim, "dimension must be in [1, " + std::to_string(kMaxDim) + "]");
}

Point::Point(std::initializer_list<int64_t> coords) : Point(static_cast<int>(coords.size())) {
  int i = 0;
  for (int64_t v : coords) set(i++, v);
}

Point Point::unit(int dim, int axis, int sign) {
  Point p(dim);
  p.set(axis, sign);
  return p;
}

Point& Point::operator+=(const Point& o) {
  require(dim_ == o.dim_, "dimension mismatch in point arithmetic");
  for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
  return *this;
}

Point& Point::operator-=(const Point& o) {
  require(dim_ == o.dim_, "dimension mismatch in point arithmetic");
  for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
  return *this;
}

Point operator*(int64_t s, Point a) {
  for (int i = 0; i < a.dim_; ++i) a.c_[i] = static_cast<int32_t>(s * a.c_[i]);
  return a;
}

bool operator==(const Point& a, const Point& b) noexcept {
  if (a.dim_ != b.dim_) return false;
  for (int i = 0; i < a.dim_; ++i)
    if (a.c_[i] != b.c_[i]) return false;
  return true;
}

std::strong_ordering operator<=>(const Point& a, const Point& b) noexcept {
  if (auto c = a.dim_ <=> b.dim_; c != 0) return c;
  for (int i = 0; i < a.dim_; ++i)
    if (auto c = a.c_[i] <=> b.c_[i]; c != 0) return c;
  return std::strong_ordering::equal;
}

std::string Point::str() const {
  std::string s = "(";
  for (int i = 0; i < dim_; ++i) {
    if (i) s += ',';
    s += std::to_string(c_[i]);
  }
  return s + ")";
}

size_t PointHash::operator()(const Point& p) const noexcept {
  uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<uint64_t>(p.dim());
  for (int i = 0; i < p.dim(); ++i) {
    h ^= static_cast<uint64_t>(p[i]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<size_t>(h);
}

int64_t l1_norm(const Point& x) {
  int64_t s = 0;
  for (int i = 0; i < x.dim(); ++i) s += std::abs(x[i]);
  return s;
}

int64_t linf_norm(const Point& x) {
  int64_t m = 0;
  for (int i = 0; i < x.dim(); ++i) m = std::max<int64_t>(m, std::abs(x[i]));
  return m;
}

Point step(const Point& x, int direction_code) {
  Point y = x;
  const int axis = direction_code / 2;
  y.set(axis, x[axis] + ((direction_code & 1) ? -1 : 1));
  return y;
}

std::vector<Point> neighbors(const Point& x) {
  std::vector<Point> out;
  out.reserve(static_cast<size_t>(2 * x.dim()));
  for (int c = 0; c < 2 * x.dim(); ++c) out.push_back(step(x, c));
  return out;
}

Point closest_in_set(const Point& x, std::span<const Point> set) {
  require(!set.empty(), "closest_in_set: empty set");
  const Point* best = &set[0];
  int64_t best_d = l1_dist(x, *best);
  for (const Point& p : set.subspan(1)) {
    const int64_t d = l1_dist(x, p);
    if (d < best_d || (d == best_d && p < *best)) {
      best = &p;
      best_d = d;
    }
  }
  return *best;
}

namespace {

void sphere_rec(int dim, int axis, int64_t remaining, Point& cur, std::vector<Point>& out) {
  if (axis == dim - 1) {
    if (remaining == 0) {
      cur.set(axis, 0);
      out.push_back(cur);
    } else {
      cur.set(axis, -remaining);
      out.push_back(cur);
      cur.set(axis, remaining);
      out.push_back(cur);
    }
    return;
  }
  for (int64_t v = -remaining; v <= remaining; ++v) {
    cur.set(axis, v);
    sphere_rec(dim, axis + 1, remaining - std::abs(v), cur, out);
  }
}

}  // namespace

std::vector<Point> l1_sphere(int dim, int64_t r) {
  require(r >= 0, "l1_sphere: negative radius");
  std::vector<Point> out;
  Point cur(dim);
  sphere_rec(dim, 0, r, cur, out);
  return out;
}

// ---------------------------------------------------------------------------

CubeGrid::CubeGrid(int dim, int64_t radius, Point center)
    : dim_(dim), radius_(radius), side_(2 * radius + 1), center_(center) {
  require(radius >= 0, "grid radius must be nonnegative");
  require(center.dim() == dim, "grid center dimension mismatch");
  size_t n = 1;
  std::ptrdiff_t stride = 1;
  for (int i = dim - 1; i >= 0; --i) {
    strides_[static_cast<size_t>(2 * i)] = stride;
    strides_[static_cast<size_t>(2 * i + 1)] = -stride;
    stride *= side_;
    n *= static_cast<size_t>(side_);
  }
  size_ = n;
}

bool CubeGrid::contains(const Point& p) const noexcept {
  for (int i = 0; i < dim_; ++i)
    if (std::abs(p[i] - center_[i]) > radius_) return false;
  return true;
}

size_t CubeGrid::index(const Point& p) const noexcept {
  size_t idx = 0;
  for (int i = 0; i < dim_; ++i) idx = idx * static_cast<size_t>(side_) + static_cast<size_t>(p[i] - center_[i] + radius_);
  return idx;
}

Point CubeGrid::point(size_t index) const {
  Point p(dim_);
  for (int i = dim_ - 1; i >= 0; --i) {
    const auto s = static_cast<size_t>(side_);
    p.set(i, static_cast<int64_t>(index % s) - radius_ + center_[i]);
    index /= s;
  }
  return p;
}

// ---------------------------------------------------------------------------

SignedPermutation::SignedPermutation(std::vector<int> sigma, std::vector<int> eps)
    : dim_(static_cast<int>(sigma.size())) {
  require(dim_ >= 1 && dim_ <= kMaxDim, "signed permutation: bad dimension");
  require(eps.size() == sigma.size(), "signed permutation: sigma/eps length mismatch");
  std::vector<bool> seen(static_cast<size_t>(dim_), false);
  for (int i = 0; i < dim_; ++i) {
    const int s = sigma[static_cast<size_t>(i)];
    require(s >= 0 && s < dim_ && !seen[static_cast<size_t>(s)], "signed permutation: sigma is not a bijection");
    seen[static_cast<size_t>(s)] = true;
    const int e = eps[static_cast<size_t>(i)];
    require(e == 1 || e == -1, "signed permutation: signs must be +1 or -1");
    sigma_[static_cast<size_t>(i)] = static_cast<int8_t>(s);
    eps_[static_cast<size_t>(i)] = static_cast<int8_t>(e);
  }
}

SignedPermutation SignedPermutation::identity(int dim) {
  std::vector<int> s(static_cast<size_t>(dim));
  std::iota(s.begin(), s.end(), 0);
  return SignedPermutation(s, std::vector<int>(static_cast<size_t>(dim), 1));
}

std::vector<SignedPermutation> SignedPermutation::all(int dim) {
  std::vector<int> perm(static_cast<size_t>(dim));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<SignedPermutation> out;
  do {
    for (unsigned mask = 0; mask < (1u << dim); ++mask) {
      std::vector<int> eps(static_cast<size_t>(dim));
      for (int i = 0; i < dim; ++i) eps[static_cast<size_t>(i)] = (mask >> i) & 1u ? -1 : 1;
      out.emplace_back(perm, eps);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

Point SignedPermutation::apply(const Point& x) const {
  require(x.dim() == dim_, "signed permutation: dimension mismatch");
  Point y(dim_);
  for (int i = 0; i < dim_; ++i) y.set(i, eps_[i] * x[sigma_[i]]);
  return y;
}

SignedPermutation operator*(const SignedPermutation& a, const SignedPermutation& b) {
  require(a.dim_ == b.dim_, "signed permutation: dimension mismatch");
  // a(b(x))_i = a.eps[i] * b(x)[a.sigma[i]] = a.eps[i] * b.eps[a.sigma[i]] * x[b.sigma[a.sigma[i]]]
  std::vector<int> s(static_cast<size_t>(a.dim_)), e(static_cast<size_t>(a.dim_));
  for (int i = 0; i < a.dim_; ++i) {
    const int j = a.sigma_[i];
    s[static_cast<size_t>(i)] = b.sigma_[j];
    e[static_cast<size_t>(i)] = a.eps_[i] * b.eps_[j];
  }
  return SignedPermutation(s, e);
}

SignedPermutation SignedPermutation::inverse() const {
  // y_i = eps_i x_{sigma_i}  =>  x_{sigma_i} = eps_i y_i
  std::vector<int> s(static_cast<size_t>(dim_)), e(static_cast<size_t>(dim_));
  for (int i = 0; i < dim_; ++i) {
    s[static_cast<size_t>(sigma_[i])] = i;
    e[static_cast<size_t>(sigma_[i])] = eps_[i];
  }
  return SignedPermutation(s, e);
}

std::string SignedPermutation::str() const {
  std::string s = "sigma=(";
  for (int i = 0; i < dim_; ++i) s += (i ? "," : "") + std::to_string(sigma_[i] + 1);
  s += ") eps=(";
  for (int i = 0; i < dim_; ++i) s += (i ? "," : "") + std::string(eps_[i] > 0 ? "+" : "-");
  return s + ")";
}

// ---------------------------------------------------------------------------

Point apply_adapted_map(const AdaptedBasis& basis, const Point& y) {
  const int d = basis.base_point.dim();
  require(y.dim() == d && static_cast<int>(basis.g.size()) == d, "adapted map: dimension mismatch");
  Point out(d);
  for (int i = 0; i < d; ++i) out += y[i] * basis.g[static_cast<size_t>(i)].apply(basis.base_point);
  return out;
}

std::vector<Point> default_probe_directions(int dim, int64_t max_l1) {
  std::vector<Point> out;
  for (int64_t r = 1; r <= max_l1; ++r) {
    auto s = l1_sphere(dim, r);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

namespace {

bool closed_under_symmetries(std::span<const Point> probes, const std::vector<SignedPermutation>& group) {
  std::unordered_set<Point, PointHash> set(probes.begin(), probes.end());
  for (const Point& p : probes)
    for (const auto& g : group)
      if (!set.count(g.apply(p))) return false;
  return true;
}

// Rational a/b stored with b > 0.
struct Ratio {
  int64_t num;
  int64_t den;
  bool operator<(const Ratio& o) const { return num * o.den < o.num * den; }
  bool operator<=(const Ratio& o) const { return num * o.den <= o.num * den; }
};

struct BasisSearch {
  int dim;
  int64_t x_norm;
  std::span<const Point> probes;
  std::vector<int64_t> probe_norms;
  std::vector<Point> images;  // distinct g(x)
  std::vector<size_t> chosen;
  Ratio best{-1, 1};
  std::vector<size_t> best_choice;
  const Point* base;

  // Smallest probe ratio for the current choice, abandoning once it drops to `best`.
  Ratio evaluate() const {
    Ratio worst{1, 1};
    for (size_t k = 0; k < probes.size(); ++k) {
      const Point& y = probes[k];
      Point v = y[0] * *base;
      for (int i = 1; i < dim; ++i) v += y[i] * images[chosen[static_cast<size_t>(i - 1)]];
      const Ratio r{l1_norm(v), x_norm * probe_norms[k]};
      if (r < worst) worst = r;
      if (worst <= best) return worst;
    }
    return worst;
  }

  void recurse(size_t slot, size_t start) {
    if (best.num == best.den) return;  // quality 1 is the maximum
    if (slot == chosen.size()) {
      const Ratio r = evaluate();
      if (best < r) {
        best = r;
        best_choice = chosen;
      }
      return;
    }
    for (size_t i = start; i < images.size(); ++i) {
      chosen[slot] = i;
      recurse(slot + 1, start_of_next(i));
    }
  }

  bool unordered = false;
  size_t start_of_next(size_t i) const { return unordered ? i : 0; }
};

}  // namespace

AdaptedBasis find_adapted_basis(const Point& x, std::span<const Point> probes) {
  const int d = x.dim();
  require(d <= 4, "find_adapted_basis: dimension too large for exhaustive search (d <= 4)");
  require(l1_norm(x) != 0, "find_adapted_basis: base point must be nonzero");
  require(!probes.empty(), "find_adapted_basis: empty probe set");
  for (const Point& y : probes) require(y.dim() == d && l1_norm(y) > 0, "find_adapted_basis: bad probe direction");

  const auto group = SignedPermutation::all(d);
  AdaptedBasis out;
  out.base_point = x;
  if (d == 1) {
    out.g = {group[0]};
    out.quality_num = 1;
    out.quality_den = 1;
    return out;
  }

  // When the probes are symmetric, the worst ratio is invariant under
  // reordering g_2..g_d and under g_i(x) -> -g_i(x); enumerate multisets of
  // images up to sign instead of ordered tuples.
  const bool symmetric = closed_under_symmetries(probes, group);
  std::vector<Point> images;
  std::vector<size_t> image_owner;
  std::unordered_set<Point, PointHash> seen;
  for (size_t k = 0; k < group.size(); ++k) {
    const Point img = group[k].apply(x);
    if (seen.count(img)) continue;
    seen.insert(img);
    if (symmetric) seen.insert(-1 * img);
    images.push_back(img);
    image_owner.push_back(k);
  }

  BasisSearch search{d, l1_norm(x), probes, {}, images, std::vector<size_t>(static_cast<size_t>(d - 1), 0),
                     Ratio{-1, 1}, {}, &x};
  search.unordered = symmetric;
  for (const Point& y : probes) search.probe_norms.push_back(l1_norm(y));
  search.recurse(0, 0);

  out.g.push_back(group[0]);
  for (size_t idx : search.best_choice) out.g.push_back(group[image_owner[idx]]);
  const int64_t g = std::gcd(search.best.num, search.best.den);
  out.quality_num = search.best.num / (g ? g : 1);
  out.quality_den = search.best.den / (g ? g : 1);
  return out;
}

}  // namespace frogpass
