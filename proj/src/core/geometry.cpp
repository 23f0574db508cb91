#include "core/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace qpmsa {

Site make_site(std::initializer_list<int> xs) {
  Site s{};
  int i = 0;
  for (int v : xs) {
    if (i >= kMaxDim) throw std::invalid_argument("make_site: too many components");
    s[i++] = v;
  }
  return s;
}

HalfSite doubled(const Site& s) {
  HalfSite h{};
  for (int i = 0; i < kMaxDim; ++i) h[i] = 2 * s[i];
  return h;
}

bool is_integral(const HalfSite& h) {
  for (int i = 0; i < kMaxDim; ++i)
    if (h[i] % 2 != 0) return false;
  return true;
}

Site to_site(const HalfSite& h) {
  if (!is_integral(h)) throw std::invalid_argument("to_site: half-integer point");
  Site s{};
  for (int i = 0; i < kMaxDim; ++i) s[i] = h[i] / 2;
  return s;
}

int l1_norm(const Site& a, int dim) {
  int n = 0;
  for (int i = 0; i < dim; ++i) n += std::abs(a[i]);
  return n;
}

int l1_dist(const Site& a, const Site& b, int dim) {
  int n = 0;
  for (int i = 0; i < dim; ++i) n += std::abs(a[i] - b[i]);
  return n;
}

int linf_norm(const Site& a, int dim) {
  int n = 0;
  for (int i = 0; i < dim; ++i) n = std::max(n, std::abs(a[i]));
  return n;
}

int l1_dist2(const HalfSite& a, const HalfSite& b, int dim) {
  int n = 0;
  for (int i = 0; i < dim; ++i) n += std::abs(a[i] - b[i]);
  return n;
}

int l1_dist2_site(const Site& a, const HalfSite& b, int dim) {
  int n = 0;
  for (int i = 0; i < dim; ++i) n += std::abs(2 * a[i] - b[i]);
  return n;
}

std::string site_to_string(const Site& s, int dim) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < dim; ++i) os << (i ? "," : "") << s[i];
  os << ")";
  return os.str();
}

std::string half_to_string(const HalfSite& h, int dim) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < dim; ++i) {
    if (i) os << ",";
    if (h[i] % 2 == 0)
      os << h[i] / 2;
    else
      os << h[i] / 2.0;
  }
  os << ")";
  return os.str();
}

LatticeRegion::LatticeRegion(int dim, std::vector<Site> sites) : dim_(dim), sites_(std::move(sites)) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("LatticeRegion: bad dimension");
  if (sites_.empty()) throw std::invalid_argument("LatticeRegion: empty site list");
  for (auto& s : sites_)
    for (int i = dim; i < kMaxDim; ++i)
      if (s[i] != 0) throw std::invalid_argument("LatticeRegion: nonzero coordinate beyond dim");
  std::sort(sites_.begin(), sites_.end());
  if (std::adjacent_find(sites_.begin(), sites_.end()) != sites_.end())
    throw std::invalid_argument("LatticeRegion: duplicate site");
}

LatticeRegion LatticeRegion::box(int dim, const Site& center, int radius) {
  if (radius < 0) throw std::invalid_argument("box: negative radius");
  std::vector<Site> out;
  Site cur{};
  // odometer over [-radius, radius]^dim
  std::vector<int> off(dim, -radius);
  while (true) {
    for (int i = 0; i < dim; ++i) cur[i] = center[i] + off[i];
    out.push_back(cur);
    int k = dim - 1;
    while (k >= 0 && ++off[k] > radius) off[k--] = -radius;
    if (k < 0) break;
  }
  return LatticeRegion(dim, std::move(out));
}

LatticeRegion LatticeRegion::ball(int dim, const Site& center, int radius) {
  return ball_half(dim, doubled(center), 2 * radius);
}

LatticeRegion LatticeRegion::ball_half(int dim, const HalfSite& center2, int radius2) {
  if (radius2 < 0) throw std::invalid_argument("ball: negative radius");
  std::vector<Site> out;
  Site cur{};
  int r = radius2 / 2 + 1;
  std::vector<int> off(dim, -r);
  while (true) {
    int d2 = 0;
    for (int i = 0; i < dim; ++i) {
      int lo = center2[i] % 2 == 0 ? center2[i] / 2 : (center2[i] - 1) / 2;
      cur[i] = lo + off[i];
      d2 += std::abs(2 * cur[i] - center2[i]);
    }
    if (d2 <= radius2) out.push_back(cur);
    int k = dim - 1;
    while (k >= 0 && ++off[k] > r + 1) off[k--] = -r;
    if (k < 0) break;
  }
  return LatticeRegion(dim, std::move(out));
}

std::optional<int> LatticeRegion::index_of(const Site& s) const {
  auto it = std::lower_bound(sites_.begin(), sites_.end(), s);
  if (it == sites_.end() || *it != s) return std::nullopt;
  return static_cast<int>(it - sites_.begin());
}

bool LatticeRegion::contains_all(const LatticeRegion& other) const {
  for (const auto& s : other.sites_)
    if (!contains(s)) return false;
  return true;
}

bool LatticeRegion::intersects(const LatticeRegion& other) const {
  const LatticeRegion& small = size() <= other.size() ? *this : other;
  const LatticeRegion& big = size() <= other.size() ? other : *this;
  for (const auto& s : small.sites_)
    if (big.contains(s)) return true;
  return false;
}

LatticeRegion LatticeRegion::united(const LatticeRegion& other) const {
  std::vector<Site> out;
  out.reserve(sites_.size() + other.sites_.size());
  std::set_union(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
                 std::back_inserter(out));
  return LatticeRegion(dim_, std::move(out));
}

LatticeRegion LatticeRegion::minus(const LatticeRegion& other) const {
  std::vector<Site> out;
  std::set_difference(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
                      std::back_inserter(out));
  return LatticeRegion(dim_, std::move(out));
}

LatticeRegion LatticeRegion::intersected(const LatticeRegion& other) const {
  std::vector<Site> out;
  std::set_intersection(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
                        std::back_inserter(out));
  return LatticeRegion(dim_, std::move(out));
}

BoundaryCoupling boundary_coupling(const LatticeRegion& inner, const LatticeRegion& ambient) {
  if (!ambient.contains_all(inner))
    throw std::invalid_argument("boundary_coupling: inner not contained in ambient");
  BoundaryCoupling bc;
  const int d = inner.dim();
  for (const auto& z : inner.sites()) {
    for (int i = 0; i < d; ++i) {
      for (int sgn : {-1, +1}) {
        Site zp = z;
        zp[i] += sgn;
        if (!inner.contains(zp) && ambient.contains(zp)) bc.pairs.emplace_back(z, zp);
      }
    }
  }
  return bc;
}

}  // namespace qpmsa
