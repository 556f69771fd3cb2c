#pragma once

#include <drenv/types.hpp>

#include <algorithm>
#include <functional>
#include <vector>

namespace drenv {

/// Brute-force search grid: points center + i * resolution, i integer,
/// |i * resolution| <= radius per coordinate.
///
/// When the full grid exceeds `budget` points it is searched coarse to fine:
/// the coarsest level uses resolution * 10^k, and each following level
/// rescans a box of +-2 coarse steps around the `candidates` best points.
/// All levels sit on the same fine grid.
struct Lattice {
  double radius = 10.0;
  double resolution = 1e-3;
  std::size_t budget = 250000;
  int candidates = 8;
};

struct LatticePoint {
  Vec x;
  double value = kInf;
};

struct LatticeMin {
  double value = kInf;
  Vec argmin;
  /// Argmin sits on the outer shell of the grid: the infimum is probably
  /// approached outside the searched box (escape to infinity).
  bool on_boundary = false;
  /// Best point of each refined region, ascending by value.
  std::vector<LatticePoint> candidates;
  std::size_t evaluations = 0;
};

namespace detail {

using IVec = std::vector<long long>;

/// Calls visit(idx) for every idx with lo <= idx <= hi, idx = lo + j*step.
template <class Visit>
void for_each_index(const IVec& lo, const IVec& hi, long long step, Visit&& visit) {
  const std::size_t d = lo.size();
  for (std::size_t i = 0; i < d; ++i)
    if (lo[i] > hi[i]) return;
  IVec idx = lo;
  while (true) {
    visit(idx);
    std::size_t i = 0;
    for (; i < d; ++i) {
      idx[i] += step;
      if (idx[i] <= hi[i]) break;
      idx[i] = lo[i];
    }
    if (i == d) return;
  }
}

/// Strict preference: lower value, then closer to the center, then
/// lexicographically larger.
inline bool lattice_better(double va, const IVec& a, double vb, const IVec& b) {
  if (va != vb) return va < vb;
  long double na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += static_cast<long double>(a[i]) * a[i];
    nb += static_cast<long double>(b[i]) * b[i];
  }
  if (na != nb) return na < nb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] > b[i];
  }
  return false;
}

}  // namespace detail

inline LatticeMin lattice_minimize(const std::function<double(const Vec&)>& fn,
                                   Index dim, const Lattice& lat,
                                   const Vec& center_in = Vec()) {
  if (dim <= 0) throw PreconditionError("lattice: dimension must be positive");
  if (!(lat.radius > 0.0) || !(lat.resolution > 0.0) ||
      lat.resolution > lat.radius)
    throw PreconditionError("lattice: need 0 < resolution <= radius");
  const Vec center = center_in.size() == 0 ? Vec::Zero(dim) : center_in;
  if (center.size() != dim) throw PreconditionError("lattice: center dimension");
  using detail::IVec;
  const std::size_t d = static_cast<std::size_t>(dim);
  const long long N = std::llround(std::floor(lat.radius / lat.resolution + 1e-9));

  auto point = [&](const IVec& idx) {
    Vec x(dim);
    for (std::size_t i = 0; i < d; ++i)
      x(static_cast<Index>(i)) =
          center(static_cast<Index>(i)) + static_cast<double>(idx[i]) * lat.resolution;
    return x;
  };

  // coarsest step (in fine units) whose full grid fits the budget
  long long step = 1;
  auto grid_size = [&](long long st) {
    const double per_axis = 2.0 * std::floor(static_cast<double>(N) / st) + 1.0;
    return std::pow(per_axis, static_cast<double>(d));
  };
  while (grid_size(step) > static_cast<double>(lat.budget) && step < N) step *= 10;

  LatticeMin out;
  struct Cand {
    IVec idx;
    double value;
  };

  // level 0: full scan
  std::vector<Cand> all;
  {
    const long long M = (N / step) * step;
    IVec lo(d, -M), hi(d, M);
    detail::for_each_index(lo, hi, step, [&](const IVec& idx) {
      const double v = fn(point(idx));
      ++out.evaluations;
      if (!std::isnan(v) && v < kInf) all.push_back({idx, v});
    });
  }
  if (all.empty()) {
    out.argmin = center;
    return out;
  }
  std::sort(all.begin(), all.end(), [](const Cand& a, const Cand& b) {
    return detail::lattice_better(a.value, a.idx, b.value, b.idx);
  });
  std::vector<Cand> cands;
  for (const auto& c : all) {
    bool separated = true;
    for (const auto& k : cands) {
      long long cheb = 0;
      for (std::size_t i = 0; i < d; ++i)
        cheb = std::max(cheb, std::abs(c.idx[i] - k.idx[i]));
      if (cheb <= 2 * step) {
        separated = false;
        break;
      }
    }
    if (separated) cands.push_back(c);
    if (static_cast<int>(cands.size()) >= std::max(1, lat.candidates)) break;
  }
  all.clear();

  // refinement levels
  while (step > 1) {
    const long long fine = step / 10;
    for (auto& c : cands) {
      IVec lo(d), hi(d);
      for (std::size_t i = 0; i < d; ++i) {
        lo[i] = std::max(-N, c.idx[i] - 2 * step);
        hi[i] = std::min(N, c.idx[i] + 2 * step);
        // align to the finer grid
        lo[i] = (lo[i] >= 0 ? (lo[i] + fine - 1) / fine : -((-lo[i]) / fine)) * fine;
      }
      Cand best = c;
      detail::for_each_index(lo, hi, fine, [&](const IVec& idx) {
        const double v = fn(point(idx));
        ++out.evaluations;
        if (!std::isnan(v) && detail::lattice_better(v, idx, best.value, best.idx))
          best = {idx, v};
      });
      c = best;
    }
    step = fine;
  }

  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    return detail::lattice_better(a.value, a.idx, b.value, b.idx);
  });
  for (const auto& c : cands) out.candidates.push_back({point(c.idx), c.value});
  out.value = cands.front().value;
  out.argmin = point(cands.front().idx);
  for (std::size_t i = 0; i < d; ++i)
    if (std::abs(cands.front().idx[i]) >= N) out.on_boundary = true;
  return out;
}

}  // namespace drenv
