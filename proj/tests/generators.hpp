#pragma once

// Random inputs for the path-editing property tests.

#include <cmath>
#include <random>
#include <vector>

#include "rasim/geometry.hpp"
#include "rasim/pathedit.hpp"

namespace gen {

using rasim::Vec2;

enum class PairKind { Extension, Replacement, Parallel, Standalone, Random };

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Random walk of `n` points with steps in [step_lo, step_hi] and turns within +-max_turn radians.
inline std::vector<Vec2> walk(std::mt19937_64& rng, Vec2 start, double heading, int n, double step_lo,
                              double step_hi, double max_turn) {
  std::vector<Vec2> out{start};
  for (int k = 1; k < n; ++k) {
    heading += uniform(rng, -max_turn, max_turn);
    const double step = uniform(rng, step_lo, step_hi);
    out.push_back({out.back().x + step * std::cos(heading), out.back().y + step * std::sin(heading)});
  }
  return out;
}

/// An existing path: 4 to 9 waypoints, 10-40 m apart, gentle turns, random committed prefix.
inline rasim::PlannedPath old_path(std::mt19937_64& rng) {
  rasim::PlannedPath p;
  p.waypoints = walk(rng, {0, 0}, uniform(rng, -3.1, 3.1), uniform_int(rng, 4, 9), 10.0, 40.0, 0.7);
  p.committed_index = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(p.waypoints.size()) - 3));
  p.source = rasim::PathSource::Trajectory;
  return p;
}

inline Vec2 jitter(std::mt19937_64& rng, Vec2 p, double radius) {
  const double a = uniform(rng, -3.14159, 3.14159);
  const double r = radius * std::sqrt(uniform(rng, 0.0, 1.0));
  return {p.x + r * std::cos(a), p.y + r * std::sin(a)};
}

/// A new line for `old` whose shape targets the given merge outcome (the oracle decides the actual one).
inline std::vector<Vec2> new_line(std::mt19937_64& rng, const rasim::PlannedPath& old, PairKind kind) {
  const rasim::Polyline line(old.waypoints);
  const double s_c = line.cumulative_s()[old.committed_index];
  const double len = line.length();
  switch (kind) {
    case PairKind::Extension: {
      const Vec2 start = jitter(rng, line.back(), 3.4);
      const rasim::Vec2 t = line.tangent_at(len);
      return walk(rng, start, std::atan2(t.y, t.x) + uniform(rng, -0.6, 0.6), uniform_int(rng, 3, 8), 8.0, 30.0,
                  0.5);
    }
    case PairKind::Replacement: {
      const double a = uniform(rng, s_c, len);
      const double b = uniform(rng, s_c, len);
      const Vec2 pa = jitter(rng, line.at(a), 3.4);
      const Vec2 pb = jitter(rng, line.at(b), 3.4);
      std::vector<Vec2> out{pa};
      const int mids = uniform_int(rng, 0, 4);
      for (int k = 1; k <= mids; ++k) {
        const double f = static_cast<double>(k) / (mids + 1);
        out.push_back(jitter(rng, {pa.x + (pb.x - pa.x) * f, pa.y + (pb.y - pa.y) * f}, 6.0));
      }
      out.push_back(pb);
      return out;
    }
    case PairKind::Parallel: {
      const double a = uniform(rng, s_c, std::max(s_c, len - 25.0));
      const double b = std::min(len, a + uniform(rng, 25.0, 120.0));
      const double offset = uniform(rng, -0.95, 0.95);
      std::vector<Vec2> out;
      for (double s = a; s <= b; s += 2.0) {
        const Vec2 p = line.at(s);
        const Vec2 t = line.tangent_at(s);
        out.push_back({p.x - t.y * offset, p.y + t.x * offset});
      }
      if (out.size() < 3) return out;
      const Vec2 t0 = line.tangent_at(a);
      const Vec2 t1 = line.tangent_at(b);
      const double hook = uniform(rng, 4.0, 8.0) * (offset >= 0 ? 1.0 : -1.0);
      out.insert(out.begin(), {out.front().x - t0.y * hook - t0.x * 2.0, out.front().y + t0.x * hook - t0.y * 2.0});
      out.push_back({out.back().x - t1.y * hook + t1.x * 2.0, out.back().y + t1.x * hook + t1.y * 2.0});
      return out;
    }
    case PairKind::Standalone: {
      const Vec2 p = line.at(uniform(rng, 0.0, len));
      const Vec2 t = line.tangent_at(len / 2);
      const double off = uniform(rng, 10.0, 40.0) * (uniform(rng, 0, 1) < 0.5 ? -1.0 : 1.0);
      return walk(rng, {p.x - t.y * off, p.y + t.x * off}, uniform(rng, -3.1, 3.1), uniform_int(rng, 2, 6), 5.0, 20.0,
                  0.6);
    }
    case PairKind::Random:
      break;
  }
  const Vec2 p = jitter(rng, line.at(uniform(rng, 0.0, len)), 12.0);
  return walk(rng, p, uniform(rng, -3.1, 3.1), uniform_int(rng, 2, 10), 1.0, 25.0, 1.2);
}

}  // namespace gen
