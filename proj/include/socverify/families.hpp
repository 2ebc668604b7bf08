#pragma once

#include "socverify/errors.hpp"
#include "socverify/problem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace socv {

struct FamilySpec {
  bool constants = true;
  std::size_t switches = 20;
  std::size_t random = 50;
  std::uint64_t seed = 0;
  /// Random controls are constant on this many equal blocks of intervals.
  std::size_t random_blocks = 16;
};

enum class FamilyKind { constant, switching, random };

inline const char* to_string(FamilyKind k) {
  switch (k) {
  case FamilyKind::constant: return "constant";
  case FamilyKind::switching: return "switch";
  case FamilyKind::random: return "random";
  }
  return "?";
}

struct ControlFamily {
  std::vector<PiecewiseControl> members;
  std::vector<std::string> labels;
  std::vector<FamilyKind> kinds;

  std::size_t size() const noexcept { return members.size(); }

  ControlFamily subfamily(FamilyKind kind) const {
    ControlFamily out;
    for (std::size_t i = 0; i < members.size(); ++i)
      if (kinds[i] == kind) out.add(members[i], labels[i], kinds[i]);
    return out;
  }

  void add(PiecewiseControl c, std::string label, FamilyKind kind) {
    members.push_back(std::move(c));
    labels.push_back(std::move(label));
    kinds.push_back(kind);
  }
};

/// Lexicographically first pair (i < j) of maximal distance.
inline std::pair<std::size_t, std::size_t> farthest_pair(const ControlDomain& d) {
  std::pair<std::size_t, std::size_t> best{0, 0};
  double best_d = -1.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = i + 1; j < d.size(); ++j)
      if (d.distance(i, j) > best_d) {
        best_d = d.distance(i, j);
        best = {i, j};
      }
  return best;
}

/// Deterministic fitting family, in order: every constant control; single-switch controls
/// between the farthest domain pair, switching at t = j T / (switches + 1) with alternating
/// orientation; seeded random block controls.
inline ControlFamily make_family(const std::shared_ptr<const ControlDomain>& domain, std::size_t intervals,
                                 const FamilySpec& spec) {
  if (!domain) throw DomainError("make_family: missing domain");
  if (intervals == 0) throw DomainError("make_family: need at least one interval");
  ControlFamily fam;
  if (spec.constants)
    for (std::size_t i = 0; i < domain->size(); ++i)
      fam.add(PiecewiseControl::constant(domain, intervals, i), "constant " + domain->label(i), FamilyKind::constant);

  if (spec.switches > 0 && domain->size() > 1) {
    const auto [a, b] = farthest_pair(*domain);
    for (std::size_t j = 1; j <= spec.switches; ++j) {
      const auto at = static_cast<std::size_t>(
          std::llround(static_cast<double>(j) * static_cast<double>(intervals) / static_cast<double>(spec.switches + 1)));
      const std::size_t first = (j % 2 == 1) ? a : b;
      const std::size_t second = (j % 2 == 1) ? b : a;
      std::vector<std::size_t> v(intervals, second);
      for (std::size_t k = 0; k < at && k < intervals; ++k) v[k] = first;
      fam.add(PiecewiseControl(domain, std::move(v)),
              "switch " + std::to_string(j) + "/" + std::to_string(spec.switches + 1) + " " + domain->label(first) +
                  " -> " + domain->label(second),
              FamilyKind::switching);
    }
  }

  if (spec.random > 0) {
    const std::size_t blocks = std::max<std::size_t>(1, std::min(spec.random_blocks, intervals));
    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<std::size_t> pick(0, domain->size() - 1);
    for (std::size_t r = 0; r < spec.random; ++r) {
      std::vector<std::size_t> v(intervals);
      for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t value = pick(rng);
        const std::size_t lo = b * intervals / blocks;
        const std::size_t hi = (b + 1) * intervals / blocks;
        for (std::size_t k = lo; k < hi; ++k) v[k] = value;
      }
      fam.add(PiecewiseControl(domain, std::move(v)), "random " + std::to_string(r), FamilyKind::random);
    }
  }
  return fam;
}

} // namespace socv
