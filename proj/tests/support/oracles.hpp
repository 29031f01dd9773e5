#pragma once

// Independent reference implementations used by the unit and acceptance
// suites. None of these call into the code they check beyond the public
// value types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "pcf/cafe_sim.hpp"
#include "pcf/coherence.hpp"
#include "pcf/constraints.hpp"
#include "pcf/spark_space.hpp"

namespace pcf::testing {

using Rng = std::mt19937_64;

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline std::vector<std::string> labels(char prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::string(1, prefix) + std::to_string(i));
  return out;
}

inline SparkSpace space_of_sizes(const std::array<std::size_t, kDimCount>& sizes) {
  static constexpr char kPrefix[] = {'s', 'p', 'a', 'r', 'k'};
  std::map<Dim, std::vector<std::string>> dims;
  for (Dim d : kAllDims) dims[d] = labels(kPrefix[index_of(d)], sizes[index_of(d)]);
  return build_space(dims);
}

/// Random sizes whose product stays at or below `max_configs`.
inline SparkSpace random_space(Rng& rng, std::size_t max_configs) {
  while (true) {
    std::array<std::size_t, kDimCount> sizes{};
    std::size_t product = 1;
    for (auto& s : sizes) {
      s = 1 + uniform_index(rng, 12);
      product *= s;
    }
    if (product <= max_configs) return space_of_sizes(sizes);
  }
}

inline Atom random_atom(Rng& rng, const SparkSpace& space) {
  const Dim d = kAllDims[uniform_index(rng, kDimCount)];
  const auto& traits = space.dimension(d).traits();
  return {d, traits[uniform_index(rng, traits.size())]};
}

/// Random exclusions, requirements and up to two restricted contexts.
inline ConstraintSet random_constraints(Rng& rng, const SparkSpace& space) {
  ConstraintSet cs(space);
  const std::size_t n_ex = uniform_index(rng, 7);
  for (std::size_t i = 0; i < n_ex; ++i) {
    Atom a = random_atom(rng, space);
    Atom b = random_atom(rng, space);
    if (a == b) continue;
    cs.add_exclusion(a, b);
  }
  const std::size_t n_req = uniform_index(rng, 4);
  for (std::size_t i = 0; i < n_req; ++i) cs.add_requirement(random_atom(rng, space), random_atom(rng, space));
  const std::size_t n_ctx = uniform_index(rng, 3);
  for (std::size_t c = 0; c < n_ctx; ++c) {
    const Dim d = kAllDims[uniform_index(rng, kDimCount)];
    std::vector<std::string> allowed;
    for (const auto& t : space.dimension(d).traits()) {
      if (rng() % 2 == 0) allowed.push_back(t);
    }
    cs.restrict_context("ctx" + std::to_string(c), d, allowed);
  }
  return cs;
}

/// Rule check written directly against trait labels.
inline bool brute_force_ok(const std::array<std::string, kDimCount>& traits, const ConstraintSet& cs,
                           const std::optional<std::string>& ctx) {
  auto has = [&](const Atom& a) { return traits[index_of(a.dim)] == a.trait; };
  for (const auto& e : cs.exclusions()) {
    if (has(e.first) && has(e.second)) return false;
  }
  for (const auto& r : cs.requirements()) {
    if (has(r.antecedent) && !has(r.consequent)) return false;
  }
  if (ctx) {
    for (const auto& [d, allowed] : cs.contexts().at(*ctx)) {
      if (!allowed.count(traits[index_of(d)])) return false;
    }
  }
  return true;
}

/// Nested-loop count over the full product, no pruning.
inline std::uint64_t brute_force_count(const SparkSpace& space, const ConstraintSet& cs,
                                       const std::optional<std::string>& ctx) {
  const auto& S = space.dimension(Dim::Skills).traits();
  const auto& P = space.dimension(Dim::Personalities).traits();
  const auto& A = space.dimension(Dim::Approaches).traits();
  const auto& R = space.dimension(Dim::Resources).traits();
  const auto& K = space.dimension(Dim::Knowledge).traits();
  std::uint64_t n = 0;
  for (const auto& s : S)
    for (const auto& p : P)
      for (const auto& a : A)
        for (const auto& r : R)
          for (const auto& k : K) n += brute_force_ok({s, p, a, r, k}, cs, ctx) ? 1 : 0;
  return n;
}

// ---- gluing ----

struct GlueCase {
  Cover cover;
  std::vector<LocalSection> sections;
};

/// A random target over a random subset of dimensions, a covering family of
/// sub-objects, and sections that agree unless `corrupt` perturbs some values.
inline GlueCase random_glue_case(Rng& rng, const SparkSpace& space, bool corrupt) {
  std::vector<Dim> dims;
  while (dims.empty()) {
    dims.clear();
    for (Dim d : kAllDims) {
      if (rng() % 3 != 0) dims.push_back(d);
    }
  }
  const ContextId ctx("ctx" + std::to_string(rng() % 3));
  SiteObject target{ctx, {}};
  for (Dim d : dims) {
    const auto& traits = space.dimension(d).traits();
    target.assignment[d] = traits[uniform_index(rng, traits.size())];
  }

  // the global truth the sections restrict from
  std::map<Dim, BehaviorValue> truth;
  for (Dim d : dims) {
    if (rng() % 2) truth[d] = static_cast<double>(rng() % 5);
    else truth[d] = "b" + std::to_string(rng() % 5);
  }

  GlueCase gc{{target, {}}, {}};
  const std::size_t members = 1 + uniform_index(rng, 4);
  for (std::size_t m = 0; m < members; ++m) {
    SiteObject member{ctx, {}};
    for (Dim d : dims) {
      if (rng() % 2) member.assignment[d] = target.assignment.at(d);
    }
    if (member.assignment.empty()) {
      const Dim d = dims[uniform_index(rng, dims.size())];
      member.assignment[d] = target.assignment.at(d);
    }
    gc.cover.family.push_back(member);
  }
  for (Dim d : dims) {
    bool covered = false;
    for (const auto& member : gc.cover.family) covered = covered || member.covers(d);
    if (!covered) gc.cover.family[uniform_index(rng, gc.cover.family.size())].assignment[d] = target.assignment.at(d);
  }

  for (const auto& member : gc.cover.family) {
    LocalSection s{member, {}};
    for (const auto& [d, _] : member.assignment) {
      BehaviorValue v = truth.at(d);
      if (corrupt && rng() % 4 == 0) v = "x" + std::to_string(rng() % 2);
      s.values[d] = v;
    }
    gc.sections.push_back(s);
  }
  return gc;
}

/// All pairwise disagreements on shared dimensions, as (i, j, dim) with i < j.
inline std::vector<std::tuple<std::size_t, std::size_t, Dim>> brute_force_conflicts(
    const std::vector<LocalSection>& sections) {
  std::vector<std::tuple<std::size_t, std::size_t, Dim>> out;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    for (std::size_t j = i + 1; j < sections.size(); ++j) {
      if (sections[i].over.context != sections[j].over.context) continue;
      for (Dim d : kAllDims) {
        const auto a = sections[i].over.assignment.find(d);
        const auto b = sections[j].over.assignment.find(d);
        if (a == sections[i].over.assignment.end() || b == sections[j].over.assignment.end()) continue;
        if (a->second != b->second) continue;
        if (sections[i].values.at(d) != sections[j].values.at(d)) out.emplace_back(i, j, d);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Union of the section maps; only meaningful when no conflicts exist.
inline std::map<Dim, BehaviorValue> brute_force_merge(const std::vector<LocalSection>& sections) {
  std::map<Dim, BehaviorValue> out;
  for (const auto& s : sections) {
    for (const auto& [d, v] : s.values) out.emplace(d, v);
  }
  return out;
}

/// Every assignment over the target dims drawn from the values the sections
/// use (plus a decoy) that restricts to each section; the count must be 1.
inline std::size_t count_amalgamations(const Cover& cover, const std::vector<LocalSection>& sections) {
  std::vector<Dim> dims;
  for (const auto& [d, _] : cover.target.assignment) dims.push_back(d);
  std::vector<std::vector<BehaviorValue>> candidates(dims.size());
  for (std::size_t k = 0; k < dims.size(); ++k) {
    std::set<std::string> seen;
    for (const auto& s : sections) {
      auto it = s.values.find(dims[k]);
      if (it != s.values.end() && seen.insert(to_string(it->second)).second) candidates[k].push_back(it->second);
    }
    candidates[k].push_back(std::string("decoy"));
  }
  std::size_t found = 0;
  std::vector<std::size_t> pick(dims.size(), 0);
  while (true) {
    bool ok = true;
    for (const auto& s : sections) {
      for (const auto& [d, v] : s.values) {
        const auto k = static_cast<std::size_t>(std::find(dims.begin(), dims.end(), d) - dims.begin());
        ok = ok && candidates[k][pick[k]] == v;
      }
    }
    found += ok ? 1 : 0;
    std::size_t k = dims.size();
    while (k > 0) {
      --k;
      if (++pick[k] < candidates[k].size()) break;
      pick[k] = 0;
      if (k == 0) return found;
    }
    if (dims.empty()) return found;
  }
}

// ---- simulation ----

/// Straight-line re-derivation of one record from the documented stream
/// layout; shares no code with the simulator.
inline SimRecord reference_record(const Scenario& sc, int star, std::uint64_t index) {
  auto splitmix = [](std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  const std::uint64_t gamma = 0x9E3779B97F4A7C15ULL;
  const std::uint64_t key = splitmix(sc.master_seed + gamma * static_cast<std::uint64_t>(star));
  const std::uint64_t seed = splitmix(key ^ (0xD1B54A32D192ED03ULL * (index + 1)));
  std::uint64_t k = 0;
  std::vector<double> normals;
  auto uniform = [&] {
    ++k;
    const std::uint64_t w = splitmix(seed + gamma * k);
    return (static_cast<double>(w >> 11) + 0.5) / 9007199254740992.0;
  };
  auto normal = [&](std::size_t i) {
    while (normals.size() <= i) {
      const double u1 = uniform();
      const double u2 = uniform();
      const double r = std::sqrt(-2.0 * std::log(u1));
      normals.push_back(r * std::cos(2.0 * M_PI * u2));
      normals.push_back(r * std::sin(2.0 * M_PI * u2));
    }
    return normals[i];
  };

  const TierSpec* tier = nullptr;
  for (const auto& t : sc.tiers) {
    if (t.star_level == star) tier = &t;
  }
  std::size_t draw = 0;
  long total = 0;
  double mu = 0.0, var = 0.0;
  for (const auto& s : tier->stages) {
    double x = s.mean + s.std * normal(draw++);
    long v = std::lround(x);
    if (v < s.floor) v = s.floor;
    total += v;
    mu += s.mean;
    var += s.std * s.std;
  }
  if (total < tier->time_clamp.min) total = tier->time_clamp.min;
  if (total > tier->time_clamp.max) total = tier->time_clamp.max;
  const double z = var > 0 ? (static_cast<double>(total) - mu) / std::sqrt(var) : 0.0;

  SimRecord rec{star, index, static_cast<int>(total), 0.0, {}};
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < tier->factors.size(); ++i) {
    const auto& f = tier->factors[i];
    double score = std::round(f.mean + f.kappa * z + f.std * normal(draw++));
    score = std::min(10.0, std::max(0.0, score));
    rec.factor_scores.push_back(static_cast<std::uint8_t>(score));
    num += tier->weights[i] * score;
    den += tier->weights[i];
  }
  rec.satisfaction_score = num / den;
  return rec;
}

}  // namespace pcf::testing
