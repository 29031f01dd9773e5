#pragma once

// Finite site over partial SPARK configurations. A SiteObject pins a subset
// of dimensions under one instruction context; a cover is a family of such
// objects jointly covering a target; a local section assigns a behavior value
// to each covered dimension. Restriction is key-subset projection, and two
// objects overlap on the dimensions they both cover with the same trait.

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pcf/spark_space.hpp"

namespace pcf {

class ContextId {
 public:
  /// Throws InvariantViolation on an empty label.
  explicit ContextId(std::string label);
  [[nodiscard]] const std::string& label() const noexcept { return label_; }
  friend auto operator<=>(const ContextId&, const ContextId&) = default;

 private:
  std::string label_;
};

using BehaviorValue = std::variant<std::string, double>;

std::string to_string(const BehaviorValue& v);

struct SiteObject {
  ContextId context;
  std::map<Dim, std::string> assignment;

  [[nodiscard]] std::vector<Dim> covered_dims() const;
  [[nodiscard]] bool covers(Dim d) const { return assignment.count(d) != 0; }
  friend bool operator==(const SiteObject&, const SiteObject&) = default;
};

/// Throws UnknownTrait if an assigned label is absent from `space`,
/// InvariantViolation if nothing is covered.
void check_object(const SiteObject& object, const SparkSpace& space);

struct Cover {
  SiteObject target;
  std::vector<SiteObject> family;
};

struct LocalSection {
  SiteObject over;
  std::map<Dim, BehaviorValue> values;

  friend bool operator==(const LocalSection&, const LocalSection&) = default;
};

/// Throws InvariantViolation unless the value keys equal the covered dims.
void check_section(const LocalSection& section);

/// Key-subset projection of `section` onto `sub`, which must pin a subset of
/// the section's dimensions with the same traits (else InvalidRestriction).
LocalSection restrict_section(const LocalSection& section, const SiteObject& sub);

struct CoverCheck {
  bool ok = true;
  std::vector<Dim> uncovered;
  std::vector<std::string> diagnostics;
};

/// Componentwise cover condition: every family member pins a subset of the
/// target's dimensions with matching traits, and each target dimension is
/// pinned by at least one member. Throws ContextMismatch.
CoverCheck check_cover(const Cover& cover);

struct Conflict {
  std::size_t first;
  std::size_t second;
  Dim dim;

  friend auto operator<=>(const Conflict&, const Conflict&) = default;
};

/// Every (i, j, dim) with i < j where both sections pin `dim` to the same
/// trait under the same context but carry different values.
std::vector<Conflict> check_compatibility(std::span<const LocalSection> sections);

class GlueResult {
 public:
  static GlueResult success(LocalSection s) { return GlueResult(std::move(s), {}); }
  static GlueResult failure(std::vector<Conflict> c) { return GlueResult(std::nullopt, std::move(c)); }

  [[nodiscard]] bool ok() const noexcept { return section_.has_value(); }
  [[nodiscard]] const LocalSection& section() const { return section_.value(); }
  [[nodiscard]] const std::vector<Conflict>& conflicts() const noexcept { return conflicts_; }

 private:
  GlueResult(std::optional<LocalSection> s, std::vector<Conflict> c)
      : section_(std::move(s)), conflicts_(std::move(c)) {}

  std::optional<LocalSection> section_;
  std::vector<Conflict> conflicts_;
};

/// Glues one local section per family member into the section over the
/// target. A failed cover check or misaligned sections throw CoverInvalid;
/// incompatible sections yield a failed result carrying the conflicts.
GlueResult glue(const Cover& cover, std::span<const LocalSection> sections);

/// Per-dimension relabeling with a behavior-value transform.
struct TraitMap {
  Dim dimension;
  std::map<std::string, std::string> mapping;
  std::function<BehaviorValue(const BehaviorValue&)> value_transform;
};

/// Throws NonInjectiveMap, or UnknownTrait when `space` is given and a domain label is absent.
TraitMap make_trait_map(Dim dimension, std::map<std::string, std::string> mapping,
                        std::function<BehaviorValue(const BehaviorValue&)> value_transform,
                        const SparkSpace* space = nullptr);

/// Objects not pinning tmap.dimension pass through unchanged. Throws UnmappedTrait.
SiteObject translate(const SiteObject& object, const TraitMap& tmap);
Cover translate(const Cover& cover, const TraitMap& tmap);
LocalSection translate(const LocalSection& section, const TraitMap& tmap);

/// Named objects and covers read from a site document.
struct Site {
  std::map<std::string, SiteObject> objects;
  struct NamedCover {
    std::string target;
    std::vector<std::string> family;
  };
  std::vector<NamedCover> covers;

  [[nodiscard]] Cover resolve(const NamedCover& c) const;
};

/// `{"objects": {name: {"context": c, "assignment": {dim: trait}}},
///   "covers": [{"target": name, "family": [names...]}]}`
Site parse_site(std::string_view json_text);
/// `{"sections": [{"over": object-name, "values": {dim: string|number}}]}`
/// Returns sections keyed by object name.
std::map<std::string, LocalSection> parse_sections(std::string_view json_text, const Site& site);

}  // namespace pcf
