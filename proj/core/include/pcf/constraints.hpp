#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pcf/spark_space.hpp"

namespace pcf {

/// A (dimension, trait) pair.
struct Atom {
  Dim dim;
  std::string trait;

  friend auto operator<=>(const Atom&, const Atom&) = default;
};

std::string to_string(const Atom& atom);

struct Exclusion {
  Atom first;
  Atom second;
};

/// Material implication: if `antecedent` is present, `consequent` must be too.
struct Requirement {
  Atom antecedent;
  Atom consequent;
};

/// Domain constraints bound to one SparkSpace. Every atom is checked against
/// that space on insertion.
class ConstraintSet {
 public:
  explicit ConstraintSet(SparkSpace space) : space_(std::move(space)) {}

  /// Throws UnknownAtom or SelfExclusion. Pairs are unordered; a repeat is ignored.
  ConstraintSet& add_exclusion(const Atom& a, const Atom& b);
  /// Throws UnknownAtom. Cycles are allowed.
  ConstraintSet& add_requirement(const Atom& antecedent, const Atom& consequent);
  /// Restricts `dim` to `allowed` under `context`. Throws UnknownAtom.
  ConstraintSet& restrict_context(const std::string& context, Dim dim, const std::vector<std::string>& allowed);

  [[nodiscard]] const SparkSpace& space() const noexcept { return space_; }
  [[nodiscard]] const std::vector<Exclusion>& exclusions() const noexcept { return exclusions_; }
  [[nodiscard]] const std::vector<Requirement>& requirements() const noexcept { return requirements_; }
  [[nodiscard]] const std::map<std::string, std::map<Dim, std::set<std::string>>>& contexts() const noexcept {
    return contexts_;
  }
  [[nodiscard]] bool has_context(std::string_view context) const;
  [[nodiscard]] bool empty() const noexcept;

 private:
  void check_atom(const Atom& a) const;

  SparkSpace space_;
  std::vector<Exclusion> exclusions_;
  std::vector<Requirement> requirements_;
  std::map<std::string, std::map<Dim, std::set<std::string>>> contexts_;
};

/// Parses the constraint document against `space`:
/// `{"exclusions": [[[dim,trait],[dim,trait]], ...],
///   "requirements": [{"if": [dim,trait], "then": [dim,trait]}, ...],
///   "contexts": {"ctx": {dim: [traits...]}}}`
/// Errors: SchemaError, UnknownAtom, SelfExclusion.
ConstraintSet parse_constraints(const SparkSpace& space, std::string_view json_text);
ConstraintSet load_constraints_file(const SparkSpace& space, const std::string& path);

struct Violation {
  enum class Kind { Exclusion, Requirement, Context };
  Kind kind;
  std::vector<Atom> atoms;
  std::string reason;
};

std::string_view to_string(Violation::Kind kind) noexcept;

struct ValidationReport {
  std::vector<Violation> violations;
  [[nodiscard]] bool valid() const noexcept { return violations.empty(); }
};

/// Reports every violated exclusion, unmet requirement and context breach.
/// Errors: UnknownContext, UnknownTrait (config not in the bound space).
ValidationReport validate_config(const AgentConfig& config, const ConstraintSet& constraints,
                                 std::optional<std::string_view> context = std::nullopt);

/// Index-level constraint checker used by filtering and counting.
class CompiledConstraints {
 public:
  CompiledConstraints(const ConstraintSet& constraints, std::optional<std::string_view> context);

  [[nodiscard]] bool satisfied(const TraitIndices& idx) const noexcept;
  /// True if no constraint whose dimensions all lie in [0, depth] is violated.
  [[nodiscard]] bool partial_ok(const TraitIndices& idx, std::size_t depth) const noexcept;
  /// True if some constraint mentions a dimension at position >= depth.
  [[nodiscard]] bool constrains_from(std::size_t depth) const noexcept { return constrained_from_[depth]; }

 private:
  struct Pair {
    std::size_t dim_a, trait_a, dim_b, trait_b;
  };
  // checks keyed by the deepest dimension they touch, so partial_ok only
  // evaluates what became decidable at that depth
  std::array<std::vector<Pair>, kDimCount> exclusions_at_;
  std::array<std::vector<Pair>, kDimCount> requirements_at_;
  std::array<std::optional<std::vector<bool>>, kDimCount> allowed_;
  std::array<bool, kDimCount + 1> constrained_from_{};
};

/// Lazy stream of the configurations passing validate_config, in enumeration order.
class FilteredRange {
 public:
  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = AgentConfig;
    using difference_type = std::ptrdiff_t;
    using pointer = const AgentConfig*;
    using reference = const AgentConfig&;

    iterator() = default;
    reference operator*() const { return *it_; }
    pointer operator->() const { return &*it_; }
    iterator& operator++();
    void operator++(int) { ++*this; }
    friend bool operator==(const iterator& a, const iterator& b) noexcept { return a.it_ == b.it_; }

   private:
    friend class FilteredRange;
    iterator(const FilteredRange* owner, ConfigRange::iterator it);
    void skip();

    const FilteredRange* owner_ = nullptr;
    ConfigRange::iterator it_;
  };

  FilteredRange(const ConstraintSet& constraints, std::optional<std::string_view> context,
                const PartialAssignment& fixed = {});

  [[nodiscard]] iterator begin() const { return iterator(this, configs_.begin()); }
  [[nodiscard]] iterator end() const { return iterator(this, configs_.end()); }

 private:
  ConfigRange configs_;
  CompiledConstraints checks_;
};

/// Errors: SpaceMismatch if `constraints` is bound to another space, UnknownContext.
FilteredRange filter_space(const SparkSpace& space, const ConstraintSet& constraints,
                           std::optional<std::string_view> context = std::nullopt,
                           const PartialAssignment& fixed = {});

/// |S_valid| by dimension-ordered backtracking with pruning on partial assignments.
BigInt count_valid(const SparkSpace& space, const ConstraintSet& constraints,
                   std::optional<std::string_view> context = std::nullopt);

}  // namespace pcf
