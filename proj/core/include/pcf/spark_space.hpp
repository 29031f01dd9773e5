#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace pcf {

using BigInt = boost::multiprecision::cpp_int;

/// The five SPARK dimensions in canonical order.
enum class Dim : std::uint8_t { Skills = 0, Personalities, Approaches, Resources, Knowledge };

inline constexpr std::size_t kDimCount = 5;
inline constexpr std::array<Dim, kDimCount> kAllDims{Dim::Skills, Dim::Personalities, Dim::Approaches,
                                                     Dim::Resources, Dim::Knowledge};

constexpr std::size_t index_of(Dim d) noexcept { return static_cast<std::size_t>(d); }

/// Document key for a dimension: "skills", "personalities", ...
std::string_view dim_key(Dim d) noexcept;
/// Display name: "Skills", "Personalities", ...
std::string_view dim_name(Dim d) noexcept;
/// Accepts either the document key or the display name.
std::optional<Dim> parse_dim(std::string_view text) noexcept;

class Dimension {
 public:
  Dimension(Dim name, std::vector<std::string> traits);

  [[nodiscard]] Dim name() const noexcept { return name_; }
  [[nodiscard]] const std::vector<std::string>& traits() const noexcept { return traits_; }
  [[nodiscard]] std::size_t size() const noexcept { return traits_.size(); }
  [[nodiscard]] std::optional<std::size_t> find(std::string_view label) const noexcept;

  friend bool operator==(const Dimension&, const Dimension&) = default;

 private:
  Dim name_;
  std::vector<std::string> traits_;
};

using TraitIndices = std::array<std::size_t, kDimCount>;

/// One agent: a trait per dimension plus optional 1..10 intensities.
struct AgentConfig {
  std::array<std::string, kDimCount> traits;
  std::array<std::optional<int>, kDimCount> intensities{};

  [[nodiscard]] const std::string& trait(Dim d) const { return traits[index_of(d)]; }

  friend bool operator==(const AgentConfig&, const AgentConfig&) = default;
};

/// Pins a subset of dimensions to fixed traits; the empty assignment pins nothing.
struct PartialAssignment {
  std::array<std::optional<std::string>, kDimCount> fixed{};

  PartialAssignment& set(Dim d, std::string label) {
    fixed[index_of(d)] = std::move(label);
    return *this;
  }
  [[nodiscard]] const std::optional<std::string>& get(Dim d) const { return fixed[index_of(d)]; }
  [[nodiscard]] bool empty() const noexcept;
};

class SparkSpace {
 public:
  [[nodiscard]] const Dimension& dimension(Dim d) const { return dims_[index_of(d)]; }
  [[nodiscard]] const std::array<Dimension, kDimCount>& dimensions() const noexcept { return dims_; }
  [[nodiscard]] std::array<std::size_t, kDimCount> sizes() const noexcept;

  /// Index of `label` in dimension `d`; throws UnknownTrait.
  [[nodiscard]] std::size_t trait_index(Dim d, std::string_view label) const;
  /// Trait indices of every dimension of `config`; throws UnknownTrait.
  [[nodiscard]] TraitIndices indices_of(const AgentConfig& config) const;
  [[nodiscard]] AgentConfig config_at(const TraitIndices& idx) const;

  friend bool operator==(const SparkSpace&, const SparkSpace&) = default;

 private:
  friend SparkSpace build_space(const std::map<Dim, std::vector<std::string>>&);
  friend SparkSpace build_space(const std::map<std::string, std::vector<std::string>>&);
  explicit SparkSpace(std::array<Dimension, kDimCount> dims) : dims_(std::move(dims)) {}

  std::array<Dimension, kDimCount> dims_;
};

/// Errors: MissingDimension, DuplicateTrait, EmptyDimension.
SparkSpace build_space(const std::map<Dim, std::vector<std::string>>& dims);
/// Same, keyed by document key or display name; unrecognised names are a SchemaError.
SparkSpace build_space(const std::map<std::string, std::vector<std::string>>& dims);

/// Parses `{"dimensions": {"skills": [...], ...}}`.
SparkSpace parse_space(std::string_view json_text);
SparkSpace load_space_file(const std::string& path);

BigInt possibility_count(const SparkSpace& space);
/// Size of the slice selected by `fixed` (product of the free dimension sizes).
BigInt slice_count(const SparkSpace& space, const PartialAssignment& fixed);
/// possibility_count(space)^n; throws ZeroAgents for n == 0.
BigInt multi_agent_count(const SparkSpace& space, std::uint64_t n);
/// Number of non-empty subsets of a pool: 2^n - 1, and 0 for an empty pool.
BigInt subset_count(std::uint64_t pool_size);

/// Lazy odometer over the configurations of a space that match a partial
/// assignment. Yields in lexicographic S,P,A,R,K order of declaration index.
class ConfigRange {
 public:
  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = AgentConfig;
    using difference_type = std::ptrdiff_t;
    using pointer = const AgentConfig*;
    using reference = const AgentConfig&;

    iterator() = default;

    reference operator*() const { return current_; }
    pointer operator->() const { return &current_; }
    iterator& operator++();
    void operator++(int) { ++*this; }

    [[nodiscard]] const TraitIndices& indices() const noexcept { return idx_; }

    friend bool operator==(const iterator& a, const iterator& b) noexcept {
      return a.done_ == b.done_ && (a.done_ || a.idx_ == b.idx_);
    }

   private:
    friend class ConfigRange;
    iterator(const ConfigRange* owner, bool done);
    void refresh(std::size_t from_dim);

    const ConfigRange* owner_ = nullptr;
    TraitIndices idx_{};
    AgentConfig current_;
    bool done_ = true;
  };

  ConfigRange(SparkSpace space, const PartialAssignment& fixed);

  [[nodiscard]] iterator begin() const { return iterator(this, false); }
  [[nodiscard]] iterator end() const { return iterator(this, true); }
  [[nodiscard]] const SparkSpace& space() const noexcept { return space_; }

 private:
  SparkSpace space_;
  std::array<std::optional<std::size_t>, kDimCount> pinned_{};
};

/// Throws UnknownTrait if `fixed` references a label absent from the space.
ConfigRange enumerate(const SparkSpace& space, const PartialAssignment& fixed = {});

}  // namespace pcf
