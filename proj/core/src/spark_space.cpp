#include "pcf/spark_space.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pcf/error.hpp"

namespace pcf {

namespace {

constexpr std::array<std::string_view, kDimCount> kKeys{"skills", "personalities", "approaches", "resources",
                                                        "knowledge"};
constexpr std::array<std::string_view, kDimCount> kNames{"Skills", "Personalities", "Approaches", "Resources",
                                                         "Knowledge"};

}  // namespace

std::string_view dim_key(Dim d) noexcept { return kKeys[index_of(d)]; }
std::string_view dim_name(Dim d) noexcept { return kNames[index_of(d)]; }

std::optional<Dim> parse_dim(std::string_view text) noexcept {
  for (Dim d : kAllDims) {
    if (text == kKeys[index_of(d)] || text == kNames[index_of(d)]) return d;
  }
  return std::nullopt;
}

Dimension::Dimension(Dim name, std::vector<std::string> traits) : name_(name), traits_(std::move(traits)) {}

std::optional<std::size_t> Dimension::find(std::string_view label) const noexcept {
  auto it = std::find(traits_.begin(), traits_.end(), label);
  if (it == traits_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - traits_.begin());
}

bool PartialAssignment::empty() const noexcept {
  return std::none_of(fixed.begin(), fixed.end(), [](const auto& f) { return f.has_value(); });
}

std::array<std::size_t, kDimCount> SparkSpace::sizes() const noexcept {
  std::array<std::size_t, kDimCount> out{};
  for (std::size_t i = 0; i < kDimCount; ++i) out[i] = dims_[i].size();
  return out;
}

std::size_t SparkSpace::trait_index(Dim d, std::string_view label) const {
  if (auto i = dimension(d).find(label)) return *i;
  throw Error(ErrorCode::UnknownTrait,
              "trait '" + std::string(label) + "' not in dimension " + std::string(dim_name(d)));
}

TraitIndices SparkSpace::indices_of(const AgentConfig& config) const {
  TraitIndices idx{};
  for (Dim d : kAllDims) idx[index_of(d)] = trait_index(d, config.trait(d));
  return idx;
}

AgentConfig SparkSpace::config_at(const TraitIndices& idx) const {
  AgentConfig c;
  for (std::size_t i = 0; i < kDimCount; ++i) c.traits[i] = dims_[i].traits().at(idx[i]);
  return c;
}

SparkSpace build_space(const std::map<Dim, std::vector<std::string>>& dims) {
  std::vector<Dimension> built;
  built.reserve(kDimCount);
  for (Dim d : kAllDims) {
    auto it = dims.find(d);
    if (it == dims.end()) throw Error(ErrorCode::MissingDimension, std::string(dim_name(d)));
    const auto& traits = it->second;
    if (traits.empty()) throw Error(ErrorCode::EmptyDimension, std::string(dim_name(d)));
    std::set<std::string_view> seen;
    for (const auto& t : traits) {
      if (!seen.insert(t).second) {
        throw Error(ErrorCode::DuplicateTrait, "'" + t + "' repeated in " + std::string(dim_name(d)));
      }
    }
    built.emplace_back(d, traits);
  }
  return SparkSpace({built[0], built[1], built[2], built[3], built[4]});
}

SparkSpace build_space(const std::map<std::string, std::vector<std::string>>& dims) {
  std::map<Dim, std::vector<std::string>> keyed;
  for (const auto& [name, traits] : dims) {
    auto d = parse_dim(name);
    if (!d) throw Error(ErrorCode::SchemaError, "unknown dimension '" + name + "'");
    if (!keyed.emplace(*d, traits).second) {
      throw Error(ErrorCode::SchemaError, "dimension given twice: " + std::string(dim_name(*d)));
    }
  }
  return build_space(keyed);
}

SparkSpace parse_space(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, e.what());
  }
  if (!doc.is_object() || !doc.contains("dimensions") || !doc["dimensions"].is_object()) {
    throw Error(ErrorCode::SchemaError, "expected an object with a 'dimensions' object");
  }
  std::map<std::string, std::vector<std::string>> dims;
  for (const auto& [key, value] : doc["dimensions"].items()) {
    if (!value.is_array()) throw Error(ErrorCode::SchemaError, "dimensions." + key + " must be an array");
    std::vector<std::string> traits;
    for (const auto& t : value) {
      if (!t.is_string()) throw Error(ErrorCode::SchemaError, "dimensions." + key + " must hold strings");
      traits.push_back(t.get<std::string>());
    }
    dims.emplace(key, std::move(traits));
  }
  return build_space(dims);
}

SparkSpace load_space_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_space(buf.str());
}

BigInt possibility_count(const SparkSpace& space) {
  BigInt n = 1;
  for (auto s : space.sizes()) n *= s;
  return n;
}

BigInt slice_count(const SparkSpace& space, const PartialAssignment& fixed) {
  BigInt n = 1;
  for (Dim d : kAllDims) {
    if (const auto& f = fixed.get(d)) {
      (void)space.trait_index(d, *f);
    } else {
      n *= space.dimension(d).size();
    }
  }
  return n;
}

BigInt multi_agent_count(const SparkSpace& space, std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::ZeroAgents, "agent count must be at least 1");
  BigInt base = possibility_count(space);
  BigInt result = 1;
  // square-and-multiply; exponents here can be large enough to matter
  while (n > 0) {
    if (n & 1U) result *= base;
    n >>= 1U;
    if (n > 0) base *= base;
  }
  return result;
}

BigInt subset_count(std::uint64_t pool_size) {
  if (pool_size == 0) return 0;
  BigInt one = 1;
  return (one << pool_size) - 1;
}

ConfigRange::ConfigRange(SparkSpace space, const PartialAssignment& fixed) : space_(std::move(space)) {
  for (Dim d : kAllDims) {
    if (const auto& f = fixed.get(d)) pinned_[index_of(d)] = space_.trait_index(d, *f);
  }
}

ConfigRange::iterator::iterator(const ConfigRange* owner, bool done) : owner_(owner), done_(done) {
  if (done_) return;
  for (std::size_t i = 0; i < kDimCount; ++i) idx_[i] = owner_->pinned_[i].value_or(0);
  refresh(0);
}

void ConfigRange::iterator::refresh(std::size_t from_dim) {
  const auto& dims = owner_->space_.dimensions();
  for (std::size_t i = from_dim; i < kDimCount; ++i) current_.traits[i] = dims[i].traits()[idx_[i]];
}

ConfigRange::iterator& ConfigRange::iterator::operator++() {
  if (done_) return *this;
  const auto& dims = owner_->space_.dimensions();
  // odometer: the last free dimension varies fastest
  for (std::size_t k = kDimCount; k-- > 0;) {
    if (owner_->pinned_[k]) continue;
    if (++idx_[k] < dims[k].size()) {
      refresh(k);
      return *this;
    }
    idx_[k] = 0;
  }
  done_ = true;
  return *this;
}

ConfigRange enumerate(const SparkSpace& space, const PartialAssignment& fixed) { return {space, fixed}; }

}  // namespace pcf
