#include "pcf/constraints.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pcf/error.hpp"

namespace pcf {

std::string to_string(const Atom& atom) { return std::string(dim_key(atom.dim)) + "=" + atom.trait; }

std::string_view to_string(Violation::Kind kind) noexcept {
  switch (kind) {
    case Violation::Kind::Exclusion: return "exclusion";
    case Violation::Kind::Requirement: return "requirement";
    case Violation::Kind::Context: return "context";
  }
  return "unknown";
}

void ConstraintSet::check_atom(const Atom& a) const {
  if (!space_.dimension(a.dim).find(a.trait)) throw Error(ErrorCode::UnknownAtom, to_string(a));
}

ConstraintSet& ConstraintSet::add_exclusion(const Atom& a, const Atom& b) {
  check_atom(a);
  check_atom(b);
  if (a == b) throw Error(ErrorCode::SelfExclusion, to_string(a));
  auto same = [&](const Exclusion& e) {
    return (e.first == a && e.second == b) || (e.first == b && e.second == a);
  };
  if (std::none_of(exclusions_.begin(), exclusions_.end(), same)) exclusions_.push_back({a, b});
  return *this;
}

ConstraintSet& ConstraintSet::add_requirement(const Atom& antecedent, const Atom& consequent) {
  check_atom(antecedent);
  check_atom(consequent);
  requirements_.push_back({antecedent, consequent});
  return *this;
}

ConstraintSet& ConstraintSet::restrict_context(const std::string& context, Dim dim,
                                               const std::vector<std::string>& allowed) {
  for (const auto& t : allowed) check_atom({dim, t});
  auto& slot = contexts_[context][dim];
  slot.insert(allowed.begin(), allowed.end());
  return *this;
}

bool ConstraintSet::has_context(std::string_view context) const {
  return contexts_.find(std::string(context)) != contexts_.end();
}

bool ConstraintSet::empty() const noexcept {
  return exclusions_.empty() && requirements_.empty() && contexts_.empty();
}

namespace {

Atom atom_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_string()) {
    throw Error(ErrorCode::SchemaError, where + ": expected [dimension, trait]");
  }
  auto dim = parse_dim(j[0].get<std::string>());
  if (!dim) throw Error(ErrorCode::UnknownAtom, where + ": unknown dimension '" + j[0].get<std::string>() + "'");
  return {*dim, j[1].get<std::string>()};
}

}  // namespace

ConstraintSet parse_constraints(const SparkSpace& space, std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::SchemaError, "constraint document must be an object");

  ConstraintSet out(space);
  for (const auto& [key, _] : doc.items()) {
    if (key != "exclusions" && key != "requirements" && key != "contexts") {
      throw Error(ErrorCode::SchemaError, "unexpected key '" + key + "'");
    }
  }
  if (doc.contains("exclusions")) {
    const auto& ex = doc["exclusions"];
    if (!ex.is_array()) throw Error(ErrorCode::SchemaError, "exclusions must be an array");
    for (std::size_t i = 0; i < ex.size(); ++i) {
      const std::string where = "exclusions[" + std::to_string(i) + "]";
      if (!ex[i].is_array() || ex[i].size() != 2) throw Error(ErrorCode::SchemaError, where + ": expected a pair");
      out.add_exclusion(atom_from_json(ex[i][0], where), atom_from_json(ex[i][1], where));
    }
  }
  if (doc.contains("requirements")) {
    const auto& req = doc["requirements"];
    if (!req.is_array()) throw Error(ErrorCode::SchemaError, "requirements must be an array");
    for (std::size_t i = 0; i < req.size(); ++i) {
      const std::string where = "requirements[" + std::to_string(i) + "]";
      const auto& r = req[i];
      if (!r.is_object() || !r.contains("if") || !r.contains("then")) {
        throw Error(ErrorCode::SchemaError, where + ": expected {if, then}");
      }
      out.add_requirement(atom_from_json(r["if"], where + ".if"), atom_from_json(r["then"], where + ".then"));
    }
  }
  if (doc.contains("contexts")) {
    const auto& ctx = doc["contexts"];
    if (!ctx.is_object()) throw Error(ErrorCode::SchemaError, "contexts must be an object");
    for (const auto& [name, dims] : ctx.items()) {
      if (!dims.is_object()) throw Error(ErrorCode::SchemaError, "contexts." + name + " must be an object");
      for (const auto& [dim_text, allowed] : dims.items()) {
        auto dim = parse_dim(dim_text);
        if (!dim) throw Error(ErrorCode::UnknownAtom, "contexts." + name + ": unknown dimension '" + dim_text + "'");
        if (!allowed.is_array()) throw Error(ErrorCode::SchemaError, "contexts." + name + "." + dim_text);
        std::vector<std::string> labels;
        for (const auto& t : allowed) {
          if (!t.is_string()) throw Error(ErrorCode::SchemaError, "contexts." + name + "." + dim_text);
          labels.push_back(t.get<std::string>());
        }
        out.restrict_context(name, *dim, labels);
      }
    }
  }
  return out;
}

ConstraintSet load_constraints_file(const SparkSpace& space, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_constraints(space, buf.str());
}

ValidationReport validate_config(const AgentConfig& config, const ConstraintSet& constraints,
                                 std::optional<std::string_view> context) {
  const auto* restrictions = [&]() -> const std::map<Dim, std::set<std::string>>* {
    if (!context) return nullptr;
    auto it = constraints.contexts().find(std::string(*context));
    if (it == constraints.contexts().end()) throw Error(ErrorCode::UnknownContext, std::string(*context));
    return &it->second;
  }();
  (void)constraints.space().indices_of(config);

  auto present = [&](const Atom& a) { return config.trait(a.dim) == a.trait; };
  ValidationReport report;
  for (const auto& e : constraints.exclusions()) {
    if (present(e.first) && present(e.second)) {
      report.violations.push_back({Violation::Kind::Exclusion,
                                   {e.first, e.second},
                                   to_string(e.first) + " excludes " + to_string(e.second)});
    }
  }
  for (const auto& r : constraints.requirements()) {
    if (present(r.antecedent) && !present(r.consequent)) {
      report.violations.push_back({Violation::Kind::Requirement,
                                   {r.antecedent, r.consequent},
                                   to_string(r.antecedent) + " requires " + to_string(r.consequent)});
    }
  }
  if (restrictions) {
    for (const auto& [dim, allowed] : *restrictions) {
      const auto& t = config.trait(dim);
      if (allowed.count(t) == 0) {
        report.violations.push_back({Violation::Kind::Context,
                                     {Atom{dim, t}},
                                     to_string(Atom{dim, t}) + " not allowed in context " + std::string(*context)});
      }
    }
  }
  return report;
}

CompiledConstraints::CompiledConstraints(const ConstraintSet& constraints, std::optional<std::string_view> context) {
  const auto& space = constraints.space();
  auto resolve = [&](const Atom& a) { return std::pair{index_of(a.dim), space.trait_index(a.dim, a.trait)}; };
  std::array<bool, kDimCount> touched{};

  for (const auto& e : constraints.exclusions()) {
    auto [da, ta] = resolve(e.first);
    auto [db, tb] = resolve(e.second);
    exclusions_at_[std::max(da, db)].push_back({da, ta, db, tb});
    touched[da] = touched[db] = true;
  }
  for (const auto& r : constraints.requirements()) {
    auto [da, ta] = resolve(r.antecedent);
    auto [db, tb] = resolve(r.consequent);
    requirements_at_[std::max(da, db)].push_back({da, ta, db, tb});
    touched[da] = touched[db] = true;
  }
  if (context) {
    auto it = constraints.contexts().find(std::string(*context));
    if (it == constraints.contexts().end()) throw Error(ErrorCode::UnknownContext, std::string(*context));
    for (const auto& [dim, allowed] : it->second) {
      std::vector<bool> mask(space.dimension(dim).size(), false);
      for (const auto& t : allowed) mask[space.trait_index(dim, t)] = true;
      allowed_[index_of(dim)] = std::move(mask);
      touched[index_of(dim)] = true;
    }
  }
  constrained_from_[kDimCount] = false;
  for (std::size_t d = kDimCount; d-- > 0;) constrained_from_[d] = constrained_from_[d + 1] || touched[d];
}

bool CompiledConstraints::partial_ok(const TraitIndices& idx, std::size_t depth) const noexcept {
  if (const auto& mask = allowed_[depth]; mask && !(*mask)[idx[depth]]) return false;
  for (const auto& p : exclusions_at_[depth]) {
    if (idx[p.dim_a] == p.trait_a && idx[p.dim_b] == p.trait_b) return false;
  }
  for (const auto& p : requirements_at_[depth]) {
    if (idx[p.dim_a] == p.trait_a && idx[p.dim_b] != p.trait_b) return false;
  }
  return true;
}

bool CompiledConstraints::satisfied(const TraitIndices& idx) const noexcept {
  for (std::size_t d = 0; d < kDimCount; ++d) {
    if (!partial_ok(idx, d)) return false;
  }
  return true;
}

FilteredRange::FilteredRange(const ConstraintSet& constraints, std::optional<std::string_view> context,
                             const PartialAssignment& fixed)
    : configs_(constraints.space(), fixed), checks_(constraints, context) {}

FilteredRange::iterator::iterator(const FilteredRange* owner, ConfigRange::iterator it)
    : owner_(owner), it_(std::move(it)) {
  skip();
}

void FilteredRange::iterator::skip() {
  const auto end = owner_->configs_.end();
  while (it_ != end && !owner_->checks_.satisfied(it_.indices())) ++it_;
}

FilteredRange::iterator& FilteredRange::iterator::operator++() {
  ++it_;
  skip();
  return *this;
}

FilteredRange filter_space(const SparkSpace& space, const ConstraintSet& constraints,
                           std::optional<std::string_view> context, const PartialAssignment& fixed) {
  if (!(space == constraints.space())) {
    throw Error(ErrorCode::SpaceMismatch, "constraints are bound to a different space");
  }
  return FilteredRange(constraints, context, fixed);
}

namespace {

BigInt count_from(const CompiledConstraints& checks, const std::array<std::size_t, kDimCount>& sizes,
                  TraitIndices& idx, std::size_t depth) {
  if (depth == kDimCount) return 1;
  if (!checks.constrains_from(depth)) {
    BigInt rest = 1;
    for (std::size_t d = depth; d < kDimCount; ++d) rest *= sizes[d];
    return rest;
  }
  BigInt total = 0;
  for (std::size_t t = 0; t < sizes[depth]; ++t) {
    idx[depth] = t;
    if (checks.partial_ok(idx, depth)) total += count_from(checks, sizes, idx, depth + 1);
  }
  return total;
}

}  // namespace

BigInt count_valid(const SparkSpace& space, const ConstraintSet& constraints,
                   std::optional<std::string_view> context) {
  if (!(space == constraints.space())) {
    throw Error(ErrorCode::SpaceMismatch, "constraints are bound to a different space");
  }
  CompiledConstraints checks(constraints, context);
  TraitIndices idx{};
  return count_from(checks, space.sizes(), idx, 0);
}

}  // namespace pcf
