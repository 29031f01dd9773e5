#include "pcf/coherence.hpp"

#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pcf/error.hpp"

namespace pcf {

ContextId::ContextId(std::string label) : label_(std::move(label)) {
  if (label_.empty()) throw Error(ErrorCode::InvariantViolation, "context label must be non-empty");
}

std::string to_string(const BehaviorValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  std::ostringstream out;
  out << std::get<double>(v);
  return out.str();
}

std::vector<Dim> SiteObject::covered_dims() const {
  std::vector<Dim> out;
  out.reserve(assignment.size());
  for (const auto& [d, _] : assignment) out.push_back(d);
  return out;
}

void check_object(const SiteObject& object, const SparkSpace& space) {
  if (object.assignment.empty()) throw Error(ErrorCode::InvariantViolation, "site object covers no dimension");
  for (const auto& [d, label] : object.assignment) (void)space.trait_index(d, label);
}

void check_section(const LocalSection& section) {
  if (section.values.size() != section.over.assignment.size()) {
    throw Error(ErrorCode::InvariantViolation, "section values must match the covered dimensions");
  }
  for (const auto& [d, _] : section.values) {
    if (!section.over.covers(d)) {
      throw Error(ErrorCode::InvariantViolation, "section value on uncovered dimension " + std::string(dim_name(d)));
    }
  }
}

namespace {

// sub -> sup exists when sub pins a subset of sup's dimensions with equal traits
std::optional<std::string> refinement_gap(const SiteObject& sub, const SiteObject& sup) {
  for (const auto& [d, label] : sub.assignment) {
    auto it = sup.assignment.find(d);
    if (it == sup.assignment.end()) return std::string(dim_name(d)) + " not pinned by the target";
    if (it->second != label) return std::string(dim_name(d)) + "=" + label + " disagrees with " + it->second;
  }
  return std::nullopt;
}

}  // namespace

LocalSection restrict_section(const LocalSection& section, const SiteObject& sub) {
  if (sub.context != section.over.context) throw Error(ErrorCode::InvalidRestriction, "context differs");
  if (auto gap = refinement_gap(sub, section.over)) throw Error(ErrorCode::InvalidRestriction, *gap);
  LocalSection out{sub, {}};
  for (const auto& [d, _] : sub.assignment) out.values.emplace(d, section.values.at(d));
  return out;
}

CoverCheck check_cover(const Cover& cover) {
  CoverCheck result;
  for (std::size_t i = 0; i < cover.family.size(); ++i) {
    const auto& member = cover.family[i];
    if (member.context != cover.target.context) {
      throw Error(ErrorCode::ContextMismatch, "family[" + std::to_string(i) + "] is anchored to '" +
                                                  member.context.label() + "', target to '" +
                                                  cover.target.context.label() + "'");
    }
    if (auto gap = refinement_gap(member, cover.target)) {
      result.ok = false;
      result.diagnostics.push_back("family[" + std::to_string(i) + "]: " + *gap);
    }
  }
  for (const auto& [d, label] : cover.target.assignment) {
    bool hit = false;
    for (const auto& member : cover.family) {
      auto it = member.assignment.find(d);
      if (it != member.assignment.end() && it->second == label) {
        hit = true;
        break;
      }
    }
    if (!hit) {
      result.ok = false;
      result.uncovered.push_back(d);
      result.diagnostics.push_back(std::string(dim_name(d)) + " is not covered by any family member");
    }
  }
  return result;
}

std::vector<Conflict> check_compatibility(std::span<const LocalSection> sections) {
  std::vector<Conflict> out;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    for (std::size_t j = i + 1; j < sections.size(); ++j) {
      const auto& a = sections[i];
      const auto& b = sections[j];
      if (a.over.context != b.over.context) continue;
      for (const auto& [d, label] : a.over.assignment) {
        auto it = b.over.assignment.find(d);
        if (it == b.over.assignment.end() || it->second != label) continue;
        if (a.values.at(d) != b.values.at(d)) out.push_back({i, j, d});
      }
    }
  }
  return out;
}

GlueResult glue(const Cover& cover, std::span<const LocalSection> sections) {
  auto check = check_cover(cover);
  if (!check.ok) {
    std::string msg;
    for (const auto& d : check.diagnostics) msg += (msg.empty() ? "" : "; ") + d;
    throw Error(ErrorCode::CoverInvalid, msg);
  }
  if (sections.size() != cover.family.size()) {
    throw Error(ErrorCode::CoverInvalid, "expected one section per family member");
  }
  for (std::size_t i = 0; i < sections.size(); ++i) {
    if (!(sections[i].over == cover.family[i])) {
      throw Error(ErrorCode::CoverInvalid, "section " + std::to_string(i) + " is not over family[" +
                                               std::to_string(i) + "]");
    }
    check_section(sections[i]);
  }
  auto conflicts = check_compatibility(sections);
  if (!conflicts.empty()) return GlueResult::failure(std::move(conflicts));

  LocalSection global{cover.target, {}};
  for (const auto& s : sections) {
    for (const auto& [d, v] : s.values) global.values.emplace(d, v);
  }
  return GlueResult::success(std::move(global));
}

TraitMap make_trait_map(Dim dimension, std::map<std::string, std::string> mapping,
                        std::function<BehaviorValue(const BehaviorValue&)> value_transform, const SparkSpace* space) {
  std::set<std::string> image;
  for (const auto& [from, to] : mapping) {
    if (space) (void)space->trait_index(dimension, from);
    if (!image.insert(to).second) throw Error(ErrorCode::NonInjectiveMap, "'" + to + "' is hit twice");
  }
  if (!value_transform) value_transform = [](const BehaviorValue& v) { return v; };
  return {dimension, std::move(mapping), std::move(value_transform)};
}

SiteObject translate(const SiteObject& object, const TraitMap& tmap) {
  auto it = object.assignment.find(tmap.dimension);
  if (it == object.assignment.end()) return object;
  auto m = tmap.mapping.find(it->second);
  if (m == tmap.mapping.end()) {
    throw Error(ErrorCode::UnmappedTrait, std::string(dim_name(tmap.dimension)) + "=" + it->second);
  }
  SiteObject out = object;
  out.assignment[tmap.dimension] = m->second;
  return out;
}

Cover translate(const Cover& cover, const TraitMap& tmap) {
  Cover out{translate(cover.target, tmap), {}};
  out.family.reserve(cover.family.size());
  for (const auto& member : cover.family) out.family.push_back(translate(member, tmap));
  return out;
}

LocalSection translate(const LocalSection& section, const TraitMap& tmap) {
  if (!section.over.covers(tmap.dimension)) return section;
  LocalSection out{translate(section.over, tmap), section.values};
  auto& v = out.values.at(tmap.dimension);
  v = tmap.value_transform(v);
  return out;
}

Cover Site::resolve(const NamedCover& c) const {
  auto get = [&](const std::string& name) -> const SiteObject& {
    auto it = objects.find(name);
    if (it == objects.end()) throw Error(ErrorCode::SchemaError, "unknown site object '" + name + "'");
    return it->second;
  };
  Cover out{get(c.target), {}};
  for (const auto& f : c.family) out.family.push_back(get(f));
  return out;
}

namespace {

nlohmann::json parse_json(std::string_view text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, e.what());
  }
}

Dim dim_from_key(const std::string& key, const std::string& where) {
  auto d = parse_dim(key);
  if (!d) throw Error(ErrorCode::SchemaError, where + ": unknown dimension '" + key + "'");
  return *d;
}

}  // namespace

Site parse_site(std::string_view json_text) {
  const auto doc = parse_json(json_text);
  if (!doc.is_object() || !doc.contains("objects") || !doc["objects"].is_object()) {
    throw Error(ErrorCode::SchemaError, "site document needs an 'objects' object");
  }
  Site site;
  for (const auto& [name, obj] : doc["objects"].items()) {
    const std::string where = "objects." + name;
    if (!obj.is_object() || !obj.contains("context") || !obj["context"].is_string() ||
        !obj.contains("assignment") || !obj["assignment"].is_object()) {
      throw Error(ErrorCode::SchemaError, where + ": expected {context, assignment}");
    }
    SiteObject so{ContextId(obj["context"].get<std::string>()), {}};
    for (const auto& [key, label] : obj["assignment"].items()) {
      if (!label.is_string()) throw Error(ErrorCode::SchemaError, where + ".assignment." + key);
      so.assignment.emplace(dim_from_key(key, where), label.get<std::string>());
    }
    if (so.assignment.empty()) throw Error(ErrorCode::SchemaError, where + ": empty assignment");
    site.objects.emplace(name, std::move(so));
  }
  if (doc.contains("covers")) {
    if (!doc["covers"].is_array()) throw Error(ErrorCode::SchemaError, "covers must be an array");
    for (const auto& c : doc["covers"]) {
      if (!c.is_object() || !c.contains("target") || !c.contains("family") || !c["family"].is_array()) {
        throw Error(ErrorCode::SchemaError, "cover needs {target, family}");
      }
      Site::NamedCover nc{c["target"].get<std::string>(), c["family"].get<std::vector<std::string>>()};
      (void)site.resolve(nc);
      site.covers.push_back(std::move(nc));
    }
  }
  return site;
}

std::map<std::string, LocalSection> parse_sections(std::string_view json_text, const Site& site) {
  const auto doc = parse_json(json_text);
  if (!doc.is_object() || !doc.contains("sections") || !doc["sections"].is_array()) {
    throw Error(ErrorCode::SchemaError, "sections document needs a 'sections' array");
  }
  std::map<std::string, LocalSection> out;
  for (const auto& s : doc["sections"]) {
    if (!s.is_object() || !s.contains("over") || !s["over"].is_string() || !s.contains("values") ||
        !s["values"].is_object()) {
      throw Error(ErrorCode::SchemaError, "section needs {over, values}");
    }
    const auto name = s["over"].get<std::string>();
    auto obj = site.objects.find(name);
    if (obj == site.objects.end()) throw Error(ErrorCode::SchemaError, "section over unknown object '" + name + "'");
    LocalSection section{obj->second, {}};
    for (const auto& [key, v] : s["values"].items()) {
      const Dim d = dim_from_key(key, "sections." + name);
      if (v.is_string()) {
        section.values.emplace(d, v.get<std::string>());
      } else if (v.is_number()) {
        section.values.emplace(d, v.get<double>());
      } else {
        throw Error(ErrorCode::SchemaError, "sections." + name + "." + key + " must be a string or number");
      }
    }
    check_section(section);
    if (!out.emplace(name, std::move(section)).second) {
      throw Error(ErrorCode::SchemaError, "two sections over '" + name + "'");
    }
  }
  return out;
}

}  // namespace pcf
