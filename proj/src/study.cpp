#include "meta_audit/study.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "meta_audit/errors.hpp"
#include "meta_audit/numerics.hpp"

namespace meta_audit {

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::increase:
      return "increase";
    case Direction::decrease:
      return "decrease";
    case Direction::unspecified:
      break;
  }
  return "unspecified";
}

std::optional<Direction> parse_direction(std::string_view text) {
  if (text.empty() || text == "unspecified") return Direction::unspecified;
  if (text == "increase") return Direction::increase;
  if (text == "decrease") return Direction::decrease;
  return std::nullopt;
}

double derive_p_from_effect(const BaseStudy& study) {
  if (!study.has_effect()) {
    throw std::invalid_argument("study '" + study.id +
                                "' has no effect/se to derive a p-value from");
  }
  if (!(*study.se > 0.0)) {
    throw std::invalid_argument("study '" + study.id + "' has se <= 0");
  }
  return two_sided_p(*study.effect / *study.se);
}

BaseStudy with_derived_p(BaseStudy study) {
  if (!study.p_value) study.p_value = derive_p_from_effect(study);
  return study;
}

std::vector<Violation> validate_dataset(const MetaDataset& ds) {
  std::vector<Violation> out;
  std::unordered_set<std::string> seen;
  for (const auto& s : ds.studies) {
    if (s.id.empty()) out.push_back({s.id, "empty id"});
    if (!seen.insert(s.id).second) out.push_back({s.id, "duplicate id"});

    const bool has_p = s.p_value.has_value();
    if (!has_p && !s.has_effect()) {
      out.push_back({s.id, "missing both p_value and effect/se"});
    }
    if (has_p && !(*s.p_value > 0.0 && *s.p_value <= 1.0)) {
      out.push_back({s.id, "p_value out of (0,1]"});
    }
    if (s.effect && !std::isfinite(*s.effect)) {
      out.push_back({s.id, "effect not finite"});
    }
    if (s.se && !(*s.se > 0.0 && std::isfinite(*s.se))) {
      out.push_back({s.id, "se must be positive"});
    }
  }
  return out;
}

std::vector<double> resolve_pvalues(const MetaDataset& ds) {
  std::vector<double> p;
  p.reserve(ds.studies.size());
  for (const auto& s : ds.studies) {
    if (s.p_value) {
      p.push_back(*s.p_value);
    } else if (s.has_effect()) {
      p.push_back(derive_p_from_effect(s));
    } else {
      throw DataError("study '" + s.id + "' has neither p_value nor effect/se");
    }
  }
  return p;
}

EffectColumns resolve_effects(const MetaDataset& ds) {
  EffectColumns cols;
  for (const auto& s : ds.studies) {
    if (!s.has_effect()) {
      throw DataError("study '" + s.id +
                      "' lacks effect/se required for effect pooling");
    }
    cols.effects.push_back(*s.effect);
    cols.ses.push_back(*s.se);
  }
  return cols;
}

}  // namespace meta_audit
