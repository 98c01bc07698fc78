#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace meta_audit {

enum class Direction { increase, decrease, unspecified };

std::string_view to_string(Direction d);
/// Accepts "increase", "decrease", "unspecified" or empty (unspecified).
std::optional<Direction> parse_direction(std::string_view text);

/// Summary statistics reported by one base study. Effects are on the log
/// risk-ratio scale.
struct BaseStudy {
  std::string id;
  std::optional<double> p_value;
  std::optional<double> effect;
  std::optional<double> se;
  Direction direction = Direction::unspecified;

  bool has_effect() const { return effect.has_value() && se.has_value(); }
};

struct MetaDataset {
  std::string label;
  std::vector<BaseStudy> studies;
};

/// Two-sided normal-test p-value 2 * Phi(-|effect / se|).
/// Throws std::invalid_argument if effect or se is missing or se <= 0.
double derive_p_from_effect(const BaseStudy& study);

/// Copy of `study` with p_value filled from effect/se when it is absent.
BaseStudy with_derived_p(BaseStudy study);

struct Violation {
  std::string study_id;
  std::string rule;
};

/// Every broken BaseStudy invariant and every repeated id, in input order.
std::vector<Violation> validate_dataset(const MetaDataset& ds);

/// One p-value per study, deriving from effect/se where needed.
/// Throws DataError naming the first study that has neither.
std::vector<double> resolve_pvalues(const MetaDataset& ds);

/// Effects and standard errors of every study; throws DataError naming the
/// first study without both.
struct EffectColumns {
  std::vector<double> effects;
  std::vector<double> ses;
};
EffectColumns resolve_effects(const MetaDataset& ds);

}  // namespace meta_audit
