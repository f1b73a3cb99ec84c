#pragma once

#include <optional>
#include <string_view>

namespace tdetect {

/// Machine is the positive class everywhere: higher scores mean "machine".
enum class Label { human, machine };

enum class Method { gaussian, t_detect, binoculars, ct };

std::string_view to_string(Label label);
std::optional<Label> parse_label(std::string_view text);

std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view text);

inline constexpr double kDefaultNu = 5.0;

struct ScoredLabel {
  double score;
  Label label;
};

struct DetectionScore {
  double value = 0.0;
  Method method = Method::gaussian;
  std::optional<double> nu;  // set iff the normalization used a t variance
  double elapsed_seconds = 0.0;
};

}  // namespace tdetect
