#pragma once

#include <string>
#include <vector>

namespace logptr {

enum class ParseMode { general, variable_aware };

const char* mode_name(ParseMode mode);
ParseMode mode_from_name(const std::string& name);

// The set of variable-category tokens prepended to the model input.
// General parsing uses a single token; variable-aware parsing uses ten.
// Every label is bracketed so it can never collide with a
// whitespace-delimited message token.
struct LabelSet {
  std::vector<std::string> labels;
  ParseMode mode = ParseMode::general;

  static LabelSet general(std::string label = "[VAR]");
  // Default category tokens: object id, location indicator, object name,
  // type indicator, switch indicator, time/date, computing resource,
  // object amount, status code, other parameter.
  static LabelSet variable_aware(std::vector<std::string> labels = {});

  int count() const { return static_cast<int>(labels.size()); }

  // 1-based label index, 0 when the token is not one of the labels.
  int index_of(const std::string& token) const;

  // A token shaped like a category label: "[NAME]" with NAME drawn from
  // [A-Z0-9_]. Literal bracketed text in logs ("[main]", "[client") does
  // not match, so only genuinely label-shaped tokens are ever rejected as
  // unknown.
  static bool label_shaped(const std::string& token);

  // Throws ConfigError on duplicates, unbracketed entries, or a count that
  // does not match the mode.
  void validate() const;
};

}  // namespace logptr
