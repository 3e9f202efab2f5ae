#include "logptr/labels.hpp"

#include <set>

#include "logptr/error.hpp"

namespace logptr {

const char* mode_name(ParseMode mode) {
  return mode == ParseMode::general ? "general" : "variable_aware";
}

ParseMode mode_from_name(const std::string& name) {
  if (name == "general") return ParseMode::general;
  if (name == "variable_aware") return ParseMode::variable_aware;
  raise(Errc::ConfigError, "unknown mode '" + name + "' (expected general or variable_aware)");
}

LabelSet LabelSet::general(std::string label) {
  LabelSet set;
  set.mode = ParseMode::general;
  set.labels = {std::move(label)};
  set.validate();
  return set;
}

LabelSet LabelSet::variable_aware(std::vector<std::string> labels) {
  LabelSet set;
  set.mode = ParseMode::variable_aware;
  if (labels.empty()) {
    set.labels = {"[OID]", "[LOI]", "[OBN]", "[TID]", "[SID]",
                  "[TDA]", "[CRS]", "[OBA]", "[STC]", "[OTP]"};
  } else {
    set.labels = std::move(labels);
  }
  set.validate();
  return set;
}

int LabelSet::index_of(const std::string& token) const {
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == token) return static_cast<int>(i) + 1;
  return 0;
}

bool LabelSet::label_shaped(const std::string& token) {
  if (token.size() < 3 || token.front() != '[' || token.back() != ']') return false;
  for (size_t i = 1; i + 1 < token.size(); ++i) {
    char c = token[i];
    bool ok = (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return true;
}

void LabelSet::validate() const {
  size_t expected = mode == ParseMode::general ? 1 : 10;
  if (labels.size() != expected)
    raise(Errc::ConfigError, "mode " + std::string(mode_name(mode)) + " requires " +
                                 std::to_string(expected) + " labels, got " +
                                 std::to_string(labels.size()));
  std::set<std::string> seen;
  for (const auto& label : labels) {
    if (!label_shaped(label))
      raise(Errc::ConfigError, "label '" + label + "' must be bracketed [A-Z0-9_]");
    if (!seen.insert(label).second)
      raise(Errc::ConfigError, "duplicate label '" + label + "'");
  }
}

}  // namespace logptr
