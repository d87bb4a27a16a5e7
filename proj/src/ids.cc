#include "ducg/ids.h"

#include <array>
#include <charconv>

#include "ducg/error.h"

namespace ducg {

namespace {

constexpr std::array<std::string_view, 7> kKindNames = {"B",  "BX", "D", "G",
                                                        "SG", "SX", "X"};

int parse_positive(std::string_view digits, std::string_view whole) {
  int value = 0;
  auto [ptr, ec] =
      std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || value < 1)
    throw SchemaError("", "malformed identifier '" + std::string(whole) + "'");
  return value;
}

}  // namespace

std::string_view kind_name(VariableKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

std::optional<VariableKind> parse_kind(std::string_view text) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == text) return static_cast<VariableKind>(i);
  return std::nullopt;
}

std::string VariableId::str() const {
  return std::string(kind_name(kind)) + std::to_string(index);
}

VariableId VariableId::parse(std::string_view text) {
  std::size_t split = 0;
  while (split < text.size() && text[split] >= 'A' && text[split] <= 'Z')
    ++split;
  auto kind = parse_kind(text.substr(0, split));
  if (!kind || split == text.size())
    throw SchemaError("", "malformed identifier '" + std::string(text) + "'");
  return VariableId{*kind, parse_positive(text.substr(split), text)};
}

std::string DiseaseEvent::str() const {
  return disease.str() + "." + std::to_string(state);
}

DiseaseEvent DiseaseEvent::parse(std::string_view text) {
  auto dot = text.find('.');
  if (dot == std::string_view::npos)
    return DiseaseEvent{VariableId::parse(text), 1};
  return DiseaseEvent{VariableId::parse(text.substr(0, dot)),
                      parse_positive(text.substr(dot + 1), text)};
}

}  // namespace ducg
