#ifndef DUCG_IDS_H_
#define DUCG_IDS_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace ducg {

// Enumerators are declared in lexical order of their names so that the
// derived ordering of VariableId matches the textual order "B" < "BX" < ...
enum class VariableKind : std::uint8_t { B, BX, D, G, SG, SX, X };

std::string_view kind_name(VariableKind kind);
std::optional<VariableKind> parse_kind(std::string_view text);

inline bool is_disease_kind(VariableKind k) {
  return k == VariableKind::B || k == VariableKind::BX;
}
inline bool is_observable_kind(VariableKind k) {
  return k == VariableKind::X || k == VariableKind::SX;
}
inline bool is_gate_kind(VariableKind k) {
  return k == VariableKind::G || k == VariableKind::SG;
}

struct VariableId {
  VariableKind kind = VariableKind::X;
  int index = 0;

  friend auto operator<=>(const VariableId&, const VariableId&) = default;

  /// "B5", "SX12", ...
  std::string str() const;
  /// Inverse of str(); throws SchemaError on malformed text.
  static VariableId parse(std::string_view text);
};

/// A disease hypothesis H_kj: disease variable k in abnormal state j.
struct DiseaseEvent {
  VariableId disease;
  int state = 1;

  friend auto operator<=>(const DiseaseEvent&, const DiseaseEvent&) = default;

  /// "B5.1"
  std::string str() const;
  /// Accepts "B5.2" or "B5" (state 1).
  static DiseaseEvent parse(std::string_view text);
};

}  // namespace ducg

template <>
struct std::hash<ducg::VariableId> {
  std::size_t operator()(const ducg::VariableId& id) const noexcept {
    return (static_cast<std::size_t>(id.kind) << 28) ^
           static_cast<std::size_t>(id.index);
  }
};

#endif  // DUCG_IDS_H_
