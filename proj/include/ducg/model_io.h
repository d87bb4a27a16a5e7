#ifndef DUCG_MODEL_IO_H_
#define DUCG_MODEL_IO_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ducg/model.h"

namespace ducg {

inline constexpr std::string_view kFormatVersion = "1";

/// A module file carries the header of the model it fuses into.
struct ModuleFile {
  ModelHeader header;
  std::vector<SingleDiseaseModule> modules;
};

using ModelSource = std::variant<ChiefComplaintModel, ModuleFile>;

// Parsing checks the schema and that every reference names a declared
// variable. Semantic checks (probability mass, acyclicity) are validate()'s.
ModelSource load_model(std::string_view text);
ModelSource load_model_json(const nlohmann::json& doc);

/// Loads a model file; module files are fused.
ChiefComplaintModel load_model_file(const std::filesystem::path& path);

nlohmann::json to_json(const ChiefComplaintModel& model);
nlohmann::json to_json(const ModuleFile& file);
std::string save_model(const ChiefComplaintModel& model);

// Shared by the other document readers (cases, sessions).
nlohmann::json id_to_json(VariableId id);
VariableId id_from_json(const nlohmann::json& j, const std::string& path);

}  // namespace ducg

#endif  // DUCG_MODEL_IO_H_
