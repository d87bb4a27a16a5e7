#ifndef DUCG_VALIDATE_H_
#define DUCG_VALIDATE_H_

#include <string>
#include <vector>

#include "ducg/error.h"
#include "ducg/model.h"

namespace ducg {

enum class Severity { kError, kWarning };

struct Finding {
  Severity severity = Severity::kError;
  std::string code;     // stable machine-readable tag, e.g. "column-mass"
  std::string message;  // human-readable, names the offending entity
  std::string path;     // location in the model document
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool ok() const;
  int error_count() const;
  std::string summary() const;
};

/// Checks everything the loader cannot: probability bounds, sparsity
/// conventions, acyclicity, attribute domains and gate specifications.
ValidationReport validate(const ChiefComplaintModel& model);

class InvalidModelError : public Error {
 public:
  explicit InvalidModelError(ValidationReport report);
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

/// Throws InvalidModelError when validate() reports errors.
void require_valid(const ChiefComplaintModel& model);

}  // namespace ducg

#endif  // DUCG_VALIDATE_H_
