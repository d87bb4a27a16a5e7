#ifndef DUCG_VERIFY_H_
#define DUCG_VERIFY_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ducg/network.h"

namespace ducg {

struct CaseRecord {
  std::string record_id;
  std::string chief_complaint;
  std::map<VariableId, int> observations;
  std::optional<VariableId> true_disease;  // resolved from id or ICD code
  bool qualified = false;
  std::string reason;  // why a record is unqualified
};

struct CaseCorpus {
  std::vector<CaseRecord> records;
  std::vector<std::string> warnings;
};

/// Parses a case corpus and resolves each record against the model. Records
/// that cannot be used are kept but marked unqualified with a reason.
/// Throws SchemaError (with the record position) on malformed input.
CaseCorpus ingest(const std::filesystem::path& path, const Network& net);
CaseCorpus ingest_text(std::string_view text, const Network& net);

struct VerificationOptions {
  int cap = 10;
  std::uint64_t seed = 42;
  int top_k = 1;
};

struct DiseaseRow {
  VariableId disease;
  std::string name;
  int available = 0;  // qualified records on file
  int tested = 0;
  int correct = 0;
  bool skipped = false;
  std::vector<std::string> sampled;  // record ids, in draw order

  double precision() const { return tested ? static_cast<double>(correct) / tested : 0.0; }
  friend bool operator==(const DiseaseRow&, const DiseaseRow&) = default;
};

struct VerificationReport {
  std::string model_id;
  std::uint64_t seed = 0;
  int cap = 0;
  int top_k = 1;
  std::vector<DiseaseRow> rows;  // ascending disease id
  int total_tested = 0;
  int total_correct = 0;
  std::vector<std::string> flags;

  double precision() const { return total_tested ? static_cast<double>(total_correct) / total_tested : 0.0; }
  friend bool operator==(const VerificationReport&, const VerificationReport&) = default;
};

// Sampling is reproducible everywhere: a std::mt19937_64 seeded with the
// seed is shared by all diseases in ascending id order. Each disease draws
// min(cap, available) of its qualified records, in file order, by a partial
// Fisher-Yates shuffle whose bounded draws use rejection sampling on the raw
// 64-bit output.
class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

/// Samples each disease's records and scores them. A case counts as correct when its true
/// disease is among the first top_k distinct diseases of the ranking.
VerificationReport run_verification(const NetworkPtr& net, const std::vector<CaseRecord>& records,
                                    const VerificationOptions& options = {});

enum class ReportFormat { kText, kMachine };

std::string render_report(const VerificationReport& report, ReportFormat format);
nlohmann::json to_json(const VerificationReport& report);
VerificationReport verification_report_from_json(const nlohmann::json& j);

}  // namespace ducg

#endif  // DUCG_VERIFY_H_
