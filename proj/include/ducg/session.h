#ifndef DUCG_SESSION_H_
#define DUCG_SESSION_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ducg/inference.h"
#include "ducg/network.h"
#include "ducg/recommend.h"

namespace ducg {

struct Observation {
  VariableId variable;
  int state = 0;
};

enum class SessionStatus { kOpen, kConcluded, kFlagged };
std::string status_name(SessionStatus s);

// One step of the diagnosis loop: the ranking for the evidence so far and
// the suggested next checks.
struct StepResult {
  SuspicionReport report;
  RecommendationList recommendations;

  /// {report, recommendations}; its compact dump is the digested form.
  nlohmann::json to_json() const;
};

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// Runs the full pipeline for one evidence set.
StepResult run_step(const NetworkPtr& net, const EvidenceSet& evidence, Diagnosis* keep = nullptr);

/// Ranking shown before any observation: every disease event by its
/// risk-adjusted prior.
nlohmann::json initial_ranking(const Network& net);

// Re-executes a session log against a model and returns the machine form
// of each step's result, checking every logged digest on the way.
struct ReplayResult {
  std::vector<std::string> results;  // compact {report, recommendations}
  std::vector<std::string> digests;
  bool digests_match = true;
};
ReplayResult replay_log(const std::filesystem::path& log, const NetworkPtr& net);

// Holds models and sessions and persists both under a data directory:
//   models/<model_id>.json        registered model files
//   sessions/index.jsonl          one line per created session
//   sessions/<session_id>.log     append-only audit log, one JSON per line
//   disagreement_queue.jsonl      snapshots of flagged sessions
// Sessions are restored at start-up by replaying their logs.
class DiagnosisService {
 public:
  using Clock = std::function<std::string()>;

  explicit DiagnosisService(std::filesystem::path data_dir, Clock clock = {});
  ~DiagnosisService();
  DiagnosisService(const DiagnosisService&) = delete;
  DiagnosisService& operator=(const DiagnosisService&) = delete;

  /// Registers a model file (single model or module file). Re-registering
  /// an identical model is accepted; a different model under the same id
  /// throws ConflictError.
  nlohmann::json register_model(std::string_view text);
  nlohmann::json list_models() const;
  NetworkPtr model(const std::string& model_id) const;

  nlohmann::json create_session(const std::string& model_id, const std::string& actor = "anonymous");
  nlohmann::json submit_observations(const std::string& session_id, const std::vector<Observation>& batch,
                                     const std::string& actor = "anonymous");
  nlohmann::json get_session(const std::string& session_id) const;
  nlohmann::json explanation(const std::string& session_id, const std::string& hypothesis) const;
  nlohmann::json flag_disagreement(const std::string& session_id, const std::string& note,
                                   const std::string& actor = "anonymous");
  nlohmann::json conclude(const std::string& session_id, const std::string& note,
                          const std::string& actor = "anonymous");

  std::filesystem::path log_path(const std::string& session_id) const;
  const std::filesystem::path& data_dir() const { return dir_; }

 private:
  struct Session;

  std::shared_ptr<Session> find_session(const std::string& id) const;
  void append_audit(Session& s, nlohmann::json entry);
  void restore();
  std::string now() const;
  std::string fresh_session_id();

  std::filesystem::path dir_;
  Clock clock_;
  mutable std::shared_mutex registry_mutex_;
  std::map<std::string, NetworkPtr> models_;
  std::map<std::string, std::string> model_text_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mutex file_mutex_;  // index and disagreement queue
  std::uint64_t id_counter_ = 0;
  std::uint64_t id_salt_ = 0;
};

}  // namespace ducg

#endif  // DUCG_SESSION_H_
