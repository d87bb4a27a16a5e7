#include "ducg/session.h"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "ducg/error.h"
#include "ducg/fuse.h"
#include "ducg/model_io.h"

namespace ducg {

using nlohmann::json;
namespace fs = std::filesystem;

std::string status_name(SessionStatus s) {
  switch (s) {
    case SessionStatus::kOpen: return "open";
    case SessionStatus::kConcluded: return "concluded";
    case SessionStatus::kFlagged: return "flagged-disagreement";
  }
  return "open";
}

json StepResult::to_json() const {
  return {{"report", ducg::to_json(report)}, {"recommendations", ducg::to_json(recommendations)}};
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

StepResult run_step(const NetworkPtr& net, const EvidenceSet& evidence, Diagnosis* keep) {
  Diagnosis d = diagnose(net, evidence);
  StepResult r{d.report, recommend(d)};
  if (keep) *keep = std::move(d);
  return r;
}

json initial_ranking(const Network& net) {
  auto priors = apply_risk_evidence(net, EvidenceSet{});
  std::vector<std::pair<double, DiseaseEvent>> ranked;
  for (int d : net.disease_nodes())
    for (int j = 1; j < net.node(d).states; ++j) {
      DiseaseEvent h{net.node(d).id, j};
      ranked.emplace_back(priors.prior(h), h);
    }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  json out = json::array();
  for (const auto& [p, h] : ranked)
    out.push_back({{"disease_id", h.disease.str()}, {"state", h.state}, {"prior", p}});
  return out;
}

namespace {

json observation_json(VariableId v, int state) { return {{"variable", id_to_json(v)}, {"state", state}}; }

json evidence_json(const EvidenceSet& e) {
  json observed = json::array();
  for (const auto& [id, s] : e.observed) observed.push_back(observation_json(id, s));
  return {{"observed", observed}};
}

std::vector<Observation> observations_from(const json& payload) {
  std::vector<Observation> out;
  const json& list = payload.at("observations");
  for (std::size_t i = 0; i < list.size(); ++i)
    out.push_back({id_from_json(list[i].at("variable"), "observations[" + std::to_string(i) + "].variable"),
                   list[i].at("state").get<int>()});
  return out;
}

struct BatchEffect {
  std::vector<Observation> added;
  std::vector<std::pair<Observation, int>> replaced;  // new value, old state
  bool empty() const { return added.empty() && replaced.empty(); }
};

// Validates a batch against the model and the current evidence. A batch
// that is malformed or contradicts itself is rejected whole.
BatchEffect examine_batch(const Network& net, const EvidenceSet& current, const std::vector<Observation>& batch) {
  if (batch.empty()) throw RejectedError("observation batch is empty");
  std::map<VariableId, int> seen;
  for (const auto& o : batch) {
    int n = net.index_of(o.variable);
    if (!is_observable_kind(o.variable.kind))
      throw RejectedError(o.variable.str() + " is not an observable X/SX variable");
    if (o.state < 0 || o.state >= net.node(n).states)
      throw RejectedError("state " + std::to_string(o.state) + " out of range for " + o.variable.str() +
                          " (states 0.." + std::to_string(net.node(n).states - 1) + ")");
    auto [it, fresh] = seen.emplace(o.variable, o.state);
    if (!fresh && it->second != o.state)
      throw RejectedError("contradictory batch: " + o.variable.str() + " given states " +
                          std::to_string(it->second) + " and " + std::to_string(o.state));
  }
  BatchEffect effect;
  for (const auto& [id, s] : seen) {
    auto old = current.state_of(id);
    if (!old)
      effect.added.push_back({id, s});
    else if (*old != s)
      effect.replaced.push_back({{id, s}, *old});
  }
  return effect;
}

EvidenceSet apply_effect(const Network& net, const EvidenceSet& current, const BatchEffect& effect, int step) {
  auto observed = current.observed;
  for (const auto& o : effect.added) observed[o.variable] = o.state;
  for (const auto& [o, old] : effect.replaced) observed[o.variable] = o.state;
  return make_evidence(net, std::move(observed), step);
}

std::vector<json> read_lines(const fs::path& path) {
  std::vector<json> out;
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw SchemaError(path.string() + ":" + std::to_string(number), std::string("malformed log line: ") + e.what());
    }
  }
  return out;
}

void append_line(const fs::path& path, const json& entry) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot write " + path.string());
  out << entry.dump() << '\n';
  out.flush();
  if (!out) throw Error("write failed on " + path.string());
}

std::string utc_now() {
  using namespace std::chrono;
  auto t = system_clock::now();
  auto secs = system_clock::to_time_t(t);
  auto ms = duration_cast<milliseconds>(t.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

bool safe_model_id(const std::string& id) {
  if (id.empty() || id.size() > 128 || id[0] == '.') return false;
  for (char c : id)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) return false;
  return true;
}

}  // namespace

ReplayResult replay_log(const fs::path& log, const NetworkPtr& net) {
  ReplayResult out;
  EvidenceSet evidence;
  for (const auto& entry : read_lines(log)) {
    const std::string action = entry.at("action").get<std::string>();
    if (action != "observe" && action != "re-observe") continue;
    int step = entry.at("step").get<int>();
    auto effect = examine_batch(*net, evidence, observations_from(entry.at("payload")));
    evidence = apply_effect(*net, evidence, effect, step);
    std::string machine = run_step(net, evidence).to_json().dump();
    std::string digest = fnv1a_hex(machine);
    out.digests_match &= digest == entry.at("report_digest").get<std::string>();
    out.results.push_back(std::move(machine));
    out.digests.push_back(std::move(digest));
  }
  return out;
}

struct DiagnosisService::Session {
  std::mutex mutex;  // serializes every mutation of this session
  std::string id;
  std::string model_id;
  std::string created_at;
  NetworkPtr net;
  int step = 1;
  SessionStatus status = SessionStatus::kOpen;
  EvidenceSet evidence;
  std::vector<json> history;
  std::uint64_t seq = 0;
  std::optional<StepResult> latest;
  std::optional<Diagnosis> diagnosis;
};

DiagnosisService::DiagnosisService(fs::path data_dir, Clock clock)
    : dir_(std::move(data_dir)), clock_(std::move(clock)) {
  fs::create_directories(dir_ / "models");
  fs::create_directories(dir_ / "sessions");
  std::random_device rd;
  id_salt_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  restore();
}

DiagnosisService::~DiagnosisService() = default;

std::string DiagnosisService::now() const { return clock_ ? clock_() : utc_now(); }

fs::path DiagnosisService::log_path(const std::string& session_id) const {
  return dir_ / "sessions" / (session_id + ".log");
}

std::string DiagnosisService::fresh_session_id() {
  // Caller holds the registry lock.
  for (;;) {
    std::uint64_t x = id_salt_ + 0x9e3779b97f4a7c15ull * ++id_counter_;
    x ^= x >> 31;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 29;
    char buf[24];
    std::snprintf(buf, sizeof buf, "s%012llx", static_cast<unsigned long long>(x & 0xffffffffffffull));
    std::string id = buf;
    if (!sessions_.count(id) && !fs::exists(log_path(id))) return id;
  }
}

void DiagnosisService::restore() {
  for (const auto& entry : fs::directory_iterator(dir_ / "models")) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    auto model = std::get<ChiefComplaintModel>(load_model(text));
    std::string id = model.model_id;
    model_text_[id] = text;
    models_[id] = Network::compile(std::move(model));
  }
  fs::path index = dir_ / "sessions" / "index.jsonl";
  if (!fs::exists(index)) return;
  for (const auto& line : read_lines(index)) {
    auto s = std::make_shared<Session>();
    s->id = line.at("session_id").get<std::string>();
    s->model_id = line.at("model_id").get<std::string>();
    auto model = models_.find(s->model_id);
    if (model == models_.end()) throw NotFoundError("session " + s->id + " refers to missing model " + s->model_id);
    s->net = model->second;
    for (const auto& entry : read_lines(log_path(s->id))) {
      s->seq = entry.at("seq").get<std::uint64_t>();
      const std::string action = entry.at("action").get<std::string>();
      if (action == "create") {
        s->created_at = entry.at("timestamp").get<std::string>();
        s->evidence = make_evidence(*s->net, {}, 1);
      } else if (action == "observe" || action == "re-observe") {
        int step = entry.at("step").get<int>();
        auto effect = examine_batch(*s->net, s->evidence, observations_from(entry.at("payload")));
        s->evidence = apply_effect(*s->net, s->evidence, effect, step);
        Diagnosis d;
        s->latest = run_step(s->net, s->evidence, &d);
        s->diagnosis = std::move(d);
        s->step = step + 1;
        s->history.push_back({{"step", step},
                              {"action", action},
                              {"timestamp", entry.at("timestamp")},
                              {"observations", entry.at("payload").at("observations")},
                              {"report_digest", entry.at("report_digest")}});
      } else if (action == "conclude") {
        s->status = SessionStatus::kConcluded;
      } else if (action == "flag-disagreement") {
        s->status = SessionStatus::kFlagged;
      }
    }
    sessions_[s->id] = s;
  }
}

json DiagnosisService::register_model(std::string_view text) {
  ModelSource source = load_model(text);
  ChiefComplaintModel model;
  if (auto* m = std::get_if<ChiefComplaintModel>(&source)) {
    model = std::move(*m);
  } else {
    auto& file = std::get<ModuleFile>(source);
    model = fuse(file.modules, file.header);
  }
  if (!safe_model_id(model.model_id))
    throw SchemaError("model_id", "model ids may use letters, digits, '-', '_' and '.' only");
  std::string canonical = save_model(model);
  auto net = Network::compile(model);

  std::unique_lock lock(registry_mutex_);
  auto it = model_text_.find(model.model_id);
  if (it != model_text_.end()) {
    if (it->second != canonical) throw ConflictError("model " + model.model_id + " is already registered with different content");
    return {{"model_id", model.model_id}, {"created", false}};
  }
  fs::path path = dir_ / "models" / (model.model_id + ".json");
  {
    std::ofstream out(path);
    out << canonical;
    if (!out) throw Error("cannot write " + path.string());
  }
  model_text_[model.model_id] = canonical;
  models_[model.model_id] = net;
  return {{"model_id", model.model_id}, {"created", true}};
}

NetworkPtr DiagnosisService::model(const std::string& model_id) const {
  std::shared_lock lock(registry_mutex_);
  auto it = models_.find(model_id);
  if (it == models_.end()) throw NotFoundError("unknown model " + model_id);
  return it->second;
}

json DiagnosisService::list_models() const {
  std::shared_lock lock(registry_mutex_);
  json out = json::array();
  for (const auto& [id, net] : models_) {
    const auto& m = net->model();
    json variables = json::array();
    for (const auto& n : net->nodes()) {
      json v = {{"id", n.id.str()},
                {"kind", kind_name(n.id.kind)},
                {"index", n.id.index},
                {"name", n.variable->name},
                {"states", n.variable->states},
                {"observable", is_observable_kind(n.id.kind)}};
      if (is_observable_kind(n.id.kind)) {
        v["attention"] = n.attention;
        v["cost"] = n.cost;
      }
      variables.push_back(std::move(v));
    }
    json diseases = json::array();
    for (const auto& d : m.diseases)
      diseases.push_back({{"id", d.variable.str()}, {"name", d.display_name}, {"icd", d.icd_codes}});
    out.push_back({{"model_id", id},
                   {"chief_complaints", m.chief_complaints},
                   {"defaults", {{"theta_d", m.defaults.theta_d}, {"tolerance", m.defaults.tolerance}}},
                   {"variables", variables},
                   {"diseases", diseases}});
  }
  return {{"models", out}};
}

std::shared_ptr<DiagnosisService::Session> DiagnosisService::find_session(const std::string& id) const {
  std::shared_lock lock(registry_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("unknown session " + id);
  return it->second;
}

void DiagnosisService::append_audit(Session& s, json entry) {
  entry["seq"] = ++s.seq;
  entry["session_id"] = s.id;
  if (!entry.contains("timestamp")) entry["timestamp"] = now();
  entry["payload_digest"] = fnv1a_hex(entry.value("payload", json::object()).dump());
  append_line(log_path(s.id), entry);
}

json DiagnosisService::create_session(const std::string& model_id, const std::string& actor) {
  NetworkPtr net = model(model_id);
  auto s = std::make_shared<Session>();
  s->model_id = model_id;
  s->net = net;
  s->created_at = now();
  s->evidence = make_evidence(*net, {}, 1);
  {
    std::unique_lock lock(registry_mutex_);
    s->id = fresh_session_id();
    sessions_[s->id] = s;
  }
  std::lock_guard guard(s->mutex);
  append_audit(*s, {{"action", "create"},
                    {"actor", actor},
                    {"timestamp", s->created_at},
                    {"step", 1},
                    {"payload", {{"model_id", model_id}}}});
  {
    std::lock_guard files(file_mutex_);
    append_line(dir_ / "sessions" / "index.jsonl",
                {{"session_id", s->id}, {"model_id", model_id}, {"created_at", s->created_at}});
  }
  return {{"session_id", s->id},
          {"model_id", model_id},
          {"created_at", s->created_at},
          {"step", s->step},
          {"status", status_name(s->status)},
          {"evidence", evidence_json(s->evidence)},
          {"history", json::array()},
          {"initial_ranking", initial_ranking(*net)}};
}

json DiagnosisService::submit_observations(const std::string& session_id, const std::vector<Observation>& batch,
                                           const std::string& actor) {
  auto s = find_session(session_id);
  std::lock_guard guard(s->mutex);
  if (s->status != SessionStatus::kOpen)
    throw PreconditionError("session " + s->id + " is " + status_name(s->status) + " and accepts no observations");
  auto effect = examine_batch(*s->net, s->evidence, batch);

  auto explanations = [&]() {
    json list = json::array();
    if (s->latest)
      for (const auto& e : s->latest->report.entries) list.push_back(e.hypothesis.str());
    return list;
  };

  if (effect.empty()) {
    json out = {{"session_id", s->id}, {"step", s->step}, {"idempotent", true}, {"explanations", explanations()}};
    if (s->latest) {
      out["report"] = to_json(s->latest->report);
      out["recommendations"] = to_json(s->latest->recommendations);
    }
    return out;
  }

  int step = s->step;
  EvidenceSet next = apply_effect(*s->net, s->evidence, effect, step);
  Diagnosis d;
  StepResult result = run_step(s->net, next, &d);
  json machine = result.to_json();
  std::string digest = fnv1a_hex(machine.dump());

  json observations = json::array();
  for (const auto& o : batch) observations.push_back(observation_json(o.variable, o.state));
  json replaced = json::array();
  for (const auto& [o, old] : effect.replaced)
    replaced.push_back({{"variable", id_to_json(o.variable)}, {"from", old}, {"to", o.state}});
  std::string action = effect.replaced.empty() ? "observe" : "re-observe";
  std::string ts = now();
  append_audit(*s, {{"action", action},
                    {"actor", actor},
                    {"timestamp", ts},
                    {"step", step},
                    {"payload", {{"observations", observations}, {"replaced", replaced}}},
                    {"report_digest", digest}});

  s->evidence = std::move(next);
  s->latest = std::move(result);
  s->diagnosis = std::move(d);
  s->step = step + 1;
  s->history.push_back(
      {{"step", step}, {"action", action}, {"timestamp", ts}, {"observations", observations}, {"report_digest", digest}});

  return {{"session_id", s->id},
          {"step", s->step},
          {"idempotent", false},
          {"report", machine["report"]},
          {"recommendations", machine["recommendations"]},
          {"explanations", explanations()}};
}

json DiagnosisService::get_session(const std::string& session_id) const {
  auto s = find_session(session_id);
  std::lock_guard guard(s->mutex);
  json out = {{"session_id", s->id},
              {"model_id", s->model_id},
              {"created_at", s->created_at},
              {"step", s->step},
              {"status", status_name(s->status)},
              {"evidence", evidence_json(s->evidence)},
              {"history", s->history}};
  if (s->latest) {
    out["report"] = to_json(s->latest->report);
    out["recommendations"] = to_json(s->latest->recommendations);
  } else {
    out["initial_ranking"] = initial_ranking(*s->net);
  }
  return out;
}

json DiagnosisService::explanation(const std::string& session_id, const std::string& hypothesis) const {
  auto s = find_session(session_id);
  DiseaseEvent h = DiseaseEvent::parse(hypothesis);
  std::lock_guard guard(s->mutex);
  std::string valid;
  if (s->latest)
    for (const auto& e : s->latest->report.entries) valid += (valid.empty() ? "" : ", ") + e.hypothesis.str();
  if (!s->latest || !s->latest->report.find(h))
    throw NotFoundError("hypothesis " + h.str() + " is not in the latest report (step " +
                        std::to_string(s->step - 1) + "); valid: [" + valid + "]");
  json out = to_json(s->diagnosis->sub(h));
  out["step"] = s->latest->report.step;
  return out;
}

json DiagnosisService::flag_disagreement(const std::string& session_id, const std::string& note,
                                         const std::string& actor) {
  auto s = find_session(session_id);
  std::lock_guard guard(s->mutex);
  s->status = SessionStatus::kFlagged;
  std::string ts = now();
  append_audit(*s, {{"action", "flag-disagreement"},
                    {"actor", actor},
                    {"timestamp", ts},
                    {"step", s->step},
                    {"payload", {{"note", note}}}});
  json snapshot = {{"session_id", s->id},
                   {"model_id", s->model_id},
                   {"timestamp", ts},
                   {"actor", actor},
                   {"note", note},
                   {"step", s->step},
                   {"evidence", evidence_json(s->evidence)},
                   {"history", s->history}};
  if (s->latest) snapshot["latest"] = s->latest->to_json();
  {
    std::lock_guard files(file_mutex_);
    append_line(dir_ / "disagreement_queue.jsonl", snapshot);
  }
  return {{"session_id", s->id}, {"status", status_name(s->status)}, {"queued", true}, {"audit_seq", s->seq}};
}

json DiagnosisService::conclude(const std::string& session_id, const std::string& note, const std::string& actor) {
  auto s = find_session(session_id);
  std::lock_guard guard(s->mutex);
  if (s->status != SessionStatus::kOpen)
    throw PreconditionError("session " + s->id + " is " + status_name(s->status) + " and cannot be concluded");
  s->status = SessionStatus::kConcluded;
  append_audit(*s, {{"action", "conclude"}, {"actor", actor}, {"step", s->step}, {"payload", {{"note", note}}}});
  return {{"session_id", s->id}, {"status", status_name(s->status)}, {"audit_seq", s->seq}};
}

}  // namespace ducg
