#include "ducg/verify.h"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "ducg/error.h"
#include "ducg/evidence.h"
#include "ducg/inference.h"
#include "ducg/model_io.h"

namespace ducg {

using nlohmann::json;

std::uint64_t SampleRng::below(std::uint64_t bound) {
  if (bound == 0) throw PreconditionError("empty sampling range");
  // Accept only draws below the largest multiple of bound, so every
  // residue is equally likely.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do x = engine_();
  while (x >= limit);
  return x % bound;
}

namespace {

std::string record_path(std::size_t i) { return "cases[" + std::to_string(i) + "]"; }

const json& field(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path + "." + key, "missing required field");
  return *it;
}

std::optional<VariableId> resolve_icd(const Network& net, const std::string& code) {
  for (const auto& d : net.model().diseases)
    for (const auto& c : d.icd_codes)
      if (c == code) return d.variable;
  return std::nullopt;
}

CaseRecord parse_record(const json& j, const std::string& path, const Network& net) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  CaseRecord r;
  const json& id = field(j, "record_id", path);
  r.record_id = id.is_string() ? id.get<std::string>() : id.dump();
  if (auto it = j.find("chief_complaint"); it != j.end() && it->is_string()) r.chief_complaint = *it;
  const json& qualified = field(j, "qualified", path);
  if (!qualified.is_boolean()) throw SchemaError(path + ".qualified", "expected a boolean");
  r.qualified = qualified.get<bool>();
  if (!r.qualified) r.reason = "marked unqualified in the corpus";

  auto disqualify = [&](std::string why) {
    if (r.qualified) r.reason = std::move(why);
    r.qualified = false;
  };

  const json& obs = field(j, "observations", path);
  if (!obs.is_array()) throw SchemaError(path + ".observations", "expected an array");
  bool abnormal = false;
  for (std::size_t k = 0; k < obs.size(); ++k) {
    auto opath = path + ".observations[" + std::to_string(k) + "]";
    VariableId v = id_from_json(field(obs[k], "variable", opath), opath + ".variable");
    const json& s = field(obs[k], "state", opath);
    if (!s.is_number_integer()) throw SchemaError(opath + ".state", "expected an integer");
    int state = s.get<int>();
    auto n = net.find(v);
    if (!n) {
      disqualify("unknown variable " + v.str());
      continue;
    }
    if (!is_observable_kind(v.kind) || state < 0 || state >= net.node(*n).states) {
      disqualify("invalid observation " + v.str() + "=" + std::to_string(state));
      continue;
    }
    if (auto [it, fresh] = r.observations.emplace(v, state); !fresh && it->second != state)
      disqualify("contradictory observations of " + v.str());
    abnormal |= state > 0;
  }

  const json& truth = field(j, "true_disease", path);
  if (!truth.is_object()) throw SchemaError(path + ".true_disease", "expected an object");
  if (auto it = truth.find("disease_id"); it != truth.end()) {
    VariableId d = id_from_json(*it, path + ".true_disease.disease_id");
    if (net.model().find_disease(d))
      r.true_disease = d;
    else
      disqualify("disease " + d.str() + " is not in the model");
  } else if (auto it = truth.find("icd"); it != truth.end()) {
    if (!it->is_string()) throw SchemaError(path + ".true_disease.icd", "expected a string");
    r.true_disease = resolve_icd(net, *it);
    if (!r.true_disease) disqualify("ICD code " + it->get<std::string>() + " is not in the model");
  } else {
    throw SchemaError(path + ".true_disease", "needs disease_id or icd");
  }
  if (!abnormal) disqualify("no abnormal observation");
  return r;
}

}  // namespace

CaseCorpus ingest_text(std::string_view text, const Network& net) {
  CaseCorpus corpus;
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    corpus.warnings.push_back("case file is empty");
    return corpus;
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("malformed case file: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("", "expected a JSON object at top level");
  const json& cases = field(doc, "cases", "");
  if (!cases.is_array()) throw SchemaError("cases", "expected an array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    corpus.records.push_back(parse_record(cases[i], record_path(i), net));
    if (!ids.insert(corpus.records.back().record_id).second)
      corpus.warnings.push_back("duplicate record id " + corpus.records.back().record_id);
  }
  if (corpus.records.empty()) corpus.warnings.push_back("case file holds no records");
  for (const auto& r : corpus.records)
    if (!r.qualified) corpus.warnings.push_back("record " + r.record_id + " unqualified: " + r.reason);
  return corpus;
}

CaseCorpus ingest(const std::filesystem::path& path, const Network& net) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open case file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ingest_text(ss.str(), net);
}

namespace {

bool diagnosed_correctly(const NetworkPtr& net, const CaseRecord& r, int top_k) {
  auto report = suspicion(net, make_evidence(*net, r.observations));
  if (report.has_flag(flag::kNoFinding) || report.has_flag(flag::kEvidenceInconsistent)) return false;
  std::vector<VariableId> ranked;
  for (const auto& e : report.entries) {
    if (std::find(ranked.begin(), ranked.end(), e.hypothesis.disease) != ranked.end()) continue;
    ranked.push_back(e.hypothesis.disease);
    if (static_cast<int>(ranked.size()) == top_k) break;
  }
  return std::find(ranked.begin(), ranked.end(), *r.true_disease) != ranked.end();
}

}  // namespace

VerificationReport run_verification(const NetworkPtr& net, const std::vector<CaseRecord>& records,
                                    const VerificationOptions& options) {
  if (options.cap < 1) throw PreconditionError("cap must be at least 1");
  if (options.top_k < 1) throw PreconditionError("top-k must be at least 1");
  VerificationReport report;
  report.model_id = net->model().model_id;
  report.seed = options.seed;
  report.cap = options.cap;
  report.top_k = options.top_k;

  std::map<VariableId, std::vector<const CaseRecord*>> pool;
  for (const auto& r : records)
    if (r.qualified && r.true_disease) pool[*r.true_disease].push_back(&r);

  SampleRng rng(options.seed);
  for (int d : net->disease_nodes()) {
    const Node& node = net->node(d);
    DiseaseRow row;
    row.disease = node.id;
    row.name = node.disease->display_name.empty() ? node.variable->name : node.disease->display_name;
    auto candidates = pool[node.id];
    row.available = static_cast<int>(candidates.size());
    if (candidates.empty()) {
      row.skipped = true;
      report.rows.push_back(std::move(row));
      continue;
    }
    std::size_t take = std::min<std::size_t>(options.cap, candidates.size());
    for (std::size_t t = 0; t < take; ++t) {
      std::size_t pick = t + rng.below(candidates.size() - t);
      std::swap(candidates[t], candidates[pick]);
      const CaseRecord& r = *candidates[t];
      row.sampled.push_back(r.record_id);
      ++row.tested;
      row.correct += diagnosed_correctly(net, r, options.top_k);
    }
    report.total_tested += row.tested;
    report.total_correct += row.correct;
    report.rows.push_back(std::move(row));
  }
  if (report.total_tested == 0) report.flags.push_back("empty");
  return report;
}

namespace {

std::string percent(double ratio) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", ratio * 100.0);
  return buf;
}

}  // namespace

json to_json(const VerificationReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"disease_id", r.disease.str()},
                    {"name", r.name},
                    {"available", r.available},
                    {"tested", r.tested},
                    {"correct", r.correct},
                    {"precision", r.precision()},
                    {"skipped", r.skipped},
                    {"sampled", r.sampled}});
  return {{"model_id", report.model_id},
          {"seed", report.seed},
          {"cap", report.cap},
          {"top_k", report.top_k},
          {"rows", rows},
          {"overall",
           {{"tested", report.total_tested},
            {"correct", report.total_correct},
            {"precision", report.precision()}}},
          {"flags", report.flags}};
}

VerificationReport verification_report_from_json(const json& j) {
  VerificationReport r;
  try {
    r.model_id = j.at("model_id").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.cap = j.at("cap").get<int>();
    r.top_k = j.at("top_k").get<int>();
    for (const auto& row : j.at("rows")) {
      DiseaseRow d;
      d.disease = VariableId::parse(row.at("disease_id").get<std::string>());
      d.name = row.at("name").get<std::string>();
      d.available = row.at("available").get<int>();
      d.tested = row.at("tested").get<int>();
      d.correct = row.at("correct").get<int>();
      d.skipped = row.at("skipped").get<bool>();
      d.sampled = row.at("sampled").get<std::vector<std::string>>();
      r.rows.push_back(std::move(d));
    }
    r.total_tested = j.at("overall").at("tested").get<int>();
    r.total_correct = j.at("overall").at("correct").get<int>();
    r.flags = j.at("flags").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw SchemaError("", std::string("malformed verification report: ") + e.what());
  }
  return r;
}

std::string render_report(const VerificationReport& report, ReportFormat format) {
  if (format == ReportFormat::kMachine) return to_json(report).dump(2) + "\n";
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %-28s %7s %8s %10s  %s\n", "disease", "name", "tested", "correct",
                "precision", "note");
  out << "model " << report.model_id << "  seed " << report.seed << "  cap " << report.cap << "  top-k "
      << report.top_k << "\n"
      << line;
  for (const auto& r : report.rows) {
    std::string name = r.name.size() > 28 ? r.name.substr(0, 25) + "..." : r.name;
    std::snprintf(line, sizeof line, "%-10s %-28s %7d %8d %10s  %s\n", r.disease.str().c_str(), name.c_str(),
                  r.tested, r.correct, r.skipped ? "-" : percent(r.precision()).c_str(),
                  r.skipped ? "SKIPPED (no qualified records)" : "");
    out << line;
  }
  std::snprintf(line, sizeof line, "%-10s %-28s %7d %8d %10s\n", "overall", "", report.total_tested,
                report.total_correct, report.total_tested ? percent(report.precision()).c_str() : "-");
  out << line;
  for (const auto& f : report.flags) out << "flag: " << f << "\n";
  return out.str();
}

}  // namespace ducg
