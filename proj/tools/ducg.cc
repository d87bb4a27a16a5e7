// Command-line entry point: model validation, verification runs, one-off
// diagnosis and the REST service.
//
// Exit codes: 0 success, 1 usage error, 2 invalid data or failed check.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ducg/error.h"
#include "ducg/model_io.h"
#include "ducg/network.h"
#include "ducg/recommend.h"
#include "ducg/server.h"
#include "ducg/validate.h"
#include "ducg/verify.h"

namespace {

using namespace ducg;

constexpr int kDataError = 2;

ducg::RestServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

int run_validate(const std::string& path) {
  auto model = load_model_file(path);
  auto report = validate(model);
  std::cout << report.summary() << report.findings.size() << " finding(s), "
            << (report.ok() ? "model is valid" : "model is invalid") << "\n";
  return report.ok() ? 0 : kDataError;
}

int run_verify(const std::string& model_path, const std::string& cases_path, const VerificationOptions& options,
               const std::string& format, const std::string& output) {
  auto net = Network::compile(load_model_file(model_path));
  auto corpus = ingest(cases_path, *net);
  for (const auto& w : corpus.warnings) std::cerr << "warning: " << w << "\n";
  auto report = run_verification(net, corpus.records, options);
  std::string text = render_report(report, format == "machine" ? ReportFormat::kMachine : ReportFormat::kText);
  if (output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(output);
    out << text;
    if (!out) throw Error("cannot write " + output);
  }
  return 0;
}

int run_diagnose(const std::string& model_path, const std::vector<std::string>& observations) {
  auto net = Network::compile(load_model_file(model_path));
  std::map<VariableId, int> observed;
  for (const auto& o : observations) {
    auto eq = o.find('=');
    if (eq == std::string::npos) throw SchemaError(o, "expected VARIABLE=STATE");
    observed[VariableId::parse(o.substr(0, eq))] = std::stoi(o.substr(eq + 1));
  }
  auto evidence = make_evidence(*net, observed);
  auto d = diagnose(net, evidence);
  nlohmann::json out = {{"report", to_json(d.report)}, {"recommendations", to_json(recommend(d))}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_serve(ServerConfig config) {
  config = apply_environment(config);
  DiagnosisService service(config.data_dir);
  RestServer server(service);
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  std::cerr << "serving on " << config.host << ":" << config.port << " with data in " << config.data_dir.string()
            << "\n";
  if (!server.listen(config.host, config.port)) {
    std::cerr << "error: cannot listen on " << config.host << ":" << config.port << "\n";
    return kDataError;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DUCG diagnosis engine"};
  app.require_subcommand(1);

  std::string model_path, cases_path, format = "text", output;
  VerificationOptions options;
  std::vector<std::string> observations;
  ServerConfig config;
  std::string data_dir = config.data_dir.string();

  auto* validate_cmd = app.add_subcommand("validate", "check a model file");
  validate_cmd->add_option("--model", model_path, "model or module file")->required();

  auto* verify_cmd = app.add_subcommand("verify", "measure precision against a case corpus");
  verify_cmd->add_option("--model", model_path, "model or module file")->required();
  verify_cmd->add_option("--cases", cases_path, "case corpus file")->required();
  verify_cmd->add_option("--cap", options.cap, "records sampled per disease")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--seed", options.seed, "sampling seed");
  verify_cmd->add_option("--top-k", options.top_k, "a case counts as correct within this rank")
      ->check(CLI::PositiveNumber);
  verify_cmd->add_option("--format", format, "text or machine")->check(CLI::IsMember({"text", "machine"}));
  verify_cmd->add_option("--out", output, "write the report here instead of stdout");

  auto* diagnose_cmd = app.add_subcommand("diagnose", "rank hypotheses for one evidence set");
  diagnose_cmd->add_option("--model", model_path, "model or module file")->required();
  diagnose_cmd->add_option("--obs", observations, "VARIABLE=STATE, e.g. X4=1")->expected(1, -1);

  auto* serve_cmd = app.add_subcommand("serve", "run the REST service");
  serve_cmd->add_option("--host", config.host, "bind address");
  serve_cmd->add_option("--port", config.port, "listen port (DUCG_PORT overrides)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--data-dir", data_dir, "persistence directory (DUCG_DATA_DIR overrides)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*validate_cmd) return run_validate(model_path);
    if (*verify_cmd) return run_verify(model_path, cases_path, options, format, output);
    if (*diagnose_cmd) return run_diagnose(model_path, observations);
    if (*serve_cmd) {
      config.data_dir = data_dir;
      return run_serve(config);
    }
  } catch (const InvalidModelError& e) {
    std::cerr << e.what();
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return 1;
}
