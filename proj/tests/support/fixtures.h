#ifndef DUCG_TESTS_FIXTURES_H_
#define DUCG_TESTS_FIXTURES_H_

#include <fstream>
#include <sstream>
#include <string>

#include "ducg/evidence.h"
#include "ducg/model_io.h"
#include "ducg/network.h"

namespace ducg::fixtures {

inline std::string path(const std::string& name) { return std::string(DUCG_FIXTURES) + "/" + name; }

inline std::string text(const std::string& name) {
  std::ifstream in(path(name));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline NetworkPtr network(const std::string& name) { return Network::compile(load_model_file(path(name))); }

inline VariableId id(const char* s) { return VariableId::parse(s); }

// Evidence of the worked example: X3 normal, X4 mildly abnormal, X8 abnormal.
inline EvidenceSet example_evidence(const Network& net) {
  return make_evidence(net, {{id("X3"), 0}, {id("X4"), 1}, {id("X8"), 1}});
}

}  // namespace ducg::fixtures

#endif  // DUCG_TESTS_FIXTURES_H_
