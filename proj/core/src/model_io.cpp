#include "mfldp/model_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace mfldp {

using nlohmann::json;

ModelSpec parse_model_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DomainError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object()) throw DomainError("model document must be an object");
    const int schema = doc.value("schema", 0);
    if (schema != kModelSchemaVersion)
      throw DomainError("unsupported model schema " + std::to_string(schema) + " (expected " +
                        std::to_string(kModelSchemaVersion) + ")");
    const int d = doc.at("d").get<int>();
    ParamMap params;
    if (doc.contains("params"))
      for (const auto& [k, v] : doc.at("params").items()) params[k] = v.get<double>();
    std::vector<TupleTransition> transitions;
    int idx = 0;
    for (const auto& t : doc.at("transitions")) {
      ++idx;
      auto from = t.at("from").get<std::vector<int>>();
      auto to = t.at("to").get<std::vector<int>>();
      if (t.contains("k") && t.at("k").get<std::size_t>() != from.size())
        throw DomainError("transition " + std::to_string(idx) + ": k does not match tuple length");
      try {
        transitions.push_back(make_transition(d, std::move(from), std::move(to), t.at("rate").get<std::string>(), params));
      } catch (const ParseError& e) {
        throw DomainError("transition " + std::to_string(idx) + ": " + e.what());
      }
    }
    ModelSpec spec(d, std::move(transitions), doc.value("symmetrize", false), std::move(params),
                   doc.value("name", std::string{}));
    if (doc.contains("K") && doc.at("K").get<int>() != spec.K())
      throw DomainError("K = " + std::to_string(doc.at("K").get<int>()) + " but the largest tuple has size " +
                        std::to_string(spec.K()));
    return spec;
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed model document: ") + e.what());
  }
}

ModelSpec load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open model file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model_json(ss.str());
}

std::string model_to_json(const ModelSpec& spec) {
  json doc;
  doc["schema"] = kModelSchemaVersion;
  if (!spec.name().empty()) doc["name"] = spec.name();
  doc["d"] = spec.d();
  doc["K"] = spec.K();
  doc["symmetrize"] = spec.symmetrize();
  doc["params"] = json::object();
  for (const auto& [k, v] : spec.params()) doc["params"][k] = v;
  doc["transitions"] = json::array();
  for (const auto& tr : spec.transitions()) {
    std::vector<int> from = tr.from, to = tr.to;
    for (auto& s : from) ++s;
    for (auto& s : to) ++s;
    doc["transitions"].push_back({{"k", tr.k()}, {"from", from}, {"to", to}, {"rate", tr.rate.to_string()}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace mfldp
