#pragma once

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "aoimec/errors.hpp"
#include "aoimec/shs.hpp"

// JSON interchange for SHS models (the model-gallery format):
// {"num_states": m, "num_ages": n+1, "growth": [[0|1,...],...],
//  "transitions": [{"source": s, "target": t, "rate": q, "reset": ["z"|j,...]},...]}

namespace aoimec::shs {

inline nlohmann::json model_to_json(const ShsModel& m) {
  nlohmann::json j;
  j["num_states"] = m.num_states;
  j["num_ages"] = m.num_ages;
  j["growth"] = m.growth;
  j["transitions"] = nlohmann::json::array();
  for (const auto& t : m.transitions) {
    nlohmann::json jt;
    jt["source"] = t.source;
    jt["target"] = t.target;
    jt["rate"] = t.rate;
    nlohmann::json reset = nlohmann::json::array();
    for (int r : t.reset) {
      if (r == kResetZero)
        reset.push_back("z");
      else
        reset.push_back(r);
    }
    jt["reset"] = std::move(reset);
    j["transitions"].push_back(std::move(jt));
  }
  return j;
}

inline ShsModel model_from_json(const nlohmann::json& j) {
  ShsModel m;
  try {
    m.num_states = j.at("num_states").get<int>();
    m.num_ages = j.at("num_ages").get<int>();
    m.growth = j.at("growth").get<std::vector<std::vector<int>>>();
    for (const auto& jt : j.at("transitions")) {
      Transition t;
      t.source = jt.at("source").get<int>();
      t.target = jt.at("target").get<int>();
      t.rate = jt.at("rate").get<double>();
      for (const auto& r : jt.at("reset")) {
        if (r.is_string()) {
          if (r.get<std::string>() != "z")
            throw InvalidConfig("reset entries must be an age index or \"z\"");
          t.reset.push_back(kResetZero);
        } else {
          t.reset.push_back(r.get<int>());
        }
      }
      m.transitions.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("malformed SHS model JSON: ") + e.what());
  }
  return m;
}

inline ShsModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("cannot parse model file ") + path + ": " + e.what());
  }
  return model_from_json(j);
}

inline void save_model(const std::string& path, const ShsModel& m) {
  std::ofstream out(path);
  if (!out) throw InvalidConfig("cannot write model file: " + path);
  out << model_to_json(m).dump(2) << '\n';
}

}  // namespace aoimec::shs
