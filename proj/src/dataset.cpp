#include "consist/dataset.hpp"

#include <fstream>
#include <span>
#include <stdexcept>

#include <json.hpp>

namespace consist {

namespace {

nlohmann::json pair_line(const LabeledPair& pair, const char* split) {
  nlohmann::json doc;
  doc["x"] = pair.x;
  doc["split"] = split;
  if (pair.y) doc["y"] = *pair.y;
  if (pair.z) doc["z"] = {{std::to_string(pair.z->first), pair.z->second}};
  return doc;
}

nlohmann::json example_line(const Example& ex, const char* split) {
  nlohmann::json doc;
  doc["x"] = ex.x;
  doc["split"] = split;
  doc["y"] = ex.y;
  nlohmann::json z = nlohmann::json::object();
  for (std::size_t k = 0; k < ex.z.size(); ++k) z[std::to_string(k)] = static_cast<int>(ex.z[k]);
  doc["z"] = z;
  return doc;
}

}  // namespace

void write_dataset_jsonl(const std::string& path, std::span<const LabeledPair> train_pairs,
                         std::span<const Example> validation, std::span<const Example> test) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  for (const auto& pair : train_pairs) out << pair_line(pair, "train") << "\n";
  for (const auto& ex : validation) out << example_line(ex, "validation") << "\n";
  for (const auto& ex : test) out << example_line(ex, "test") << "\n";
}

LoadedData load_dataset_jsonl(const std::string& path, int num_evidence) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  LoadedData data;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    const std::string split = doc.at("split").get<std::string>();
    if (split == "train") {
      LabeledPair pair;
      pair.x = doc.at("x").get<std::vector<double>>();
      if (doc.contains("y")) {
        pair.y = doc.at("y").get<int>();
      } else if (doc.contains("z")) {
        const auto& z = doc.at("z");
        if (z.size() != 1)
          throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                   ": train line must carry exactly one label");
        const auto it = z.begin();
        pair.z = {std::stoi(it.key()), it.value().get<int>()};
      } else {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unlabeled train line");
      }
      data.train_pairs.push_back(std::move(pair));
    } else if (split == "validation" || split == "test") {
      Example ex;
      ex.x = doc.at("x").get<std::vector<double>>();
      ex.y = doc.at("y").get<int>();
      ex.z.assign(num_evidence, -1);
      for (auto it = doc.at("z").begin(); it != doc.at("z").end(); ++it) {
        const int k = std::stoi(it.key());
        if (k < 0 || k >= num_evidence)
          throw std::runtime_error(path + ":" + std::to_string(lineno) + ": evidence index out of range");
        ex.z[k] = static_cast<std::int8_t>(it.value().get<int>());
      }
      (split == "validation" ? data.validation : data.test).push_back(std::move(ex));
    } else {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown split '" + split + "'");
    }
  }
  return data;
}

}  // namespace consist
