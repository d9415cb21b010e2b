#include "consist/constraints.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

namespace consist {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Consistent: return "consistent";
    case Verdict::Incompatible: return "incompatible";
    case Verdict::Insufficient: return "insufficient";
    case Verdict::Both: return "both";
  }
  return "?";
}

void ConstraintSpec::validate() const {
  if (num_classes < 1) throw std::invalid_argument("num_classes must be >= 1");
  const int K = num_evidence();
  {
    std::set<std::string> seen;
    for (const auto& name : evidence_names) {
      if (!seen.insert(name).second)
        throw std::invalid_argument("duplicate evidence name: " + name);
    }
  }
  if (static_cast<int>(direct_support.size()) != num_classes ||
      static_cast<int>(incompatible.size()) != num_classes)
    throw std::invalid_argument("constraint maps must have one entry per class");

  auto check_indices = [K](const std::vector<int>& s, const char* what) {
    for (int k : s) {
      if (k < 0 || k >= K)
        throw std::invalid_argument(std::string(what) + ": evidence index out of range");
    }
  };
  std::vector<int> owner(K, -1);
  for (int c = 0; c < num_classes; ++c) {
    check_indices(direct_support[c], "direct_support");
    check_indices(incompatible[c], "incompatible");
    for (int k : direct_support[c]) {
      if (owner[k] != -1)
        throw std::invalid_argument("evidence '" + evidence_names[k] +
                                    "' directly supports more than one class");
      owner[k] = c;
    }
  }
  for (int c = 0; c < num_classes; ++c) {
    for (int k : incompatible[c]) {
      if (std::binary_search(direct_support[c].begin(), direct_support[c].end(), k))
        throw std::invalid_argument("evidence '" + evidence_names[k] +
                                    "' is both supporting and incompatible for class " +
                                    std::to_string(c));
    }
  }
}

namespace {

std::vector<std::vector<int>> parse_class_map(const nlohmann::json& obj,
                                              const ConstraintSpec& spec,
                                              const char* what) {
  std::vector<std::vector<int>> out(spec.num_classes);
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    int c;
    try {
      c = std::stoi(it.key());
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(what) + ": class key '" + it.key() +
                                  "' is not an integer");
    }
    if (c < 0 || c >= spec.num_classes)
      throw std::invalid_argument(std::string(what) + ": class index " + std::to_string(c) +
                                  " out of range");
    for (const auto& name : it.value()) {
      const std::string n = name.get<std::string>();
      auto pos = std::find(spec.evidence_names.begin(), spec.evidence_names.end(), n);
      if (pos == spec.evidence_names.end())
        throw std::invalid_argument(std::string(what) + ": unknown evidence name '" + n + "'");
      out[c].push_back(static_cast<int>(pos - spec.evidence_names.begin()));
    }
    std::sort(out[c].begin(), out[c].end());
    out[c].erase(std::unique(out[c].begin(), out[c].end()), out[c].end());
  }
  return out;
}

}  // namespace

ConstraintSpec parse_spec(const nlohmann::json& doc) {
  ConstraintSpec spec;
  spec.num_classes = doc.at("num_classes").get<int>();
  if (spec.num_classes < 1) throw std::invalid_argument("num_classes must be >= 1");
  for (const auto& name : doc.at("evidence")) spec.evidence_names.push_back(name.get<std::string>());
  spec.direct_support = parse_class_map(doc.value("direct_support", nlohmann::json::object()),
                                        spec, "direct_support");
  if (doc.contains("incompatible")) {
    spec.incompatible = parse_class_map(doc.at("incompatible"), spec, "incompatible");
    spec.validate();
  } else {
    const std::string rule = doc.value("derive", "");
    if (rule.empty())
      throw std::invalid_argument("constraint document needs 'incompatible' or 'derive'");
    if (rule != "higher-direct")
      throw std::invalid_argument("unknown derivation rule: " + rule);
    spec.incompatible.assign(spec.num_classes, {});
    spec.validate();
    spec = derive_incompatible(std::move(spec));
  }
  return spec;
}

ConstraintSpec parse_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open constraint file: " + path);
  nlohmann::json doc;
  in >> doc;
  return parse_spec(doc);
}

ConstraintSpec derive_incompatible(ConstraintSpec spec) {
  spec.incompatible.assign(spec.num_classes, {});
  for (int c = 0; c < spec.num_classes; ++c) {
    for (int higher = c + 1; higher < spec.num_classes; ++higher) {
      for (int k : spec.direct_support[higher]) spec.incompatible[c].push_back(k);
    }
    std::sort(spec.incompatible[c].begin(), spec.incompatible[c].end());
  }
  spec.validate();
  return spec;
}

Verdict check_consistent(const ConstraintSpec& spec, int y, const EvidenceVector& z) {
  if (y < 0 || y >= spec.num_classes) throw std::invalid_argument("task label out of range");
  if (static_cast<int>(z.size()) != spec.num_evidence())
    throw std::invalid_argument("evidence vector length mismatch");
  for (std::int8_t v : z) {
    if (v != -1 && v != 1) throw std::invalid_argument("evidence entries must be -1 or +1");
  }
  bool incompatible = false;
  for (int k : spec.incompatible[y]) {
    if (z[k] == 1) { incompatible = true; break; }
  }
  bool insufficient = false;
  if (!spec.direct_support[y].empty()) {
    insufficient = true;
    for (int k : spec.direct_support[y]) {
      if (z[k] == 1) { insufficient = false; break; }
    }
  }
  if (incompatible && insufficient) return Verdict::Both;
  if (incompatible) return Verdict::Incompatible;
  if (insufficient) return Verdict::Insufficient;
  return Verdict::Consistent;
}

nlohmann::json spec_to_json(const ConstraintSpec& spec) {
  nlohmann::json doc;
  doc["num_classes"] = spec.num_classes;
  doc["evidence"] = spec.evidence_names;
  auto map_to_json = [&spec](const std::vector<std::vector<int>>& m) {
    nlohmann::json obj = nlohmann::json::object();
    for (int c = 0; c < spec.num_classes; ++c) {
      nlohmann::json arr = nlohmann::json::array();
      for (int k : m[c]) arr.push_back(spec.evidence_names[k]);
      obj[std::to_string(c)] = arr;
    }
    return obj;
  };
  doc["direct_support"] = map_to_json(spec.direct_support);
  doc["incompatible"] = map_to_json(spec.incompatible);
  return doc;
}

std::uint64_t spec_hash(const ConstraintSpec& spec) {
  const std::string s = spec_to_json(spec).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace consist
