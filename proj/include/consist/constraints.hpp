#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace consist {

// Verdict of checking one (task label, evidence vector) assignment against
// the compatibility and sufficiency constraints.
enum class Verdict { Consistent, Incompatible, Insufficient, Both };

const char* to_string(Verdict v);

// Evidence labels are +1 (present) / -1 (absent).
using EvidenceVector = std::vector<std::int8_t>;

// Domain-expert constraint structure over C task classes and K binary
// evidence labels. `direct_support[c]` holds the evidence indices whose
// presence directly supports class c; `incompatible[c]` holds the indices
// forbidden under class c. Immutable after parsing; all member queries and
// the free functions below are pure and safe to share across threads.
struct ConstraintSpec {
  int num_classes = 0;
  std::vector<std::string> evidence_names;
  std::vector<std::vector<int>> direct_support;  // per class, sorted ascending
  std::vector<std::vector<int>> incompatible;    // per class, sorted ascending

  int num_evidence() const { return static_cast<int>(evidence_names.size()); }

  // Throws std::invalid_argument if any structural invariant is violated
  // (index out of range, overlapping direct_support sets, overlap between
  // incompatible(c) and direct_support(c), duplicate evidence names).
  void validate() const;
};

// Parse a constraint document. Expected keys: `num_classes`, `evidence`
// (array of distinct names), `direct_support` (class index as string ->
// array of evidence names), and either `incompatible` (same shape) or
// `derive` (currently only "higher-direct").
ConstraintSpec parse_spec(const nlohmann::json& doc);
ConstraintSpec parse_spec_file(const std::string& path);

// Fill `incompatible` from `direct_support` under the severity-order rule:
// evidence is incompatible with class c iff it directly supports some
// class c' > c. The top class always ends up with an empty set.
ConstraintSpec derive_incompatible(ConstraintSpec spec);

// Decide consistency of an assignment. Incompatible iff some forbidden
// evidence is present; insufficient iff direct_support(y) is nonempty and
// none of it is present. Classes with empty direct_support are exempt from
// the sufficiency clause (the no-findings class can otherwise never be
// consistent); this convention is applied everywhere downstream.
Verdict check_consistent(const ConstraintSpec& spec, int y, const EvidenceVector& z);

// Canonical serialization (explicit incompatible map, sorted keys) and an
// FNV-1a hash of it, used to tie checkpoints to the spec they were trained
// against.
nlohmann::json spec_to_json(const ConstraintSpec& spec);
std::uint64_t spec_hash(const ConstraintSpec& spec);

}  // namespace consist
