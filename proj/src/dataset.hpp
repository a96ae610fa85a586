#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "trace.hpp"

namespace nee {

// A serialized collection of supervised steps plus the generator spec that
// produced it (seed included), so any dataset can be regenerated or audited.
struct Dataset {
  nlohmann::json spec;
  std::vector<TraceStep> train;
  std::vector<TraceStep> val;
};

// Binary format (little-endian, see docs/formats.md): magic "NEED", version,
// canonical JSON spec block, record counts, length-prefixed records, FNV-1a
// checksum.
void write_dataset(const Dataset& ds, const std::string& path);
Dataset read_dataset(const std::string& path);

// Human-readable JSON dump of the same content.
nlohmann::json dataset_to_json(const Dataset& ds);

// Builds a dataset from a generator spec. Recognized tasks: selection-sort,
// merge, add, multiply, dijkstra, prim, seq2seq-baseline.
Dataset generate_dataset(const nlohmann::json& spec);

// Normalizes user-facing spec fields and fills defaults.
nlohmann::json normalize_dataset_spec(const nlohmann::json& spec);

}  // namespace nee
