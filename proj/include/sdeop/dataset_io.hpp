#pragma once

#include <cstdint>
#include <string>

#include "sdeop/paths.hpp"

namespace sdeop {

// Provenance recorded in the dataset header line (free-form strings; the
// reader hands them back untouched).
struct DatasetMeta {
  std::string model;      // model descriptor, e.g. "ou(a=1,b=1)"
  std::string solver;     // "exact" | "em" | "emp"
  std::string x0_policy;  // e.g. "fixed(1)" or "normal(0,1)"
  std::uint64_t base_seed = 0;
  std::string config_hash;
};

struct DatasetFile {
  PathDataset data;
  DatasetMeta meta;
};

// Text format, one record per line:
//   # sdeop-dataset v1 tool=... t0=... h=... M=... paths=... [meta keys]
//   <path> <k> <t_k> <B> <X>
// Doubles are shortest-round-trip, so write/read/write reproduces the file
// byte for byte.  A dataset with zero paths is a valid header-only file.
void write_dataset(const std::string& path, const PathDataset& dataset, const DatasetMeta& meta);
DatasetFile read_dataset(const std::string& path);

}  // namespace sdeop
