#pragma once

#include <string>

#include "grasp/detector.hpp"

namespace grasp {

// On-disk model bundle layout:
//   manifest.json      version, schema, config hash, dims, artifact names
//   config.json        resolved training configuration
//   params.bin         GAT + MLP parameters
//   location.bin       fitted location encoder
//   vocab.json         executable vocabulary
//   clusters.json      benign-mixup map (executable strings)
//   train_report.json  per-epoch losses and training F1
void save_bundle(const ModelBundle& bundle, const std::string& dir);
ModelBundle load_bundle(const std::string& dir);

// Content hash over the canonical manifest (timestamp excluded) and all
// artifact bytes; reproducible runs produce equal hashes.
std::string bundle_hash(const std::string& dir);

}  // namespace grasp
