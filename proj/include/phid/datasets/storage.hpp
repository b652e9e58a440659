#pragma once

#include "phid/datasets/dataset.hpp"

#include <filesystem>

namespace phid::data {

inline constexpr int kDatasetSchemaVersion = 1;

nlohmann::json to_json(const Scaling& s);
Scaling scaling_from_json(const nlohmann::json& j);

/// Writes `meta.json` and one `sim_####.csv` per simulation with columns
/// t, mu_*, u_*, x_*, xdot_*. meta.json lists each file with its git blob
/// hash and a dataset hash over the sorted file list.
void save_dataset(const TrajectoryDataset& ds, const std::filesystem::path& dir);

/// Reads a dataset written by save_dataset; values round-trip bit-exactly.
/// Throws ConfigError on a missing file or hash mismatch.
TrajectoryDataset load_dataset(const std::filesystem::path& dir);

} // namespace phid::data
