#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "alsel/simulation.hpp"
#include "alsel/types.hpp"

// File formats. The binary tensor format is versioned and bit-exact:
//
//   magic   4 bytes  "ALTF"
//   version u16 LE   1
//   rank    u8       2 (matrix) or 3 (prediction tensor)
//   dims    rank x u64 LE
//   dtype   u8       0 = IEEE-754 binary32
//   payload product(dims) x 4 bytes, row-major, little-endian
//
// CSV is accepted for matrices exported by other pipelines (rectangular,
// no header, '.' decimal point regardless of locale). Index sets are
// newline-separated decimal indices in selection order. Simulation configs
// and reports are JSON.

namespace alsel {

using Tensor = std::variant<EmbeddingMatrix, PredictionTensor>;

/// Reads and validates a tensor file: rank 2 yields a matrix, rank 3 a
/// prediction tensor (validated with the given minimum augmentation count).
Tensor read_tensor(const std::filesystem::path& path, std::size_t min_augmentations = 2);

/// Convenience wrappers that fail when the file's rank is not the one asked
/// for.
EmbeddingMatrix read_matrix(const std::filesystem::path& path);
PredictionTensor read_prediction_tensor(const std::filesystem::path& path,
                                        std::size_t min_augmentations = 2);

void write_tensor(const EmbeddingMatrix& matrix, const std::filesystem::path& path);
void write_tensor(const PredictionTensor& tensor, const std::filesystem::path& path);
/// Variances are stored in double precision in memory; the file narrows them
/// to binary32.
void write_tensor(const VarianceMatrix& matrix, const std::filesystem::path& path);

/// Rectangular numeric CSV without a header row.
EmbeddingMatrix read_csv_matrix(const std::filesystem::path& path);

/// Newline-separated sample indices; order preserved, duplicates rejected.
IndexSet read_index_set(const std::filesystem::path& path);
void write_index_set(const IndexSet& set, const std::filesystem::path& path);

/// Simulation config as JSON. Every field is optional and defaults to the
/// desk-scale configuration; unknown keys are rejected.
SimConfig parse_sim_config(const std::string& json_text);
SimConfig load_sim_config(const std::filesystem::path& path);
std::string sim_config_to_json(const SimConfig& config);

/// Experiment report as JSON (per-run records plus per-cycle aggregates).
std::string report_to_json(const ALExperimentReport& report);
void write_report(const ALExperimentReport& report, const std::filesystem::path& path);

}  // namespace alsel
