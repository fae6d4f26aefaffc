#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "tabsynth/schema.hpp"
#include "tabsynth/types.hpp"
#include "tabsynth/vae.hpp"

namespace tabsynth {

// Parsed run configuration. Relative paths in the file resolve against the
// config's directory; a relative output directory resolves against
// TABSYNTH_OUT_ROOT instead when that variable is set.
struct RunConfig {
  std::filesystem::path dataset;
  std::optional<std::filesystem::path> schema;
  std::optional<SensitiveSpec> sensitive;
  std::string suite = "standard";  // suite name, or path to a skew spec file
  std::filesystem::path out;
  std::uint64_t seed = 0;
  Index k = 5;
  VaeArch arch;
  TrainConfig train;  // train.seed is derived from the master seed
  SynthMode synth_mode = SynthMode::reconstruction;
  Index tsne_points = 500;  // per-source cap for the embedding; 0 disables it
};

RunConfig load_run_config(const std::filesystem::path& path);

// Pipeline stages, each a file-to-file transform under cfg.out:
//   ingest    dataset + schema -> ingest/
//   skew      ingest/ -> variations/
//   train     ingest/ -> model/
//   synth     variations/ + model/ -> synth/
//   evaluate  variations/ + synth/ -> report/
// Every completed stage appends to <out>/lineage.log before the next starts.
inline constexpr const char* kStageNames[] = {"ingest", "skew", "train", "synth", "evaluate"};

void run_stage(const RunConfig& cfg, std::string_view stage);
void run_pipeline(const RunConfig& cfg);

// Writes <dir>/census.csv and <dir>/census.schema for quick-start runs.
void write_demo_data(const std::filesystem::path& dir, Index rows, std::uint64_t seed);

}  // namespace tabsynth
