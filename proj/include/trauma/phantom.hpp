#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trauma/schema.hpp"
#include "trauma/volume.hpp"

namespace trauma::phantom {

struct PhantomConfig {
  std::int64_t depth = 48;
  std::int64_t height = 64;
  std::int64_t width = 64;
  int organ_count = 4;  // must equal the schema's group count
  double injury_probability = 0.5;
  double noise_sigma = 0.02;
  double lesion_contrast = 0.35;

  void validate(const LabelSchema& schema) const;
};

struct PhantomStudy {
  std::string study_id;
  Volume volume;                          // intensities in [0,1]
  std::vector<MaskVolume> organ_masks;    // one per group, pairwise disjoint
  std::vector<MaskVolume> lesion_masks;   // lesion voxels, subset of the organ mask
  std::vector<int> patient_labels;        // true state index per group
  std::uint64_t seed = 0;
};

// Deterministic function of (seed, config, schema). Organs are axis-aligned
// ellipsoids confined to disjoint depth bands; an injured organ carries a
// contiguous lesion (organ ∩ lesion ellipsoid) offset by lesion_contrast.
// Severity for multi-state groups follows lesion size.
PhantomStudy generate_study(std::uint64_t seed, const PhantomConfig& config,
                            const LabelSchema& schema);

struct DatasetManifest {
  std::uint64_t root_seed = 0;
  int count = 0;
  PhantomConfig config;
  LabelSchema schema;
  struct Entry {
    std::string id;
    std::uint64_t seed = 0;
    std::string dir;
  };
  std::vector<Entry> studies;
};

// Writes `count` studies under out_path (manifest.json + per-study dirs with
// volume.raw / mask_<organ>.raw / labels.json). Per-study seed is
// derive_seed(root_seed, index), so generation may run in parallel and in
// any order.
DatasetManifest generate_dataset(std::uint64_t root_seed, int count,
                                 const PhantomConfig& config,
                                 const LabelSchema& schema,
                                 const std::string& out_path);

void save_study(const std::string& dir, const PhantomStudy& study,
                const LabelSchema& schema);
DatasetManifest load_manifest(const std::string& root);
PhantomStudy load_study(const DatasetManifest& manifest, const std::string& root,
                        int index);

}  // namespace trauma::phantom
