#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "trauma/nn/tensor.hpp"
#include "trauma/phantom.hpp"
#include "trauma/schema.hpp"
#include "trauma/volume.hpp"

namespace trauma::prep {

inline constexpr int kStackSlices = 96;   // slices per resampled volume
inline constexpr int kTripletCount = 94;  // centers 2..95 (1-based), no padding

struct CropResult {
  Volume volume;  // masked intensities restricted to the expanded box
  Box3 box;
};

struct SliceVolume96 {
  Volume slices;                             // depth == 96
  std::vector<std::int64_t> source_indices;  // 96 source slice indices
};

struct TripletSequence {
  nn::Tensor data;                           // (T, 3, H, W)
  std::vector<std::int64_t> center_indices;  // triplet centers, into the 96 stack
  // slice_labels[g][t]: per-group per-triplet label value in [0,1]
  std::vector<std::vector<double>> slice_labels;
};

struct LabelVector {
  std::vector<double> values;
  double patient_value = 0.0;
};

// clamp((raw - lo) / (hi - lo), 0, 1) elementwise.
Volume normalize_volume(const Volume& raw, double lo, double hi);

// Elementwise product with the mask, then restriction to the mask bounding
// box expanded by `margin` voxels per axis and clipped to bounds. An all-zero
// mask raises degenerate_mask_error; the documented fallback is the full
// masked volume (all zeros), which callers opt into explicitly.
CropResult apply_mask_crop(const Volume& norm, const MaskVolume& mask,
                           std::int64_t margin);

// 96 equidistant slices, source index round(i*(D-1)/95) with
// round-half-away-from-zero; duplicates appear when D < 96.
SliceVolume96 resample_96(const Volume& vol);

// 94 triplets with channels (i-1, i, i+1), centers 1..94 zero-based.
TripletSequence make_triplets(const SliceVolume96& vol);

// Equidistant subsequence of T triplets (and their labels).
TripletSequence select_sequence(const TripletSequence& trip, int T);

// L / max(L); all zeros stay all zeros.
LabelVector normalize_labels(const LabelVector& raw);

// Elementwise product with a patient-level scalar in [0,1].
LabelVector combine_patient_label(const LabelVector& norm, double patient);

// Per-slice positive-voxel count over its per-slice maximum.
LabelVector compute_visibility(const MaskVolume& mask);

struct PrepConfig {
  double window_lo = 0.0;
  double window_hi = 1.0;
  std::int64_t margin = 2;
  int sequence_length = 32;
  std::int64_t height = 64;
  std::int64_t width = 64;

  void validate() const;
};

// One study preprocessed end to end: study-level crop by the union of the
// provided masks, 96-slice stack, triplets, equidistant selection, nearest
// resize to (height, width), and per-group slice labels
// (visibility x patient indicator).
struct PrepResult {
  std::string study_id;
  nn::Tensor sequence;                        // (T, 3, H, W)
  nn::Tensor mask_sequence;                   // (T, H, W), union organ mask
  std::vector<std::int64_t> source_indices;   // 96 -> cropped depth
  std::vector<std::int64_t> centers;          // T, into the 96 stack
  std::vector<std::vector<double>> slice_labels;  // [group][T]
  std::vector<int> patient_labels;            // true state per group
  Box3 crop_box;
  bool degenerate_mask = false;
};

PrepResult prepare_study(const phantom::PhantomStudy& study,
                         const std::vector<MaskVolume>& masks,
                         const LabelSchema& schema, const PrepConfig& cfg);

// prep_<study>.raw (f32, T*3*H*W) + prepmask_<study>.raw (u8, T*H*W) +
// prep_<study>.json (indices, labels, crop box).
void save_prep(const std::string& dir, const PrepResult& prep,
               const LabelSchema& schema);
PrepResult load_prep(const std::string& dir, const std::string& study_id,
                     const LabelSchema& schema);

}  // namespace trauma::prep
