#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trauma/nn/autograd.hpp"
#include "trauma/nn/optim.hpp"
#include "trauma/phantom.hpp"
#include "trauma/schema.hpp"
#include "trauma/volume.hpp"

namespace trauma::seg {

struct SegConfig {
  int grid = 32;           // training/inference resolution (grid^3)
  int base_channels = 8;   // encoder width; second level doubles it
  std::string optimizer = "adam";  // "adam" or "sgd"
  double lr = 0.003;       // sgd needs ~0.1 and far more steps
  double momentum = 0.9;   // sgd only
  int steps = 200;         // one study per step, cycled in order
  double threshold = 0.5;
  std::uint64_t seed = 11;

  void validate() const;
};

// Two-level 3D encoder-decoder trained with per-organ Dice loss on
// nearest-resampled grid^3 volumes. Output channel g is the voxel
// probability of organ g.
class SegModel {
 public:
  SegModel(int organs, const SegConfig& cfg);

  // x: (B, 1, grid, grid, grid) -> (B, organs, grid, grid, grid) in [0,1]
  nn::VarPtr forward(const nn::VarPtr& x);

  nn::ParamSet& params() { return params_; }
  const nn::ParamSet& params() const { return params_; }
  int organs() const { return organs_; }
  const SegConfig& config() const { return cfg_; }

 private:
  SegConfig cfg_;
  int organs_;
  nn::ParamSet params_;
};

struct SegTrainStats {
  std::vector<double> loss_history;  // mean per-organ dice loss per step
  double final_loss = 0.0;
};

// Trains in place for cfg.steps steps; steps == 0 leaves the model untouched.
SegTrainStats train_segmenter(SegModel& model,
                              const std::vector<phantom::PhantomStudy>& studies,
                              const SegConfig& cfg);

// Per-organ probabilities at grid resolution, nearest-upsampled to the
// volume's resolution, then thresholded. threshold must lie in (0,1).
std::vector<MaskVolume> predict_mask(SegModel& model, const Volume& volume,
                                     double threshold);

struct OrganCrop {
  std::string organ;
  Box3 box;
  bool degenerate = false;  // empty mask -> full-volume fallback
  MaskVolume mask;          // restricted to box
  Volume intensity;         // volume restricted to box
};

std::vector<OrganCrop> mask_to_crops(const std::vector<MaskVolume>& masks,
                                     const Volume& volume, std::int64_t margin,
                                     const LabelSchema& schema);

// Ground-truth masks, unchanged; isolates downstream stages from
// segmentation error.
std::vector<MaskVolume> oracle_masks(const phantom::PhantomStudy& study);

// Nearest-index resampling of a volume/mask to a cubic grid and back.
Volume resample_to_grid(const Volume& v, int grid);
MaskVolume resample_mask_to_grid(const MaskVolume& m, int grid);

}  // namespace trauma::seg
