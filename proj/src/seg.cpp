#include "trauma/seg.hpp"

#include <cmath>

#include "trauma/errors.hpp"
#include "trauma/nn/losses.hpp"
#include "trauma/rng.hpp"

namespace trauma::seg {

using nn::Tensor;
using nn::VarPtr;

namespace {

Tensor he_uniform(std::vector<std::int64_t> shape, std::int64_t fan_in, Rng& rng) {
  Tensor t(std::move(shape));
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (std::int64_t i = 0; i < t.numel(); ++i)
    t[i] = rng.uniform(-limit, limit);
  return t;
}

}  // namespace

void SegConfig::validate() const {
  if (grid < 8 || grid % 4 != 0)
    throw config_error("segmenter: grid must be >= 8 and divisible by 4");
  if (base_channels < 1) throw config_error("segmenter: base_channels < 1");
  if (optimizer != "adam" && optimizer != "sgd")
    throw config_error("segmenter: optimizer must be 'adam' or 'sgd'");
  if (!(lr >= 0.0)) throw config_error("segmenter: lr < 0");
  if (steps < 0) throw config_error("segmenter: negative step count");
  if (!(threshold > 0.0 && threshold < 1.0))
    throw config_error("segmenter: threshold must be in (0,1)");
}

SegModel::SegModel(int organs, const SegConfig& cfg) : cfg_(cfg), organs_(organs) {
  cfg.validate();
  if (organs < 1) throw contract_error("SegModel: organs must be >= 1");
  Rng rng(cfg.seed);
  const std::int64_t c = cfg.base_channels;
  params_.add("enc1.w", he_uniform({c, 1, 3, 3, 3}, 27, rng));
  params_.add("enc1.b", Tensor({c}));
  params_.add("enc2.w", he_uniform({2 * c, c, 3, 3, 3}, c * 27, rng));
  params_.add("enc2.b", Tensor({2 * c}));
  params_.add("mid.w", he_uniform({2 * c, 2 * c, 3, 3, 3}, 2 * c * 27, rng));
  params_.add("mid.b", Tensor({2 * c}));
  params_.add("dec1.w", he_uniform({c, 2 * c, 3, 3, 3}, 2 * c * 27, rng));
  params_.add("dec1.b", Tensor({c}));
  params_.add("out.w", he_uniform({organs, c, 3, 3, 3}, c * 27, rng));
  
  params_.add("out.b", Tensor({organs}));
}

VarPtr SegModel::forward(const VarPtr& x) {
  const auto& sh = x->value.shape();
  if (sh.size() != 5 || sh[1] != 1 || sh[2] != cfg_.grid || sh[3] != cfg_.grid ||
      sh[4] != cfg_.grid)
    throw contract_error("SegModel::forward: want (B,1,grid,grid,grid), got " +
                         x->value.shape_str());
  auto h1 = nn::relu(nn::conv3d(x, params_.find("enc1.w"), params_.find("enc1.b"), 1, 1));
  auto p1 = nn::maxpool3d(h1, 2, 2);
  auto h2 = nn::relu(nn::conv3d(p1, params_.find("enc2.w"), params_.find("enc2.b"), 1, 1));
  auto p2 = nn::maxpool3d(h2, 2, 2);
  auto mid = nn::relu(nn::conv3d(p2, params_.find("mid.w"), params_.find("mid.b"), 1, 1));
  auto u1 = nn::upsample2x_3d(mid);
  auto d1 = nn::relu(nn::conv3d(u1, params_.find("dec1.w"), params_.find("dec1.b"), 1, 1));
  auto u2 = nn::upsample2x_3d(d1);
  return nn::sigmoid(nn::conv3d(u2, params_.find("out.w"), params_.find("out.b"), 1, 1));
}

Volume resample_to_grid(const Volume& v, int grid) {
  const auto zi = nearest_indices(v.depth, grid);
  const auto yi = nearest_indices(v.height, grid);
  const auto xi = nearest_indices(v.width, grid);
  Volume out(grid, grid, grid);
  for (int z = 0; z < grid; ++z)
    for (int y = 0; y < grid; ++y)
      for (int x = 0; x < grid; ++x)
        out.at(z, y, x) = v.at(zi[static_cast<std::size_t>(z)],
                               yi[static_cast<std::size_t>(y)],
                               xi[static_cast<std::size_t>(x)]);
  return out;
}

MaskVolume resample_mask_to_grid(const MaskVolume& m, int grid) {
  const auto zi = nearest_indices(m.depth, grid);
  const auto yi = nearest_indices(m.height, grid);
  const auto xi = nearest_indices(m.width, grid);
  MaskVolume out(grid, grid, grid);
  for (int z = 0; z < grid; ++z)
    for (int y = 0; y < grid; ++y)
      for (int x = 0; x < grid; ++x)
        out.at(z, y, x) = m.at(zi[static_cast<std::size_t>(z)],
                               yi[static_cast<std::size_t>(y)],
                               xi[static_cast<std::size_t>(x)]);
  return out;
}

namespace {

Tensor grid_input(const Volume& v, int grid) {
  const Volume g = resample_to_grid(v, grid);
  Tensor t({1, 1, grid, grid, grid});
  std::copy(g.data.begin(), g.data.end(), t.data());
  return t;
}

Tensor grid_targets(const std::vector<MaskVolume>& masks, int grid) {
  const std::int64_t organs = static_cast<std::int64_t>(masks.size());
  Tensor t({organs, static_cast<std::int64_t>(grid) * grid * grid});
  for (std::int64_t g = 0; g < organs; ++g) {
    const MaskVolume m = resample_mask_to_grid(masks[static_cast<std::size_t>(g)], grid);
    for (std::size_t i = 0; i < m.data.size(); ++i)
      t[g * grid * grid * grid + static_cast<std::int64_t>(i)] = m.data[i] ? 1.0 : 0.0;
  }
  return t;
}

}  // namespace

SegTrainStats train_segmenter(SegModel& model,
                              const std::vector<phantom::PhantomStudy>& studies,
                              const SegConfig& cfg) {
  cfg.validate();
  if (studies.empty()) throw contract_error("train_segmenter: empty dataset");
  const int grid = cfg.grid;
  const std::int64_t organs = model.organs();

  // Inputs and targets are fixed per study; precompute once.
  std::vector<Tensor> inputs, targets;
  inputs.reserve(studies.size());
  for (const auto& s : studies) {
    if (static_cast<std::int64_t>(s.organ_masks.size()) != organs)
      throw contract_error("train_segmenter: study organ count mismatch");
    inputs.push_back(grid_input(s.volume, grid));
    targets.push_back(grid_targets(s.organ_masks, grid));
  }

  nn::SgdMomentum sgd(cfg.lr, cfg.momentum);
  nn::Adam adam(cfg.lr);
  SegTrainStats stats;
  for (int step = 0; step < cfg.steps; ++step) {
    const std::size_t i = static_cast<std::size_t>(step) % studies.size();
    model.params().zero_grad();
    auto probs = model.forward(nn::make_input(inputs[i]));
    auto flat = nn::reshape(probs, {organs, static_cast<std::int64_t>(grid) * grid * grid});
    auto loss = nn::dice_per_sample_sum(flat, targets[i]);
    backward(loss);
    if (cfg.optimizer == "adam")
      adam.step(model.params());
    else
      sgd.step(model.params());
    stats.loss_history.push_back(loss->value[0] / static_cast<double>(organs));
  }
  stats.final_loss = stats.loss_history.empty() ? 0.0 : stats.loss_history.back();
  return stats;
}

std::vector<MaskVolume> predict_mask(SegModel& model, const Volume& volume,
                                     double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw contract_error("predict_mask: threshold must be in (0,1)");
  const int grid = model.config().grid;
  if (volume.depth < 1 || volume.height < 1 || volume.width < 1)
    throw contract_error("predict_mask: empty volume");
  auto probs = model.forward(nn::make_input(grid_input(volume, grid)));

  // Nearest-neighbor upsample of probabilities to the original resolution,
  // then threshold.
  const auto zi = nearest_indices(grid, volume.depth);
  const auto yi = nearest_indices(grid, volume.height);
  const auto xi = nearest_indices(grid, volume.width);
  std::vector<MaskVolume> masks;
  for (std::int64_t g = 0; g < model.organs(); ++g) {
    MaskVolume m(volume.depth, volume.height, volume.width);
    const double* p = probs->value.data() + g * grid * grid * grid;
    for (std::int64_t z = 0; z < volume.depth; ++z)
      for (std::int64_t y = 0; y < volume.height; ++y)
        for (std::int64_t x = 0; x < volume.width; ++x) {
          const double prob =
              p[(zi[static_cast<std::size_t>(z)] * grid +
                 yi[static_cast<std::size_t>(y)]) * grid +
                xi[static_cast<std::size_t>(x)]];
          m.at(z, y, x) = prob >= threshold ? 1 : 0;
        }
    masks.push_back(std::move(m));
  }
  return masks;
}

std::vector<OrganCrop> mask_to_crops(const std::vector<MaskVolume>& masks,
                                     const Volume& volume, std::int64_t margin,
                                     const LabelSchema& schema) {
  if (masks.size() != schema.groups.size())
    throw contract_error("mask_to_crops: one mask per group required");
  if (margin < 0) throw contract_error("mask_to_crops: negative margin");
  std::vector<OrganCrop> crops;
  for (std::size_t g = 0; g < masks.size(); ++g) {
    const MaskVolume& m = masks[g];
    if (m.depth != volume.depth || m.height != volume.height ||
        m.width != volume.width)
      throw contract_error("mask_to_crops: mask/volume shape mismatch");
    OrganCrop crop;
    crop.organ = schema.groups[g].name;
    Box3 box{volume.depth, -1, volume.height, -1, volume.width, -1};
    bool any = false;
    for (std::int64_t z = 0; z < m.depth; ++z)
      for (std::int64_t y = 0; y < m.height; ++y)
        for (std::int64_t x = 0; x < m.width; ++x)
          if (m.at(z, y, x)) {
            any = true;
            box.z0 = std::min(box.z0, z);
            box.z1 = std::max(box.z1, z);
            box.y0 = std::min(box.y0, y);
            box.y1 = std::max(box.y1, y);
            box.x0 = std::min(box.x0, x);
            box.x1 = std::max(box.x1, x);
          }
    if (!any) {
      crop.degenerate = true;
      box = Box3{0, volume.depth - 1, 0, volume.height - 1, 0, volume.width - 1};
    } else {
      box.z0 = std::max<std::int64_t>(0, box.z0 - margin);
      box.y0 = std::max<std::int64_t>(0, box.y0 - margin);
      box.x0 = std::max<std::int64_t>(0, box.x0 - margin);
      box.z1 = std::min(volume.depth - 1, box.z1 + margin);
      box.y1 = std::min(volume.height - 1, box.y1 + margin);
      box.x1 = std::min(volume.width - 1, box.x1 + margin);
    }
    crop.box = box;
    crop.mask = MaskVolume(box.depth(), box.height(), box.width());
    crop.intensity = Volume(box.depth(), box.height(), box.width());
    for (std::int64_t z = 0; z < box.depth(); ++z)
      for (std::int64_t y = 0; y < box.height(); ++y)
        for (std::int64_t x = 0; x < box.width(); ++x) {
          crop.mask.at(z, y, x) = m.at(box.z0 + z, box.y0 + y, box.x0 + x);
          crop.intensity.at(z, y, x) =
              volume.at(box.z0 + z, box.y0 + y, box.x0 + x);
        }
    crops.push_back(std::move(crop));
  }
  return crops;
}

std::vector<MaskVolume> oracle_masks(const phantom::PhantomStudy& study) {
  if (study.organ_masks.empty())
    throw contract_error("oracle_masks: study carries no ground-truth masks");
  return study.organ_masks;
}

}  // namespace trauma::seg
