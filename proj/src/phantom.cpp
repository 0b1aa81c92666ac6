#include "trauma/phantom.hpp"

#include <algorithm>
#include <cmath>

#include "trauma/errors.hpp"
#include "trauma/rng.hpp"

namespace trauma::phantom {

namespace {

struct Ellipsoid {
  double cz, cy, cx;
  double az, ay, ax;  // semi-axes, voxels

  bool contains(std::int64_t z, std::int64_t y, std::int64_t x) const {
    const double dz = (static_cast<double>(z) - cz) / az;
    const double dy = (static_cast<double>(y) - cy) / ay;
    const double dx = (static_cast<double>(x) - cx) / ax;
    return dz * dz + dy * dy + dx * dx <= 1.0;
  }
};

struct OrganPlan {
  Ellipsoid body;
  double intensity = 0.0;
  bool injured = false;
  Ellipsoid lesion;       // valid when injured
  double lesion_intensity = 0.0;
  int label = 0;          // true state index
  std::int64_t band_z0 = 0, band_z1 = 0;  // inclusive
};

constexpr double kBackground = 0.12;

}  // namespace

void PhantomConfig::validate(const LabelSchema& schema) const {
  if (depth < 8 || height < 8 || width < 8)
    throw config_error("phantom: all dimensions must be >= 8");
  if (organ_count < 1) throw config_error("phantom: organ_count must be >= 1");
  if (!(injury_probability >= 0.0 && injury_probability <= 1.0))
    throw config_error("phantom: injury_probability must be in [0,1]");
  if (!(noise_sigma >= 0.0)) throw config_error("phantom: noise_sigma < 0");
  schema.validate();
  if (organ_count != schema.group_count())
    throw config_error(
        "phantom: organ_count must equal the schema group count so that every "
        "label group owns one organ region");
}

PhantomStudy generate_study(std::uint64_t seed, const PhantomConfig& config,
                            const LabelSchema& schema) {
  config.validate(schema);
  const std::int64_t D = config.depth, H = config.height, W = config.width;
  const int G = config.organ_count;

  // All randomness that shapes geometry and labels is drawn serially up
  // front, in group order; the voxel fill below is then free to parallelize.
  Rng rng(seed);
  std::vector<OrganPlan> plans(static_cast<std::size_t>(G));
  for (int g = 0; g < G; ++g) {
    OrganPlan& p = plans[static_cast<std::size_t>(g)];
    // Disjoint depth bands keep organ masks disjoint by construction.
    p.band_z0 = D * g / G;
    p.band_z1 = D * (g + 1) / G - 1;
    const double band_h = static_cast<double>(p.band_z1 - p.band_z0 + 1);
    const double band_mid = (static_cast<double>(p.band_z0 + p.band_z1)) / 2.0;

    p.body.cz = band_mid + rng.uniform(-0.08, 0.08) * band_h;
    p.body.cy = static_cast<double>(H) * rng.uniform(0.38, 0.62);
    p.body.cx = static_cast<double>(W) * rng.uniform(0.38, 0.62);
    const double az_max = std::min(p.body.cz - static_cast<double>(p.band_z0),
                                   static_cast<double>(p.band_z1) - p.body.cz);
    p.body.az = std::max(1.0, std::min(az_max, band_h * rng.uniform(0.34, 0.46)));
    p.body.ay = std::max(2.0, static_cast<double>(H) * rng.uniform(0.20, 0.32));
    p.body.ax = std::max(2.0, static_cast<double>(W) * rng.uniform(0.20, 0.32));
    p.intensity = 0.34 + 0.07 * static_cast<double>(g % 5) + rng.uniform(-0.02, 0.02);

    const LabelGroup& grp = schema.groups[static_cast<std::size_t>(g)];
    p.injured = rng.uniform() < config.injury_probability;
    p.label = grp.healthy_state;
    if (p.injured) {
      // Severity follows lesion size: larger lesions map to later
      // non-healthy states.
      const int n_inj = grp.injured_state_count();
      const int severity = static_cast<int>(rng.uniform_int(0, n_inj - 1));
      int idx = 0, chosen = -1;
      for (int st = 0; st < grp.state_count; ++st) {
        if (st == grp.healthy_state) continue;
        if (idx == severity) chosen = st;
        ++idx;
      }
      p.label = chosen;
      const double lo = 0.30 + 0.30 * static_cast<double>(severity) /
                                   static_cast<double>(std::max(1, n_inj - 1));
      const double scale = lo + 0.15 * rng.uniform();
      p.lesion.az = std::max(1.0, p.body.az * scale);
      p.lesion.ay = std::max(1.0, p.body.ay * scale);
      p.lesion.ax = std::max(1.0, p.body.ax * scale);
      p.lesion.cz = p.body.cz + rng.uniform(-0.25, 0.25) * p.body.az;
      p.lesion.cy = p.body.cy + rng.uniform(-0.25, 0.25) * p.body.ay;
      p.lesion.cx = p.body.cx + rng.uniform(-0.25, 0.25) * p.body.ax;
      p.lesion_intensity = std::min(1.0, p.intensity + config.lesion_contrast);
    }
  }

  PhantomStudy study;
  study.study_id = "study_" + std::to_string(seed);
  study.seed = seed;
  study.volume = Volume(D, H, W, kBackground);
  study.organ_masks.assign(static_cast<std::size_t>(G), MaskVolume(D, H, W, 0));
  study.lesion_masks.assign(static_cast<std::size_t>(G), MaskVolume(D, H, W, 0));
  study.patient_labels.resize(static_cast<std::size_t>(G));
  for (int g = 0; g < G; ++g)
    study.patient_labels[static_cast<std::size_t>(g)] =
        plans[static_cast<std::size_t>(g)].label;

  // Voxel fill; per-slice noise streams keep the result independent of the
  // slice visit order.
  const std::uint64_t noise_base = splitmix64(seed);
#pragma omp parallel for schedule(static)
  for (std::int64_t z = 0; z < D; ++z) {
    Rng noise(splitmix64(noise_base + static_cast<std::uint64_t>(z) + 1));
    for (std::int64_t y = 0; y < H; ++y)
      for (std::int64_t x = 0; x < W; ++x) {
        double v = kBackground;
        for (int g = 0; g < G; ++g) {
          const OrganPlan& p = plans[static_cast<std::size_t>(g)];
          if (z < p.band_z0 || z > p.band_z1) continue;
          if (!p.body.contains(z, y, x)) continue;
          study.organ_masks[static_cast<std::size_t>(g)].at(z, y, x) = 1;
          v = p.intensity;
          if (p.injured && p.lesion.contains(z, y, x)) {
            study.lesion_masks[static_cast<std::size_t>(g)].at(z, y, x) = 1;
            v = p.lesion_intensity;
          }
          break;  // bands are disjoint; at most one organ owns a voxel
        }
        if (config.noise_sigma > 0.0) v += noise.normal(0.0, config.noise_sigma);
        study.volume.at(z, y, x) = std::clamp(v, 0.0, 1.0);
      }
  }

  // Guarantee the label<->lesion invariant even for degenerate geometry: an
  // injured organ must contain at least one lesion voxel.
  for (int g = 0; g < G; ++g) {
    const OrganPlan& p = plans[static_cast<std::size_t>(g)];
    if (!p.injured) continue;
    const MaskVolume& lm = study.lesion_masks[static_cast<std::size_t>(g)];
    bool any = false;
    for (std::int64_t i = 0; i < lm.size() && !any; ++i) any = lm.data[static_cast<std::size_t>(i)] != 0;
    if (!any) {
      const std::int64_t cz = std::clamp<std::int64_t>(
          round_index(p.body.cz), p.band_z0, p.band_z1);
      const std::int64_t cy = std::clamp<std::int64_t>(round_index(p.body.cy), 0, H - 1);
      const std::int64_t cx = std::clamp<std::int64_t>(round_index(p.body.cx), 0, W - 1);
      study.organ_masks[static_cast<std::size_t>(g)].at(cz, cy, cx) = 1;
      study.lesion_masks[static_cast<std::size_t>(g)].at(cz, cy, cx) = 1;
      study.volume.at(cz, cy, cx) = p.lesion_intensity;
    }
  }
  return study;
}

}  // namespace trauma::phantom
