#include "trauma/prep.hpp"

#include <algorithm>
#include <cmath>

#include "trauma/errors.hpp"
#include "trauma/rng.hpp"

namespace trauma::prep {

Volume normalize_volume(const Volume& raw, double lo, double hi) {
  if (!(lo < hi)) throw config_error("normalize_volume: need lo < hi");
  Volume out(raw.depth, raw.height, raw.width);
  const double inv = 1.0 / (hi - lo);
  for (std::size_t i = 0; i < raw.data.size(); ++i)
    out.data[i] = std::clamp((raw.data[i] - lo) * inv, 0.0, 1.0);
  return out;
}

CropResult apply_mask_crop(const Volume& norm, const MaskVolume& mask,
                           std::int64_t margin) {
  if (norm.depth != mask.depth || norm.height != mask.height ||
      norm.width != mask.width)
    throw contract_error("apply_mask_crop: volume/mask shape mismatch");
  if (margin < 0) throw contract_error("apply_mask_crop: negative margin");

  Box3 box{norm.depth, -1, norm.height, -1, norm.width, -1};
  bool any = false;
  for (std::int64_t z = 0; z < mask.depth; ++z)
    for (std::int64_t y = 0; y < mask.height; ++y)
      for (std::int64_t x = 0; x < mask.width; ++x)
        if (mask.at(z, y, x)) {
          any = true;
          box.z0 = std::min(box.z0, z);
          box.z1 = std::max(box.z1, z);
          box.y0 = std::min(box.y0, y);
          box.y1 = std::max(box.y1, y);
          box.x0 = std::min(box.x0, x);
          box.x1 = std::max(box.x1, x);
        }
  if (!any)
    throw degenerate_mask_error(
        "apply_mask_crop: all-zero mask; fall back to the full volume");

  box.z0 = std::max<std::int64_t>(0, box.z0 - margin);
  box.y0 = std::max<std::int64_t>(0, box.y0 - margin);
  box.x0 = std::max<std::int64_t>(0, box.x0 - margin);
  box.z1 = std::min(norm.depth - 1, box.z1 + margin);
  box.y1 = std::min(norm.height - 1, box.y1 + margin);
  box.x1 = std::min(norm.width - 1, box.x1 + margin);

  CropResult out;
  out.box = box;
  out.volume = Volume(box.depth(), box.height(), box.width());
  for (std::int64_t z = 0; z < box.depth(); ++z)
    for (std::int64_t y = 0; y < box.height(); ++y)
      for (std::int64_t x = 0; x < box.width(); ++x) {
        const std::int64_t sz = box.z0 + z, sy = box.y0 + y, sx = box.x0 + x;
        out.volume.at(z, y, x) =
            mask.at(sz, sy, sx) ? norm.at(sz, sy, sx) : 0.0;
      }
  return out;
}

SliceVolume96 resample_96(const Volume& vol) {
  if (vol.depth < 1 || vol.height < 1 || vol.width < 1)
    throw contract_error("resample_96: empty volume");
  SliceVolume96 out;
  out.source_indices.resize(kStackSlices);
  out.slices = Volume(kStackSlices, vol.height, vol.width);
  const double scale =
      static_cast<double>(vol.depth - 1) / static_cast<double>(kStackSlices - 1);
  const std::int64_t plane = vol.height * vol.width;
  for (int i = 0; i < kStackSlices; ++i) {
    const std::int64_t src = round_index(static_cast<double>(i) * scale);
    out.source_indices[static_cast<std::size_t>(i)] = src;
    std::copy(vol.data.begin() + src * plane, vol.data.begin() + (src + 1) * plane,
              out.slices.data.begin() + static_cast<std::int64_t>(i) * plane);
  }
  return out;
}

TripletSequence make_triplets(const SliceVolume96& vol) {
  if (vol.slices.depth != kStackSlices ||
      static_cast<int>(vol.source_indices.size()) != kStackSlices)
    throw contract_error("make_triplets: need exactly 96 slices");
  const std::int64_t H = vol.slices.height, W = vol.slices.width;
  TripletSequence out;
  out.data = nn::Tensor({kTripletCount, 3, H, W});
  out.center_indices.resize(kTripletCount);
  const std::int64_t plane = H * W;
  for (int t = 0; t < kTripletCount; ++t) {
    const std::int64_t center = t + 1;  // zero-based centers 1..94
    out.center_indices[static_cast<std::size_t>(t)] = center;
    for (int c = 0; c < 3; ++c) {
      const std::int64_t src = center - 1 + c;
      std::copy(vol.slices.data.begin() + src * plane,
                vol.slices.data.begin() + (src + 1) * plane,
                out.data.data() + (static_cast<std::int64_t>(t) * 3 + c) * plane);
    }
  }
  return out;
}

TripletSequence select_sequence(const TripletSequence& trip, int T) {
  const std::int64_t n = trip.data.dim(0);
  if (T < 1 || T > n) throw contract_error("select_sequence: T out of range");
  const auto idx = nearest_indices(n, T);
  const std::int64_t chunk = trip.data.numel() / n;
  TripletSequence out;
  out.data = nn::Tensor({T, trip.data.dim(1), trip.data.dim(2), trip.data.dim(3)});
  out.center_indices.resize(static_cast<std::size_t>(T));
  out.slice_labels.assign(trip.slice_labels.size(), {});
  for (auto& v : out.slice_labels) v.resize(static_cast<std::size_t>(T));
  for (int j = 0; j < T; ++j) {
    const std::int64_t src = idx[static_cast<std::size_t>(j)];
    std::copy(trip.data.data() + src * chunk, trip.data.data() + (src + 1) * chunk,
              out.data.data() + static_cast<std::int64_t>(j) * chunk);
    out.center_indices[static_cast<std::size_t>(j)] =
        trip.center_indices[static_cast<std::size_t>(src)];
    for (std::size_t g = 0; g < trip.slice_labels.size(); ++g)
      out.slice_labels[g][static_cast<std::size_t>(j)] =
          trip.slice_labels[g][static_cast<std::size_t>(src)];
  }
  return out;
}

LabelVector normalize_labels(const LabelVector& raw) {
  double mx = 0.0;
  for (double v : raw.values) {
    if (v < 0.0) throw contract_error("normalize_labels: negative value");
    mx = std::max(mx, v);
  }
  LabelVector out;
  out.patient_value = raw.patient_value;
  out.values.resize(raw.values.size());
  if (mx == 0.0) return out;  // all zeros stay all zeros
  for (std::size_t i = 0; i < raw.values.size(); ++i)
    out.values[i] = raw.values[i] / mx;
  return out;
}

LabelVector combine_patient_label(const LabelVector& norm, double patient) {
  if (!(patient >= 0.0 && patient <= 1.0))
    throw contract_error("combine_patient_label: patient value outside [0,1]");
  LabelVector out;
  out.patient_value = patient;
  out.values.resize(norm.values.size());
  for (std::size_t i = 0; i < norm.values.size(); ++i) {
    const double v = norm.values[i];
    if (!(v >= 0.0 && v <= 1.0))
      throw contract_error("combine_patient_label: label outside [0,1]");
    out.values[i] = v * patient;
  }
  return out;
}

LabelVector compute_visibility(const MaskVolume& mask) {
  if (mask.depth < 1) throw contract_error("compute_visibility: empty volume");
  LabelVector raw;
  raw.values.resize(static_cast<std::size_t>(mask.depth));
  const std::int64_t plane = mask.height * mask.width;
  for (std::int64_t z = 0; z < mask.depth; ++z) {
    std::int64_t count = 0;
    const std::uint8_t* p = mask.data.data() + z * plane;
    for (std::int64_t i = 0; i < plane; ++i) count += p[i];
    raw.values[static_cast<std::size_t>(z)] = static_cast<double>(count);
  }
  return normalize_labels(raw);
}

void PrepConfig::validate() const {
  if (!(window_lo < window_hi))
    throw config_error("prep: window_lo must be < window_hi");
  if (margin < 0) throw config_error("prep: negative margin");
  if (sequence_length < 1 || sequence_length > kTripletCount)
    throw config_error("prep: sequence_length must be in [1, 94]");
  if (height < 2 || width < 2) throw config_error("prep: height/width too small");
}

namespace {

// Nearest-index 2D resize of one slice.
void resize_slice(const double* src, std::int64_t sh, std::int64_t sw,
                  double* dst, std::int64_t dh, std::int64_t dw,
                  const std::vector<std::int64_t>& ridx,
                  const std::vector<std::int64_t>& cidx) {
  for (std::int64_t y = 0; y < dh; ++y) {
    const double* row = src + ridx[static_cast<std::size_t>(y)] * sw;
    for (std::int64_t x = 0; x < dw; ++x)
      dst[y * dw + x] = row[cidx[static_cast<std::size_t>(x)]];
  }
}

MaskVolume crop_mask(const MaskVolume& m, const Box3& box) {
  MaskVolume out(box.depth(), box.height(), box.width());
  for (std::int64_t z = 0; z < box.depth(); ++z)
    for (std::int64_t y = 0; y < box.height(); ++y)
      for (std::int64_t x = 0; x < box.width(); ++x)
        out.at(z, y, x) = m.at(box.z0 + z, box.y0 + y, box.x0 + x);
  return out;
}

}  // namespace

PrepResult prepare_study(const phantom::PhantomStudy& study,
                         const std::vector<MaskVolume>& masks,
                         const LabelSchema& schema, const PrepConfig& cfg) {
  cfg.validate();
  if (masks.size() != schema.groups.size())
    throw contract_error("prepare_study: one mask per label group required");

  PrepResult out;
  out.study_id = study.study_id;
  out.patient_labels = study.patient_labels;

  const Volume norm =
      normalize_volume(study.volume, cfg.window_lo, cfg.window_hi);

  MaskVolume unions(norm.depth, norm.height, norm.width, 0);
  for (const auto& m : masks) {
    if (m.depth != norm.depth || m.height != norm.height || m.width != norm.width)
      throw contract_error("prepare_study: mask shape mismatch");
    for (std::size_t i = 0; i < unions.data.size(); ++i)
      unions.data[i] = unions.data[i] | m.data[i];
  }

  Volume cropped;
  try {
    CropResult crop = apply_mask_crop(norm, unions, cfg.margin);
    out.crop_box = crop.box;
    cropped = std::move(crop.volume);
  } catch (const degenerate_mask_error&) {
    // Documented fallback: keep the full (masked, hence all-zero signal)
    // volume so the study still yields a prediction downstream.
    out.degenerate_mask = true;
    out.crop_box = Box3{0, norm.depth - 1, 0, norm.height - 1, 0, norm.width - 1};
    cropped = norm;
    for (std::size_t i = 0; i < cropped.data.size(); ++i)
      if (!unions.data[i]) cropped.data[i] = 0.0;
  }

  const SliceVolume96 stack = resample_96(cropped);
  out.source_indices = stack.source_indices;

  TripletSequence trip = make_triplets(stack);

  // Per-group slice labels on all 94 triplets: visibility of the cropped
  // organ mask at the center slice, times the patient indicator.
  trip.slice_labels.assign(schema.groups.size(), std::vector<double>(kTripletCount));
  for (std::size_t g = 0; g < schema.groups.size(); ++g) {
    const MaskVolume mg = crop_mask(masks[g], out.crop_box);
    const LabelVector vis = compute_visibility(mg);
    const bool injured =
        study.patient_labels[g] != schema.groups[g].healthy_state;
    const LabelVector lbl = combine_patient_label(vis, injured ? 1.0 : 0.0);
    for (int t = 0; t < kTripletCount; ++t) {
      const std::int64_t src96 =
          stack.source_indices[static_cast<std::size_t>(trip.center_indices[static_cast<std::size_t>(t)])];
      trip.slice_labels[g][static_cast<std::size_t>(t)] =
          lbl.values[static_cast<std::size_t>(src96)];
    }
  }

  TripletSequence sel = select_sequence(trip, cfg.sequence_length);

  // Nearest resize of the selected triplets to the model grid.
  const std::int64_t sh = sel.data.dim(2), sw = sel.data.dim(3);
  const auto ridx = nearest_indices(sh, cfg.height);
  const auto cidx = nearest_indices(sw, cfg.width);
  const int T = cfg.sequence_length;
  out.sequence = nn::Tensor({T, 3, cfg.height, cfg.width});
  for (int t = 0; t < T; ++t)
    for (int c = 0; c < 3; ++c)
      resize_slice(sel.data.data() + (static_cast<std::int64_t>(t) * 3 + c) * sh * sw,
                   sh, sw,
                   out.sequence.data() +
                       (static_cast<std::int64_t>(t) * 3 + c) * cfg.height * cfg.width,
                   cfg.height, cfg.width, ridx, cidx);

  // Union mask at the center slice of each selected triplet, same resize.
  const MaskVolume cropped_union = crop_mask(unions, out.crop_box);
  out.mask_sequence = nn::Tensor({T, cfg.height, cfg.width});
  out.centers = sel.center_indices;
  for (int t = 0; t < T; ++t) {
    const std::int64_t src =
        stack.source_indices[static_cast<std::size_t>(sel.center_indices[static_cast<std::size_t>(t)])];
    for (std::int64_t y = 0; y < cfg.height; ++y)
      for (std::int64_t x = 0; x < cfg.width; ++x)
        out.mask_sequence[(static_cast<std::int64_t>(t) * cfg.height + y) * cfg.width + x] =
            cropped_union.at(src, ridx[static_cast<std::size_t>(y)],
                             cidx[static_cast<std::size_t>(x)]);
  }

  out.slice_labels = std::move(sel.slice_labels);
  return out;
}

}  // namespace trauma::prep
