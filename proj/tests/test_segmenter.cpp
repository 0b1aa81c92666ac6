#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "trauma/seg.hpp"

using namespace trauma;
using namespace trauma::seg;

namespace {

phantom::PhantomConfig small_phantom() {
  phantom::PhantomConfig c;
  c.depth = 24;
  c.height = 32;
  c.width = 32;
  c.noise_sigma = 0.02;
  return c;
}

std::vector<phantom::PhantomStudy> make_studies(int n, std::uint64_t root) {
  const auto schema = default_schema();
  const auto cfg = small_phantom();
  std::vector<phantom::PhantomStudy> out;
  for (int i = 0; i < n; ++i)
    out.push_back(phantom::generate_study(derive_seed(root, static_cast<std::uint64_t>(i)), cfg, schema));
  return out;
}

double dice_overlap(const MaskVolume& a, const MaskVolume& b) {
  double inter = 0.0, sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    inter += a.data[i] && b.data[i] ? 1.0 : 0.0;
    sa += a.data[i];
    sb += b.data[i];
  }
  return (2.0 * inter) / std::max(1.0, sa + sb);
}

}  // namespace

TEST_CASE("oracle_masks returns ground truth unchanged") {
  const auto studies = make_studies(1, 3);
  const auto masks = oracle_masks(studies[0]);
  REQUIRE(masks.size() == studies[0].organ_masks.size());
  for (std::size_t g = 0; g < masks.size(); ++g)
    CHECK(masks[g].data == studies[0].organ_masks[g].data);
}

TEST_CASE("mask_to_crops boxes") {
  const auto schema = default_schema();
  Volume vol(12, 12, 12, 0.5);

  SUBCASE("single positive voxel at (4,5,6), margin 2 -> [2..6]x[3..7]x[4..8]") {
    std::vector<MaskVolume> masks(4, MaskVolume(12, 12, 12, 0));
    masks[0].at(4, 5, 6) = 1;
    masks[1].at(1, 1, 1) = 1;
    masks[2].at(2, 2, 2) = 1;
    masks[3].at(3, 3, 3) = 1;
    const auto crops = mask_to_crops(masks, vol, 2, schema);
    CHECK(crops[0].box.z0 == 2);
    CHECK(crops[0].box.z1 == 6);
    CHECK(crops[0].box.y0 == 3);
    CHECK(crops[0].box.y1 == 7);
    CHECK(crops[0].box.x0 == 4);
    CHECK(crops[0].box.x1 == 8);
    CHECK_FALSE(crops[0].degenerate);
    CHECK(crops[0].mask.at(2, 2, 2) == 1);
  }
  SUBCASE("empty mask -> full-volume crop with degenerate flag") {
    std::vector<MaskVolume> masks(4, MaskVolume(12, 12, 12, 0));
    masks[1].at(1, 1, 1) = 1;
    masks[2].at(2, 2, 2) = 1;
    masks[3].at(3, 3, 3) = 1;
    const auto crops = mask_to_crops(masks, vol, 2, schema);
    CHECK(crops[0].degenerate);
    CHECK(crops[0].box.depth() == 12);
    CHECK_FALSE(crops[1].degenerate);
  }
  SUBCASE("full mask -> full-volume box regardless of margin") {
    std::vector<MaskVolume> masks(4, MaskVolume(12, 12, 12, 1));
    const auto crops = mask_to_crops(masks, vol, 5, schema);
    for (const auto& c : crops) {
      CHECK(c.box.depth() == 12);
      CHECK(c.box.height() == 12);
      CHECK(c.box.width() == 12);
    }
  }
  SUBCASE("boxes contain every positive voxel") {
    const auto studies = make_studies(2, 8);
    for (const auto& s : studies) {
      const auto crops = mask_to_crops(s.organ_masks, s.volume, 2, schema);
      for (std::size_t g = 0; g < crops.size(); ++g) {
        const auto& m = s.organ_masks[g];
        for (std::int64_t z = 0; z < m.depth; ++z)
          for (std::int64_t y = 0; y < m.height; ++y)
            for (std::int64_t x = 0; x < m.width; ++x)
              if (m.at(z, y, x)) {
                CHECK(z >= crops[g].box.z0);
                CHECK(z <= crops[g].box.z1);
                CHECK(y >= crops[g].box.y0);
                CHECK(y <= crops[g].box.y1);
                CHECK(x >= crops[g].box.x0);
                CHECK(x <= crops[g].box.x1);
              }
      }
    }
  }
}

TEST_CASE("crops from oracle masks contain all lesion voxels") {
  const auto schema = default_schema();
  auto cfg = small_phantom();
  cfg.injury_probability = 1.0;
  const auto study = phantom::generate_study(91, cfg, schema);
  const auto crops = mask_to_crops(oracle_masks(study), study.volume, 2, schema);
  for (std::size_t g = 0; g < crops.size(); ++g) {
    const auto& lm = study.lesion_masks[g];
    std::int64_t total = 0, contained = 0;
    for (std::int64_t z = 0; z < lm.depth; ++z)
      for (std::int64_t y = 0; y < lm.height; ++y)
        for (std::int64_t x = 0; x < lm.width; ++x)
          if (lm.at(z, y, x)) {
            ++total;
            const auto& b = crops[g].box;
            if (z >= b.z0 && z <= b.z1 && y >= b.y0 && y <= b.y1 && x >= b.x0 &&
                x <= b.x1)
              ++contained;
          }
    CHECK(total > 0);
    CHECK(contained == total);
  }
}

TEST_CASE("predict_mask threshold semantics and determinism") {
  SegConfig cfg;
  cfg.grid = 16;
  SegModel model(4, cfg);
  const auto studies = make_studies(1, 5);

  CHECK_THROWS_AS((void)predict_mask(model, studies[0].volume, 0.0),
                  contract_error);

  // Zero the output weights and pin the bias so every probability is a known
  // constant: sigmoid(-0.405)=0.4 and sigmoid(2.2)=0.9.
  auto out_w = model.params().find("out.w");
  for (std::int64_t i = 0; i < out_w->value.numel(); ++i) out_w->value[i] = 0.0;
  auto out_b = model.params().find("out.b");
  for (std::int64_t i = 0; i < out_b->value.numel(); ++i) out_b->value[i] = -0.405;
  const auto empty = predict_mask(model, studies[0].volume, 0.5);
  std::int64_t on = 0;
  for (const auto& m : empty) on = std::accumulate(m.data.begin(), m.data.end(), on);
  CHECK(on == 0);
  for (std::int64_t i = 0; i < out_b->value.numel(); ++i) out_b->value[i] = 2.2;
  const auto full = predict_mask(model, studies[0].volume, 0.5);
  on = 0;
  for (const auto& m : full) on = std::accumulate(m.data.begin(), m.data.end(), on);
  CHECK(on == 4 * studies[0].volume.size());
  const auto full_again = predict_mask(model, studies[0].volume, 0.5);
  for (std::size_t g = 0; g < full.size(); ++g)
    CHECK(full[g].data == full_again[g].data);
}

TEST_CASE("zero training steps returns the initialized model unchanged") {
  SegConfig cfg;
  cfg.grid = 16;
  cfg.steps = 0;
  SegModel model(4, cfg);
  std::vector<double> before;
  for (const auto& [n, v] : model.params().items)
    for (std::int64_t i = 0; i < v->value.numel(); ++i) before.push_back(v->value[i]);
  const auto stats = train_segmenter(model, make_studies(2, 6), cfg);
  CHECK(stats.loss_history.empty());
  std::vector<double> after;
  for (const auto& [n, v] : model.params().items)
    for (std::int64_t i = 0; i < v->value.numel(); ++i) after.push_back(v->value[i]);
  CHECK(before == after);
  CHECK_THROWS_AS((void)train_segmenter(model, {}, cfg), contract_error);
}

TEST_CASE("training on 8 studies reaches mean dice loss < 0.3 within 200 steps") {
  SegConfig cfg;  // default 32-grid, 200 steps
  SegModel model(4, cfg);
  const auto studies = make_studies(8, 11);
  const auto stats = train_segmenter(model, studies, cfg);
  REQUIRE(stats.loss_history.size() == 200);
  CHECK(stats.final_loss < 0.3);

  SUBCASE("trained masks overlap ground truth on a held-out study") {
    const auto held = make_studies(10, 77);  // different root seed
    double mean_dice = 0.0;
    int n = 0;
    for (int i = 8; i < 10; ++i) {
      const auto pred = predict_mask(model, held[static_cast<std::size_t>(i)].volume, cfg.threshold);
      for (std::size_t g = 0; g < pred.size(); ++g) {
        mean_dice += dice_overlap(pred[g], held[static_cast<std::size_t>(i)].organ_masks[g]);
        ++n;
      }
    }
    mean_dice /= n;
    CHECK(mean_dice > 0.5);
  }
}

TEST_CASE("one study overfits to dice loss < 0.1") {
  SegConfig cfg;
  cfg.steps = 300;
  SegModel model(4, cfg);
  const auto studies = make_studies(1, 13);
  const auto stats = train_segmenter(model, studies, cfg);
  CHECK(stats.final_loss < 0.1);
}
