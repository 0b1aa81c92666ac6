#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "trauma/phantom.hpp"
#include "trauma/rng.hpp"

using namespace trauma;
using namespace trauma::phantom;

namespace fs = std::filesystem;

namespace {

PhantomConfig small_config() {
  PhantomConfig c;
  c.depth = 24;
  c.height = 32;
  c.width = 32;
  c.organ_count = 4;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(is), {});
}

}  // namespace

TEST_CASE("generate_study is deterministic") {
  const auto cfg = small_config();
  const auto schema = default_schema();
  const auto a = generate_study(7, cfg, schema);
  const auto b = generate_study(7, cfg, schema);
  CHECK(a.volume.data == b.volume.data);
  for (std::size_t g = 0; g < a.organ_masks.size(); ++g)
    CHECK(a.organ_masks[g].data == b.organ_masks[g].data);
  CHECK(a.patient_labels == b.patient_labels);
}

TEST_CASE("injury_probability=0 gives all-healthy labels") {
  auto cfg = small_config();
  cfg.injury_probability = 0.0;
  const auto schema = default_schema();
  for (std::uint64_t seed : {1u, 2u, 3u, 9u}) {
    const auto s = generate_study(seed, cfg, schema);
    for (std::size_t g = 0; g < schema.groups.size(); ++g) {
      CHECK(s.patient_labels[g] == schema.groups[g].healthy_state);
      std::int64_t lesion = 0;
      for (auto v : s.lesion_masks[g].data) lesion += v;
      CHECK(lesion == 0);
    }
  }
}

TEST_CASE("organ masks are pairwise disjoint (direct intersection count)") {
  auto cfg = small_config();
  cfg.organ_count = 2;
  LabelSchema schema;
  schema.groups = {{"a", 3, 0, {1, 1, 1}}, {"b", 2, 0, {1, 1}}};
  const auto s = generate_study(7, cfg, schema);
  std::int64_t overlap = 0;
  for (std::size_t i = 0; i < s.organ_masks[0].data.size(); ++i)
    overlap += s.organ_masks[0].data[i] & s.organ_masks[1].data[i];
  CHECK(overlap == 0);

  // and for the default 4-organ config: per-voxel sum of indicators <= 1
  const auto s4 = generate_study(3, small_config(), default_schema());
  for (std::size_t i = 0; i < s4.volume.data.size(); ++i) {
    int cover = 0;
    for (const auto& m : s4.organ_masks) cover += m.data[i];
    CHECK(cover <= 1);
  }
}

TEST_CASE("intensities stay in [0,1] and labels match lesions") {
  auto cfg = small_config();
  cfg.injury_probability = 0.6;
  cfg.noise_sigma = 0.08;
  const auto schema = default_schema();
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto s = generate_study(seed, cfg, schema);
    for (double v : s.volume.data) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    for (std::size_t g = 0; g < schema.groups.size(); ++g) {
      std::int64_t organ = 0, lesion = 0, outside = 0;
      for (std::size_t i = 0; i < s.volume.data.size(); ++i) {
        organ += s.organ_masks[g].data[i];
        lesion += s.lesion_masks[g].data[i];
        if (s.lesion_masks[g].data[i] && !s.organ_masks[g].data[i]) ++outside;
      }
      CHECK(organ > 0);
      CHECK(outside == 0);  // lesion is a subset of the organ mask
      const bool injured = s.patient_labels[g] != schema.groups[g].healthy_state;
      CHECK(injured == (lesion > 0));
    }
  }
}

TEST_CASE("generate_study rejects invalid configs") {
  auto cfg = small_config();
  cfg.depth = 4;
  CHECK_THROWS_AS((void)generate_study(1, cfg, default_schema()), config_error);
  cfg = small_config();
  cfg.injury_probability = 1.5;
  CHECK_THROWS_AS((void)generate_study(1, cfg, default_schema()), config_error);
  cfg = small_config();
  cfg.organ_count = 3;  // schema has 4 groups
  CHECK_THROWS_AS((void)generate_study(1, cfg, default_schema()), config_error);
}

TEST_CASE("generate_dataset writes a reloadable, reproducible layout") {
  const fs::path root = fs::temp_directory_path() / "trauma_phantom_ds";
  fs::remove_all(root);
  const auto cfg = small_config();
  const auto schema = default_schema();

  const auto m1 = generate_dataset(11, 3, cfg, schema, (root / "a").string());
  CHECK(m1.studies.size() == 3);
  CHECK(fs::exists(root / "a" / "manifest.json"));
  CHECK(fs::exists(root / "a" / "study_0000" / "volume.raw"));
  CHECK(fs::exists(root / "a" / "study_0002" / "mask_effusion.raw"));

  // identical reruns produce identical bytes
  (void)generate_dataset(11, 3, cfg, schema, (root / "b").string());
  for (const char* rel :
       {"manifest.json", "study_0000/volume.raw", "study_0001/volume.raw",
        "study_0002/labels.json", "study_0001/mask_liver.raw"}) {
    CHECK(slurp(root / "a" / rel) == slurp(root / "b" / rel));
  }

  // a different root seed must change at least one volume
  (void)generate_dataset(12, 3, cfg, schema, (root / "c").string());
  bool any_diff = false;
  for (int i = 0; i < 3; ++i) {
    char dir[32];
    std::snprintf(dir, sizeof(dir), "study_%04d", i);
    any_diff = any_diff || slurp(root / "a" / dir / "volume.raw") !=
                               slurp(root / "c" / dir / "volume.raw");
  }
  CHECK(any_diff);

  // count=1 manifest lists exactly one study
  const auto m_single = generate_dataset(5, 1, cfg, schema, (root / "d").string());
  CHECK(m_single.studies.size() == 1);

  // reload round trip
  const auto loaded = load_manifest((root / "a").string());
  CHECK(loaded.count == 3);
  CHECK(loaded.schema.groups.size() == 4);
  const auto s0 = load_study(loaded, (root / "a").string(), 0);
  const auto fresh = generate_study(loaded.studies[0].seed, cfg, schema);
  CHECK(s0.patient_labels == fresh.patient_labels);
  // volume round-trips through f32
  for (std::size_t i = 0; i < s0.volume.data.size(); ++i)
    CHECK(s0.volume.data[i] ==
          static_cast<double>(static_cast<float>(fresh.volume.data[i])));
  fs::remove_all(root);
}

TEST_CASE("per-study seeds are a documented mix of root seed and index") {
  CHECK(derive_seed(11, 0) == splitmix64(11ULL ^ splitmix64(1)));
  CHECK(derive_seed(11, 2) == splitmix64(11ULL ^ splitmix64(3)));
  CHECK(derive_seed(11, 0) != derive_seed(11, 1));
}
