#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "trauma/nn/checkpoint.hpp"
#include "trauma/nn/gradcheck.hpp"
#include "trauma/nn/losses.hpp"
#include "trauma/rng.hpp"

using namespace trauma;
using namespace trauma::nn;

namespace {

Tensor binary_mask_8(std::initializer_list<int> positives) {
  Tensor t({16});
  for (int i : positives) t[i] = 1.0;
  return t;
}

// Independent scalar recomputation of the grouped weighted CE used to
// cross-check the fused op.
double ce_by_hand(const Tensor& logits, const std::vector<int>& true_state,
                  const LabelSchema& schema) {
  const std::int64_t C = logits.shape().back();
  const std::int64_t P = logits.numel() / C;
  double total = 0.0;
  for (std::int64_t pos = 0; pos < P; ++pos) {
    int off = 0;
    for (std::size_t g = 0; g < schema.groups.size(); ++g) {
      const auto& grp = schema.groups[g];
      double denom = 0.0;
      for (int j = 0; j < grp.state_count; ++j)
        denom += std::exp(logits[pos * C + off + j]);
      const int ts = true_state[g];
      const double p = std::exp(logits[pos * C + off + ts]) / denom;
      total -= grp.weights[static_cast<std::size_t>(ts)] * std::log(p);
      off += grp.state_count;
    }
  }
  return total / static_cast<double>(P);
}

}  // namespace

TEST_CASE("dice loss contract values") {
  const double eps = 1e-6;
  SUBCASE("identical binary masks -> ~0") {
    Tensor m = binary_mask_8({1, 5, 9, 12});
    auto loss = dice_loss(make_input(m), m, eps);
    CHECK(std::abs(loss->value[0]) < 1e-6);
  }
  SUBCASE("disjoint masks, 4 positives each -> ~1") {
    Tensor a = binary_mask_8({0, 1, 2, 3});
    Tensor b = binary_mask_8({8, 9, 10, 11});
    auto loss = dice_loss(make_input(a), b, eps);
    CHECK(loss->value[0] == doctest::Approx(1.0 - eps / (8.0 + eps)));
    CHECK(loss->value[0] > 0.999);
  }
  SUBCASE("half overlap |pred|=|true|=4, inter=2 -> 0.5") {
    Tensor a = binary_mask_8({0, 1, 2, 3});
    Tensor b = binary_mask_8({2, 3, 8, 9});
    auto loss = dice_loss(make_input(a), b, eps);
    CHECK(std::abs(loss->value[0] - 0.5) < 1e-6);
  }
  SUBCASE("shape mismatch throws") {
    CHECK_THROWS_AS(
        (void)dice_loss(make_input(Tensor({4})), Tensor({5}), eps),
        contract_error);
  }
}

TEST_CASE("dice loss properties on random binary masks") {
  Rng rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    Tensor a({32}), b({32});
    for (int i = 0; i < 32; ++i) {
      a[i] = rng.uniform() < 0.4 ? 1.0 : 0.0;
      b[i] = rng.uniform() < 0.4 ? 1.0 : 0.0;
    }
    const double lab = dice_loss(make_input(a), b)->value[0];
    const double lba = dice_loss(make_input(b), a)->value[0];
    CHECK(lab == doctest::Approx(lba));  // symmetric for binary masks
    CHECK(lab >= 0.0);
    CHECK(lab <= 1.0);
    bool identical = true;
    for (int i = 0; i < 32; ++i) identical = identical && a[i] == b[i];
    if (identical)
      CHECK(lab < 1e-6);
    else
      CHECK(lab > 1e-8);
  }
}

TEST_CASE("dice gradient check on random soft mask") {
  for (std::uint64_t seed : {40u, 41u, 42u}) {
    Rng rng(seed);
    Tensor pred({8, 8});
    Tensor truth({8, 8});
    for (int i = 0; i < 64; ++i) {
      pred[i] = 0.05 + 0.9 * rng.uniform();  // keep away from exact 0/1
      truth[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
    }
    CHECK(gradient_check([&](const VarPtr& v) {
            return dice_loss(v, truth);
          }, pred, 1e-5) < 1e-4);
    CHECK(gradient_check([&](const VarPtr& v) {
            return dice_per_sample_sum(v, truth);
          }, pred, 1e-5) < 1e-4);
  }
}

TEST_CASE("aux_seg_loss sums per-pair dice") {
  SUBCASE("empty list -> 0") {
    CHECK(aux_seg_loss({})->value[0] == 0.0);
  }
  SUBCASE("one identical pair -> ~0") {
    Tensor m = binary_mask_8({3, 7});
    CHECK(aux_seg_loss({{make_input(m), m}})->value[0] < 1e-6);
  }
  SUBCASE("pairs with losses 0.5 and ~1.0 -> ~1.5") {
    Tensor a = binary_mask_8({0, 1, 2, 3});
    Tensor b = binary_mask_8({2, 3, 8, 9});       // dice loss 0.5 vs a
    Tensor c = binary_mask_8({8, 9, 10, 11});     // disjoint vs a -> ~1
    const double total =
        aux_seg_loss({{make_input(a), b}, {make_input(a), c}})->value[0];
    CHECK(total == doctest::Approx(1.5).epsilon(1e-5));
  }
}

TEST_CASE("weighted CE: symmetric case gives w*log2 per group") {
  LabelSchema schema;
  schema.groups = {{"g", 2, 0, {1.5, 1.5}}};
  Tensor logits({4, 2});  // 4 positions, equal logits
  auto loss = weighted_ce_loss(make_input(logits), {0}, schema);
  CHECK(loss->value[0] == doctest::Approx(1.5 * std::log(2.0)));
}

TEST_CASE("weighted CE: confident true logit drives loss to 0") {
  LabelSchema schema;
  schema.groups = {{"g", 3, 0, {1.0, 1.0, 1.0}}};
  Tensor logits({1, 3}, {30.0, 0.0, 0.0});
  auto loss = weighted_ce_loss(make_input(logits), {0}, schema);
  CHECK(loss->value[0] < 1e-9);
}

TEST_CASE("weighted CE matches independent recomputation on random logits") {
  LabelSchema schema = default_schema();
  schema.groups[0].weights = {1.0, 2.0, 4.0};
  schema.groups[3].weights = {1.0, 6.0};
  Rng rng(55);
  Tensor logits({2, 3, static_cast<std::int64_t>(schema.total_states())});
  for (std::int64_t i = 0; i < logits.numel(); ++i) logits[i] = rng.normal();
  const std::vector<int> ts = {1, 0, 2, 1};
  auto loss = weighted_ce_loss(make_input(logits), ts, schema);
  CHECK(loss->value[0] == doctest::Approx(ce_by_hand(logits, ts, schema)).epsilon(1e-12));
}

TEST_CASE("weighted CE rejects invalid state index") {
  LabelSchema schema;
  schema.groups = {{"g", 2, 0, {1.0, 1.0}}};
  Tensor logits({1, 2});
  CHECK_THROWS_AS((void)weighted_ce_loss(make_input(logits), {2}, schema),
                  contract_error);
}

TEST_CASE("grouped CE gradient check") {
  LabelSchema schema;
  schema.groups = {{"a", 3, 0, {1.0, 2.0, 4.0}}, {"b", 2, 0, {1.0, 6.0}}};
  for (std::uint64_t seed : {60u, 61u, 62u}) {
    Rng rng(seed);
    Tensor logits({3, 5});
    for (std::int64_t i = 0; i < logits.numel(); ++i) logits[i] = rng.normal();
    Tensor tau({3, 5});
    for (std::int64_t i = 0; i < tau.numel(); ++i) tau[i] = rng.uniform();
    CHECK(gradient_check([&](const VarPtr& v) {
            return grouped_ce_with_targets(v, tau, spans_of(schema));
          }, logits, 1e-5) < 1e-4);
  }
}

TEST_CASE("checkpoint round trip restores values at f32 precision") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "trauma_ckpt_test";
  fs::create_directories(dir);
  const std::string path = (dir / "params.bin").string();

  ParamSet ps;
  Rng rng(9);
  auto a = ps.add("conv.w", Tensor({2, 3}));
  auto b = ps.add("head.b", Tensor({4}));
  for (std::int64_t i = 0; i < a->value.numel(); ++i) a->value[i] = rng.normal();
  for (std::int64_t i = 0; i < b->value.numel(); ++i) b->value[i] = rng.normal();
  Tensor a0 = a->value.clone(), b0 = b->value.clone();
  save_params(path, ps);

  for (std::int64_t i = 0; i < a->value.numel(); ++i) a->value[i] = 0.0;
  load_params(path, ps);
  for (std::int64_t i = 0; i < a->value.numel(); ++i)
    CHECK(a->value[i] == static_cast<double>(static_cast<float>(a0[i])));
  for (std::int64_t i = 0; i < b->value.numel(); ++i)
    CHECK(b->value[i] == static_cast<double>(static_cast<float>(b0[i])));

  // Loading into a mismatched model must fail loudly.
  ParamSet other;
  other.add("conv.w", Tensor({2, 3}));
  other.add("different", Tensor({4}));
  CHECK_THROWS(load_params(path, other));
  ParamSet wrong_shape;
  wrong_shape.add("conv.w", Tensor({3, 2}));
  wrong_shape.add("head.b", Tensor({4}));
  CHECK_THROWS(load_params(path, wrong_shape));
  fs::remove_all(dir);
}
