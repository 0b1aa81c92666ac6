#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "trauma/ensemble.hpp"
#include "trauma/rng.hpp"

using namespace trauma;
using namespace trauma::ens;

namespace {

SliceProbs random_slices(Rng& rng, const LabelSchema& schema, int T,
                         bool normalized = true) {
  SliceProbs sp;
  sp.groups.resize(schema.groups.size());
  for (std::size_t g = 0; g < schema.groups.size(); ++g) {
    sp.groups[g].resize(static_cast<std::size_t>(T));
    for (auto& slice : sp.groups[g]) {
      slice.resize(static_cast<std::size_t>(schema.groups[g].state_count));
      double s = 0.0;
      for (auto& v : slice) {
        v = 0.01 + rng.uniform();
        s += v;
      }
      if (normalized)
        for (auto& v : slice) v /= s;
    }
  }
  return sp;
}

LabelSchema binary_schema() {
  LabelSchema s;
  s.groups = {{"inj", 2, 0, {1, 1}}};
  return s;
}

}  // namespace

TEST_CASE("slice_ensemble: identity, mean, recomputation") {
  LabelSchema schema = default_schema();
  Rng rng(1);
  const auto a = random_slices(rng, schema, 5);

  SUBCASE("K=1 is the identity (bitwise)") {
    const auto out = slice_ensemble({a});
    CHECK(out.groups == a.groups);
  }
  SUBCASE("values 0.2 and 0.4 average to 0.3") {
    SliceProbs x, y;
    x.groups = {{{0.2, 0.8}}};
    y.groups = {{{0.4, 0.6}}};
    const auto out = slice_ensemble({x, y});
    CHECK(out.groups[0][0][0] == doctest::Approx(0.3).epsilon(1e-15));
  }
  SUBCASE("K=3 matches an independent mean within 1e-12") {
    const auto b = random_slices(rng, schema, 5);
    const auto c = random_slices(rng, schema, 5);
    const auto out = slice_ensemble({a, b, c});
    for (std::size_t g = 0; g < out.groups.size(); ++g)
      for (std::size_t s = 0; s < out.groups[g].size(); ++s)
        for (std::size_t k = 0; k < out.groups[g][s].size(); ++k) {
          const double m =
              (a.groups[g][s][k] + b.groups[g][s][k] + c.groups[g][s][k]) / 3.0;
          CHECK(std::abs(out.groups[g][s][k] - m) < 1e-12);
        }
  }
  SUBCASE("empty list and mismatched slice counts throw") {
    CHECK_THROWS_AS((void)slice_ensemble({}), contract_error);
    auto short_one = a;
    short_one.groups[0].pop_back();
    CHECK_THROWS_AS((void)slice_ensemble({a, short_one}), contract_error);
  }
}

TEST_CASE("patient_aggregate max semantics") {
  const LabelSchema schema = binary_schema();
  SUBCASE("binary group: injury probs [0.1,0.7,0.3] -> injury 0.7, healthy 0.3") {
    SliceProbs sp;
    sp.groups = {{{0.9, 0.1}, {0.3, 0.7}, {0.7, 0.3}}};
    const auto out = patient_aggregate(sp, schema);
    CHECK(out.groups[0][1] == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(out.groups[0][0] == doctest::Approx(0.3).epsilon(1e-15));
  }
  SUBCASE("single normalized binary slice is returned unchanged") {
    SliceProbs sp;
    sp.groups = {{{0.25, 0.75}}};
    const auto out = patient_aggregate(sp, schema);
    CHECK(out.groups[0][0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(out.groups[0][1] == doctest::Approx(0.75).epsilon(1e-15));
  }
  SUBCASE("all slices identical equals any slice (binary)") {
    SliceProbs sp;
    sp.groups = {{{0.4, 0.6}, {0.4, 0.6}, {0.4, 0.6}}};
    const auto out = patient_aggregate(sp, schema);
    CHECK(out.groups[0][0] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(out.groups[0][1] == doctest::Approx(0.6).epsilon(1e-15));
  }
  SUBCASE("3-state healthy recomputation and renormalization") {
    LabelSchema s3;
    s3.groups = {{"g", 3, 0, {1, 1, 1}}};
    SliceProbs sp;
    sp.groups = {{{0.5, 0.3, 0.2}, {0.6, 0.1, 0.3}}};
    // per-state max: low 0.3, high 0.3; healthy = 1-0.3 = 0.7; sum 1.3
    const auto out = patient_aggregate(sp, s3);
    CHECK(out.groups[0][0] == doctest::Approx(0.7 / 1.3));
    CHECK(out.groups[0][1] == doctest::Approx(0.3 / 1.3));
    CHECK(out.groups[0][2] == doctest::Approx(0.3 / 1.3));
  }
  SUBCASE("empty slice set throws") {
    SliceProbs sp;
    sp.groups = {{}};
    CHECK_THROWS_AS((void)patient_aggregate(sp, schema), contract_error);
  }
}

TEST_CASE("patient_aggregate is monotone in slice probabilities") {
  LabelSchema schema = default_schema();
  Rng rng(9);
  for (int rep = 0; rep < 200; ++rep) {
    auto sp = random_slices(rng, schema, 4);
    const auto base = patient_aggregate(sp, schema);
    // raise one random non-healthy state at one slice
    const std::size_t g = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(schema.groups.size()) - 1));
    const auto& grp = schema.groups[g];
    int st = grp.healthy_state;
    while (st == grp.healthy_state)
      st = static_cast<int>(rng.uniform_int(0, grp.state_count - 1));
    const std::size_t t = static_cast<std::size_t>(rng.uniform_int(0, 3));
    sp.groups[g][t][static_cast<std::size_t>(st)] =
        std::min(1.0, sp.groups[g][t][static_cast<std::size_t>(st)] + rng.uniform());
    const auto bumped = patient_aggregate(sp, schema);
    CHECK(bumped.groups[g][static_cast<std::size_t>(st)] >=
          base.groups[g][static_cast<std::size_t>(st)] - 1e-15);
  }
}

TEST_CASE("final_ensemble: identity, mean, permutation invariance") {
  LabelSchema schema = default_schema();
  Rng rng(31);
  std::vector<PatientProbs> models;
  for (int k = 0; k < 3; ++k)
    models.push_back(patient_aggregate(random_slices(rng, schema, 6), schema));

  SUBCASE("N=1 identity (bitwise)") {
    CHECK(final_ensemble({models[0]}).groups == models[0].groups);
  }
  SUBCASE("0.2/0.6 -> 0.4") {
    PatientProbs a, b;
    a.groups = {{0.8, 0.2}};
    b.groups = {{0.4, 0.6}};
    const auto out = final_ensemble({a, b});
    CHECK(out.groups[0][1] == doctest::Approx(0.4).epsilon(1e-15));
  }
  SUBCASE("permuting model order leaves the mean unchanged") {
    const auto abc = final_ensemble({models[0], models[1], models[2]});
    const auto cab = final_ensemble({models[2], models[0], models[1]});
    for (std::size_t g = 0; g < abc.groups.size(); ++g)
      for (std::size_t s = 0; s < abc.groups[g].size(); ++s)
        CHECK(std::abs(abc.groups[g][s] - cab.groups[g][s]) < 1e-12);
  }
  SUBCASE("means are bounded by input extrema") {
    const auto out = final_ensemble(models);
    for (std::size_t g = 0; g < out.groups.size(); ++g)
      for (std::size_t s = 0; s < out.groups[g].size(); ++s) {
        double lo = 1.0, hi = 0.0;
        for (const auto& m : models) {
          lo = std::min(lo, m.groups[g][s]);
          hi = std::max(hi, m.groups[g][s]);
        }
        CHECK(out.groups[g][s] >= lo - 1e-15);
        CHECK(out.groups[g][s] <= hi + 1e-15);
      }
  }
}

TEST_CASE("make_folds partitions deterministically") {
  std::vector<std::string> ids;
  for (int i = 0; i < 8; ++i) ids.push_back("study_" + std::to_string(i));

  const auto f1 = make_folds(ids, 4, 5);
  const auto f2 = make_folds(ids, 4, 5);
  CHECK(f1.validation == f2.validation);
  for (const auto& fold : f1.validation) CHECK(fold.size() == 2);

  // union of folds is the id set, pairwise disjoint
  std::set<std::string> seen;
  for (const auto& fold : f1.validation)
    for (const auto& id : fold) CHECK(seen.insert(id).second);
  CHECK(seen.size() == ids.size());

  // training ids are the complement
  const auto train0 = f1.training_ids(0, ids);
  CHECK(train0.size() == 6);
  for (const auto& id : f1.validation[0])
    CHECK(std::find(train0.begin(), train0.end(), id) == train0.end());

  // a different seed gives a different shuffle (with 8! >> 1 this holds for
  // the chosen seeds)
  const auto f3 = make_folds(ids, 4, 6);
  CHECK(f1.validation != f3.validation);

  CHECK_THROWS_AS((void)make_folds(ids, 9, 1), contract_error);
  CHECK_THROWS_AS((void)make_folds(ids, 1, 1), contract_error);

  const auto full = full_fold();
  CHECK(full.model_count() == 1);
  CHECK(full.training_ids(0, ids) == ids);
}
