#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "trauma/errors.hpp"
#include "trauma/nn/autograd.hpp"
#include "trauma/nn/gradcheck.hpp"
#include "trauma/nn/losses.hpp"
#include "trauma/nn/optim.hpp"
#include "trauma/rng.hpp"

using namespace trauma;
using namespace trauma::nn;

namespace {

Tensor random_tensor(std::vector<std::int64_t> shape, std::uint64_t seed,
                     double scale = 1.0) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = scale * rng.normal();
  return t;
}

constexpr double kH = 1e-5;
constexpr double kTol = 1e-4;

}  // namespace

TEST_CASE("gradient_check on sum of squares is exact to 1e-8") {
  Tensor x({2}, {1.0, 2.0});
  const double err = gradient_check(
      [](const VarPtr& v) { return sum(mul(v, v)); }, x, kH);
  CHECK(err < 1e-8);
}

TEST_CASE("elementwise and activation gradients") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Tensor x = random_tensor({2, 5}, seed);
    CHECK(gradient_check([&](const VarPtr& v) {
            return sum(mul(relu(v), sigmoid(v)));
          }, x, kH) < kTol);
    CHECK(gradient_check([&](const VarPtr& v) {
            return sum(tanh_op(affine(v, 0.5, -0.25)));
          }, x, kH) < kTol);
    Tensor other = random_tensor({2, 5}, seed + 100);
    CHECK(gradient_check([&](const VarPtr& v) {
            return mean(mul(sub(v, make_input(other)), add(v, v)));
          }, x, kH) < kTol);
  }
}

TEST_CASE("softmax gradient and distribution property") {
  Tensor x = random_tensor({3, 4}, 5);
  VarPtr sm = softmax(make_input(x), 1);
  for (std::int64_t r = 0; r < 3; ++r) {
    double s = 0.0;
    for (std::int64_t c = 0; c < 4; ++c) {
      const double p = sm->value[r * 4 + c];
      CHECK(p > 0.0);
      s += p;
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
  Tensor weights = random_tensor({3, 4}, 6);
  CHECK(gradient_check([&](const VarPtr& v) {
          return sum(mul(softmax(v, 1), make_input(weights)));
        }, x, kH) < kTol);
}

TEST_CASE("conv2d + relu + sum gradient on random input") {
  for (std::uint64_t seed : {11u, 12u}) {
    Tensor x = random_tensor({1, 3, 8, 8}, seed);
    Tensor w = random_tensor({4, 3, 3, 3}, seed + 1, 0.5);
    Tensor b = random_tensor({4}, seed + 2, 0.1);
    CHECK(gradient_check([&](const VarPtr& v) {
            return sum(relu(conv2d(v, make_input(w), make_input(b), 1, 1)));
          }, x, kH) < kTol);
    // weight gradient
    CHECK(gradient_check([&](const VarPtr& wv) {
            return sum(relu(conv2d(make_input(x), wv, make_input(b), 1, 1)));
          }, w, kH) < kTol);
  }
}

TEST_CASE("conv3d, pooling, upsample, dense, narrow, concat gradients") {
  Tensor x3 = random_tensor({1, 2, 4, 4, 4}, 21);
  Tensor w3 = random_tensor({3, 2, 3, 3, 3}, 22, 0.4);
  Tensor b3 = random_tensor({3}, 23, 0.1);
  CHECK(gradient_check([&](const VarPtr& v) {
          return sum(sigmoid(conv3d(v, make_input(w3), make_input(b3), 1, 1)));
        }, x3, kH) < kTol);

  Tensor xp = random_tensor({2, 2, 6, 6}, 24);
  CHECK(gradient_check([&](const VarPtr& v) {
          return sum(maxpool2d(v, 2, 2));
        }, xp, kH) < kTol);

  Tensor xp3 = random_tensor({1, 2, 4, 4, 4}, 25);
  CHECK(gradient_check([&](const VarPtr& v) {
          return sum(maxpool3d(v, 2, 2));
        }, xp3, kH) < kTol);

  Tensor xu = random_tensor({1, 2, 3, 3}, 26);
  Tensor mask = random_tensor({1, 2, 6, 6}, 27);
  CHECK(gradient_check([&](const VarPtr& v) {
          return sum(mul(upsample2x_2d(v), make_input(mask)));
        }, xu, kH) < kTol);

  Tensor xu3 = random_tensor({1, 1, 2, 2, 2}, 28);
  Tensor mask3 = random_tensor({1, 1, 4, 4, 4}, 29);
  CHECK(gradient_check([&](const VarPtr& v) {
          return sum(mul(upsample2x_3d(v), make_input(mask3)));
        }, xu3, kH) < kTol);

  Tensor xd = random_tensor({3, 7}, 30);
  Tensor wd = random_tensor({5, 7}, 31, 0.5);
  Tensor bd = random_tensor({5}, 32, 0.1);
  CHECK(gradient_check([&](const VarPtr& v) {
          return sum(tanh_op(dense(v, make_input(wd), make_input(bd))));
        }, xd, kH) < kTol);

  Tensor xn = random_tensor({2, 6, 3}, 33);
  CHECK(gradient_check([&](const VarPtr& v) {
          auto a = narrow(v, 1, 1, 2);
          auto b = narrow(v, 1, 3, 3);
          return sum(mul(concat({a, a, b}, 1), concat({b, a, a}, 1)));
        }, xn, kH) < kTol);

  Tensor xm = random_tensor({4, 4}, 34);
  CHECK(gradient_check([&](const VarPtr& v) {
          return max_reduce(mul(v, v));
        }, xm, kH) < kTol);
}

TEST_CASE("reductions on known values") {
  Tensor x({4}, {1.0, 2.0, 3.0, -4.0});
  CHECK(sum(make_input(x))->value[0] == doctest::Approx(2.0));
  CHECK(mean(make_input(x))->value[0] == doctest::Approx(0.5));
  CHECK(max_reduce(make_input(x))->value[0] == doctest::Approx(3.0));
}

TEST_CASE("shape contract errors") {
  auto a = make_input(Tensor({2, 3}));
  auto b = make_input(Tensor({3, 2}));
  CHECK_THROWS_AS((void)add(a, b), contract_error);
  CHECK_THROWS_AS((void)backward(a), contract_error);  // non-scalar root
  CHECK_THROWS_AS((void)narrow(a, 1, 2, 2), contract_error);
  CHECK_THROWS_AS((void)softmax(a, 5), contract_error);
}

TEST_CASE("sgd momentum update") {
  ParamSet ps;
  auto p = ps.add("p", Tensor({1}, {1.0}));
  p->ensure_grad();
  p->grad[0] = 2.0;

  SUBCASE("lr=0 is the identity") {
    SgdMomentum opt(0.0, 0.9);
    opt.step(ps);
    CHECK(p->value[0] == 1.0);
  }
  SUBCASE("momentum=0 plain step") {
    SgdMomentum opt(0.1, 0.0);
    opt.step(ps);
    CHECK(p->value[0] == doctest::Approx(0.8));
  }
  SUBCASE("one step on f(p)=p^2 decreases f") {
    SgdMomentum opt(0.05, 0.0);
    ParamSet ps2;
    auto q = ps2.add("q", Tensor({1}, {1.0}));
    auto loss = mul(q, q);
    backward(loss);
    opt.step(ps2);
    CHECK(q->value[0] * q->value[0] < 1.0);
  }
}

TEST_CASE("backward accumulates across shared subexpressions") {
  // f(x) = sum(x*x + x*x) -> df/dx = 4x
  Tensor x({3}, {1.0, -2.0, 0.5});
  auto v = make_input(x, true);
  auto y = add(mul(v, v), mul(v, v));
  backward(sum(y));
  CHECK(v->grad[0] == doctest::Approx(4.0));
  CHECK(v->grad[1] == doctest::Approx(-8.0));
  CHECK(v->grad[2] == doctest::Approx(2.0));
}
