#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "asvs/gradcheck.hpp"
#include "asvs/ops.hpp"
#include "asvs/optim.hpp"
#include "asvs/spectral_norm.hpp"
#include "test_util.hpp"

using asvs::Rng;
using asvs::Shape;
using asvs::Tensor;
using asvs::testing::random_away_from_zero;
using asvs::testing::random_tensor;
using Td = Tensor<double>;

namespace {

double top_singular_value(const Td& w) {
  const std::size_t rows = w.dim(0), cols = w.size() / rows;
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = w[r * cols + c];
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

void require_gradcheck(const asvs::GradCheckResult& r) {
  INFO(r.name << " relative error " << r.relative_error);
  CHECK(r.checked > 0);
  CHECK(r.passed);
}

}  // namespace

TEST_CASE("matmul") {
  SUBCASE("identity") {
    Td eye({2, 2}, {1, 0, 0, 1});
    Td b({2, 2}, {1, 2, 3, 4});
    auto c = asvs::matmul(eye, b);
    CHECK(c.shape() == Shape{2, 2});
    CHECK(std::vector<double>(c.data().begin(), c.data().end()) ==
          std::vector<double>{1, 2, 3, 4});
  }
  SUBCASE("projection") {
    auto c = asvs::matmul(Td({2, 2}, {1, 0, 0, 0}), Td({2, 1}, {5, 7}));
    CHECK(c[0] == 5);
    CHECK(c[1] == 0);
  }
  SUBCASE("shape mismatch names both shapes") {
    try {
      asvs::matmul(Td::zeros({3, 4}), Td::zeros({3, 2}));
      FAIL("expected DimensionError");
    } catch (const asvs::DimensionError& e) {
      const std::string what = e.what();
      CHECK(what.find("[3x4]") != std::string::npos);
      CHECK(what.find("[3x2]") != std::string::npos);
    }
  }
  SUBCASE("gradient of sum(A B) matches finite differences") {
    Rng rng(1);
    auto a = random_tensor({3, 4}, rng);
    auto b = random_tensor({4, 2}, rng);
    require_gradcheck(asvs::check_gradients(
        "matmul", [&] { return asvs::sum(asvs::matmul(a, b)); }, {a, b}));
  }
}

TEST_CASE("conv1d") {
  SUBCASE("identity tap returns the input") {
    Rng rng(2);
    auto x = random_tensor({1, 6}, rng, -1, 1, false);
    auto y = asvs::conv1d(x, Td({1, 1, 3}, {0, 1, 0}));
    CHECK(std::vector<double>(y.data().begin(), y.data().end()) ==
          std::vector<double>(x.data().begin(), x.data().end()));
  }
  SUBCASE("box filter with zero padding") {
    auto y = asvs::conv1d(Td({1, 3}, {1, 2, 3}), Td({1, 1, 3}, {1, 1, 1}));
    CHECK(std::vector<double>(y.data().begin(), y.data().end()) == std::vector<double>{3, 6, 5});
  }
  SUBCASE("even kernel is a configuration error") {
    CHECK_THROWS_AS(asvs::conv1d(Td::zeros({1, 3}), Td::zeros({1, 1, 2})), asvs::ConfigError);
  }
  SUBCASE("weight, input and bias gradients match finite differences") {
    Rng rng(3);
    auto x = random_tensor({2, 5}, rng);
    auto w = random_tensor({2, 2, 3}, rng);
    auto b = random_tensor({2}, rng);
    auto probe = random_tensor({2, 5}, rng, -1, 1, false);
    require_gradcheck(asvs::check_gradients(
        "conv1d", [&] { return asvs::sum(asvs::mul(asvs::conv1d(x, w, b), probe)); }, {x, w, b}));
  }
}

TEST_CASE("primitive values") {
  auto s = asvs::softmax(Td({3}, {0, 0, 0}));
  for (double p : s.data()) CHECK(p == doctest::Approx(1.0 / 3.0));
  CHECK(asvs::sigmoid(Td::scalar(0.0)).item() == 0.5);
  CHECK(asvs::sigmoid(Td::scalar(-800.0)).item() >= 0.0);
  CHECK(asvs::softplus(Td::scalar(800.0)).item() == doctest::Approx(800.0));

  Rng rng(4);
  auto x = random_tensor({4, 5}, rng);
  auto eval = asvs::dropout(x, 0.1, false, rng);
  CHECK(eval.same_node(x));
  CHECK(std::equal(eval.data().begin(), eval.data().end(), x.data().begin()));

  CHECK_THROWS_AS(asvs::embedding(Td::zeros({3, 2}), std::vector<std::size_t>{0, 3}),
                  asvs::IndexError);
}

TEST_CASE("dropout in training mode zeroes about p of the entries and rescales the rest") {
  Rng rng(9);
  auto x = Td::filled({100, 100}, 1.0);
  auto y = asvs::dropout(x, 0.1, true, rng);
  std::size_t zeros = 0;
  for (double v : y.data()) {
    if (v == 0.0)
      ++zeros;
    else
      CHECK(v == doctest::Approx(1.0 / 0.9));
  }
  CHECK(zeros > 850);
  CHECK(zeros < 1150);
}

TEST_CASE("every differentiable primitive matches central finite differences") {
  Rng rng(5);
  for (int trial = 0; trial < 3; ++trial) {
    const std::size_t r = 2 + rng.index(5), c = 2 + rng.index(7);
    CAPTURE(r);
    CAPTURE(c);
    auto a = random_away_from_zero({r, c}, rng);
    auto b = random_tensor({r, c}, rng);
    auto pos = random_tensor({r, c}, rng, 0.5, 2.0);
    auto probe = random_tensor({r, c}, rng, -1, 1, false);
    auto bias = random_tensor({c}, rng);
    auto weigh = [&](const Td& t) {
      return asvs::sum(asvs::mul(t, Td(t.shape(), {probe.data().begin(), probe.data().end()})));
    };

    require_gradcheck(asvs::check_gradients("add", [&] { return weigh(asvs::add(a, b)); }, {a, b}));
    require_gradcheck(asvs::check_gradients("sub", [&] { return weigh(asvs::sub(a, b)); }, {a, b}));
    require_gradcheck(asvs::check_gradients("mul", [&] { return weigh(asvs::mul(a, b)); }, {a, b}));
    require_gradcheck(
        asvs::check_gradients("scale", [&] { return weigh(asvs::scale(a, 1.7)); }, {a}));
    require_gradcheck(asvs::check_gradients(
        "add_row_bias", [&] { return weigh(asvs::add_row_bias(a, bias)); }, {a, bias}));
    require_gradcheck(
        asvs::check_gradients("sigmoid", [&] { return weigh(asvs::sigmoid(b)); }, {b}));
    require_gradcheck(asvs::check_gradients("relu", [&] { return weigh(asvs::relu(a)); }, {a}));
    require_gradcheck(asvs::check_gradients("abs", [&] { return weigh(asvs::abs(a)); }, {a}));
    require_gradcheck(asvs::check_gradients("log", [&] { return weigh(asvs::log(pos)); }, {pos}));
    require_gradcheck(
        asvs::check_gradients("softplus", [&] { return weigh(asvs::softplus(b)); }, {b}));
    require_gradcheck(
        asvs::check_gradients("softmax", [&] { return weigh(asvs::softmax(b)); }, {b}));
    require_gradcheck(asvs::check_gradients(
        "transpose", [&] { return weigh(asvs::transpose(asvs::transpose(a))); }, {a}));
    require_gradcheck(asvs::check_gradients("mean", [&] { return asvs::mean(asvs::mul(a, b)); },
                                            {a, b}));
    for (std::size_t axis : {0u, 1u}) {
      require_gradcheck(asvs::check_gradients(
          "mean_axis", [&] { return asvs::sum(asvs::mul(asvs::mean_axis(a, axis),
                                                        asvs::mean_axis(b, axis))); },
          {a, b}));
    }
    require_gradcheck(asvs::check_gradients(
        "concat", [&] {
          auto rows = asvs::concat<double>({a, b}, 0);
          auto cols = asvs::concat<double>({a, b}, 1);
          return asvs::add(asvs::sum(asvs::mul(rows, rows)), asvs::sum(asvs::mul(cols, cols)));
        },
        {a, b}));
    require_gradcheck(asvs::check_gradients(
        "slice", [&] {
          auto s1 = asvs::slice_rows(a, 1, r);
          auto s2 = asvs::slice_cols(a, 0, c - 1);
          return asvs::add(asvs::sum(asvs::mul(s1, s1)), asvs::sum(asvs::mul(s2, s2)));
        },
        {a}));
    std::vector<std::size_t> counts(r);
    for (auto& k : counts) k = 1 + rng.index(3);
    require_gradcheck(asvs::check_gradients(
        "repeat_rows", [&] {
          auto e = asvs::repeat_rows(a, counts);
          return asvs::sum(asvs::mul(e, e));
        },
        {a}));
    std::vector<std::size_t> ids{0, r - 1, 0};
    require_gradcheck(asvs::check_gradients(
        "embedding", [&] {
          auto e = asvs::embedding(a, ids);
          return asvs::sum(asvs::mul(e, e));
        },
        {a}));
    require_gradcheck(asvs::check_gradients(
        "reshape_pick", [&] {
          auto flat = asvs::reshape(asvs::mul(a, b), Shape{r * c});
          return asvs::add(asvs::pick(flat, 1), asvs::pick(flat, r * c - 1));
        },
        {a, b}));
    auto targets = Td({r, c}, std::vector<double>(r * c, 0.0), false);
    for (std::size_t i = 0; i < r * c; i += 2) targets.mutable_data()[i] = 1.0;
    require_gradcheck(asvs::check_gradients(
        "bce_with_logits", [&] { return asvs::bce_with_logits(asvs::scale(b, 4.0), targets); },
        {b}));
    Rng drop_rng(77);
    require_gradcheck(asvs::check_gradients(
        "dropout", [&] {
          Rng local = drop_rng;  // same mask on every evaluation
          return weigh(asvs::dropout(a, 0.3, true, local));
        },
        {a}));
  }
}

TEST_CASE("shared subexpressions accumulate gradients like duplicated inputs") {
  Rng rng(6);
  auto x = random_tensor({3, 3}, rng);
  // f = sum(x * x + x) using x three times.
  auto f = asvs::sum(asvs::add(asvs::mul(x, x), x));
  f.backward();

  Td x1(x.shape(), {x.data().begin(), x.data().end()}, true);
  Td x2(x.shape(), {x.data().begin(), x.data().end()}, true);
  Td x3(x.shape(), {x.data().begin(), x.data().end()}, true);
  asvs::sum(asvs::add(asvs::mul(x1, x2), x3)).backward();
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(x.grad()[i] == doctest::Approx(x1.grad()[i] + x2.grad()[i] + x3.grad()[i]));
}

TEST_CASE("gradient reversal") {
  Rng rng(7);
  auto x = random_tensor({4, 3}, rng);
  auto probe = random_tensor({4, 3}, rng, -1, 1, false);

  auto y = asvs::gradient_reversal(x, 1.0);
  CHECK(std::equal(y.data().begin(), y.data().end(), x.data().begin()));

  asvs::sum(asvs::mul(x, probe)).backward();
  const std::vector<double> plain(x.grad().begin(), x.grad().end());
  for (double lambda : {0.0, 0.5, 1.0, 2.0}) {
    CAPTURE(lambda);
    x.clear_grad();
    asvs::sum(asvs::mul(asvs::gradient_reversal(x, lambda), probe)).backward();
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(x.grad()[i] == -lambda * plain[i]);
  }
}

TEST_CASE("no-grad guard records no graph") {
  Rng rng(8);
  auto x = random_tensor({2, 2}, rng);
  asvs::NoGradGuard guard;
  auto y = asvs::mul(x, x);
  CHECK_FALSE(y.requires_grad());
  CHECK(y.is_leaf());
}

TEST_CASE("spectral normalisation") {
  Rng rng(10);
  SUBCASE("diag(3, 1)") {
    Td w({2, 2}, {3, 0, 0, 1}, true);
    std::vector<double> u{0.6, 0.8};
    asvs::SpectralNormState<double> state{&u, 5};
    auto normalized = asvs::spectral_normalize(w, state);
    CHECK(state.sigma >= 2.999);
    CHECK(state.sigma <= 3.001);
    const double top = top_singular_value(normalized);
    CHECK(top >= 0.999);
    CHECK(top <= 1.001);
    double norm = 0;
    for (double v : u) norm += v * v;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("unit spectral norm is a fixed point") {
    Td w({2, 2}, {0, 1, 1, 0}, true);
    auto u = asvs::random_unit_vector<double>(2, rng);
    asvs::SpectralNormState<double> state{&u, 1};
    auto out = asvs::spectral_normalize(w, state);
    for (std::size_t i = 0; i < 4; ++i) CHECK(out[i] == doctest::Approx(w[i]).epsilon(1e-3));
  }
  SUBCASE("random 8x8 after 50 one-iteration steps") {
    auto w = random_tensor({8, 8}, rng);
    auto u = asvs::random_unit_vector<double>(8, rng);
    asvs::SpectralNormState<double> state{&u, 1};
    Td out;
    for (int step = 0; step < 50; ++step) out = asvs::spectral_normalize(w, state);
    const double top = top_singular_value(out);
    CHECK(top >= 0.95);
    CHECK(top <= 1.05);
  }
  SUBCASE("zero weight is returned unscaled") {
    Td w = Td::zeros({3, 2}, true);
    auto u = asvs::random_unit_vector<double>(3, rng);
    asvs::SpectralNormState<double> state{&u, 1};
    auto out = asvs::spectral_normalize(w, state);
    for (double v : out.data()) CHECK(v == 0.0);
  }
  SUBCASE("sigma is a constant in the backward pass") {
    auto w = random_tensor({3, 4}, rng);
    auto u = asvs::random_unit_vector<double>(3, rng);
    asvs::SpectralNormState<double> state{&u, 1};
    asvs::sum(asvs::spectral_normalize(w, state)).backward();
    for (double g : w.grad()) CHECK(g == doctest::Approx(1.0 / state.sigma));
  }
}

TEST_CASE("adam") {
  asvs::ParameterStore<double> store;
  SUBCASE("zero gradient leaves the parameter unchanged") {
    auto p = store.add("p", {}, {0.5});
    p.mutable_grad()[0] = 0.0;
    auto params = store.parameters();
    asvs::adam_step<double>(params, {});
    CHECK(p.item() == 0.5);
    CHECK_FALSE(p.has_grad());
  }
  SUBCASE("one step with constant gradient matches the closed form") {
    auto p = store.add("p", {}, {1.0});
    p.mutable_grad()[0] = 1.0;
    asvs::AdamConfig cfg;
    cfg.lr = 0.1;
    auto params = store.parameters();
    asvs::adam_step<double>(params, cfg);
    // m = (1-b1) g, v = (1-b2) g^2, bias corrections give m_hat = v_hat = 1.
    const double m_hat = (1 - cfg.beta1) * 1.0 / (1 - cfg.beta1);
    const double v_hat = (1 - cfg.beta2) * 1.0 / (1 - cfg.beta2);
    const double expected = 1.0 - cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    CHECK(p.item() == doctest::Approx(expected).epsilon(1e-12));
    CHECK(1.0 - p.item() == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(store.find("p")->step == 1);
  }
  SUBCASE("defaults") {
    asvs::AdamConfig cfg;
    CHECK(cfg.lr == 1e-4);
    CHECK(cfg.beta1 == 0.9);
    CHECK(cfg.beta2 == 0.98);
  }
  SUBCASE("missing gradient is an invariant violation") {
    store.add("p", {2}, {1.0, 2.0});
    auto params = store.parameters();
    CHECK_THROWS_AS(asvs::adam_step<double>(params, {}), asvs::InvariantError);
  }
  SUBCASE("clip_grad_norm rescales to the bound") {
    auto p = store.add("p", {2}, {0.0, 0.0});
    p.mutable_grad()[0] = 3.0;
    p.mutable_grad()[1] = 4.0;
    auto params = store.parameters();
    CHECK(asvs::clip_grad_norm<double>(params, 1.0) == doctest::Approx(5.0));
    CHECK(p.grad()[0] == doctest::Approx(0.6));
    CHECK(p.grad()[1] == doctest::Approx(0.8));
  }
}
