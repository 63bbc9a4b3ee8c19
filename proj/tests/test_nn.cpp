#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "helpers.hpp"
#include "uail/nn/adam.hpp"
#include "uail/nn/checkpoint.hpp"
#include "uail/nn/mlp.hpp"
#include "uail/nn/tape.hpp"

using namespace uail;
using namespace uail::nn;

namespace {

Mlp random_net(ParamStore& store, std::size_t in_dim, std::uint64_t seed, std::size_t max_layers = 3,
               std::size_t max_width = 16) {
  Rng rng(seed);
  const std::size_t n_layers = 1 + rng.below(max_layers);
  std::vector<LayerSpec> layers;
  for (std::size_t i = 0; i < n_layers; ++i) {
    const Activation acts[] = {Activation::kRelu, Activation::kTanh, Activation::kSigmoid};
    const Activation act = i + 1 == n_layers ? Activation::kIdentity : acts[rng.below(3)];
    layers.push_back({1 + rng.below(max_width), act});
  }
  return Mlp(store, "net", in_dim, layers, rng);
}

Tensor random_row(std::size_t n, Rng& rng) {
  Tensor t = Tensor::zeros({1, n});
  for (double& x : t.data) x = rng.uniform(-1.0, 1.0);
  return t;
}

double sq_loss_eval(ParamStore& store, const Mlp& net, const Tensor& input) {
  Tape tape(&store);
  Value out = net.forward(tape, tape.input(input));
  return tape.value(tape.scale(tape.sum(tape.square(out)), 0.5)).data[0];
}

}  // namespace

TEST_CASE("tensor shape checks") {
  CHECK_THROWS_AS(Tensor({2, 3}, {1.0, 2.0}), ShapeError);
  CHECK_THROWS_AS(Tensor::zeros({0, 3}), ShapeError);
  Tensor a = Tensor::zeros({2, 3});
  Tensor b = Tensor::zeros({4, 2});
  Tensor c;
  CHECK_THROWS_AS(matmul_into(a, b, c), ShapeError);
}

TEST_CASE("identity linear layer reproduces its input") {
  ParamStore store;
  Rng rng(1);
  Mlp net(store, "net", 3, {{3, Activation::kIdentity}}, rng);
  Tensor& w = store.value("net.0.W");
  std::fill(w.data.begin(), w.data.end(), 0.0);
  for (std::size_t i = 0; i < 3; ++i) w.at(i, i) = 1.0;
  store.bump_version();

  auto res = forward_mlp(store, net, Tensor::vec({1.0, 2.0, 3.0}));
  CHECK(res.output.data == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("zero-initialized weights map anything to zero") {
  ParamStore store;
  Rng rng(1);
  Mlp net(store, "net", 4, {{5, Activation::kRelu}, {2, Activation::kIdentity}}, rng);
  for (auto& e : store.entries()) std::fill(e.value.data.begin(), e.value.data.end(), 0.0);
  store.bump_version();

  auto res = forward_mlp(store, net, Tensor::vec({0.3, -2.0, 5.0, 1.0}));
  for (double x : res.output.data) CHECK(x == 0.0);
}

TEST_CASE("random nets match the straight-line re-evaluation oracle") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    ParamStore store;
    Rng rng(derive_seed(seed, "oracle-input"));
    Mlp net = random_net(store, 6, seed);
    std::vector<double> input(6);
    for (double& x : input) x = rng.uniform(-2.0, 2.0);

    auto res = forward_mlp(store, net, Tensor::vec(input));
    auto oracle = testing::straight_line_mlp(store, net, input);
    REQUIRE(res.output.data.size() == oracle.size());
    for (std::size_t i = 0; i < oracle.size(); ++i) CHECK(res.output.data[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
  }
}

TEST_CASE("backward: scalar chain rule basics") {
  SUBCASE("loss = w*x with x=3, w=2 gives grad w = 3") {
    ParamStore store;
    store.create("w", Tensor({1, 1}, {2.0}));
    Tape tape(&store);
    Value loss = tape.sum(tape.matmul(tape.input(Tensor({1, 1}, {3.0})), tape.param("w")));
    store.zero_grads();
    tape.backward(loss, store);
    CHECK(store.grad("w").data[0] == doctest::Approx(3.0));
  }
  SUBCASE("dead ReLU blocks the gradient") {
    ParamStore store;
    store.create("w", Tensor({1, 1}, {2.0}));
    Tape tape(&store);
    // w*x = -6 < 0, so relu kills it.
    Value loss = tape.sum(tape.relu(tape.matmul(tape.input(Tensor({1, 1}, {-3.0})), tape.param("w"))));
    store.zero_grads();
    tape.backward(loss, store);
    CHECK(store.grad("w").data[0] == 0.0);
  }
}

TEST_CASE("gradient check: analytic matches central finite differences") {
  // The acceptance suite runs the full 100-seed version of this property.
  for (std::uint64_t seed = 100; seed < 125; ++seed) {
    ParamStore store;
    Rng rng(derive_seed(seed, "gradcheck-input"));
    Mlp net = random_net(store, 5, seed);
    Tensor input = random_row(5, rng);
    testing::nudge_relu_kinks(store, net, input.data);

    Tape tape(&store);
    Value out = net.forward(tape, tape.input(input));
    Value loss = tape.scale(tape.sum(tape.square(out)), 0.5);
    store.zero_grads();
    tape.backward(loss, store);

    std::vector<Tensor> analytic;
    for (auto& e : store.entries()) analytic.push_back(e.grad);

    auto fd = testing::finite_difference_grads(store, [&] { return sq_loss_eval(store, net, input); });
    for (std::size_t p = 0; p < fd.size(); ++p)
      for (std::size_t i = 0; i < fd[p].size(); ++i)
        CHECK(testing::grad_rel_err(analytic[p].data[i], fd[p][i]) < 1e-6);
  }
}

TEST_CASE("determinism: same seed, same inputs, bit-identical results") {
  auto run = [](std::uint64_t seed) {
    ParamStore store;
    Rng rng(seed);
    Mlp net = random_net(store, 5, seed);
    Tensor input = random_row(5, rng);
    Tape tape(&store);
    Value out = net.forward(tape, tape.input(input));
    Value loss = tape.sum(tape.square(out));
    store.zero_grads();
    tape.backward(loss, store);
    std::vector<double> sig = tape.value(out).data;
    for (auto& e : store.entries()) sig.insert(sig.end(), e.grad.data.begin(), e.grad.data.end());
    return sig;
  };
  CHECK(run(7) == run(7));
}

TEST_CASE("stale tape: mutation between forward and backward is rejected") {
  ParamStore store;
  store.create("w", Tensor({1, 1}, {2.0}));
  Tape tape(&store);
  Value loss = tape.sum(tape.matmul(tape.input(Tensor({1, 1}, {3.0})), tape.param("w")));
  Adam adam(store, {.lr = 1e-2});
  store.zero_grads();
  store.mark_grads_populated();
  adam.step(store);  // mutates parameters
  store.zero_grads();
  CHECK_THROWS_WITH_AS(tape.backward(loss, store), doctest::Contains("stale tape"), Error);
}

TEST_CASE("shape errors name the offending layer") {
  ParamStore store;
  Rng rng(3);
  Mlp net(store, "net", 4, {{2, Activation::kIdentity}}, rng);
  Tape tape(&store);
  Value bad = tape.input(Tensor::zeros({1, 7}));
  CHECK_THROWS_WITH_AS(net.forward(tape, bad), doctest::Contains("layer 0"), ShapeError);
}

TEST_CASE("adam") {
  SUBCASE("zero gradients leave parameters unchanged and advance the step count") {
    ParamStore store;
    store.create("p", Tensor({3}, {1.0, -2.0, 0.5}));
    Adam adam(store, {.lr = 1e-2});
    store.zero_grads();
    store.mark_grads_populated();
    adam.step(store);
    CHECK(adam.step_count() == 1);
    CHECK(store.value("p").data == std::vector<double>{1.0, -2.0, 0.5});
  }
  SUBCASE("constant gradient moves the parameter against its sign") {
    ParamStore store;
    store.create("p", Tensor({1}, {0.0}));
    Adam adam(store, {.lr = 1e-2});
    double prev = 0.0;
    for (int i = 0; i < 50; ++i) {
      store.zero_grads();
      store.grad("p").data[0] = 2.5;
      store.mark_grads_populated();
      adam.step(store);
      CHECK(store.value("p").data[0] < prev);
      prev = store.value("p").data[0];
    }
  }
  SUBCASE("quadratic (p-5)^2 converges to 5 within 2000 steps at lr 1e-2") {
    ParamStore store;
    store.create("p", Tensor({1}, {0.0}));
    Adam adam(store, {.lr = 1e-2});
    for (int i = 0; i < 2000; ++i) {
      store.zero_grads();
      const double p = store.value("p").data[0];
      store.grad("p").data[0] = 2.0 * (p - 5.0);
      store.mark_grads_populated();
      adam.step(store);
    }
    CHECK(store.value("p").data[0] == doctest::Approx(5.0).epsilon(1e-3));
  }
  SUBCASE("missing gradients are an error naming a parameter") {
    ParamStore store;
    store.create("p", Tensor({1}, {0.0}));
    Adam adam(store, {});
    store.zero_grads();
    CHECK_THROWS_WITH_AS(adam.step(store), doctest::Contains("p"), Error);
  }
}

TEST_CASE("checkpoint container round-trips bit-exactly") {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "uail_test_ckpt.bin";

  ParamStore store;
  Rng rng(11);
  random_net(store, 5, 11);
  store.create("meta.extra", Tensor({2, 2}, {1.5, -0.25, 1e-300, 3.0}));

  save_container(path, store.to_map());
  TensorMap loaded = load_container(path);

  REQUIRE(loaded.size() == store.count());
  for (const auto& e : store.entries()) {
    const Tensor& t = container_get(loaded, e.name);
    CHECK(t.shape == e.value.shape);
    CHECK(t.data == e.value.data);  // bit-exact
  }

  // Saving the loaded map again must produce identical bytes.
  const fs::path path2 = fs::temp_directory_path() / "uail_test_ckpt2.bin";
  save_container(path2, loaded);
  CHECK(read_file(path) == read_file(path2));

  SUBCASE("bad magic is rejected") {
    atomic_write_file(path, "NOPE1xxxxxxxxxxxxxxxx");
    CHECK_THROWS_AS(load_container(path), ArtifactError);
  }
  fs::remove(path);
  fs::remove(path2);
}
