#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "doctest.h"
#include "movrp/ad/gradcheck.hpp"
#include "movrp/common/error.hpp"
#include "movrp/policy/checkpoint.hpp"
#include "movrp/policy/rollout.hpp"
#include "movrp/train/trainer.hpp"
#include "movrp/vrptw/generator.hpp"

using namespace movrp;
using namespace movrp::train;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

vrptw::Instance two_customers() {
  vrptw::Instance inst;
  vrptw::Node depot;
  depot.coords = {0.5, 0.5};
  depot.tw_close = 10.0;
  vrptw::Node a;
  a.coords = {0.2, 0.3};
  a.tw_open = 0.5;
  a.tw_close = 6.0;
  a.demand = 0.03;
  a.service = 0.1;
  vrptw::Node b = a;
  b.coords = {0.9, 0.6};
  b.tw_open = 1.5;
  b.demand = 0.05;
  inst.nodes = {depot, a, b};
  return inst;
}

double max_abs(const ad::ParamStore& s) {
  double m = 0.0;
  for (const auto& p : s)
    for (double v : p.values) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_CASE("weight vectors") {
  const auto w100 = make_weight_vectors(100);
  CHECK(w100.front() == WeightVector{0.0, 1.0});
  CHECK(w100.back()[0] == doctest::Approx(0.99).epsilon(1e-15));
  CHECK(w100.back()[1] == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(w100[1][0] == doctest::Approx(0.01));
  CHECK(make_weight_vectors(2) == std::vector<WeightVector>{{0.0, 1.0}, {0.5, 0.5}});
  for (const auto& w : w100) CHECK(std::abs(w[0] + w[1] - 1.0) <= 1e-12);
  CHECK_THROWS_AS(make_weight_vectors(0), ConfigError);
}

TEST_CASE("scalarize") {
  CHECK(scalarize({0.5, 0.5}, {2, 2}) == 2.0);
  CHECK(scalarize({0.0, 1.0}, {9, 3}) == 3.0);
  CHECK(scalarize({1.0, 0.0}, {9, 3}) == 9.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const WeightVector w{u(rng) / 5.0, 0.0};
    const WeightVector lam{w[0], 1.0 - w[0]};
    const vrptw::ObjectiveVector f{u(rng), u(rng)}, g{u(rng), u(rng)};
    const double a = u(rng), b = u(rng);
    CHECK(scalarize(lam, {a * f.f1 + b * g.f1, a * f.f2 + b * g.f2}) ==
          doctest::Approx(a * scalarize(lam, f) + b * scalarize(lam, g)).epsilon(1e-12));
  }
}

TEST_CASE("reinforce gradient contracts") {
  const auto model = policy::desk_model_config();
  const auto params = policy::init_params(model, 5);
  std::vector<vrptw::Instance> batch;
  for (int i = 0; i < 4; ++i) batch.push_back(vrptw::generate_instance(8, 40 + i, vrptw::SizeClass::N50));
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4};

  SUBCASE("zero advantage gives a zero gradient") {
    const std::vector<double> zeros(4, 0.0);
    const auto first = reinforce_gradient(params, model, {0.5, 0.5}, batch, seeds, zeros);
    const auto again = reinforce_gradient(params, model, {0.5, 0.5}, batch, seeds, first.costs);
    CHECK(max_abs(first.grad) > 0.0);
    CHECK(max_abs(again.grad) == 0.0);
  }
  SUBCASE("duplicated batch leaves the gradient unchanged") {
    const std::vector<double> base{1.0, 2.0, 1.5, 0.5};
    const auto g1 = reinforce_gradient(params, model, {0.3, 0.7}, batch, seeds, base);
    std::vector<vrptw::Instance> twice(batch);
    twice.insert(twice.end(), batch.begin(), batch.end());
    std::vector<std::uint64_t> seeds2(seeds);
    seeds2.insert(seeds2.end(), seeds.begin(), seeds.end());
    std::vector<double> base2(base);
    base2.insert(base2.end(), base.begin(), base.end());
    const auto g2 = reinforce_gradient(params, model, {0.3, 0.7}, twice, seeds2, base2);
    const double scale = max_abs(g1.grad);
    double diff = 0.0;
    for (std::size_t s = 0; s < g1.grad.size(); ++s)
      for (std::size_t k = 0; k < g1.grad[s].values.size(); ++k)
        diff = std::max(diff, std::abs(g1.grad[s].values[k] - g2.grad[s].values[k]));
    CHECK(diff <= 1e-9 * scale);
  }
  SUBCASE("non-finite advantage") {
    const std::vector<double> bad{0.0, NAN, 0.0, 0.0};
    CHECK_THROWS_AS(reinforce_gradient(params, model, {0.5, 0.5}, batch, seeds, bad), NumericError);
  }
}

TEST_CASE("single-instance gradient equals advantage times grad log p") {
  const auto model = policy::desk_model_config();
  const auto params = policy::init_params(model, 9);
  const std::vector<vrptw::Instance> batch{two_customers()};
  const std::vector<std::uint64_t> seeds{17};
  const std::vector<double> base{0.25};
  const WeightVector w{0.5, 0.5};
  const auto g = reinforce_gradient(params, model, w, batch, seeds, base);
  const double advantage = g.costs[0] - base[0];
  REQUIRE(advantage != 0.0);

  // Recover the sampled action sequence and differentiate the surrogate with it fixed.
  ad::Tape probe(false);
  const vrptw::Instance* one[] = {&batch[0]};
  auto enc = policy::encode_nodes(probe, params, model, one, ad::NormMode::Train);
  policy::EpisodeDecoder dec(probe, params, model, batch[0], enc.instance(0));
  std::mt19937_64 rng(seeds[0]);
  const auto sampled = policy::rollout(dec, batch[0], policy::DecodeMode::Sample, &rng);
  REQUIRE(sampled.decisions > 0);

  const ad::ScalarGraph surrogate = [&](ad::Tape& tape, const ad::ParamStore& p) {
    ad::Tensor h = policy::encode_nodes(tape, p, model, batch[0], ad::NormMode::Train);
    policy::EpisodeDecoder d(tape, p, model, batch[0], h);
    return ad::scale(policy::replay(d, batch[0], sampled.actions).log_prob_tensor, advantage);
  };
  ad::GradCheckOptions opt;
  opt.max_coords = 300;
  const auto fd = ad::finite_difference_check(surrogate, params, opt);
  INFO(fd.worst_param, " ", fd.worst_index, " analytic ", fd.worst_analytic, " numeric ", fd.worst_numeric);
  CHECK(fd.max_rel_error < 1e-4);

  ad::Tape tape(true);
  const ad::Tensor loss = surrogate(tape, params);
  const auto expect = tape.backward(loss, params);
  double diff = 0.0;
  for (std::size_t s = 0; s < expect.size(); ++s)
    for (std::size_t k = 0; k < expect[s].values.size(); ++k)
      diff = std::max(diff, std::abs(expect[s].values[k] - g.grad[s].values[k]));
  CHECK(diff <= 1e-12 * std::max(1.0, max_abs(expect)));
}

TEST_CASE("rollout baseline replacement") {
  const auto model = policy::desk_model_config();
  std::vector<vrptw::Instance> eval;
  for (int i = 0; i < 8; ++i) eval.push_back(vrptw::generate_instance(10, 300 + i, vrptw::SizeClass::N50));
  const auto a = policy::init_params(model, 1);
  const auto b = policy::init_params(model, 2);
  const WeightVector w{1.0, 0.0};

  ad::ParamStore base = a;
  auto same = update_rollout_baseline(a, base, model, w, eval);
  CHECK_FALSE(same.replaced);

  const double ca = mean_greedy_cost(a, model, w, eval);
  const double cb = mean_greedy_cost(b, model, w, eval);
  REQUIRE(ca != cb);
  const auto& better = ca < cb ? a : b;
  const auto& worse = ca < cb ? b : a;
  ad::ParamStore baseline = better;
  CHECK_FALSE(update_rollout_baseline(worse, baseline, model, w, eval).replaced);
  CHECK(baseline.flatten() == better.flatten());
  baseline = worse;
  const auto d = update_rollout_baseline(better, baseline, model, w, eval);
  CHECK(d.replaced);
  CHECK(baseline.flatten() == better.flatten());
  CHECK(greedy_costs(baseline, model, w, eval) == greedy_costs(better, model, w, eval));

  for (double c : {1e-3, 0.5, 7.0, 1e4})
    for (double thr : {0.0, 0.01, 0.2}) {
      CHECK(baseline_should_replace(ca, cb, thr) == baseline_should_replace(c * ca, c * cb, thr));
      CHECK(baseline_should_replace(cb, ca, thr) == baseline_should_replace(c * cb, c * ca, thr));
    }
}

TEST_CASE("train_all transfer chain, outputs and determinism") {
  TrainConfig tc = desk_train_config();
  tc.subproblems = 3;
  tc.customers = 5;
  tc.batch_size = 4;
  tc.batches_per_epoch = 2;
  tc.transfer_batches_per_epoch = 1;
  tc.first_epochs = 2;
  tc.transfer_epochs = 1;
  tc.baseline_eval_size = 4;
  tc.seed = 3;
  const auto model = policy::desk_model_config();
  const auto dir = std::filesystem::temp_directory_path() / "movrp_train_test";
  std::filesystem::remove_all(dir);

  std::size_t rows = 0;
  TrainHooks hooks;
  hooks.on_batch = [&](const TrainLogRow&) { ++rows; };
  const auto pop = train_all(tc, model, dir / "a", hooks);
  REQUIRE(pop.size() == 3);
  CHECK(rows == 2 * 2 + 1 * 1 + 1 * 1);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(pop[i].index == i + 1);
    CHECK(pop[i].weight == make_weight_vectors(3)[i]);
    CHECK(std::filesystem::exists(dir / "a" / checkpoint_name(i + 1)));
    CHECK(std::isfinite(pop[i].final_eval_cost));
  }
  CHECK(pop[1].initial_params.flatten() == pop[0].params.flatten());
  CHECK(pop[2].initial_params.flatten() == pop[1].params.flatten());
  CHECK(pop[0].params.flatten() != pop[0].initial_params.flatten());
  const auto ck = policy::load_checkpoint(dir / "a" / checkpoint_name(2));
  CHECK(ck.params.flatten() == pop[1].params.flatten());
  CHECK(ck.meta.at("weight")[0].get<double>() == doctest::Approx(1.0 / 3.0));

  train_all(tc, model, dir / "b");
  CHECK(slurp(dir / "a" / "train_log.csv") == slurp(dir / "b" / "train_log.csv"));
  for (std::size_t i = 1; i <= 3; ++i) {
    std::filesystem::path bin = checkpoint_name(i);
    bin.replace_extension(".bin");
    CHECK(slurp(dir / "a" / bin) == slurp(dir / "b" / bin));
    CHECK(slurp(dir / "a" / checkpoint_name(i)) == slurp(dir / "b" / checkpoint_name(i)));
  }

  tc.subproblems = 1;
  CHECK(train_all(tc, model).size() == 1);
  std::filesystem::remove_all(dir);
}
