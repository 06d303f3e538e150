#include <doctest.h>

#include <random>
#include <stdexcept>

#include "dprof/image_io.hpp"
#include "dprof/weights.hpp"
#include "oracles.hpp"

using namespace dprof;

TEST_CASE("weight function values") {
  const WeightSpec w1{WeightW1{500, 5000}, 0};
  CHECK(eval_weight_function(w1, 0.0) == 250.0);
  CHECK(eval_weight_function(w1, 0.05) == 250.0);
  CHECK(eval_weight_function(w1, 0.075) == doctest::Approx(125.0));
  CHECK(eval_weight_function(w1, 0.1) == 0.0);
  CHECK(eval_weight_function(w1, 1.0) == 0.0);
  CHECK(w1.peak() == 250.0);
  CHECK(w1.cutoff() == 0.1);

  const WeightSpec w2{WeightW2{60, 900}, 0};
  CHECK(eval_weight_function(w2, 0.0) == 60.0);
  CHECK(eval_weight_function(w2, 60.0 / 900.0) == 0.0);

  const WeightSpec w3{WeightW3{10, 0.05}, 0};
  CHECK(eval_weight_function(w3, 0.05) == 10.0);
  CHECK(eval_weight_function(w3, 0.0501) == 0.0);

  CHECK_THROWS_AS(eval_weight_function(w1, -0.1), std::invalid_argument);
}

TEST_CASE("weight spec validation") {
  CHECK_THROWS_AS((WeightSpec{WeightW1{0, 1}, 0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((WeightSpec{WeightW2{1, -1}, 0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((WeightSpec{WeightW3{1, 0}, 0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((WeightSpec{WeightW1{}, -1}.validate()), std::invalid_argument);
  CHECK_NOTHROW(WeightSpec{}.validate());
}

TEST_CASE("rescaled specs") {
  const WeightSpec w1{WeightW1{500, 5000}, 2};
  const WeightSpec same = rescale_weight_spec(w1, 1.0, 1.0);
  CHECK(std::get<WeightW1>(same.family).a == 500.0);
  CHECK(std::get<WeightW1>(same.family).b == 5000.0);
  CHECK(same.mollify_radius == 2.0);

  const WeightSpec w3 = rescale_weight_spec({WeightW3{1, 0.1}, 0}, 2.0, 4.0);
  CHECK(std::get<WeightW3>(w3.family).height == 2.0);
  CHECK(std::get<WeightW3>(w3.family).cutoff == doctest::Approx(0.025));

  const WeightSpec base{WeightW2{3, 7}, 0};
  const WeightSpec w2 = rescale_weight_spec(base, 2.0, 3.0);
  CHECK(std::get<WeightW2>(w2.family).a == 6.0);
  CHECK(std::get<WeightW2>(w2.family).b == 42.0);
  CHECK(w2.cutoff() == doctest::Approx(base.cutoff() / 3.0));
  for (int k = 0; k <= 200; ++k) {
    const double x = k * 0.01;
    CHECK(eval_weight_function(w2, x) == doctest::Approx(2.0 * eval_weight_function(base, 3.0 * x)));
  }
  CHECK_THROWS_AS(rescale_weight_spec(base, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("constant datum gives the peak weight everywhere") {
  const ScalarField g(12, 12, 0.4);
  const WeightSpec spec{WeightW1{500, 5000}, 2};
  const AdaptiveWeight a = build_weight_adaptive(g, 0.24, spec, SolverConfig{});
  CHECK(distance(a.u_rof, g) <= 1e-14);
  for (double v : a.weight.weight.values()) CHECK(v == 250.0);
  const WeightResult n = build_weight_noisy(g, spec);
  for (double v : n.weight.values()) CHECK(v == 250.0);
}

TEST_CASE("radius zero applies the weight to the unsmoothed gradient") {
  const ScalarField g = oracle::random_field(9, 9, 3);
  const WeightSpec spec{WeightW2{1, 4}, 0};
  const AdaptiveWeight a = build_weight_adaptive(g, 0.1, spec, SolverConfig{});
  CHECK(a.weight.gradient_magnitude == gradient_magnitude(a.u_rof));
}

TEST_CASE("noisy pipeline equals the adaptive tail without the pre-solve") {
  const ScalarField g = oracle::random_field(10, 8, 4);
  const WeightSpec spec{WeightW1{60, 900}, 1.5};
  const WeightResult n = build_weight_noisy(g, spec);
  const WeightResult t = weight_from_field(g, spec);
  CHECK(n.weight == t.weight);
  CHECK(n.gradient_magnitude == t.gradient_magnitude);
}

TEST_CASE("weights are bounded, nonnegative and vanish beyond the cutoff") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 0; c < 20; ++c) {
    const ScalarField g = oracle::random_field(16, 16, 400 + c);
    WeightSpec spec;
    switch (c % 3) {
      case 0: spec.family = WeightW1{1 + 100 * unit(rng), 10 + 1000 * unit(rng)}; break;
      case 1: spec.family = WeightW2{1 + 100 * unit(rng), 10 + 1000 * unit(rng)}; break;
      default: spec.family = WeightW3{1 + 10 * unit(rng), unit(rng)}; break;
    }
    spec.mollify_radius = 3.0 * unit(rng);
    const WeightResult r = build_weight_noisy(g, spec);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double w = r.weight[k];
      CHECK(w >= 0.0);
      CHECK(w <= spec.peak());
      if (r.gradient_magnitude[k] > spec.cutoff()) CHECK(w == 0.0);
      for (std::size_t l = 0; l < g.size(); ++l) {
        if (r.gradient_magnitude[l] > r.gradient_magnitude[k]) CHECK(r.weight[l] <= w);
      }
    }
  }
}

TEST_CASE("weight vanishes at the jump of a step") {
  // Step of height 0.5. A radius-1 disk spreads it over three samples, so the
  // smoothed slope stays above the cutoff 0.1.
  ScalarField g = make_synthetic(SyntheticKind::kStep, 64);
  for (double& v : g.values()) v *= 0.5;
  const WeightSpec spec{WeightW1{500, 5000}, 1};
  const AdaptiveWeight a = build_weight_adaptive(g, 0.24, spec, SolverConfig{});
  std::size_t argmax = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (a.weight.gradient_magnitude[k] > a.weight.gradient_magnitude[argmax]) argmax = k;
  }
  CHECK(a.weight.weight[argmax] == 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (a.weight.gradient_magnitude[k] >= 0.1) CHECK(a.weight.weight[k] == 0.0);
  }
  CHECK(a.weight.weight[0] == 250.0);
  CHECK(a.weight.weight[63] == 250.0);
}

TEST_CASE("noise shrinks the support of the noisy-pipeline weight") {
  const ScalarField original = make_synthetic(SyntheticKind::kSaw, 512);
  const ScalarField g = add_gaussian_noise(original, {0.05, 1});
  const WeightSpec spec{WeightW1{500, 5000}, 2};
  const AdaptiveWeight a = build_weight_adaptive(g, 0.24, spec, SolverConfig{});
  const WeightResult n = build_weight_noisy(g, spec);
  std::size_t support_a = 0;
  std::size_t support_n = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    support_a += a.weight.weight[k] > 0.0;
    support_n += n.weight[k] > 0.0;
  }
  CHECK(support_n < support_a);
}

TEST_CASE("mollify order flag") {
  const ScalarField g = oracle::random_field(12, 12, 6);
  const WeightSpec spec{WeightW2{1, 2}, 2};
  const WeightResult first = weight_from_field(g, spec, MollifyOrder::kMollifyThenDifferentiate);
  const WeightResult second = weight_from_field(g, spec, MollifyOrder::kDifferentiateThenMollify);
  CHECK(first.gradient_magnitude == gradient_magnitude(mollify(g, 2)));
  CHECK(second.gradient_magnitude == mollify(gradient_magnitude(g), 2));
}
